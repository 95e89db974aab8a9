#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "jpais/harness.hpp"
#include "jpais/svgplot.hpp"

using namespace jpais;
using namespace jpais::harness;

namespace {
ExperimentSpec tiny_spec() {
    ExperimentSpec spec;
    spec.base.gain = 8;
    spec.base.paths = 2;
    spec.base.packet_symbols = 80;
    spec.base.training_symbols = 20;
    spec.snr_db = {12.0};
    spec.users = {2};
    spec.relays = {1};
    spec.runs = 3;
    spec.seed = 5;
    return spec;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}
}  // namespace

TEST_CASE("unknown algorithm names are rejected before any simulation") {
    CHECK_THROWS_AS(metrics::algorithm_from_name("bogus"), std::invalid_argument);
    ExperimentSpec spec = tiny_spec();
    spec.runs = 0;
    CHECK_THROWS_AS(run_experiment(spec), std::invalid_argument);
    spec = tiny_spec();
    spec.snr_db.clear();
    CHECK_THROWS_AS(run_experiment(spec), std::invalid_argument);
}

TEST_CASE("noiseless single-user rows report zero errors") {
    ExperimentSpec spec = tiny_spec();
    spec.snr_db = {300.0};  // noiseless convention
    spec.users = {1};
    spec.runs = 1;
    spec.algorithms = {Algorithm::JpaisGpc, Algorithm::CisUp, Algorithm::NcisUp};
    const auto rows = run_experiment(spec);
    REQUIRE(rows.size() == 3);
    for (const auto& r : rows) {
        CHECK(r.ber == 0.0);
        CHECK(r.nt == doctest::Approx(1.0 / (r.relays + 1)));
    }
}

TEST_CASE("same seed gives byte-identical CSV output") {
    ExperimentSpec spec = tiny_spec();
    spec.out_csv = "harness_a.csv";
    run_experiment(spec);
    spec.out_csv = "harness_b.csv";
    run_experiment(spec);
    CHECK(slurp("harness_a.csv") == slurp("harness_b.csv"));
    std::remove("harness_a.csv");
    std::remove("harness_b.csv");
}

TEST_CASE("threading does not change the results") {
    ExperimentSpec spec = tiny_spec();
    spec.algorithms = {Algorithm::JpaisGpc, Algorithm::CisUp};
    const auto a = run_experiment(spec);
    spec.threads = 2;
    const auto b = run_experiment(spec);
    REQUIRE(a.size() == b.size());
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].ber == b[i].ber);
        CHECK(a[i].mi == b[i].mi);
    }
}

TEST_CASE("csv round trip preserves rows") {
    ExperimentSpec spec = tiny_spec();
    spec.out_csv = "harness_rt.csv";
    const auto rows = run_experiment(spec);
    const auto back = read_csv("harness_rt.csv");
    REQUIRE(rows.size() == back.size());
    for (size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].algorithm == back[i].algorithm);
        CHECK(rows[i].ber == doctest::Approx(back[i].ber));
    }
    std::remove("harness_rt.csv");
}

TEST_CASE("presets cover the figure suite") {
    for (const auto& name : preset_names()) {
        const auto spec = preset(name);
        CHECK_NOTHROW(spec.validate());
    }
    CHECK_THROWS_AS(preset("nope"), std::invalid_argument);
}

TEST_CASE("config files override scenario fields") {
    const char* path = "harness_cfg.txt";
    {
        std::ofstream out(path);
        out << "# comment\nusers = 5\ngain=32\nridge = 0.05\n";
    }
    SystemConfig cfg;
    apply_config(cfg, parse_config_file(path));
    CHECK(cfg.users == 5);
    CHECK(cfg.gain == 32);
    CHECK(cfg.ridge == doctest::Approx(0.05));
    std::remove(path);
}

TEST_CASE("plots render with decade gridlines and reject bad input") {
    ExperimentSpec spec = tiny_spec();
    spec.snr_db = {6.0, 12.0};
    spec.algorithms = {Algorithm::JpaisGpc, Algorithm::CisUp};
    const auto rows = run_experiment(spec);
    const std::string svg = plot::render_svg(rows, plot::PlotKind::BerSnr);
    CHECK(svg.find("<svg") != std::string::npos);
    CHECK(svg.find("decade") != std::string::npos);   // log-axis gridlines
    CHECK(svg.find("polyline") != std::string::npos);
    CHECK_THROWS(plot::render_svg({}, plot::PlotKind::BerSnr));

    // single point still renders a marker
    const std::vector<metrics::RunMetrics> one{rows[0]};
    const std::string single = plot::render_svg(one, plot::PlotKind::BerSnr);
    CHECK(single.find("circle") != std::string::npos);
}

TEST_CASE("missing csv columns are named in the error") {
    const char* path = "harness_bad.csv";
    {
        std::ofstream out(path);
        out << "algorithm,mode\njpais-gpc,mmse\n";
    }
    try {
        read_csv(path);
        FAIL("expected error");
    } catch (const std::exception& e) {
        CHECK(std::string(e.what()).find("users") != std::string::npos);
    }
    std::remove(path);
}

TEST_CASE("feedback experiment rows carry the error grid") {
    ExperimentSpec spec = tiny_spec();
    spec.feedback_error = {0.0, 0.5};
    spec.algorithms = {Algorithm::JpaisGpc};
    const auto rows = run_feedback_experiment(spec);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].feedback_error == 0.0);
    CHECK(rows[1].feedback_error == 0.5);
}
