#include <doctest.h>

#include <cmath>

#include "jpais/metrics.hpp"
#include "jpais/rng.hpp"

using namespace jpais;
using namespace jpais::metrics;

TEST_CASE("ber counting") {
    std::vector<int> a{0, 1, 1, 0, 1}, b{0, 1, 1, 0, 1};
    CHECK(count_ber(a, b) == 0.0);
    std::vector<int> c{1, 0, 0, 1, 0};
    CHECK(count_ber(a, c) == 1.0);

    std::vector<int> tx(1000, 0), rx(1000, 0);
    rx[3] = rx[500] = rx[999] = 1;
    CHECK(count_ber(tx, rx) == doctest::Approx(0.003));
    CHECK(count_ber(tx, rx, 4) == doctest::Approx(2.0 / 996.0));
    CHECK_THROWS_AS(count_ber(tx, std::vector<int>(999, 0)), std::invalid_argument);
}

TEST_CASE("normalized throughput endpoints and spot value") {
    CHECK(normalized_throughput(0.0, 1.0, 1500, 4) == 1.0);
    CHECK(normalized_throughput(1.0, 1.0, 1500, 4) == 0.0);
    const double nt = normalized_throughput(1e-4, 1.0, 1500, 4);
    CHECK(std::abs(nt - std::pow(1.0 - 1e-4, 3000.0)) < 1e-12);
    CHECK(nt == doctest::Approx(0.7408).epsilon(1e-3));
    // monotone decreasing in BER
    double prev = 1.0;
    for (double ber : {1e-5, 1e-4, 1e-3, 1e-2, 1e-1}) {
        const double v = normalized_throughput(ber, 1.0, 1500, 4);
        CHECK(v < prev);
        prev = v;
    }
}

TEST_CASE("mutual information formula") {
    CHECK(mutual_information(0.0, 1) == 0.0);
    CHECK(mutual_information(1.0, 1) == doctest::Approx(1.0));
    CHECK(mutual_information(3.0, 2) == doctest::Approx(1.0));
}

TEST_CASE("empirical sinr separates signal from residue") {
    Rng rng = make_stream(91, {0});
    const double true_sinr = 8.0;
    const double noise_std = std::sqrt(1.0 / true_sinr);
    std::vector<cx> outputs, symbols;
    for (int i = 0; i < 200000; ++i) {
        const cx b = (i & 1) ? cx{M_SQRT1_2, M_SQRT1_2} : cx{-M_SQRT1_2, -M_SQRT1_2};
        symbols.push_back(b);
        outputs.push_back(b + noise_std * complex_gaussian(rng));
    }
    CHECK(empirical_sinr(outputs, symbols) == doctest::Approx(true_sinr).epsilon(0.05));
}

TEST_CASE("complexity polynomials match hand-expanded spot values") {
    SystemConfig cfg;
    cfg.users = 8;
    cfg.gain = 16;
    cfg.paths = 3;
    cfg.relays = 2;
    // joint filter: D = (n_r+1)M = 54, adds 2D^2+2KD-D+1, mults 3D^2+2KD+3D+1
    const auto fj = filter_cost_joint(cfg);
    CHECK(fj.adds == 2 * 54 * 54 + 2 * 8 * 54 - 54 + 1);
    CHECK(fj.mults == 3 * 54 * 54 + 2 * 8 * 54 + 3 * 54 + 1);
    // stacked allocation: S = K(n_r+1) = 24
    const auto ag = alloc_cost_global(cfg);
    CHECK(ag.adds == 3 * 8 * 24 + 8 * 3 * 2 + 8 * 18 * 3 + 8 * 24 + 6 * 24 * 24 + 3 * 8 * 3 + 2 + 2);
    CHECK(ag.mults == 8 * 24 + 4 * 24 * 24 + 11 * 24 * 24 - 24 * 24 + 8 * 18 * 3 * 3 + 2);
    // joint channel estimator: SL = 72
    const auto cg = channel_cost_global(cfg);
    CHECK(cg.adds == 5 * 72 * 72 + 5 * 72 + 3);
    CHECK(cg.mults == 5 * 24 * 24 + 6 * 72 + 1);
    // per-user rows at a second config
    SystemConfig c2;
    c2.users = 4;
    c2.gain = 8;
    c2.paths = 2;
    c2.relays = 1;  // M = 9, D = 18, np = 2, npL = 4
    const auto fu = filter_cost_user(c2);
    CHECK(fu.adds == 2 * 18 * 18 + 18 + 1);
    CHECK(fu.mults == 3 * 18 * 18 + 5 * 18 + 1);
    const auto au = alloc_cost_user(c2);
    CHECK(au.adds == 2 * 4 + 3 * 2 + 9 * 2 * 2 + 2 * 2 - 3);
    CHECK(au.mults == 3 * 4 + 7 * 2 + 9 * 2 * 2 + 2 * 2 + 3);
    const auto cu = channel_cost_user(c2);
    CHECK(cu.adds == 2 * 16 + 5 * 9 * 4 - 5 * 2 + 3);
    CHECK(cu.mults == 6 * 16 + 9 * 4 + 4 * 2 + 1);
    // third config: relay-free joint filter row
    SystemConfig c3;
    c3.users = 8;
    c3.gain = 16;
    c3.paths = 3;
    c3.relays = 0;  // M = 18
    const auto f0 = complexity_count(Algorithm::NcisUp, cfg);  // forces n_r = 0
    CHECK(f0.mults == 3 * 18 * 18 + 2 * 8 * 18 + 3 * 18 + 1);
    CHECK(f0.mults == complexity_count(Algorithm::CisUp, c3).mults);
}

TEST_CASE("counts are positive and grow with relays") {
    SystemConfig cfg;
    cfg.users = 8;
    cfg.gain = 16;
    cfg.paths = 3;
    for (auto alg : {Algorithm::CisUp, Algorithm::CisDown, Algorithm::JpaisGpc,
                     Algorithm::JpaisIpc}) {
        double prev_mults = 0.0, prev_adds = 0.0;
        for (int nr = 0; nr <= 4; ++nr) {
            cfg.relays = nr;
            const auto ops = complexity_count(alg, cfg);
            CHECK(ops.adds > prev_adds);
            CHECK(ops.mults > prev_mults);
            prev_adds = ops.adds;
            prev_mults = ops.mults;
        }
    }
}

TEST_CASE("algorithm recursion sets follow the summary table") {
    SystemConfig cfg;
    cfg.users = 8;
    cfg.gain = 16;
    cfg.paths = 3;
    cfg.relays = 2;
    const auto gpc = complexity_count(Algorithm::JpaisGpc, cfg);
    const auto expect_gpc = [&] {
        auto c = filter_cost_joint(cfg);
        c += alloc_cost_global(cfg);
        c += channel_cost_global(cfg);
        return c;
    }();
    CHECK(gpc.mults == expect_gpc.mults);
    CHECK(gpc.adds == expect_gpc.adds);
    CHECK(complexity_count(Algorithm::CisUp, cfg).mults == filter_cost_joint(cfg).mults);
    CHECK(complexity_count(Algorithm::CisDown, cfg).mults == filter_cost_user(cfg).mults);
    const auto ipc = complexity_count(Algorithm::JpaisIpc, cfg);
    CHECK(ipc.mults ==
          filter_cost_user(cfg).mults + alloc_cost_user(cfg).mults + channel_cost_user(cfg).mults);
}

TEST_CASE("csv header and row round-trip formatting") {
    RunMetrics m;
    m.algorithm = "jpais-gpc";
    m.mode = "mmse";
    m.users = 8;
    m.relays = 2;
    m.snr_db = 15.0;
    m.doppler = 1e-4;
    m.feedback_error = 0.001;
    m.runs = 200;
    m.seed = 42;
    m.ber = 0.00125;
    m.ber_ci95 = 0.0002;
    m.mi = 1.2;
    m.mi_unscaled = 3.6;
    m.nt = 0.31;
    m.adds = 1000;
    m.mults = 2000;
    const std::string row = csv_row(m);
    CHECK(row == "jpais-gpc,mmse,8,2,15,0.0001,0.001,200,42,0.00125,0.0002,1.2,3.6,0.31,1000,2000");
    CHECK(csv_header().substr(0, 9) == "algorithm");
}

TEST_CASE("mean and confidence interval") {
    std::vector<double> v{1.0, 2.0, 3.0, 4.0};
    double mean, ci;
    mean_ci95(v, mean, ci);
    CHECK(mean == doctest::Approx(2.5));
    const double sd = std::sqrt((2.25 + 0.25 + 0.25 + 2.25) / 3.0);
    CHECK(ci == doctest::Approx(1.96 * sd / 2.0));
}
