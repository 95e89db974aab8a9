#include <doctest.h>

#include <cmath>

#include "jpais/channel.hpp"

using namespace jpais;

namespace {
SystemConfig cfg_with(int users, int relays, int paths, double doppler) {
    SystemConfig cfg;
    cfg.users = users;
    cfg.relays = relays;
    cfg.paths = paths;
    cfg.gain = 8;
    cfg.doppler = doppler;
    return cfg;
}
}  // namespace

TEST_CASE("static draws are unit energy per link") {
    Rng rng = make_stream(21, {0});
    const auto cfg = cfg_with(3, 2, 3, 0.0);
    const auto ch = draw_channels(cfg, rng);
    for (int k = 0; k < 3; ++k) {
        CHECK(linalg::norm2(ch.gains.h_sd[k]) == doctest::Approx(1.0).epsilon(1e-12));
        for (int j = 0; j < 2; ++j) {
            CHECK(linalg::norm2(ch.gains.h_sr[k][j]) == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(linalg::norm2(ch.gains.h_rd[k][j]) == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
    const auto single = draw_channels(cfg_with(1, 0, 1, 0.0), rng);
    CHECK(std::abs(single.gains.h_sd[0][0]) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("same seed reproduces the channel set") {
    const auto cfg = cfg_with(2, 1, 3, 0.0);
    Rng r1 = make_stream(21, {1});
    Rng r2 = make_stream(21, {1});
    const auto a = draw_channels(cfg, r1);
    const auto b = draw_channels(cfg, r2);
    for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 3; ++l) CHECK(a.gains.h_sd[k][l] == b.gains.h_sd[k][l]);
}

TEST_CASE("zero doppler leaves advance a no-op") {
    Rng rng = make_stream(21, {2});
    const auto cfg = cfg_with(1, 1, 2, 0.0);
    auto ch = draw_channels(cfg, rng);
    const auto before = ch.gains.h_sd[0];
    advance(ch);
    advance(ch);
    for (int l = 0; l < 2; ++l) CHECK(ch.gains.h_sd[0][l] == before[l]);
}

TEST_CASE("fading autocorrelation follows the zeroth Bessel curve") {
    // Time-average over one long realization, several taps pooled.
    const double fdt = 0.01;
    Rng rng = make_stream(21, {3});
    const int samples = 100000;
    const int lag_max = 50;
    const int n_links = 4;
    std::vector<std::vector<cx>> series(n_links);
    for (int lk = 0; lk < n_links; ++lk) {
        FadingLink link(1, fdt, rng);
        series[lk].resize(samples);
        for (int t = 0; t < samples; ++t) series[lk][t] = link.taps_at(double(t))[0];
    }
    for (int lag : {1, 10, 25, lag_max}) {
        cx acc{};
        double power = 0.0;
        for (int lk = 0; lk < n_links; ++lk)
            for (int t = 0; t + lag < samples; ++t) {
                acc += series[lk][t + lag] * std::conj(series[lk][t]);
                power += std::norm(series[lk][t]);
            }
        const double rho = std::real(acc) / power;
        const double expect = std::cyl_bessel_j(0.0, 2.0 * M_PI * fdt * lag);
        CHECK(std::abs(rho - expect) < 0.05);
    }
}

TEST_CASE("lag-10 autocorrelation near 0.9037 at fdt 0.01") {
    Rng rng = make_stream(21, {4});
    FadingLink link(1, 0.01, rng);
    const int samples = 100000;
    std::vector<cx> s(samples);
    for (int t = 0; t < samples; ++t) s[t] = link.taps_at(double(t))[0];
    cx acc{};
    double power = 0.0;
    for (int t = 0; t + 10 < samples; ++t) {
        acc += s[t + 10] * std::conj(s[t]);
        power += std::norm(s[t]);
    }
    const double rho = std::real(acc) / power;
    CHECK(std::abs(rho - 0.9037) < 0.05 * 0.9037);
}

TEST_CASE("fading keeps unit average link energy") {
    Rng rng = make_stream(21, {5});
    const int samples = 60000;
    double acc = 0.0;
    const int n_links = 5;
    for (int lk = 0; lk < n_links; ++lk) {
        FadingLink link(3, 0.005, rng);
        for (int t = 0; t < samples / n_links; ++t) {
            const CVector h = link.taps_at(double(t));
            for (const auto& tap : h) acc += std::norm(tap);
        }
    }
    CHECK(acc / (samples / n_links * n_links) == doctest::Approx(1.0).epsilon(0.03));
}

TEST_CASE("packed channel matrices reproduce the per-link structure") {
    Rng rng = make_stream(21, {6});
    const auto cfg = cfg_with(2, 1, 2, 0.0);
    const auto ch = draw_channels(cfg, rng);
    const CMatrix ht = pack_HT(ch.gains);
    REQUIRE(ht.rows() == 2 * 2 * 2);
    REQUIRE(ht.cols() == 2 * 2);
    for (int k = 0; k < 2; ++k) {
        const CMatrix hk = pack_Hk(ch.gains, k);
        for (int r = 0; r < hk.rows(); ++r)
            for (int c = 0; c < hk.cols(); ++c)
                CHECK(ht(k * 4 + r, k * 2 + c) == hk(r, c));
        // column j holds exactly that phase's taps
        for (int j = 0; j < 2; ++j)
            for (int l = 0; l < 2; ++l) {
                CHECK(hk(j * 2 + l, j) == ch.gains.dest_taps(k, j)[l]);
                CHECK(hk(j * 2 + l, 1 - j) == cx{});
            }
    }
    // zero channel gives a zero packed matrix
    LinkGains zero = ch.gains;
    for (auto& h : zero.h_sd) h.assign(h.size(), cx{});
    for (auto& u : zero.h_rd)
        for (auto& h : u) h.assign(h.size(), cx{});
    CHECK(linalg::norm_fro(pack_HT(zero)) == 0.0);
}

TEST_CASE("single user single hop packs as one column") {
    Rng rng = make_stream(21, {7});
    const auto cfg = cfg_with(1, 0, 3, 0.0);
    const auto ch = draw_channels(cfg, rng);
    const CMatrix ht = pack_HT(ch.gains);
    REQUIRE(ht.rows() == 3);
    REQUIRE(ht.cols() == 1);
    for (int l = 0; l < 3; ++l) CHECK(ht(l, 0) == ch.gains.h_sd[0][l]);
}
