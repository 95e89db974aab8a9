#include <doctest.h>

#include <cmath>

#include "jpais/adaptive_gpc.hpp"
#include "jpais/metrics.hpp"
#include "jpais/mmse.hpp"

using namespace jpais;
using namespace jpais::adaptive;

namespace {
SystemConfig make_cfg(int users, int gain, int paths, int relays, double noise, int packet,
                      int train) {
    SystemConfig cfg;
    cfg.users = users;
    cfg.gain = gain;
    cfg.paths = paths;
    cfg.relays = relays;
    cfg.noise_var = noise;
    cfg.packet_symbols = packet;
    cfg.training_symbols = train;
    return cfg;
}
}  // namespace

TEST_CASE("constraint holds after every symbol") {
    Rng rng = make_stream(61, {0});
    auto cfg = make_cfg(2, 8, 2, 1, 0.2, 120, 40);
    const auto sigs = build_signatures(cfg, rng);
    auto ch = draw_channels(cfg, rng);
    const UserPowers powers = draw_user_powers(cfg, rng);
    PacketTrace trace;
    gpc_run_packet(cfg, sigs, ch, powers, rng, AllocationRole::Adaptive,
                   ChannelEstimateMode::PerColumn, &trace);
    REQUIRE(int(trace.alloc.size()) == cfg.packet_symbols);
    const double p_total = powers.total();
    for (const auto& a : trace.alloc) {
        double n2 = 0.0;
        for (const auto& e : a) n2 += std::norm(e);
        CHECK(std::abs(n2 - p_total) <= 1e-12 * p_total);
    }
}

TEST_CASE("allocation state has the advertised length") {
    Rng rng = make_stream(61, {1});
    auto cfg = make_cfg(8, 16, 3, 2, 0.1, 30, 10);
    const auto sigs = build_signatures(cfg, rng);
    const UserPowers powers = draw_user_powers(cfg, rng);
    const auto st = make_gpc_state(cfg, sigs, powers);
    CHECK(int(st.alloc.alloc.size()) == 24);  // K (n_r + 1)
    CHECK(st.alloc.r_a.rows() == 24);
}

TEST_CASE("noiseless static single-user packet detects perfectly after training") {
    Rng rng = make_stream(61, {2});
    auto cfg = make_cfg(1, 8, 2, 1, 0.0, 300, 60);
    cfg.interferer_std_db = 0.0;
    const auto sigs = build_signatures(cfg, rng);
    auto ch = draw_channels(cfg, rng);
    const UserPowers powers{{1.0}};
    const auto res = gpc_run_packet(cfg, sigs, ch, powers, rng);
    CHECK(metrics::count_ber(res.sent_bits[0], res.bits[0]) == 0.0);
}

TEST_CASE("channel estimator recovers a noiseless static channel") {
    Rng rng = make_stream(61, {3});
    for (const auto mode : {ChannelEstimateMode::PerColumn, ChannelEstimateMode::MaskedFull}) {
        auto cfg = make_cfg(1, 8, 1, 0, 0.0, 60, 60);
        cfg.interferer_std_db = 0.0;
        const auto sigs = build_signatures(cfg, rng);
        auto ch = draw_channels(cfg, rng);
        const UserPowers powers{{1.0}};
        const PowerAllocation alloc = equal_power_allocation(cfg, powers);
        const RelayBank bank(cfg, sigs, ch.gains, alloc);
        PacketSimulator sim(cfg, sigs, ch, &bank, alloc, rng);

        GpcState st = make_gpc_state(cfg, sigs, powers, mode);
        for (int i = 0; i < 55; ++i) {
            const auto& rx = sim.reception(i);
            gpc_channel_update(st, cfg, sigs, rx.r, sim.desired_symbols(i));
        }
        for (int l = 0; l < cfg.paths; ++l)
            CHECK(std::abs(st.channel.taps(0, 0)[l] - ch.gains.h_sd[0][l]) < 1e-3);
    }
}

TEST_CASE("per-stream estimates recover a cooperative noiseless channel") {
    Rng rng = make_stream(61, {4});
    auto cfg = make_cfg(1, 8, 3, 2, 0.0, 80, 80);
    cfg.interferer_std_db = 0.0;
    const auto sigs = build_signatures(cfg, rng);
    auto ch = draw_channels(cfg, rng);
    const UserPowers powers{{1.0}};
    const PowerAllocation alloc = equal_power_allocation(cfg, powers);
    const RelayBank bank(cfg, sigs, ch.gains, alloc);
    PacketSimulator sim(cfg, sigs, ch, &bank, alloc, rng);

    GpcState st = make_gpc_state(cfg, sigs, powers);
    for (int i = 0; i < 70; ++i) {
        const auto& rx = sim.reception(i);
        gpc_channel_update(st, cfg, sigs, rx.r, sim.desired_symbols(i));
    }
    // Phase 0 converges to the true source taps; relay streams converge to
    // the taps shrunk by the forwarded-symbol correlation.  Adjacent-symbol
    // spill acts as self-noise, so the tolerance reflects the sample count.
    for (int l = 0; l < cfg.paths; ++l)
        CHECK(std::abs(st.channel.taps(0, 0)[l] - ch.gains.h_sd[0][l]) < 0.08);
    for (int j = 1; j <= 2; ++j) {
        const cx rho = bank.symbol_corr(0)(j, 0);
        for (int l = 0; l < cfg.paths; ++l)
            CHECK(std::abs(st.channel.taps(0, j)[l] - std::conj(rho) * ch.gains.h_rd[0][j - 1][l]) <
                  0.08);
    }
}

TEST_CASE("zero reference symbols leave the channel statistics unchanged") {
    Rng rng = make_stream(61, {5});
    auto cfg = make_cfg(2, 8, 2, 1, 0.1, 30, 10);
    const auto sigs = build_signatures(cfg, rng);
    const UserPowers powers = draw_user_powers(cfg, rng);
    GpcState st = make_gpc_state(cfg, sigs, powers);
    CVector r(cfg.stacked_len());
    for (auto& e : r) e = complex_gaussian(rng);
    const CMatrix before = st.channel.cross_stats();
    st.channel.update(cfg, sigs, r, CVector(cfg.streams()), st.alloc.alloc);
    CMatrix diff = st.channel.cross_stats();
    diff -= before;
    CHECK(linalg::norm_fro(diff) == 0.0);
}

TEST_CASE("frozen allocation reproduces the equal-power trajectory") {
    Rng rng = make_stream(61, {6});
    auto cfg = make_cfg(2, 8, 2, 1, 0.15, 80, 30);
    const auto sigs = build_signatures(cfg, rng);
    const UserPowers powers = draw_user_powers(cfg, rng);
    auto ch1 = draw_channels(cfg, rng);

    Rng run_rng = make_stream(99, {1});
    PacketTrace trace;
    gpc_run_packet(cfg, sigs, ch1, powers, run_rng, AllocationRole::Frozen,
                   ChannelEstimateMode::PerColumn, &trace);
    const CVector equal = equal_power_allocation(cfg, powers).stacked();
    for (const auto& a : trace.alloc)
        for (size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - equal[i]) < 1e-15);
}

TEST_CASE("decision-directed operation keeps the filter bounded") {
    Rng rng = make_stream(61, {7});
    auto cfg = make_cfg(4, 16, 3, 2, snr_db_to_noise_var(10.0, 1.0), 600, 200);
    const auto sigs = build_signatures(cfg, rng);
    auto ch = draw_channels(cfg, rng);
    const UserPowers powers = draw_user_powers(cfg, rng);
    PacketTrace trace;
    gpc_run_packet(cfg, sigs, ch, powers, rng, AllocationRole::Adaptive,
                   ChannelEstimateMode::PerColumn, &trace);
    double peak = 0.0;
    for (double n : trace.filter_norm) peak = std::max(peak, n);
    CHECK(peak < 100.0);
    CHECK(std::isfinite(peak));
}

TEST_CASE("adaptive allocation statistics share the exact fixed point") {
    // With a frozen scenario and the true channel loaded into the
    // estimator, running many allocation updates on stationary statistics
    // drives the stacked allocation toward the exact solver's direction.
    Rng rng = make_stream(61, {8});
    auto cfg = make_cfg(2, 8, 2, 1, 0.1, 400, 400);
    cfg.forgetting = 1.0;
    cfg.interferer_std_db = 0.0;
    const auto sigs = build_signatures(cfg, rng);
    auto ch = draw_channels(cfg, rng);
    const UserPowers powers = draw_user_powers(cfg, rng);
    const PowerAllocation equal = equal_power_allocation(cfg, powers);
    const RelayBank bank(cfg, sigs, ch.gains, equal);
    const mmse::ModelMoments moments(cfg, sigs, ch.gains, bank);

    // Exact pair at the equal-power operating point.
    const CMatrix w =
        mmse::mmse_filter_gpc(moments.covariance(equal), moments.cross_correlation(equal));
    CMatrix r_a;
    CVector p_a;
    moments.alloc_moments_global(w, r_a, p_a);
    const CVector exact = mmse::mmse_alloc_gpc(r_a, p_a, 0.0, powers.total());

    // Adaptive statistics driven by simulated frames with the same filter;
    // the channel estimator learns its own (correlation-shrunk) taps.
    GpcState st = make_gpc_state(cfg, sigs, powers);
    st.filter = JointRlsFilter(w, 1.0, 1e-3);
    PacketSimulator sim(cfg, sigs, ch, &bank, equal, rng);
    for (int i = 0; i < cfg.packet_symbols; ++i) {
        const auto& rx = sim.reception(i);
        gpc_channel_update(st, cfg, sigs, rx.r, sim.desired_symbols(i));
        const CMatrix u = gpc_alloc_regressor(st, cfg, sigs, sim.desired_symbols(i));
        gpc_alloc_update(st, u, sim.desired_symbols(i), powers.total());
    }
    // Solve the accumulated normal equations to convergence: the
    // statistics themselves must agree with the exact design.
    const CVector solved =
        cg_solve(st.alloc.r_a, st.alloc.p_a, CVector(st.alloc.p_a.size()), 400, 1e-12);
    const double cosine = std::abs(linalg::dot(solved, exact)) /
                          (linalg::norm2(solved) * linalg::norm2(exact));
    CHECK(cosine > 0.97);
    // and the tracked one-step-per-symbol allocation is already close
    const double track = std::abs(linalg::dot(st.alloc.alloc, exact)) /
                         (linalg::norm2(st.alloc.alloc) * linalg::norm2(exact));
    CHECK(track > 0.9);
}
