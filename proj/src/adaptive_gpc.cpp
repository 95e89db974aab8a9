#include "jpais/adaptive_gpc.hpp"

#include <cmath>

namespace jpais::adaptive {

namespace {
bool all_finite(const CVector& v) {
    for (const auto& e : v)
        if (!std::isfinite(e.real()) || !std::isfinite(e.imag())) return false;
    return true;
}
}  // namespace

GpcChannelEstimator::GpcChannelEstimator(const SystemConfig& cfg, const SignatureSet& sigs,
                                         ChannelEstimateMode mode, double delta)
    : mode_(mode), delta_(delta) {
    const int streams = cfg.streams();
    p_h_ = CMatrix(streams * cfg.paths, streams);
    r_h_ = CMatrix(streams, streams);
    r_h_inv_ = CMatrix::identity(streams);
    r_h_inv_ *= cx{1.0 / delta_, 0.0};
    est_.assign(cfg.users, std::vector<CVector>(cfg.phases(), CVector(cfg.paths)));

    if (mode_ == ChannelEstimateMode::MaskedFull) {
        // Regularized inverse of the stacked code Gram; the Gram is rank
        // deficient once K L exceeds the window length.
        CMatrix gram = linalg::hermitian(sigs.stacked) * sigs.stacked;
        double tr = 0.0;
        for (int i = 0; i < gram.rows(); ++i) tr += std::real(gram(i, i));
        const double ridge = 1e-8 * tr / gram.rows();
        for (int i = 0; i < gram.rows(); ++i) gram(i, i) += ridge;
        code_gram_inv_ = linalg::solve_hermitian_multi(gram, CMatrix::identity(gram.rows()), 1e16);
    }
}

void GpcChannelEstimator::restart() {
    p_h_.fill(cx{});
    r_h_.fill(cx{});
    r_h_inv_ = CMatrix::identity(r_h_.rows());
    r_h_inv_ *= cx{1.0 / delta_, 0.0};
    ++restarts_;
}

void GpcChannelEstimator::update(const SystemConfig& cfg, const SignatureSet& sigs,
                                 const CVector& r, const CVector& stream_syms,
                                 const CVector& amps) {
    const int np = cfg.phases();
    const int paths = cfg.paths;
    const int m = cfg.window();
    const int streams = cfg.streams();
    const double alpha = cfg.forgetting;

    CVector u(streams);
    for (int c = 0; c < streams; ++c) u[c] = stream_syms[c] * amps[c];
    if (!all_finite(u) || !all_finite(r)) {
        restart();
        return;
    }
    const double u2 = std::real(linalg::dot(u, u));

    // Code-matched reception, per stream: conv^H applied to the phase block.
    CVector cr(size_t(streams) * paths);
    for (int k = 0; k < cfg.users; ++k)
        for (int j = 0; j < np; ++j) {
            const cx* block = r.data() + size_t(j) * m;
            for (int l = 0; l < paths; ++l) {
                cx acc{};
                for (int row = 0; row < m; ++row) acc += std::conj(sigs.conv[k](row, l)) * block[row];
                cr[(size_t(k) * np + j) * paths + l] = acc;
            }
        }

    p_h_ *= cx{alpha, 0.0};
    linalg::add_scaled_outer(p_h_, cx{1.0, 0.0}, cr, u);
    r_h_ *= cx{alpha, 0.0};
    linalg::add_scaled_outer(r_h_, cx{1.0, 0.0}, u, u);

    if (u2 > 0.0) {
        // Inversion-lemma update of r_h_inv for the forgetting recursion.
        const double inv_a = 1.0 / alpha;
        CVector pu = linalg::gemv(r_h_inv_, u);
        const double denom = 1.0 + inv_a * std::real(linalg::dot(u, pu));
        if (!(denom > 0.0) || !std::isfinite(denom)) {
            restart();
            return;
        }
        for (int i = 0; i < streams; ++i) {
            cx* row = r_h_inv_.row(i);
            const cx gi = inv_a * pu[i] / denom;
            for (int j = 0; j < streams; ++j) row[j] = inv_a * (row[j] - gi * std::conj(pu[j]));
        }
    }

    if (mode_ == ChannelEstimateMode::PerColumn) {
        // Structured least squares, one stream column at a time; phases do
        // not couple and cross-user coupling averages out.
        for (int k = 0; k < cfg.users; ++k)
            for (int j = 0; j < np; ++j) {
                const int c = k * np + j;
                const double e = std::real(r_h_(c, c));
                if (!(e > delta_)) continue;  // insufficient excitation yet
                CVector rhs(paths);
                for (int l = 0; l < paths; ++l) rhs[l] = p_h_(size_t(c) * paths + l, c) / e;
                est_[k][j] = linalg::gemv(sigs.gram_inv[k], rhs);
            }
    } else {
        const CMatrix full = code_gram_inv_ * (p_h_ * r_h_inv_);
        for (int k = 0; k < cfg.users; ++k)
            for (int j = 0; j < np; ++j) {
                const int c = k * np + j;
                for (int l = 0; l < paths; ++l) est_[k][j][l] = full(size_t(c) * paths + l, c);
            }
    }
    for (auto& user : est_)
        for (auto& taps : user)
            if (!all_finite(taps)) {
                restart();
                for (auto& uu : est_)
                    for (auto& tt : uu) tt.assign(tt.size(), cx{});
                return;
            }
}

CMatrix GpcChannelEstimator::packed_estimate(const SystemConfig& cfg) const {
    const int np = cfg.phases();
    CMatrix h(cfg.streams() * cfg.paths, cfg.streams());
    for (int k = 0; k < cfg.users; ++k)
        for (int j = 0; j < np; ++j) {
            const int c = k * np + j;
            for (int l = 0; l < cfg.paths; ++l) h(size_t(c) * cfg.paths + l, c) = est_[k][j][l];
        }
    return h;
}

CMatrix matched_filter_bank(const SystemConfig& cfg, const SignatureSet& sigs) {
    CMatrix w(cfg.stacked_len(), cfg.users);
    const double scale = 1.0 / std::sqrt(double(cfg.phases()));
    for (int k = 0; k < cfg.users; ++k)
        for (int j = 0; j < cfg.phases(); ++j)
            for (int c = 0; c < cfg.gain; ++c)
                w(j * cfg.window() + c, k) = scale * sigs.codes[k][c];
    return w;
}

GpcState make_gpc_state(const SystemConfig& cfg, const SignatureSet& sigs,
                        const UserPowers& powers, ChannelEstimateMode mode) {
    GpcState st;
    st.forgetting = cfg.forgetting;
    const double delta = 1e-3 * std::max(cfg.noise_var, 1e-3);
    st.filter = JointRlsFilter(matched_filter_bank(cfg, sigs), cfg.forgetting, delta);
    st.alloc.r_a = CMatrix(cfg.streams(), cfg.streams());
    st.alloc.p_a = CVector(cfg.streams());
    st.alloc.alloc = equal_power_allocation(cfg, powers).stacked();
    st.alloc.unnormalized = st.alloc.alloc;
    st.channel = GpcChannelEstimator(cfg, sigs, mode);
    return st;
}

void gpc_filter_update(GpcState& st, const CVector& r, const CVector& b_ref) {
    st.filter.update(r, b_ref);
}

CMatrix gpc_alloc_regressor(const GpcState& st, const SystemConfig& cfg,
                            const SignatureSet& sigs, const CVector& b_ref) {
    const int np = cfg.phases();
    const int m = cfg.window();
    const CMatrix& w = st.filter.filters();
    CMatrix u(cfg.streams(), cfg.users);
    CVector g(m);
    for (int k = 0; k < cfg.users; ++k)
        for (int j = 0; j < np; ++j) {
            const CVector& taps = st.channel.taps(k, j);
            g.assign(m, cx{});
            for (int row = 0; row < m; ++row) {
                cx acc{};
                for (int l = 0; l < cfg.paths; ++l) acc += sigs.conv[k](row, l) * taps[l];
                g[row] = acc;
            }
            // Row (k,j) of B^H H^H C^H W: conj(symbol) * (g^H W restricted
            // to phase block j).
            for (int col = 0; col < cfg.users; ++col) {
                cx acc{};
                for (int row = 0; row < m; ++row)
                    acc += std::conj(g[row]) * w(j * m + row, col);
                u(k * np + j, col) = std::conj(b_ref[k]) * acc;
            }
        }
    return u;
}

void gpc_alloc_update(GpcState& st, const CMatrix& regressor, const CVector& b_ref,
                      double p_total) {
    GpcAllocState& a = st.alloc;
    a.r_a *= cx{st.forgetting, 0.0};
    for (int c = 0; c < regressor.cols(); ++c)
        linalg::add_scaled_outer(a.r_a, cx{1.0, 0.0}, regressor.col(c), regressor.col(c));
    // Cross term accumulates without forgetting; only the solution
    // direction matters once the norm is pinned.
    for (int i = 0; i < regressor.rows(); ++i) {
        cx acc{};
        for (int c = 0; c < regressor.cols(); ++c) acc += regressor(i, c) * b_ref[c];
        a.p_a[i] += acc;
    }

    for (int it = 0; it < a.inner_iters; ++it)
        cg_step(a.r_a, a.p_a, a.alloc, a.cg_dir, a.cg_prev_res2, a.paper_step_variant);
    a.unnormalized = a.alloc;

    const double n2 = std::real(linalg::dot(a.alloc, a.alloc));
    if (n2 > 0.0 && std::isfinite(n2)) {
        const double s = std::sqrt(p_total / n2);
        for (auto& e : a.alloc) e *= s;
    }
}

void gpc_channel_update(GpcState& st, const SystemConfig& cfg, const SignatureSet& sigs,
                        const CVector& r, const CVector& b_ref) {
    CVector stream_syms(cfg.streams());
    for (int k = 0; k < cfg.users; ++k)
        for (int j = 0; j < cfg.phases(); ++j) stream_syms[size_t(k) * cfg.phases() + j] = b_ref[k];
    st.channel.update(cfg, sigs, r, stream_syms, st.alloc.alloc);
}

PacketResult gpc_run_packet(const SystemConfig& cfg, const SignatureSet& sigs, ChannelSet& ch,
                            const UserPowers& powers, Rng& rng, AllocationRole role,
                            ChannelEstimateMode mode, PacketTrace* trace) {
    GpcState st = make_gpc_state(cfg, sigs, powers, mode);
    PowerAllocation alloc = equal_power_allocation(cfg, powers);
    RelayBank static_bank;
    if (ch.doppler == 0.0) static_bank = RelayBank(cfg, sigs, ch.gains, alloc);
    PacketSimulator sim(cfg, sigs, ch, &static_bank, alloc, rng);

    PacketResult out;
    out.bits.assign(cfg.users, {});
    out.sent_bits.assign(cfg.users, {});
    const double p_total = powers.total();

    for (int i = 0; i < cfg.packet_symbols; ++i) {
        const ReceivedVector& rx = sim.reception(i);
        const CVector outputs = st.filter.outputs(rx.r);

        CVector b_ref(cfg.users);
        const bool training = i < cfg.training_symbols;
        for (int k = 0; k < cfg.users; ++k)
            b_ref[k] = training ? sim.desired_symbols(i)[k] : qpsk_hard_decision(outputs[k]);

        if (!training) {
            for (int k = 0; k < cfg.users; ++k) {
                int b0, b1, s0, s1;
                qpsk_slice(outputs[k], b0, b1);
                qpsk_slice(sim.desired_symbols(i)[k], s0, s1);
                out.bits[k].push_back(b0);
                out.bits[k].push_back(b1);
                out.sent_bits[k].push_back(s0);
                out.sent_bits[k].push_back(s1);
            }
            out.outputs_user0.push_back(outputs[0]);
            out.symbols_user0.push_back(sim.desired_symbols(i)[0]);
        }

        gpc_filter_update(st, rx.r, b_ref);
        if (role == AllocationRole::Adaptive) {
            const CMatrix u = gpc_alloc_regressor(st, cfg, sigs, b_ref);
            gpc_alloc_update(st, u, b_ref, p_total);
            alloc.set_stacked(st.alloc.alloc);
            if (i + 3 < cfg.packet_symbols) sim.schedule_amplitudes(i + 3, alloc);
        }
        gpc_channel_update(st, cfg, sigs, rx.r, b_ref);

        if (trace) {
            trace->filter_norm.push_back(linalg::norm_fro(st.filter.filters()));
            trace->alloc.push_back(st.alloc.alloc);
        }
    }

    out.final_alloc = alloc;
    out.restarts = st.filter.restarts() + st.channel.restarts();
    return out;
}

}  // namespace jpais::adaptive
