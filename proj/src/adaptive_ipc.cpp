#include "jpais/adaptive_ipc.hpp"

#include <algorithm>
#include <cmath>

namespace jpais::adaptive {

namespace {
bool all_finite(const CVector& v) {
    for (const auto& e : v)
        if (!std::isfinite(e.real()) || !std::isfinite(e.imag())) return false;
    return true;
}
}  // namespace

IpcChannelEstimator::IpcChannelEstimator(const SystemConfig& cfg, double delta) : delta_(delta) {
    const int np = cfg.phases();
    p_h_ = CMatrix(np * cfg.paths, np);
    r_h_ = CMatrix(np, np);
    r_h_inv_ = CMatrix::identity(np);
    r_h_inv_ *= cx{1.0 / delta_, 0.0};
    est_.assign(np, CVector(cfg.paths));
}

void IpcChannelEstimator::restart() {
    p_h_.fill(cx{});
    r_h_.fill(cx{});
    r_h_inv_ = CMatrix::identity(r_h_.rows());
    r_h_inv_ *= cx{1.0 / delta_, 0.0};
    ++restarts_;
}

void IpcChannelEstimator::update(const SystemConfig& cfg, const SignatureSet& sigs, int user,
                                 const CVector& r, cx ref_symbol, const CVector& user_amps) {
    const int np = cfg.phases();
    const int paths = cfg.paths;
    const int m = cfg.window();
    const double alpha = cfg.forgetting;

    CVector u(np);
    for (int j = 0; j < np; ++j) u[j] = ref_symbol * user_amps[j];
    if (!all_finite(u) || !all_finite(r)) {
        restart();
        return;
    }
    const double u2 = std::real(linalg::dot(u, u));

    CVector cr(size_t(np) * paths);
    for (int j = 0; j < np; ++j) {
        const cx* block = r.data() + size_t(j) * m;
        for (int l = 0; l < paths; ++l) {
            cx acc{};
            for (int row = 0; row < m; ++row) acc += std::conj(sigs.conv[user](row, l)) * block[row];
            cr[size_t(j) * paths + l] = acc;
        }
    }

    p_h_ *= cx{alpha, 0.0};
    linalg::add_scaled_outer(p_h_, cx{1.0, 0.0}, cr, u);
    r_h_ *= cx{alpha, 0.0};
    linalg::add_scaled_outer(r_h_, cx{1.0, 0.0}, u, u);

    if (u2 > 0.0) {
        const double inv_a = 1.0 / alpha;
        CVector pu = linalg::gemv(r_h_inv_, u);
        const double denom = 1.0 + inv_a * std::real(linalg::dot(u, pu));
        if (!(denom > 0.0) || !std::isfinite(denom)) {
            restart();
            return;
        }
        for (int i = 0; i < np; ++i) {
            cx* row = r_h_inv_.row(i);
            const cx gi = inv_a * pu[i] / denom;
            for (int j = 0; j < np; ++j) row[j] = inv_a * (row[j] - gi * std::conj(pu[j]));
        }
    }

    for (int j = 0; j < np; ++j) {
        const double e = std::real(r_h_(j, j));
        if (!(e > delta_)) continue;
        CVector rhs(paths);
        for (int l = 0; l < paths; ++l) rhs[l] = p_h_(size_t(j) * paths + l, j) / e;
        est_[j] = linalg::gemv(sigs.gram_inv[user], rhs);
        if (!all_finite(est_[j])) {
            restart();
            for (auto& t : est_) t.assign(t.size(), cx{});
            return;
        }
    }
}

CVector IpcState::filter_of(int user) const {
    if (phi_mode == PhiMode::Shared) return shared_filter.filters().col(user);
    return user_filters[user].filters().col(0);
}

IpcState make_ipc_state(const SystemConfig& cfg, const SignatureSet& sigs,
                        const UserPowers& powers, PhiMode phi_mode) {
    IpcState st;
    st.phi_mode = phi_mode;
    st.forgetting = cfg.forgetting;
    const double delta = 1e-3 * std::max(cfg.noise_var, 1e-3);
    const CMatrix bank = matched_filter_bank(cfg, sigs);
    if (phi_mode == PhiMode::Shared) {
        st.shared_filter = JointRlsFilter(bank, cfg.forgetting, delta);
    } else {
        for (int k = 0; k < cfg.users; ++k) {
            CMatrix w(cfg.stacked_len(), 1);
            w.set_col(0, bank.col(k));
            st.user_filters.emplace_back(std::move(w), cfg.forgetting, delta);
        }
    }
    const PowerAllocation eq = equal_power_allocation(cfg, powers);
    st.alloc.resize(cfg.users);
    st.channel.assign(cfg.users, IpcChannelEstimator(cfg));
    for (int k = 0; k < cfg.users; ++k) {
        st.alloc[k].inv_corr = CMatrix::identity(cfg.phases());
        st.alloc[k].inv_corr *= cx{1.0 / delta, 0.0};
        st.alloc[k].alloc = eq.amps[k];
    }
    return st;
}

void ipc_filter_update(IpcState& st, const CVector& r, const CVector& b_ref) {
    if (st.phi_mode == PhiMode::Shared) {
        st.shared_filter.update(r, b_ref);
    } else {
        for (size_t k = 0; k < st.user_filters.size(); ++k)
            st.user_filters[k].update(r, CVector{b_ref[k]});
    }
}

CVector ipc_alloc_regressor(const IpcState& st, const SystemConfig& cfg,
                            const SignatureSet& sigs, int user, cx ref_symbol) {
    const int m = cfg.window();
    const CVector w = st.filter_of(user);
    CVector z(cfg.phases());
    for (int j = 0; j < cfg.phases(); ++j) {
        const CVector& taps = st.channel[user].taps(j);
        cx acc{};
        for (int row = 0; row < m; ++row) {
            cx g{};
            for (int l = 0; l < cfg.paths; ++l) g += sigs.conv[user](row, l) * taps[l];
            acc += std::conj(g) * w[size_t(j) * m + row];
        }
        z[j] = std::conj(ref_symbol) * acc;
    }
    return z;
}

void ipc_alloc_update(IpcState& st, int user, const CVector& regressor, cx ref_symbol,
                      double budget, double forgetting) {
    IpcAllocState& a = st.alloc[user];
    const int np = int(regressor.size());
    const double z2 = std::real(linalg::dot(regressor, regressor));
    if (z2 > 0.0 && std::isfinite(z2)) {
        const double inv_a = 1.0 / forgetting;
        CVector pz = linalg::gemv(a.inv_corr, regressor);
        const double denom = 1.0 + inv_a * std::real(linalg::dot(regressor, pz));
        if (!(denom > 0.0) || !std::isfinite(denom)) {
            ++a.skipped;
        } else {
            CVector gain(np);
            for (int i = 0; i < np; ++i) gain[i] = inv_a * pz[i] / denom;
            for (int i = 0; i < np; ++i) {
                cx* row = a.inv_corr.row(i);
                for (int j = 0; j < np; ++j) row[j] = inv_a * (row[j] - gain[i] * std::conj(pz[j]));
            }
            for (int i = 0; i < np; ++i)
                for (int j = i; j < np; ++j) {
                    const cx mid = 0.5 * (a.inv_corr(i, j) + std::conj(a.inv_corr(j, i)));
                    a.inv_corr(i, j) = mid;
                    a.inv_corr(j, i) = std::conj(mid);
                }
            // Reference is the conjugated symbol: the estimate a^H z is the
            // conjugate of the predicted filter output, and only this
            // pairing shares its fixed point with the allocation normal
            // equations (cross term sum of z b).
            const cx err = std::conj(ref_symbol) - linalg::dot(a.alloc, regressor);
            for (int i = 0; i < np; ++i) a.alloc[i] += gain[i] * std::conj(err);
        }
    }
    const double n2 = std::real(linalg::dot(a.alloc, a.alloc));
    if (n2 > 0.0 && std::isfinite(n2)) {
        const double s = std::sqrt(budget / n2);
        for (auto& e : a.alloc) e *= s;
    }
}

void ipc_channel_update(IpcState& st, const SystemConfig& cfg, const SignatureSet& sigs, int user,
                        const CVector& r, cx ref_symbol) {
    st.channel[user].update(cfg, sigs, user, r, ref_symbol, st.alloc[user].alloc);
}

PacketResult ipc_run_packet(const SystemConfig& cfg, const SignatureSet& sigs, ChannelSet& ch,
                            const UserPowers& powers, Rng& rng, AllocationRole role,
                            PhiMode phi_mode, const std::vector<int>& selection,
                            PacketTrace* trace) {
    IpcState st = make_ipc_state(cfg, sigs, powers, phi_mode);
    std::vector<bool> selected(cfg.users, selection.empty());
    for (int k : selection)
        if (k >= 0 && k < cfg.users) selected[k] = true;

    PowerAllocation alloc = equal_power_allocation(cfg, powers);
    RelayBank static_bank;
    if (ch.doppler == 0.0) static_bank = RelayBank(cfg, sigs, ch.gains, alloc);
    PacketSimulator sim(cfg, sigs, ch, &static_bank, alloc, rng);

    PacketResult out;
    out.bits.assign(cfg.users, {});
    out.sent_bits.assign(cfg.users, {});

    for (int i = 0; i < cfg.packet_symbols; ++i) {
        const ReceivedVector& rx = sim.reception(i);
        CVector outputs(cfg.users);
        if (phi_mode == PhiMode::Shared) {
            outputs = st.shared_filter.outputs(rx.r);
        } else {
            for (int k = 0; k < cfg.users; ++k)
                outputs[k] = st.user_filters[k].outputs(rx.r)[0];
        }

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

        ipc_filter_update(st, rx.r, b_ref);
        if (role == AllocationRole::Adaptive) {
            for (int k = 0; k < cfg.users; ++k) {
                if (!selected[k]) continue;
                const CVector z = ipc_alloc_regressor(st, cfg, sigs, k, b_ref[k]);
                ipc_alloc_update(st, k, z, b_ref[k], powers.budget[k], cfg.forgetting);
                alloc.amps[k] = st.alloc[k].alloc;
            }
            if (i + 3 < cfg.packet_symbols) sim.schedule_amplitudes(i + 3, alloc);
        }
        for (int k = 0; k < cfg.users; ++k) ipc_channel_update(st, cfg, sigs, k, rx.r, b_ref[k]);

        if (trace) {
            CMatrix w(cfg.stacked_len(), cfg.users);
            for (int k = 0; k < cfg.users; ++k) w.set_col(k, st.filter_of(k));
            trace->filter_norm.push_back(linalg::norm_fro(w));
            CVector flat;
            for (int k = 0; k < cfg.users; ++k)
                flat.insert(flat.end(), st.alloc[k].alloc.begin(), st.alloc[k].alloc.end());
            trace->alloc.push_back(flat);
        }
    }

    out.final_alloc = alloc;
    int restarts = 0;
    if (phi_mode == PhiMode::Shared) restarts += st.shared_filter.restarts();
    for (const auto& f : st.user_filters) restarts += f.restarts();
    for (const auto& c : st.channel) restarts += c.restarts();
    out.restarts = restarts;
    return out;
}

}  // namespace jpais::adaptive
