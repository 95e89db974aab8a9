#include "jpais/diagnostics.hpp"

#include <algorithm>
#include <cmath>

namespace jpais::diagnostics {

Scenario make_scenario(const SystemConfig& cfg, Rng& rng) {
    Scenario sc;
    sc.cfg = cfg;
    sc.cfg.validate();
    sc.sigs = build_signatures(sc.cfg, rng);
    sc.ch = draw_channels(sc.cfg, rng);
    sc.powers = draw_user_powers(sc.cfg, rng);
    sc.relays = RelayBank(sc.cfg, sc.sigs, sc.ch.gains, equal_power_allocation(sc.cfg, sc.powers));
    return sc;
}

namespace {

// Real symmetric part of Re{X}.
std::vector<double> sym_real(const CMatrix& x) {
    const int n = x.rows();
    std::vector<double> s(size_t(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            s[size_t(i) * n + j] = 0.5 * (x(i, j).real() + x(j, i).real());
    return s;
}

double quad_form(const std::vector<double>& s, const std::vector<double>& m, int n) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        double row = 0.0;
        for (int j = 0; j < n; ++j) row += s[size_t(i) * n + j] * m[j];
        acc += m[i] * row;
    }
    return acc;
}

std::vector<double> random_unit(int n, Rng& rng) {
    std::vector<double> v(n);
    double norm = 0.0;
    for (auto& e : v) {
        e = gaussian(rng);
        norm += e * e;
    }
    norm = std::sqrt(norm);
    for (auto& e : v) e /= norm;
    return v;
}

// Largest generalized eigenvalue of (N, D) via power iteration on D^-1 N,
// valid when D is positive definite.  Returns false when D is not.
bool generalized_eig_max(const std::vector<double>& n_mat, const std::vector<double>& d_mat,
                         int n, double& lambda_out) {
    CMatrix d(n, n), nm(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            d(i, j) = d_mat[size_t(i) * n + j];
            nm(i, j) = n_mat[size_t(i) * n + j];
        }
    try {
        linalg::Cholesky chol(d);
        CVector v(n);
        for (int i = 0; i < n; ++i) v[i] = 1.0 / std::sqrt(double(n));
        double lambda = 0.0;
        for (int it = 0; it < 200; ++it) {
            CVector w = chol.solve(linalg::gemv(nm, v));
            const double nrm = linalg::norm2(w);
            if (!(nrm > 0.0)) return false;
            for (auto& e : w) e /= nrm;
            const CVector nv = linalg::gemv(nm, w);
            const CVector dv = linalg::gemv(d, w);
            const double num = std::real(linalg::dot(w, nv));
            const double den = std::real(linalg::dot(w, dv));
            if (!(den > 0.0)) return false;
            const double next = num / den;
            if (std::abs(next - lambda) <= 1e-10 * std::max(1.0, std::abs(next))) {
                lambda = next;
                break;
            }
            lambda = next;
            v = w;
        }
        lambda_out = lambda;
        return true;
    } catch (const linalg::SolveFailure&) {
        return false;
    }
}

}  // namespace

BoundEstimate convexity_bound(const Scenario& sc, ConstraintMode mode, int n_probes, int n_mc,
                              Rng& rng) {
    if (n_probes < 1 || n_mc < 1) throw std::invalid_argument("convexity_bound: bad sample counts");
    const SystemConfig& cfg = sc.cfg;
    const int np = cfg.phases();
    const int m_len = cfg.stacked_len();

    // Operating point: the joint MMSE pair for this scenario.
    mmse::ModelMoments moments(cfg, sc.sigs, sc.ch.gains, sc.relays);
    const auto op = mmse::alternate(moments, sc.powers, mode, 2,
                                    equal_power_allocation(cfg, sc.powers));

    // Quadratic-form dimension: filter part plus conjugated allocation part.
    const int alloc_len = mode == ConstraintMode::Global ? cfg.streams() : np;
    const int q_dim = m_len + alloc_len;
    const int user = 0;

    const CVector w_k = op.filters.col(user);
    const CVector a_full = op.alloc.stacked();
    const CVector a_part = mode == ConstraintMode::Global ? a_full : op.alloc.amps[user];
    const double a_norm2 = std::real(linalg::dot(a_part, a_part));

    // Accumulated Re{E[s1 U]} and Re{E[s2 U]} over frame draws.
    CMatrix num_acc(q_dim, q_dim), den_acc(q_dim, q_dim);
    Rng frame_rng = rng;
    PowerAllocation alloc = op.alloc;
    ChannelSet ch = sc.ch;  // static draw; frames share the realization
    FrameContext no_ctx;

    for (int t = 0; t < n_mc; ++t) {
        CVector desired(cfg.users);
        for (int k = 0; k < cfg.users; ++k) desired[k] = random_qpsk(frame_rng);
        const TransmitResult tr =
            transmit_frame(cfg, sc.sigs, ch.gains, sc.relays, desired, alloc, no_ctx, frame_rng);

        // Signal map applied to the allocation part: columns scaled by the
        // per-stream symbols.
        const CVector syms = tr.frame.stream_symbols();
        CMatrix sigmap(m_len, alloc_len);
        for (int c = 0; c < alloc_len; ++c) {
            const int stream = mode == ConstraintMode::Global ? c : user * np + c;
            const CVector col = moments.streams().col(stream);
            for (int i = 0; i < m_len; ++i) sigmap(i, c) = col[i] * syms[stream];
        }

        // Disturbance seen by the probe: noise plus spill, plus the other
        // users' signals in the per-user analysis.
        CVector disturb(m_len);
        for (int i = 0; i < m_len; ++i) disturb[i] = tr.rx.isi[i] + tr.rx.noise[i];
        if (mode == ConstraintMode::Individual) {
            for (int k = 0; k < cfg.users; ++k) {
                if (k == user) continue;
                for (int j = 0; j < np; ++j) {
                    const int stream = k * np + j;
                    const CVector col = moments.streams().col(stream);
                    const cx scale = alloc.stacked()[stream] * syms[stream];
                    for (int i = 0; i < m_len; ++i) disturb[i] += scale * col[i];
                }
            }
        }

        // Block matrix U: signal map (conjugate-transposed into the
        // allocation-by-filter block) plus the disturbance column.
        CMatrix u(q_dim, q_dim);
        for (int c = 0; c < alloc_len; ++c)
            for (int i = 0; i < m_len; ++i) u(m_len + c, i) = std::conj(sigmap(i, c));
        for (int i = 0; i < m_len; ++i) u(i, 0) += disturb[i];

        const cx filtered_disturb = linalg::dot(w_k, disturb);
        const cx ref = std::conj(desired[user]);
        // beta = (a a^H)^+ a = a / ||a||^2.
        const CVector sig_beta = linalg::gemv(sigmap, linalg::scaled(1.0 / a_norm2, a_part));
        const cx s1 = ref - std::conj(filtered_disturb);
        const cx s2 = linalg::dot(w_k, sig_beta);

        for (int i = 0; i < q_dim; ++i)
            for (int j = 0; j < q_dim; ++j) {
                num_acc(i, j) += s1 * u(i, j);
                den_acc(i, j) += s2 * u(i, j);
            }
    }
    const cx inv_mc{1.0 / double(n_mc), 0.0};
    num_acc *= inv_mc;
    den_acc *= inv_mc;

    const std::vector<double> n_sym = sym_real(num_acc);
    const std::vector<double> d_sym = sym_real(den_acc);

    BoundEstimate be;
    be.probes_used = n_probes;
    int excluded = 0;
    double best = -std::numeric_limits<double>::infinity();
    for (int p = 0; p < n_probes; ++p) {
        const std::vector<double> dir = random_unit(q_dim, rng);
        const double den = quad_form(d_sym, dir, q_dim);
        if (!(den > 0.0)) {
            ++excluded;
            continue;
        }
        best = std::max(best, quad_form(n_sym, dir, q_dim) / den);
    }
    double lam;
    if (generalized_eig_max(n_sym, d_sym, q_dim, lam)) best = std::max(best, lam);
    be.excluded_fraction = double(excluded) / double(n_probes);
    if (excluded == n_probes && !std::isfinite(best))
        throw std::domain_error("convexity_bound: no direction with positive denominator");
    be.bound = best;
    return be;
}

InvarianceReport init_invariance_test(const Scenario& sc, ConstraintMode mode, int n_inits,
                                      double power, int iters, Rng& rng) {
    if (n_inits < 1) throw std::invalid_argument("init_invariance_test: need inits");
    const SystemConfig& cfg = sc.cfg;
    UserPowers powers = sc.powers;
    if (mode == ConstraintMode::Global) {
        // Scale every budget so the global constraint equals the probe power.
        const double s = power / powers.total();
        for (auto& b : powers.budget) b *= s;
    } else {
        for (auto& b : powers.budget) b = power;
    }
    mmse::ModelMoments moments(cfg, sc.sigs, sc.ch.gains, sc.relays);

    InvarianceReport rep;
    std::vector<CVector> finals;
    for (int t = 0; t < n_inits; ++t) {
        PowerAllocation init = equal_power_allocation(cfg, powers);
        if (t > 0) {  // random point on the constraint sphere
            for (auto& ak : init.amps)
                for (auto& e : ak) e = complex_gaussian(rng);
            if (mode == ConstraintMode::Global)
                init.normalize_global(powers.total());
            else
                init.normalize_individual(powers);
        }
        const auto res = mmse::alternate(moments, powers, mode, iters, init);
        rep.final_costs.push_back(res.cost_after_alloc.back());
        finals.push_back(res.alloc.stacked());
    }
    for (size_t i = 0; i < finals.size(); ++i)
        for (size_t j = i + 1; j < finals.size(); ++j) {
            rep.cost_spread =
                std::max(rep.cost_spread, std::abs(rep.final_costs[i] - rep.final_costs[j]));
            // Distance up to a global phase.
            const double n1 = std::real(linalg::dot(finals[i], finals[i]));
            const double n2 = std::real(linalg::dot(finals[j], finals[j]));
            const double cross = std::abs(linalg::dot(finals[i], finals[j]));
            rep.alloc_distance =
                std::max(rep.alloc_distance, std::sqrt(std::max(0.0, n1 + n2 - 2.0 * cross)));
        }
    return rep;
}

}  // namespace jpais::diagnostics
