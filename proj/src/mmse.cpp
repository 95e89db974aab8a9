#include "jpais/mmse.hpp"

#include <cmath>

namespace jpais::mmse {

ModelMoments::ModelMoments(const SystemConfig& cfg, const SignatureSet& sigs, const LinkGains& g,
                           const RelayBank& relays)
    : cfg_(cfg) {
    streams_ = stream_matrix(cfg, sigs, g);
    corr_.reserve(cfg.users);
    tail_.assign(cfg.users, std::vector<CVector>(cfg.phases()));
    head_.assign(cfg.users, std::vector<CVector>(cfg.phases()));
    for (int k = 0; k < cfg.users; ++k) {
        corr_.push_back(relays.relays() > 0 ? relays.symbol_corr(k)
                                            : CMatrix::identity(cfg.phases()));
        for (int j = 0; j < cfg.phases(); ++j) {
            CVector t(cfg.stacked_len()), h(cfg.stacked_len());
            const CVector& taps = g.dest_taps(k, j);
            for (int row = 0; row < cfg.window(); ++row) {
                cx at{}, ah{};
                for (int l = 0; l < cfg.paths; ++l) {
                    at += sigs.tail[k](row, l) * taps[l];
                    ah += sigs.head[k](row, l) * taps[l];
                }
                t[size_t(j) * cfg.window() + row] = at;
                h[size_t(j) * cfg.window() + row] = ah;
            }
            tail_[k][j] = std::move(t);
            head_[k][j] = std::move(h);
        }
    }
}

CMatrix ModelMoments::covariance(const PowerAllocation& alloc) const {
    const int n = cfg_.stacked_len();
    const int np = cfg_.phases();
    CMatrix r(n, n);
    for (int k = 0; k < cfg_.users; ++k) {
        for (int p = 0; p < np; ++p) {
            for (int q = 0; q < np; ++q) {
                const cx scale = alloc.amps[k][p] * std::conj(alloc.amps[k][q]) * corr_[k](p, q);
                if (scale == cx{}) continue;
                linalg::add_scaled_outer(r, scale, streams_.col(k * np + p),
                                         streams_.col(k * np + q));
                linalg::add_scaled_outer(r, scale, tail_[k][p], tail_[k][q]);
                linalg::add_scaled_outer(r, scale, head_[k][p], head_[k][q]);
            }
        }
    }
    double ridge = cfg_.noise_var;
    if (ridge == 0.0) {
        // Noise-free runs still need a factorizable covariance; the floor is
        // far below any tested tolerance.
        double tr = 0.0;
        for (int i = 0; i < n; ++i) tr += std::real(r(i, i));
        ridge = 1e-10 * (tr / n + 1e-30);
    }
    for (int i = 0; i < n; ++i) r(i, i) += ridge;
    return r;
}

CMatrix ModelMoments::cross_correlation(const PowerAllocation& alloc) const {
    const int np = cfg_.phases();
    CMatrix p(cfg_.stacked_len(), cfg_.users);
    for (int k = 0; k < cfg_.users; ++k) {
        CVector col(cfg_.stacked_len());
        for (int ph = 0; ph < np; ++ph) {
            const cx scale = alloc.amps[k][ph] * corr_[k](ph, 0);  // E[beta_ph b_k^*]
            if (scale == cx{}) continue;
            linalg::axpy(col, scale, streams_.col(k * np + ph));
        }
        p.set_col(k, col);
    }
    return p;
}

void ModelMoments::alloc_moments_global(const CMatrix& filters, CMatrix& r_a, CVector& p_a) const {
    const int np = cfg_.phases();
    const int nstreams = cfg_.streams();
    // Per stream, the filtered signature row: (stream col)^H W.
    CMatrix proj(nstreams, cfg_.users);
    for (int c = 0; c < nstreams; ++c) {
        const CVector col = streams_.col(c);
        for (int u = 0; u < cfg_.users; ++u) {
            cx acc{};
            for (int i = 0; i < streams_.rows(); ++i) acc += std::conj(col[i]) * filters(i, u);
            proj(c, u) = acc;
        }
    }
    r_a = CMatrix(nstreams, nstreams);
    p_a.assign(nstreams, cx{});
    for (int k = 0; k < cfg_.users; ++k)
        for (int p = 0; p < np; ++p) {
            const int c = k * np + p;
            for (int q = 0; q < np; ++q) {
                const int cc = k * np + q;
                cx acc{};
                for (int u = 0; u < cfg_.users; ++u) acc += proj(c, u) * std::conj(proj(cc, u));
                r_a(c, cc) = std::conj(corr_[k](p, q)) * acc;
            }
            p_a[c] = std::conj(corr_[k](p, 0)) * proj(c, k);
        }
}

void ModelMoments::alloc_moments_user(int user, const CVector& filter, CMatrix& r_a,
                                      CVector& p_a) const {
    const int np = cfg_.phases();
    CVector proj(np);
    for (int p = 0; p < np; ++p) {
        const CVector col = streams_.col(user * np + p);
        proj[p] = linalg::dot(col, filter);
    }
    r_a = CMatrix(np, np);
    p_a.assign(np, cx{});
    for (int p = 0; p < np; ++p) {
        for (int q = 0; q < np; ++q)
            r_a(p, q) = std::conj(corr_[user](p, q)) * proj[p] * std::conj(proj[q]);
        p_a[p] = std::conj(corr_[user](p, 0)) * proj[p];
    }
}

double ModelMoments::cost(const CMatrix& filters, const PowerAllocation& alloc) const {
    const CMatrix r = covariance(alloc);
    const CMatrix p = cross_correlation(alloc);
    double total = 0.0;
    for (int k = 0; k < cfg_.users; ++k) {
        const CVector w = filters.col(k);
        const CVector pk = p.col(k);
        total += 1.0 - 2.0 * std::real(linalg::dot(w, pk)) +
                 std::real(linalg::dot(w, linalg::gemv(r, w)));
    }
    return total;
}

CMatrix mmse_filter_gpc(const CMatrix& covariance, const CMatrix& cross_corr) {
    return linalg::Cholesky(covariance).solve_multi(cross_corr);
}

CVector mmse_filter_ipc(const CMatrix& covariance, const CVector& cross_corr) {
    return linalg::Cholesky(covariance).solve(cross_corr);
}

namespace {
CVector regularized_constrained_solve(const CMatrix& r_a, const CVector& p_a, double ridge,
                                      double power, const char* who) {
    if (linalg::norm2(p_a) == 0.0)
        throw std::domain_error(std::string(who) + ": zero cross-correlation, constraint unreachable");
    CMatrix lhs = r_a;
    for (int i = 0; i < lhs.rows(); ++i) lhs(i, i) += ridge;
    CVector a = linalg::solve_hermitian(lhs, p_a);
    const double n2 = std::real(linalg::dot(a, a));
    if (!(n2 > 0.0)) throw std::domain_error(std::string(who) + ": zero solution");
    const double s = std::sqrt(power / n2);
    for (auto& e : a) e *= s;
    return a;
}
}  // namespace

CVector mmse_alloc_gpc(const CMatrix& r_a, const CVector& p_a, double ridge, double p_total) {
    return regularized_constrained_solve(r_a, p_a, ridge, p_total, "mmse_alloc_gpc");
}

CVector mmse_alloc_ipc(const CMatrix& r_a, const CVector& p_a, double ridge, double p_user) {
    return regularized_constrained_solve(r_a, p_a, ridge, p_user, "mmse_alloc_ipc");
}

AlternateResult alternate(const ModelMoments& moments, const UserPowers& powers,
                          ConstraintMode mode, int iters, const PowerAllocation& init) {
    if (iters < 1) throw std::invalid_argument("alternate: iters must be >= 1");
    const SystemConfig& cfg = moments.config();
    AlternateResult res;
    res.alloc = init;
    for (int it = 0; it < iters; ++it) {
        const CMatrix r = moments.covariance(res.alloc);
        const CMatrix p = moments.cross_correlation(res.alloc);
        res.filters = mmse_filter_gpc(r, p);
        res.cost_after_filter.push_back(moments.cost(res.filters, res.alloc));

        if (mode == ConstraintMode::Global) {
            CMatrix r_a;
            CVector p_a;
            moments.alloc_moments_global(res.filters, r_a, p_a);
            res.alloc.set_stacked(mmse_alloc_gpc(r_a, p_a, cfg.ridge, powers.total()));
        } else {
            for (int k = 0; k < cfg.users; ++k) {
                CMatrix r_a;
                CVector p_a;
                moments.alloc_moments_user(k, res.filters.col(k), r_a, p_a);
                res.alloc.amps[k] = mmse_alloc_ipc(r_a, p_a, cfg.ridge, powers.budget[k]);
            }
        }
        res.cost_after_alloc.push_back(moments.cost(res.filters, res.alloc));
    }
    return res;
}

}  // namespace jpais::mmse
