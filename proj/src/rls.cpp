#include "jpais/rls.hpp"

#include <cmath>

namespace jpais::adaptive {

JointRlsFilter::JointRlsFilter(CMatrix initial_filters, double forgetting, double delta)
    : filters_(std::move(initial_filters)), forgetting_(forgetting), delta_(delta) {
    inv_corr_ = CMatrix::identity(filters_.rows());
    inv_corr_ *= cx{1.0 / delta_, 0.0};
}

void JointRlsFilter::update(const CVector& r, const CVector& b) {
    const int n = filters_.rows();
    const int cols = filters_.cols();
    if (linalg::norm2(r) == 0.0) return;

    const double inv_a = 1.0 / forgetting_;
    CVector phi_r = linalg::gemv(inv_corr_, r);
    const double quad = std::real(linalg::dot(r, phi_r));
    const double denom = 1.0 + inv_a * quad;
    if (!(denom > 0.0) || !std::isfinite(denom)) {
        inv_corr_ = CMatrix::identity(n);
        inv_corr_ *= cx{1.0 / delta_, 0.0};
        ++restarts_;
        return;
    }
    CVector gain(n);
    for (int i = 0; i < n; ++i) gain[i] = inv_a * phi_r[i] / denom;

    // inv_corr <- (inv_corr - gain (r^H inv_corr)) / forgetting, re-Hermitianized.
    CVector rh_phi(n);
    for (int i = 0; i < n; ++i) rh_phi[i] = std::conj(phi_r[i]);  // (r^H Phi)_i for Hermitian Phi
    for (int i = 0; i < n; ++i) {
        cx* row = inv_corr_.row(i);
        const cx gi = gain[i];
        for (int j = 0; j < n; ++j) row[j] = inv_a * (row[j] - gi * rh_phi[j]);
    }
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            const cx m = 0.5 * (inv_corr_(i, j) + std::conj(inv_corr_(j, i)));
            inv_corr_(i, j) = m;
            inv_corr_(j, i) = std::conj(m);
        }

    // a-priori errors and coefficient step: W += gain * err^H.
    CVector err(cols);
    for (int c = 0; c < cols; ++c) {
        cx acc{};
        for (int i = 0; i < n; ++i) acc += std::conj(filters_(i, c)) * r[i];
        err[c] = b[c] - acc;
    }
    for (int i = 0; i < n; ++i) {
        cx* row = filters_.row(i);
        const cx gi = gain[i];
        for (int c = 0; c < cols; ++c) row[c] += gi * std::conj(err[c]);
    }
}

CVector JointRlsFilter::outputs(const CVector& r) const {
    return linalg::gemv_hermitian(filters_, r);
}

double cg_step(const CMatrix& r_mat, const CVector& p, CVector& x, CVector& dir,
               double& prev_res2, bool along_matrix_direction) {
    CVector res = linalg::vsub(p, linalg::gemv(r_mat, x));
    const double res2 = std::real(linalg::dot(res, res));
    if (!(res2 > 0.0) || !std::isfinite(res2)) {
        dir.clear();
        prev_res2 = 0.0;
        return 0.0;
    }
    if (dir.empty() || !(prev_res2 > 0.0)) {
        dir = res;
    } else {
        const double beta = res2 / prev_res2;
        for (size_t i = 0; i < dir.size(); ++i) dir[i] = res[i] + beta * dir[i];
    }
    const CVector r_dir = linalg::gemv(r_mat, dir);
    const double curvature = std::real(linalg::dot(dir, r_dir));
    prev_res2 = res2;
    if (!(curvature > 0.0) || !std::isfinite(curvature)) {
        dir.clear();  // degenerate direction: skip and restart memory
        return res2;
    }
    const double step = res2 / curvature;
    const CVector& move = along_matrix_direction ? r_dir : dir;
    for (size_t i = 0; i < x.size(); ++i) x[i] += step * move[i];
    return res2;
}

CVector cg_solve(const CMatrix& r_mat, const CVector& p, CVector x0, int max_iters, double tol) {
    CVector dir;
    double prev_res2 = 0.0;
    const double p2 = std::real(linalg::dot(p, p));
    for (int it = 0; it < max_iters; ++it) {
        const double res2 = cg_step(r_mat, p, x0, dir, prev_res2);
        if (res2 <= tol * tol * p2) break;
    }
    return x0;
}

}  // namespace jpais::adaptive
