#ifndef JPAIS_RLS_HPP
#define JPAIS_RLS_HPP

#include "jpais/linalg.hpp"

namespace jpais::adaptive {

using linalg::CMatrix;
using linalg::CVector;
using linalg::cx;

/// Exponentially-weighted RLS for a bank of receive filters sharing one
/// regressor stream (the stacked reception).  The inverse correlation is
/// common to all columns; one rank-one inversion-lemma update per symbol.
class JointRlsFilter {
public:
    JointRlsFilter() = default;
    JointRlsFilter(CMatrix initial_filters, double forgetting, double delta);

    /// One update with regressor r and per-column references b.  A zero
    /// regressor leaves the state unchanged; a non-positive or non-finite
    /// gain denominator restarts the inverse correlation.
    void update(const CVector& r, const CVector& b);

    /// A-priori outputs W^H r (before the pending update).
    CVector outputs(const CVector& r) const;

    const CMatrix& filters() const { return filters_; }
    const CMatrix& inv_corr() const { return inv_corr_; }
    int restarts() const { return restarts_; }

private:
    CMatrix filters_;   // dim x columns
    CMatrix inv_corr_;  // dim x dim, kept Hermitian
    double forgetting_ = 1.0;
    double delta_ = 1e-3;
    int restarts_ = 0;
};

/// One conjugate-gradient step for the Hermitian system R x = p with a
/// fresh residual and optional direction memory (Polak-style beta from the
/// previous residual energy).  Returns the new residual energy; x is
/// updated in place.  Degenerate curvature leaves x unchanged.
double cg_step(const CMatrix& r_mat, const CVector& p, CVector& x, CVector& dir,
               double& prev_res2, bool along_matrix_direction = false);

/// Runs cg_step to convergence on frozen statistics.
CVector cg_solve(const CMatrix& r_mat, const CVector& p, CVector x0, int max_iters, double tol);

}  // namespace jpais::adaptive

#endif
