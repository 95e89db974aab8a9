#ifndef JPAIS_MMSE_HPP
#define JPAIS_MMSE_HPP

#include <vector>

#include "jpais/sigmodel.hpp"

namespace jpais::mmse {

using linalg::CMatrix;
using linalg::CVector;
using linalg::cx;

enum class ConstraintMode { Global, Individual };

/// Second-order model of the received vector for a fixed channel
/// realization: covariance R(a), receiver cross-correlations, and the
/// allocation-side statistics.  Symbols are unit power and independent
/// across users; forwarded symbols carry the relay bank's correlation with
/// the true symbol, and adjacent-symbol spill enters the covariance as an
/// independent contribution.
class ModelMoments {
public:
    ModelMoments(const SystemConfig& cfg, const SignatureSet& sigs, const LinkGains& g,
                 const RelayBank& relays);

    /// Covariance of the stacked reception under allocation a.
    CMatrix covariance(const PowerAllocation& alloc) const;

    /// Cross-correlation matrix E[r b^H], one column per user.
    CMatrix cross_correlation(const PowerAllocation& alloc) const;

    /// Allocation normal-equation pair for the stacked problem under
    /// receive filters W (columns per user).
    void alloc_moments_global(const CMatrix& filters, CMatrix& r_a, CVector& p_a) const;

    /// Per-user allocation pair under that user's receive filter.
    void alloc_moments_user(int user, const CVector& filter, CMatrix& r_a, CVector& p_a) const;

    /// Residual mean-squared error sum over users for (W, a) under the model.
    double cost(const CMatrix& filters, const PowerAllocation& alloc) const;

    const SystemConfig& config() const { return cfg_; }
    const CMatrix& streams() const { return streams_; }          // unweighted stream columns
    const CMatrix& symbol_corr(int user) const { return corr_[user]; }
    const CVector& spill_tail(int user, int phase) const { return tail_[user][phase]; }
    const CVector& spill_head(int user, int phase) const { return head_[user][phase]; }

private:
    const SystemConfig& cfg_;
    CMatrix streams_;                          // stacked_len x streams
    std::vector<CMatrix> corr_;                // [user] (n_r+1)^2 symbol correlation
    std::vector<std::vector<CVector>> tail_;   // [user][phase] stacked_len
    std::vector<std::vector<CVector>> head_;   // [user][phase]
};

/// W = R^{-1} P for the stacked joint design.  Throws when R is not
/// positive definite.
CMatrix mmse_filter_gpc(const CMatrix& covariance, const CMatrix& cross_corr);

/// Single-user column: w = R^{-1} p.
CVector mmse_filter_ipc(const CMatrix& covariance, const CVector& cross_corr);

/// Solves (R_a + ridge I) a = p_a, then rescales to ||a||^2 = p_total.
/// Throws std::domain_error when p_a is zero (constraint unreachable).
CVector mmse_alloc_gpc(const CMatrix& r_a, const CVector& p_a, double ridge, double p_total);

/// Per-user variant with budget p_user.
CVector mmse_alloc_ipc(const CMatrix& r_a, const CVector& p_a, double ridge, double p_user);

struct AlternateResult {
    CMatrix filters;          // stacked_len x users
    PowerAllocation alloc;
    std::vector<double> cost_after_filter;  // model cost after each filter step
    std::vector<double> cost_after_alloc;
};

/// Alternates exact filter and allocation steps from the given initial
/// allocation.  The filter step is the exact minimizer for fixed a, so the
/// model cost is non-increasing across filter steps.
AlternateResult alternate(const ModelMoments& moments, const UserPowers& powers,
                          ConstraintMode mode, int iters, const PowerAllocation& init);

}  // namespace jpais::mmse

#endif
