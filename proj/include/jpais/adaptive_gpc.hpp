#ifndef JPAIS_ADAPTIVE_GPC_HPP
#define JPAIS_ADAPTIVE_GPC_HPP

#include <optional>
#include <vector>

#include "jpais/rls.hpp"
#include "jpais/sigmodel.hpp"

namespace jpais::adaptive {

enum class ChannelEstimateMode {
    PerColumn,   // structured least squares per stream (default)
    MaskedFull,  // literal factored estimate, masked to the sparsity pattern
};

/// Joint RLS channel statistics over all users' streams.
class GpcChannelEstimator {
public:
    GpcChannelEstimator() = default;
    GpcChannelEstimator(const SystemConfig& cfg, const SignatureSet& sigs,
                        ChannelEstimateMode mode, double delta = 1e-3);

    /// Accumulates one symbol: stats use the code-matched reception and the
    /// symbol-weighted amplitudes u = B a; then refreshes the tap estimates.
    void update(const SystemConfig& cfg, const SignatureSet& sigs, const CVector& r,
                const CVector& stream_syms, const CVector& amps);

    const CVector& taps(int user, int phase) const { return est_[user][phase]; }
    CMatrix packed_estimate(const SystemConfig& cfg) const;  // stacked structured matrix

    const CMatrix& corr_matrix() const { return r_h_; }
    const CMatrix& corr_inv() const { return r_h_inv_; }
    const CMatrix& cross_stats() const { return p_h_; }
    int restarts() const { return restarts_; }

private:
    ChannelEstimateMode mode_ = ChannelEstimateMode::PerColumn;
    double delta_ = 1e-3;
    CMatrix p_h_;      // K(n_r+1)L x K(n_r+1)
    CMatrix r_h_;      // K(n_r+1) square, forward statistics
    CMatrix r_h_inv_;  // inversion-lemma track of r_h_^{-1}
    CMatrix code_gram_inv_;  // regularized inverse of the stacked code Gram (MaskedFull)
    std::vector<std::vector<CVector>> est_;  // [user][phase] L taps
    int restarts_ = 0;

    void restart();
};

/// Conjugate-gradient power allocation over the stacked streams.
struct GpcAllocState {
    CMatrix r_a;        // K(n_r+1) square
    CVector p_a;
    CVector alloc;      // current constrained allocation
    CVector unnormalized;  // last solution before the norm rescale
    CVector cg_dir;
    double cg_prev_res2 = 0.0;
    int inner_iters = 1;
    bool paper_step_variant = false;
};

struct GpcState {
    JointRlsFilter filter;
    GpcAllocState alloc;
    GpcChannelEstimator channel;
    double forgetting = 0.998;
};

GpcState make_gpc_state(const SystemConfig& cfg, const SignatureSet& sigs,
                        const UserPowers& powers,
                        ChannelEstimateMode mode = ChannelEstimateMode::PerColumn);

/// Matched-filter initial columns built from the spreading codes.
CMatrix matched_filter_bank(const SystemConfig& cfg, const SignatureSet& sigs);

void gpc_filter_update(GpcState& st, const CVector& r, const CVector& b_ref);

/// Allocation regressor U = B^H H^H C^H W from the current filter and
/// channel estimate; reference symbols stand in for the forwarded ones.
CMatrix gpc_alloc_regressor(const GpcState& st, const SystemConfig& cfg,
                            const SignatureSet& sigs, const CVector& b_ref);

/// Rank-update of the allocation statistics, one (or more) CG steps, exact
/// rescale to the global budget.
void gpc_alloc_update(GpcState& st, const CMatrix& regressor, const CVector& b_ref,
                      double p_total);

void gpc_channel_update(GpcState& st, const SystemConfig& cfg, const SignatureSet& sigs,
                        const CVector& r, const CVector& b_ref);

struct PacketResult {
    std::vector<std::vector<int>> bits;  // [user] detected bits, 2 per data symbol
    std::vector<std::vector<int>> sent_bits;
    PowerAllocation final_alloc;
    double mean_sinr_num = 0.0;   // accumulated |E[b* y]| pieces for metrics
    int restarts = 0;
    std::vector<cx> outputs_user0;   // filter outputs over data symbols (user 0)
    std::vector<cx> symbols_user0;
};

struct PacketTrace {
    std::vector<double> filter_norm;
    std::vector<CVector> alloc;
};

enum class AllocationRole { Adaptive, Frozen };

/// Runs one packet of the joint adaptive receiver: training then
/// decision-directed, per-symbol filter / allocation / channel updates, the
/// allocation applied at the transmitter with a short feedback lag.
/// Frozen allocation reproduces the equal-power cooperative baseline.
PacketResult gpc_run_packet(const SystemConfig& cfg, const SignatureSet& sigs, ChannelSet& ch,
                            const UserPowers& powers, Rng& rng,
                            AllocationRole role = AllocationRole::Adaptive,
                            ChannelEstimateMode mode = ChannelEstimateMode::PerColumn,
                            PacketTrace* trace = nullptr);

}  // namespace jpais::adaptive

#endif
