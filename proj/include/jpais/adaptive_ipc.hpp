#ifndef JPAIS_ADAPTIVE_IPC_HPP
#define JPAIS_ADAPTIVE_IPC_HPP

#include "jpais/adaptive_gpc.hpp"

namespace jpais::adaptive {

/// Per-user RLS channel statistics (one user's streams only).
class IpcChannelEstimator {
public:
    IpcChannelEstimator() = default;
    IpcChannelEstimator(const SystemConfig& cfg, double delta = 1e-3);

    void update(const SystemConfig& cfg, const SignatureSet& sigs, int user, const CVector& r,
                cx ref_symbol, const CVector& user_amps);

    const CVector& taps(int phase) const { return est_[phase]; }
    const CMatrix& corr_matrix() const { return r_h_; }
    const CMatrix& corr_inv() const { return r_h_inv_; }
    int restarts() const { return restarts_; }

private:
    double delta_ = 1e-3;
    CMatrix p_h_;      // (n_r+1)L x (n_r+1)
    CMatrix r_h_;      // (n_r+1) square
    CMatrix r_h_inv_;
    std::vector<CVector> est_;  // [phase] L taps
    int restarts_ = 0;

    void restart();
};

/// RLS power allocation under one user's norm constraint.
struct IpcAllocState {
    CMatrix inv_corr;   // (n_r+1) square
    CVector alloc;      // (n_r+1)
    int skipped = 0;
};

enum class PhiMode { Shared, PerUser };

struct IpcState {
    // Uplink mode: one filter bank with a common inverse correlation.
    // Distributed mode: independent single-column banks, one per user.
    JointRlsFilter shared_filter;
    std::vector<JointRlsFilter> user_filters;
    PhiMode phi_mode = PhiMode::Shared;
    std::vector<IpcAllocState> alloc;          // [user]
    std::vector<IpcChannelEstimator> channel;  // [user]
    double forgetting = 0.998;

    CVector filter_of(int user) const;
};

IpcState make_ipc_state(const SystemConfig& cfg, const SignatureSet& sigs,
                        const UserPowers& powers, PhiMode phi_mode = PhiMode::Shared);

void ipc_filter_update(IpcState& st, const CVector& r, const CVector& b_ref);

/// Effective regressor of user k: conj(ref) * (per-phase code/channel
/// projections of that user's filter).
CVector ipc_alloc_regressor(const IpcState& st, const SystemConfig& cfg,
                            const SignatureSet& sigs, int user, cx ref_symbol);

void ipc_alloc_update(IpcState& st, int user, const CVector& regressor, cx ref_symbol,
                      double budget, double forgetting);

void ipc_channel_update(IpcState& st, const SystemConfig& cfg, const SignatureSet& sigs, int user,
                        const CVector& r, cx ref_symbol);

/// Per-user adaptive receiver over one packet; users outside the selection
/// keep the equal-power allocation.  An empty selection selects everyone.
PacketResult ipc_run_packet(const SystemConfig& cfg, const SignatureSet& sigs, ChannelSet& ch,
                            const UserPowers& powers, Rng& rng,
                            AllocationRole role = AllocationRole::Adaptive,
                            PhiMode phi_mode = PhiMode::Shared,
                            const std::vector<int>& selection = {},
                            PacketTrace* trace = nullptr);

}  // namespace jpais::adaptive

#endif
