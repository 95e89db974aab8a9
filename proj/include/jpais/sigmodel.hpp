#ifndef JPAIS_SIGMODEL_HPP
#define JPAIS_SIGMODEL_HPP

#include <deque>
#include <optional>
#include <vector>

#include "jpais/channel.hpp"
#include "jpais/config.hpp"
#include "jpais/linalg.hpp"
#include "jpais/rng.hpp"
#include "jpais/signature.hpp"

namespace jpais {

// -- QPSK -----------------------------------------------------------------

/// Gray mapping (b0, b1) -> ((1 - 2 b0) + j (1 - 2 b1)) / sqrt 2.
cx qpsk_map(int b0, int b1);
void qpsk_slice(cx y, int& b0, int& b1);
cx qpsk_hard_decision(cx y);
cx random_qpsk(Rng& rng);

// -- power bookkeeping ----------------------------------------------------

/// Per-user link budgets; interferers (k > 0) carry log-normal offsets
/// around the reference budget of user 0.
struct UserPowers {
    std::vector<double> budget;  // P_{A,k}, linear
    double total() const;        // P_T
};

UserPowers draw_user_powers(const SystemConfig& cfg, Rng& rng);

/// Amplitudes of every transmission link, one (n_r+1)-vector per user.
/// Entry 0 is the source link, entry j >= 1 relay j.
struct PowerAllocation {
    std::vector<CVector> amps;  // [user][phase]

    int users() const { return int(amps.size()); }
    int phases() const { return amps.empty() ? 0 : int(amps[0].size()); }
    CVector stacked() const;
    void set_stacked(const CVector& a);
    double squared_norm() const;

    /// Rescales the stacked vector to meet ||a||^2 = p_total exactly.
    void normalize_global(double p_total);
    /// Rescales each user's vector to meet ||a_k||^2 = budget[k] exactly.
    void normalize_individual(const UserPowers& powers);
};

/// Equal split of each user's budget across its links.
PowerAllocation equal_power_allocation(const SystemConfig& cfg, const UserPowers& powers);

// -- stream geometry --------------------------------------------------------

/// Signal vector of stream (user, phase): the user's chip convolution with
/// the phase's destination taps, embedded in that phase's block of the
/// stacked window.
CVector stream_vector(const SystemConfig& cfg, const SignatureSet& sigs, const LinkGains& g,
                      int user, int phase);

/// All stream vectors as columns, stream index c = user * (n_r+1) + phase.
/// Equals the product of the stacked code matrix with the stacked channel
/// matrix.
CMatrix stream_matrix(const SystemConfig& cfg, const SignatureSet& sigs, const LinkGains& g);

/// Per-user slice of stream_matrix: (n_r+1)M x (n_r+1).
CMatrix stream_matrix_user(const SystemConfig& cfg, const SignatureSet& sigs, const LinkGains& g,
                           int user);

// -- relays -----------------------------------------------------------------

/// Hop-local MMSE receive filters at every relay plus the second-order
/// statistics of the forwarded symbols.  The forwarded symbol of stream
/// (user k, relay j) is gain * filter^H * (relay reception); the gain pins
/// its expected power to one so the power allocation carries all link
/// weighting, and the filtered noise/interference residue rides along.
class RelayBank {
public:
    RelayBank() = default;

    /// Builds filters and statistics for the given channel realization and
    /// source amplitudes (entry (k,0) of the allocation at build time).
    RelayBank(const SystemConfig& cfg, const SignatureSet& sigs, const LinkGains& g,
              const PowerAllocation& alloc);

    bool empty() const { return filters_.empty(); }
    int relays() const { return int(filters_.size()); }

    const CVector& filter(int relay, int user) const { return filters_[relay][user]; }
    double gain(int relay, int user) const { return gains_[relay][user]; }

    /// Forwarded-symbol correlation matrix of one user over its phases:
    /// entry (0,0) = 1, entry (p,q) = E[beta_p beta_q^*] where beta_0 is the
    /// user's symbol and beta_j the relay-(j-1) forwarded symbol.
    const CMatrix& symbol_corr(int user) const { return corr_[user]; }

    /// Applies relay processing to an actual reception.
    cx forward(int relay, int user, const CVector& relay_reception) const;

private:
    std::vector<std::vector<CVector>> filters_;  // [relay][user], length M
    std::vector<std::vector<double>> gains_;     // [relay][user]
    std::vector<CMatrix> corr_;                  // [user], (n_r+1) square
};

/// AF processing of one reception: gain-normalized filter output.  Throws
/// std::domain_error when the filter has zero expected output power.
cx relay_process(const CVector& relay_reception, const CVector& relay_filter, double gain);

// -- per-symbol transmission -------------------------------------------------

/// Desired and relayed symbols of one symbol index.
struct SymbolFrame {
    CVector desired;                      // K entries
    std::vector<CVector> relayed;         // [relay][user]

    /// Stream-ordered symbol vector (the diagonal of the stacked symbol
    /// matrix): entry (k, j) = desired[k] for j = 0, relayed[j-1][k] else.
    CVector stream_symbols() const;
};

struct ReceivedVector {
    CVector r;      // (n_r+1)M stacked samples
    CVector isi;    // adjacent-symbol spill, same length
    CVector noise;  // AWGN, same length

    CVector phase_block(int phase, int window) const;
};

/// Neighbor context for the adjacent-symbol spill terms.  Empty vectors mean
/// a packet boundary (no neighbor).
struct FrameContext {
    CVector prev_stream_symbols;
    CVector next_stream_symbols;
    CVector prev_amps;
    CVector next_amps;
};

struct TransmitResult {
    ReceivedVector rx;
    SymbolFrame frame;               // with relayed symbols filled in
    std::vector<CVector> relay_rx;   // [relay] M-vector heard in phase 0
};

/// Simulates all hops of one symbol: phase-0 broadcast to destination and
/// relays, AF forwarding, stacked destination reception with ISI and fresh
/// noise.
TransmitResult transmit_frame(const SystemConfig& cfg, const SignatureSet& sigs,
                              const LinkGains& g, const RelayBank& relays,
                              const CVector& desired, const PowerAllocation& alloc,
                              const FrameContext& ctx, Rng& rng);

// -- packet pipeline ----------------------------------------------------------

/// Sequential per-symbol generator for a whole packet.  Transmit amplitudes
/// may be rescheduled while the packet runs (adaptive feedback); symbol m
/// must have its amplitudes set before reception(m - 2) is requested because
/// the spill of symbol m+1 and the relay lookahead enter reception m.
class PacketSimulator {
public:
    PacketSimulator(const SystemConfig& cfg, const SignatureSet& sigs, ChannelSet& ch,
                    const RelayBank* static_relays, const PowerAllocation& initial_alloc,
                    Rng& rng);

    /// Overrides the transmit amplitudes of symbol i and later (allowed only
    /// for i not yet generated).
    void schedule_amplitudes(int i, const PowerAllocation& alloc);

    const ReceivedVector& reception(int i);
    const SymbolFrame& frame(int i);
    const CVector& transmit_amps(int i);           // stream-ordered amplitudes
    const LinkGains& gains_at(int i);
    const RelayBank& relay_bank_at(int i);

    const CVector& desired_symbols(int i) const { return desired_[i]; }
    int packet_symbols() const { return cfg_.packet_symbols; }

private:
    struct Slot {
        int index = -1;
        LinkGains gains;
        RelayBank relays;                 // rebuilt per symbol when fading
        CVector amps;                     // stream-ordered
        CVector stream_syms;              // desired + forwarded
        std::vector<CVector> relay_rx;
        ReceivedVector rx;
        SymbolFrame frame;
        bool sources_done = false;
        bool relays_done = false;
        bool rx_done = false;
    };

    Slot& slot(int i);
    const CVector& amps_for(int i) const;
    void ensure_sources(int i);
    void ensure_relays(int i);
    void ensure_rx(int i);

    const SystemConfig& cfg_;
    const SignatureSet& sigs_;
    ChannelSet& ch_;
    const RelayBank* static_relays_;
    Rng& rng_;
    std::vector<CVector> desired_;          // all packet symbols, pre-drawn
    std::vector<CVector> amp_schedule_;     // amplitude breakpoints
    std::vector<int> schedule_from_;        // first symbol of each breakpoint
    std::deque<Slot> ring_;
    int next_channel_time_ = 0;
};

}  // namespace jpais

#endif
