#ifndef JPAIS_CHANNEL_HPP
#define JPAIS_CHANNEL_HPP

#include <vector>

#include "jpais/config.hpp"
#include "jpais/linalg.hpp"
#include "jpais/rng.hpp"

namespace jpais {

using linalg::CMatrix;
using linalg::CVector;
using linalg::cx;

/// One multipath link: L chip-spaced taps with a fixed power-delay profile.
/// When the Doppler rate is zero the realization is frozen and normalized to
/// exactly unit energy; otherwise each tap rides a Clarke sum-of-sinusoids
/// process with unit average energy per link.
class FadingLink {
public:
    FadingLink() = default;
    FadingLink(int paths, double doppler, Rng& rng);

    /// Taps sampled at time t in symbol units (fractional t selects the
    /// phase slot within a symbol).  For doppler == 0 the result is
    /// time-invariant.
    CVector taps_at(double t) const;

    int paths() const { return int(pdp_amp_.size()); }
    double doppler() const { return doppler_; }

private:
    double doppler_ = 0.0;
    std::vector<double> pdp_amp_;       // per-tap amplitude, sum of squares = 1
    CVector static_taps_;               // used when doppler == 0
    // Oscillator bank per tap: stratified arrival angles plus random phases.
    std::vector<std::vector<double>> osc_cos_;
    std::vector<std::vector<double>> osc_phase_;
};

/// Tap realizations of every link at one symbol instant.
struct LinkGains {
    int users = 0;
    int relays = 0;
    int paths = 0;
    std::vector<CVector> h_sd;               // [user]
    std::vector<std::vector<CVector>> h_sr;  // [user][relay]
    std::vector<std::vector<CVector>> h_rd;  // [user][relay]

    int phases() const { return relays + 1; }

    /// Destination-side taps of stream (user k, phase j): j = 0 is the
    /// source link, j >= 1 relay j-1.
    const CVector& dest_taps(int user, int phase) const {
        return phase == 0 ? h_sd[user] : h_rd[user][phase - 1];
    }
};

/// Fading processes of all links plus the current per-symbol realization.
/// Destination phase-j links are sampled at the reception instant of their
/// phase slot.
struct ChannelSet {
    double doppler = 0.0;
    double time = 0.0;
    std::vector<FadingLink> source_dest;
    std::vector<std::vector<FadingLink>> source_relay;
    std::vector<std::vector<FadingLink>> relay_dest;
    LinkGains gains;
};

/// Draws all links with random exponential power-delay profiles.
ChannelSet draw_channels(const SystemConfig& cfg, Rng& rng);

/// Advances every link by one symbol interval and refreshes the cached
/// realization.  doppler == 0 leaves the set unchanged.
void advance(ChannelSet& ch);

/// Per-user structured channel matrix: (n_r+1)L x (n_r+1), column j holds
/// the destination taps of phase j in rows [jL, (j+1)L).
CMatrix pack_Hk(const LinkGains& g, int user);

/// Stacked block-diagonal channel matrix: K(n_r+1)L x K(n_r+1).
CMatrix pack_HT(const LinkGains& g);

}  // namespace jpais

#endif
