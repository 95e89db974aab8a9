#include "jpais/channel.hpp"

#include <cmath>

namespace jpais {

namespace {
constexpr int kOscillators = 32;
constexpr double kTwoPi = 6.283185307179586476925286766559;
}  // namespace

FadingLink::FadingLink(int paths, double doppler, Rng& rng) : doppler_(doppler) {
    // Random exponential power-delay profile, decay constant in [0, 1].
    const double decay = uniform01(rng);
    pdp_amp_.resize(paths);
    double total = 0.0;
    for (int l = 0; l < paths; ++l) {
        pdp_amp_[l] = std::exp(-decay * l);
        total += pdp_amp_[l] * pdp_amp_[l];
    }
    for (auto& a : pdp_amp_) a /= std::sqrt(total);

    if (doppler_ == 0.0) {
        static_taps_.resize(paths);
        double energy = 0.0;
        for (int l = 0; l < paths; ++l) {
            static_taps_[l] = pdp_amp_[l] * complex_gaussian(rng);
            energy += std::norm(static_taps_[l]);
        }
        const double inv = 1.0 / std::sqrt(energy);
        for (auto& h : static_taps_) h *= inv;  // exact unit energy
        return;
    }

    osc_cos_.resize(paths);
    osc_phase_.resize(paths);
    for (int l = 0; l < paths; ++l) {
        osc_cos_[l].resize(kOscillators);
        osc_phase_[l].resize(kOscillators);
        const double jitter = uniform01(rng);  // stratified arrival angles
        for (int q = 0; q < kOscillators; ++q) {
            osc_cos_[l][q] = std::cos(kTwoPi * (q + jitter) / kOscillators);
            osc_phase_[l][q] = kTwoPi * uniform01(rng);
        }
    }
}

CVector FadingLink::taps_at(double t) const {
    if (doppler_ == 0.0) return static_taps_;
    const int paths = int(pdp_amp_.size());
    CVector h(paths);
    const double arg_scale = kTwoPi * doppler_ * t;
    const double amp = 1.0 / std::sqrt(double(kOscillators));
    for (int l = 0; l < paths; ++l) {
        double re = 0.0, im = 0.0;
        for (int q = 0; q < kOscillators; ++q) {
            const double ph = arg_scale * osc_cos_[l][q] + osc_phase_[l][q];
            re += std::cos(ph);
            im += std::sin(ph);
        }
        h[l] = pdp_amp_[l] * amp * cx{re, im};
    }
    return h;
}

namespace {
void refresh(ChannelSet& ch) {
    LinkGains& g = ch.gains;
    const int np = g.phases();
    for (int k = 0; k < g.users; ++k) {
        g.h_sd[k] = ch.source_dest[k].taps_at(ch.time);
        for (int j = 0; j < g.relays; ++j) {
            // Relays listen in phase 0; relay j transmits in phase j+1.
            g.h_sr[k][j] = ch.source_relay[k][j].taps_at(ch.time);
            g.h_rd[k][j] = ch.relay_dest[k][j].taps_at(ch.time + double(j + 1) / np);
        }
    }
}
}  // namespace

ChannelSet draw_channels(const SystemConfig& cfg, Rng& rng) {
    cfg.validate();
    ChannelSet ch;
    ch.doppler = cfg.doppler;
    ch.time = 0.0;
    ch.gains.users = cfg.users;
    ch.gains.relays = cfg.relays;
    ch.gains.paths = cfg.paths;

    ch.source_dest.resize(cfg.users);
    ch.source_relay.assign(cfg.users, std::vector<FadingLink>(cfg.relays));
    ch.relay_dest.assign(cfg.users, std::vector<FadingLink>(cfg.relays));
    ch.gains.h_sd.resize(cfg.users);
    ch.gains.h_sr.assign(cfg.users, std::vector<CVector>(cfg.relays));
    ch.gains.h_rd.assign(cfg.users, std::vector<CVector>(cfg.relays));

    for (int k = 0; k < cfg.users; ++k) {
        ch.source_dest[k] = FadingLink(cfg.paths, cfg.doppler, rng);
        for (int j = 0; j < cfg.relays; ++j) {
            ch.source_relay[k][j] = FadingLink(cfg.paths, cfg.doppler, rng);
            ch.relay_dest[k][j] = FadingLink(cfg.paths, cfg.doppler, rng);
        }
    }
    refresh(ch);
    return ch;
}

void advance(ChannelSet& ch) {
    if (ch.doppler == 0.0) return;
    ch.time += 1.0;
    refresh(ch);
}

CMatrix pack_Hk(const LinkGains& g, int user) {
    const int np = g.phases();
    CMatrix h(np * g.paths, np);
    for (int j = 0; j < np; ++j) {
        const CVector& taps = g.dest_taps(user, j);
        for (int l = 0; l < g.paths; ++l) h(j * g.paths + l, j) = taps[l];
    }
    return h;
}

CMatrix pack_HT(const LinkGains& g) {
    const int np = g.phases();
    CMatrix h(g.users * np * g.paths, g.users * np);
    for (int k = 0; k < g.users; ++k) {
        const CMatrix hk = pack_Hk(g, k);
        for (int r = 0; r < hk.rows(); ++r)
            for (int c = 0; c < hk.cols(); ++c)
                h(k * np * g.paths + r, k * np + c) = hk(r, c);
    }
    return h;
}

}  // namespace jpais
