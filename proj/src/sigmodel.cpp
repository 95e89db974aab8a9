#include "jpais/sigmodel.hpp"

#include <cmath>
#include <stdexcept>

namespace jpais {

namespace {
constexpr double kInvSqrt2 = 0.70710678118654752440;

// block += scale * (mat * taps), with block an M-vector view.
void add_conv(cx* block, const CMatrix& mat, const CVector& taps, cx scale) {
    if (scale == cx{}) return;
    const int m = mat.rows();
    const int l = mat.cols();
    for (int r = 0; r < m; ++r) {
        const cx* row = mat.row(r);
        cx acc{};
        for (int c = 0; c < l; ++c) acc += row[c] * taps[c];
        block[r] += scale * acc;
    }
}

CVector conv_taps(const CMatrix& mat, const CVector& taps) {
    CVector out(mat.rows());
    add_conv(out.data(), mat, taps, cx{1.0, 0.0});
    return out;
}

void add_noise(CVector& v, double variance, Rng& rng) {
    if (variance <= 0.0) return;
    const double s = std::sqrt(variance);
    for (auto& e : v) e += s * complex_gaussian(rng);
}
}  // namespace

cx qpsk_map(int b0, int b1) {
    return {kInvSqrt2 * (1 - 2 * b0), kInvSqrt2 * (1 - 2 * b1)};
}

void qpsk_slice(cx y, int& b0, int& b1) {
    b0 = y.real() < 0.0 ? 1 : 0;
    b1 = y.imag() < 0.0 ? 1 : 0;
}

cx qpsk_hard_decision(cx y) {
    int b0, b1;
    qpsk_slice(y, b0, b1);
    return qpsk_map(b0, b1);
}

cx random_qpsk(Rng& rng) {
    const auto bits = rng();
    return qpsk_map(int(bits & 1u), int((bits >> 1) & 1u));
}

double UserPowers::total() const {
    double t = 0.0;
    for (double b : budget) t += b;
    return t;
}

UserPowers draw_user_powers(const SystemConfig& cfg, Rng& rng) {
    UserPowers p;
    p.budget.resize(cfg.users, cfg.user_power);
    for (int k = 1; k < cfg.users; ++k) {
        const double offset_db = cfg.interferer_std_db * gaussian(rng);
        p.budget[k] = cfg.user_power * std::pow(10.0, offset_db / 10.0);
    }
    return p;
}

CVector PowerAllocation::stacked() const {
    CVector a;
    a.reserve(size_t(users()) * phases());
    for (const auto& ak : amps) a.insert(a.end(), ak.begin(), ak.end());
    return a;
}

void PowerAllocation::set_stacked(const CVector& a) {
    const int np = phases();
    if (int(a.size()) != users() * np) throw std::invalid_argument("set_stacked: length mismatch");
    for (int k = 0; k < users(); ++k)
        for (int j = 0; j < np; ++j) amps[k][j] = a[size_t(k) * np + j];
}

double PowerAllocation::squared_norm() const {
    double s = 0.0;
    for (const auto& ak : amps)
        for (const auto& e : ak) s += std::norm(e);
    return s;
}

void PowerAllocation::normalize_global(double p_total) {
    const double n2 = squared_norm();
    if (!(n2 > 0.0)) throw std::domain_error("normalize_global: zero allocation");
    const double s = std::sqrt(p_total / n2);
    for (auto& ak : amps)
        for (auto& e : ak) e *= s;
}

void PowerAllocation::normalize_individual(const UserPowers& powers) {
    for (int k = 0; k < users(); ++k) {
        double n2 = 0.0;
        for (const auto& e : amps[k]) n2 += std::norm(e);
        if (!(n2 > 0.0)) throw std::domain_error("normalize_individual: zero allocation");
        const double s = std::sqrt(powers.budget[k] / n2);
        for (auto& e : amps[k]) e *= s;
    }
}

PowerAllocation equal_power_allocation(const SystemConfig& cfg, const UserPowers& powers) {
    PowerAllocation a;
    a.amps.resize(cfg.users);
    for (int k = 0; k < cfg.users; ++k)
        a.amps[k].assign(cfg.phases(), cx{std::sqrt(powers.budget[k] / cfg.phases()), 0.0});
    return a;
}

CVector stream_vector(const SystemConfig& cfg, const SignatureSet& sigs, const LinkGains& g,
                      int user, int phase) {
    CVector v(cfg.stacked_len());
    add_conv(v.data() + size_t(phase) * cfg.window(), sigs.conv[user], g.dest_taps(user, phase),
             cx{1.0, 0.0});
    return v;
}

CMatrix stream_matrix(const SystemConfig& cfg, const SignatureSet& sigs, const LinkGains& g) {
    CMatrix m(cfg.stacked_len(), cfg.streams());
    for (int k = 0; k < cfg.users; ++k)
        for (int j = 0; j < cfg.phases(); ++j)
            m.set_col(k * cfg.phases() + j, stream_vector(cfg, sigs, g, k, j));
    return m;
}

CMatrix stream_matrix_user(const SystemConfig& cfg, const SignatureSet& sigs, const LinkGains& g,
                           int user) {
    CMatrix m(cfg.stacked_len(), cfg.phases());
    for (int j = 0; j < cfg.phases(); ++j) m.set_col(j, stream_vector(cfg, sigs, g, user, j));
    return m;
}

cx relay_process(const CVector& relay_reception, const CVector& relay_filter, double gain) {
    if (!(gain > 0.0)) throw std::domain_error("relay_process: zero expected output power");
    return gain * linalg::dot(relay_filter, relay_reception);
}

RelayBank::RelayBank(const SystemConfig& cfg, const SignatureSet& sigs, const LinkGains& g,
                     const PowerAllocation& alloc) {
    const int nr = cfg.relays;
    const int m = cfg.window();
    filters_.assign(nr, std::vector<CVector>(cfg.users));
    gains_.assign(nr, std::vector<double>(cfg.users, 0.0));
    corr_.assign(cfg.users, CMatrix(cfg.phases(), cfg.phases()));
    for (int k = 0; k < cfg.users; ++k) corr_[k](0, 0) = 1.0;
    if (nr == 0) return;

    // Per-relay hop covariance and, for the forwarded-symbol statistics,
    // the cross-relay reception covariance (common transmissions, private
    // receiver noise).
    std::vector<std::vector<CVector>> sig(nr), tail(nr), head(nr);
    for (int j = 0; j < nr; ++j) {
        sig[j].resize(cfg.users);
        tail[j].resize(cfg.users);
        head[j].resize(cfg.users);
        for (int k = 0; k < cfg.users; ++k) {
            sig[j][k] = conv_taps(sigs.conv[k], g.h_sr[k][j]);
            tail[j][k] = conv_taps(sigs.tail[k], g.h_sr[k][j]);
            head[j][k] = conv_taps(sigs.head[k], g.h_sr[k][j]);
        }
    }

    auto reception_cov = [&](int j, int jj) {
        CMatrix c(m, m);
        for (int k = 0; k < cfg.users; ++k) {
            const cx p = alloc.amps[k][0] * std::conj(alloc.amps[k][0]);
            linalg::add_scaled_outer(c, p, sig[j][k], sig[jj][k]);
            linalg::add_scaled_outer(c, p, tail[j][k], tail[jj][k]);
            linalg::add_scaled_outer(c, p, head[j][k], head[jj][k]);
        }
        return c;
    };

    std::vector<linalg::Cholesky> chol;
    std::vector<CMatrix> cov_diag(nr);
    for (int j = 0; j < nr; ++j) {
        cov_diag[j] = reception_cov(j, j);
        double tr = 0.0;
        for (int i = 0; i < m; ++i) tr += std::real(cov_diag[j](i, i));
        const double ridge = cfg.noise_var + 1e-12 * (tr / m + 1.0);
        for (int i = 0; i < m; ++i) cov_diag[j](i, i) += ridge;
        chol.emplace_back(cov_diag[j]);
        for (int k = 0; k < cfg.users; ++k) {
            const CVector x = linalg::scaled(alloc.amps[k][0], sig[j][k]);
            if (linalg::norm2(x) == 0.0) continue;  // dead stream, forwards zero
            CVector w = chol[j].solve(x);
            const double out_power = std::real(linalg::dot(w, linalg::gemv(cov_diag[j], w)));
            if (!(out_power > 0.0)) continue;
            gains_[j][k] = 1.0 / std::sqrt(out_power);
            filters_[j][k] = std::move(w);
        }
    }

    for (int k = 0; k < cfg.users; ++k) {
        CMatrix& c = corr_[k];
        for (int j = 0; j < nr; ++j) {
            if (gains_[j][k] == 0.0) continue;
            const CVector x = linalg::scaled(alloc.amps[k][0], sig[j][k]);
            const cx rho = gains_[j][k] * linalg::dot(filters_[j][k], x);
            c(j + 1, 0) = rho;
            c(0, j + 1) = std::conj(rho);
            c(j + 1, j + 1) = 1.0;  // pinned by the gain
            for (int jj = 0; jj < j; ++jj) {
                if (gains_[jj][k] == 0.0) continue;
                const CMatrix cross = reception_cov(j, jj);
                const cx e = gains_[j][k] * gains_[jj][k] *
                             linalg::dot(filters_[j][k], linalg::gemv(cross, filters_[jj][k]));
                c(j + 1, jj + 1) = e;
                c(jj + 1, j + 1) = std::conj(e);
            }
        }
    }
}

cx RelayBank::forward(int relay, int user, const CVector& relay_reception) const {
    if (gains_[relay][user] == 0.0) return cx{};
    return relay_process(relay_reception, filters_[relay][user], gains_[relay][user]);
}

CVector SymbolFrame::stream_symbols() const {
    const int np = int(relayed.size()) + 1;
    const int users = int(desired.size());
    CVector s(size_t(users) * np);
    for (int k = 0; k < users; ++k) {
        s[size_t(k) * np] = desired[k];
        for (int j = 1; j < np; ++j) s[size_t(k) * np + j] = relayed[j - 1][k];
    }
    return s;
}

CVector ReceivedVector::phase_block(int phase, int window) const {
    return CVector(r.begin() + size_t(phase) * window, r.begin() + size_t(phase + 1) * window);
}

TransmitResult transmit_frame(const SystemConfig& cfg, const SignatureSet& sigs,
                              const LinkGains& g, const RelayBank& relays,
                              const CVector& desired, const PowerAllocation& alloc,
                              const FrameContext& ctx, Rng& rng) {
    if (int(desired.size()) != cfg.users) throw std::invalid_argument("transmit_frame: bad symbol count");
    const int np = cfg.phases();
    const int m = cfg.window();
    const CVector amps = alloc.stacked();
    auto ctx_sym = [&](const CVector& v, int k, int j) -> cx {
        return v.empty() ? cx{} : v[size_t(k) * np + j];
    };
    auto ctx_amp = [&](const CVector& v, int k, int j) -> cx {
        return v.empty() ? cx{} : v[size_t(k) * np + j];
    };

    TransmitResult out;
    out.frame.desired = desired;
    out.frame.relayed.assign(cfg.relays, CVector(cfg.users));

    // Phase-0 broadcast as heard by each relay, then AF forwarding.
    out.relay_rx.assign(cfg.relays, CVector(m));
    for (int j = 0; j < cfg.relays; ++j) {
        CVector& rr = out.relay_rx[j];
        for (int k = 0; k < cfg.users; ++k) {
            add_conv(rr.data(), sigs.conv[k], g.h_sr[k][j], amps[size_t(k) * np] * desired[k]);
            add_conv(rr.data(), sigs.tail[k], g.h_sr[k][j],
                     ctx_amp(ctx.prev_amps, k, 0) * ctx_sym(ctx.prev_stream_symbols, k, 0));
            add_conv(rr.data(), sigs.head[k], g.h_sr[k][j],
                     ctx_amp(ctx.next_amps, k, 0) * ctx_sym(ctx.next_stream_symbols, k, 0));
        }
        add_noise(rr, cfg.noise_var, rng);
        for (int k = 0; k < cfg.users; ++k) out.frame.relayed[j][k] = relays.forward(j, k, rr);
    }

    const CVector stream_syms = out.frame.stream_symbols();
    ReceivedVector& rx = out.rx;
    rx.r.assign(size_t(np) * m, cx{});
    rx.isi.assign(size_t(np) * m, cx{});
    rx.noise.assign(size_t(np) * m, cx{});
    for (int p = 0; p < np; ++p) {
        cx* sig_block = rx.r.data() + size_t(p) * m;
        cx* isi_block = rx.isi.data() + size_t(p) * m;
        for (int k = 0; k < cfg.users; ++k) {
            const size_t c = size_t(k) * np + p;
            add_conv(sig_block, sigs.conv[k], g.dest_taps(k, p), amps[c] * stream_syms[c]);
            add_conv(isi_block, sigs.tail[k], g.dest_taps(k, p),
                     ctx_amp(ctx.prev_amps, k, p) * ctx_sym(ctx.prev_stream_symbols, k, p));
            add_conv(isi_block, sigs.head[k], g.dest_taps(k, p),
                     ctx_amp(ctx.next_amps, k, p) * ctx_sym(ctx.next_stream_symbols, k, p));
        }
    }
    add_noise(rx.noise, cfg.noise_var, rng);
    for (size_t i = 0; i < rx.r.size(); ++i) rx.r[i] += rx.isi[i] + rx.noise[i];
    return out;
}

PacketSimulator::PacketSimulator(const SystemConfig& cfg, const SignatureSet& sigs, ChannelSet& ch,
                                 const RelayBank* static_relays,
                                 const PowerAllocation& initial_alloc, Rng& rng)
    : cfg_(cfg), sigs_(sigs), ch_(ch), static_relays_(static_relays), rng_(rng) {
    desired_.resize(cfg.packet_symbols);
    for (int i = 0; i < cfg.packet_symbols; ++i) {
        desired_[i].resize(cfg.users);
        for (int k = 0; k < cfg.users; ++k) desired_[i][k] = random_qpsk(rng_);
    }
    amp_schedule_.assign(1, initial_alloc.stacked());
    schedule_from_.assign(1, 0);
    if (cfg.relays > 0 && ch_.doppler == 0.0 && static_relays_ == nullptr)
        throw std::invalid_argument("PacketSimulator: static channel needs a relay bank");
}

void PacketSimulator::schedule_amplitudes(int i, const PowerAllocation& alloc) {
    if (!ring_.empty() && i <= ring_.back().index)
        throw std::logic_error("schedule_amplitudes: symbol already generated");
    amp_schedule_.push_back(alloc.stacked());
    schedule_from_.push_back(i);
}

const CVector& PacketSimulator::amps_for(int i) const {
    size_t idx = amp_schedule_.size() - 1;
    while (schedule_from_[idx] > i) --idx;
    return amp_schedule_[idx];
}

PacketSimulator::Slot& PacketSimulator::slot(int i) {
    while (!ring_.empty() && ring_.front().index < i - 3) ring_.pop_front();
    for (auto& s : ring_)
        if (s.index == i) return s;
    // Slots are created strictly in order.
    const int expect = ring_.empty() ? 0 : ring_.back().index + 1;
    if (i != expect) throw std::logic_error("PacketSimulator: non-sequential slot access");
    Slot s;
    s.index = i;
    ring_.push_back(std::move(s));
    return ring_.back();
}

void PacketSimulator::ensure_sources(int i) {
    if (i < 0 || i >= cfg_.packet_symbols) return;
    Slot& s = slot(i);
    if (s.sources_done) return;
    while (next_channel_time_ < i) {
        advance(ch_);
        ++next_channel_time_;
    }
    s.gains = ch_.gains;
    s.amps = amps_for(i);
    if (ch_.doppler != 0.0) {
        PowerAllocation alloc;
        alloc.amps.resize(cfg_.users);
        for (int k = 0; k < cfg_.users; ++k)
            alloc.amps[k] = CVector(s.amps.begin() + size_t(k) * cfg_.phases(),
                                    s.amps.begin() + size_t(k + 1) * cfg_.phases());
        s.relays = RelayBank(cfg_, sigs_, s.gains, alloc);
    }
    s.sources_done = true;
}

void PacketSimulator::ensure_relays(int i) {
    if (i < 0 || i >= cfg_.packet_symbols) return;
    ensure_sources(i);
    ensure_sources(i + 1);
    Slot& s = slot(i);
    if (s.relays_done) return;
    const int np = cfg_.phases();
    const int m = cfg_.window();
    const RelayBank* bank = ch_.doppler != 0.0 ? &s.relays : static_relays_;

    s.relay_rx.assign(cfg_.relays, CVector(m));
    s.stream_syms.assign(size_t(cfg_.users) * np, cx{});
    for (int k = 0; k < cfg_.users; ++k) s.stream_syms[size_t(k) * np] = desired_[i][k];

    const Slot* prev = i > 0 ? &slot(i - 1) : nullptr;
    const Slot* next = i + 1 < cfg_.packet_symbols ? &slot(i + 1) : nullptr;
    for (int j = 0; j < cfg_.relays; ++j) {
        CVector& rr = s.relay_rx[j];
        for (int k = 0; k < cfg_.users; ++k) {
            const size_t c0 = size_t(k) * np;
            add_conv(rr.data(), sigs_.conv[k], s.gains.h_sr[k][j], s.amps[c0] * desired_[i][k]);
            if (prev)
                add_conv(rr.data(), sigs_.tail[k], prev->gains.h_sr[k][j],
                         prev->amps[c0] * desired_[i - 1][k]);
            if (next)
                add_conv(rr.data(), sigs_.head[k], next->gains.h_sr[k][j],
                         next->amps[c0] * desired_[i + 1][k]);
        }
        add_noise(rr, cfg_.noise_var, rng_);
        for (int k = 0; k < cfg_.users; ++k)
            s.stream_syms[size_t(k) * np + j + 1] = bank->forward(j, k, rr);
    }
    s.relays_done = true;
}

void PacketSimulator::ensure_rx(int i) {
    ensure_relays(i - 1);
    ensure_relays(i);
    ensure_relays(i + 1);
    Slot& s = slot(i);
    if (s.rx_done) return;
    const int np = cfg_.phases();
    const int m = cfg_.window();
    const Slot* prev = i > 0 ? &slot(i - 1) : nullptr;
    const Slot* next = i + 1 < cfg_.packet_symbols ? &slot(i + 1) : nullptr;

    ReceivedVector& rx = s.rx;
    rx.r.assign(size_t(np) * m, cx{});
    rx.isi.assign(size_t(np) * m, cx{});
    rx.noise.assign(size_t(np) * m, cx{});
    for (int p = 0; p < np; ++p) {
        cx* sig_block = rx.r.data() + size_t(p) * m;
        cx* isi_block = rx.isi.data() + size_t(p) * m;
        for (int k = 0; k < cfg_.users; ++k) {
            const size_t c = size_t(k) * np + p;
            add_conv(sig_block, sigs_.conv[k], s.gains.dest_taps(k, p),
                     s.amps[c] * s.stream_syms[c]);
            if (prev)
                add_conv(isi_block, sigs_.tail[k], prev->gains.dest_taps(k, p),
                         prev->amps[c] * prev->stream_syms[c]);
            if (next)
                add_conv(isi_block, sigs_.head[k], next->gains.dest_taps(k, p),
                         next->amps[c] * next->stream_syms[c]);
        }
    }
    add_noise(rx.noise, cfg_.noise_var, rng_);
    for (size_t q = 0; q < rx.r.size(); ++q) rx.r[q] += rx.isi[q] + rx.noise[q];
    s.rx_done = true;
}

const ReceivedVector& PacketSimulator::reception(int i) {
    ensure_rx(i);
    return slot(i).rx;
}

const SymbolFrame& PacketSimulator::frame(int i) {
    ensure_relays(i);
    Slot& s = slot(i);
    if (s.frame.desired.empty()) {
        s.frame.desired = desired_[i];
        s.frame.relayed.assign(cfg_.relays, CVector(cfg_.users));
        for (int j = 0; j < cfg_.relays; ++j)
            for (int k = 0; k < cfg_.users; ++k)
                s.frame.relayed[j][k] = s.stream_syms[size_t(k) * cfg_.phases() + j + 1];
    }
    return s.frame;
}

const CVector& PacketSimulator::transmit_amps(int i) {
    ensure_sources(i);
    return slot(i).amps;
}

const LinkGains& PacketSimulator::gains_at(int i) {
    ensure_sources(i);
    return slot(i).gains;
}

const RelayBank& PacketSimulator::relay_bank_at(int i) {
    ensure_sources(i);
    if (ch_.doppler != 0.0) return slot(i).relays;
    static const RelayBank no_relays;
    return static_relays_ ? *static_relays_ : no_relays;
}

}  // namespace jpais
