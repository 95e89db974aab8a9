#include "jpais/feedback.hpp"

#include <cmath>
#include <stdexcept>

namespace jpais::feedback {

namespace {
void push_codeword(std::vector<uint8_t>& bits, int value, int width) {
    for (int b = width - 1; b >= 0; --b) bits.push_back(uint8_t((value >> b) & 1));
}

int read_codeword(const std::vector<uint8_t>& bits, size_t offset, int width) {
    int v = 0;
    for (int b = 0; b < width; ++b) v = (v << 1) | bits[offset + b];
    return v;
}

int quantize_scalar(double x, double lo, double hi, int levels) {
    if (hi <= lo) return 0;
    const double step = (hi - lo) / levels;
    int idx = int(std::floor((x - lo) / step));
    if (idx < 0) idx = 0;
    if (idx >= levels) idx = levels - 1;
    return idx;
}

double reconstruct_scalar(int idx, double lo, double hi, int levels) {
    const double step = (hi - lo) / levels;
    return lo + (idx + 0.5) * step;
}
}  // namespace

int bit_budget(int users, int phases, int bits_per_coeff, PacketMode mode,
               CoefficientEncoding enc) {
    const int per_coeff = enc == CoefficientEncoding::Magnitude ? bits_per_coeff : 2 * bits_per_coeff;
    const int coeffs = mode == PacketMode::Global ? users * phases : phases;
    return coeffs * per_coeff;
}

FeedbackPacket quantize(const PowerAllocation& alloc, const UserPowers& powers,
                        int bits_per_coeff, PacketMode mode, CoefficientEncoding enc) {
    if (bits_per_coeff < 1) throw std::invalid_argument("quantize: need at least one bit");
    FeedbackPacket pkt;
    pkt.bits_per_coeff = bits_per_coeff;
    pkt.users = alloc.users();
    pkt.phases = alloc.phases();
    pkt.mode = mode;
    pkt.encoding = enc;
    pkt.power = powers.total();
    const int levels = 1 << bits_per_coeff;
    for (int k = 0; k < alloc.users(); ++k) {
        const double bound =
            std::sqrt(mode == PacketMode::Global ? pkt.power : powers.budget[k]);
        for (const auto& a : alloc.amps[k]) {
            if (enc == CoefficientEncoding::Magnitude) {
                push_codeword(pkt.bits, quantize_scalar(std::abs(a), 0.0, bound, levels),
                              bits_per_coeff);
            } else {
                push_codeword(pkt.bits, quantize_scalar(a.real(), -bound, bound, levels),
                              bits_per_coeff);
                push_codeword(pkt.bits, quantize_scalar(a.imag(), -bound, bound, levels),
                              bits_per_coeff);
            }
        }
    }
    return pkt;
}

FeedbackPacket bsc_transmit(const FeedbackPacket& pkt, double p_e, Rng& rng) {
    if (p_e < 0.0 || p_e > 1.0) throw std::invalid_argument("bsc_transmit: p_e out of range");
    FeedbackPacket out = pkt;
    for (auto& b : out.bits)
        if (uniform01(rng) < p_e) b ^= 1;
    return out;
}

PowerAllocation dequantize(const FeedbackPacket& pkt, const UserPowers& powers) {
    const int per_coeff =
        pkt.encoding == CoefficientEncoding::Magnitude ? pkt.bits_per_coeff : 2 * pkt.bits_per_coeff;
    if (int(pkt.bits.size()) != pkt.coefficients() * per_coeff)
        throw std::invalid_argument("dequantize: malformed packet length");
    const int levels = 1 << pkt.bits_per_coeff;

    PowerAllocation alloc;
    alloc.amps.assign(pkt.users, CVector(pkt.phases));
    size_t off = 0;
    for (int k = 0; k < pkt.users; ++k) {
        const double bound =
            std::sqrt(pkt.mode == PacketMode::Global ? pkt.power : powers.budget[k]);
        for (int j = 0; j < pkt.phases; ++j) {
            if (pkt.encoding == CoefficientEncoding::Magnitude) {
                const int cw = read_codeword(pkt.bits, off, pkt.bits_per_coeff);
                off += pkt.bits_per_coeff;
                alloc.amps[k][j] = reconstruct_scalar(cw, 0.0, bound, levels);
            } else {
                const int cr = read_codeword(pkt.bits, off, pkt.bits_per_coeff);
                off += pkt.bits_per_coeff;
                const int ci = read_codeword(pkt.bits, off, pkt.bits_per_coeff);
                off += pkt.bits_per_coeff;
                alloc.amps[k][j] = cx{reconstruct_scalar(cr, -bound, bound, levels),
                                      reconstruct_scalar(ci, -bound, bound, levels)};
            }
        }
    }
    if (pkt.mode == PacketMode::Global)
        alloc.normalize_global(pkt.power);
    else
        alloc.normalize_individual(powers);
    return alloc;
}

PowerAllocation fuse_average(const std::vector<PowerAllocation>& reports, double power) {
    if (reports.empty()) throw std::invalid_argument("fuse_average: no reports");
    PowerAllocation fused = reports.front();
    for (size_t r = 1; r < reports.size(); ++r)
        for (int k = 0; k < fused.users(); ++k)
            for (int j = 0; j < fused.phases(); ++j) fused.amps[k][j] += reports[r].amps[k][j];
    const double inv = 1.0 / double(reports.size());
    for (auto& user_amps : fused.amps)
        for (auto& a : user_amps) a *= inv;
    fused.normalize_global(power);
    return fused;
}

}  // namespace jpais::feedback
