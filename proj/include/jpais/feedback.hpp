#ifndef JPAIS_FEEDBACK_HPP
#define JPAIS_FEEDBACK_HPP

#include <cstdint>
#include <vector>

#include "jpais/sigmodel.hpp"

namespace jpais::feedback {

using linalg::CVector;
using linalg::cx;

enum class PacketMode { Global, Individual };
enum class CoefficientEncoding {
    Magnitude,  // n_b bits per coefficient; phase folds into the receiver
    RealImag,   // n_b bits each for the real and imaginary parts
};

/// Quantized power-allocation report.  Bits are most-significant first per
/// coefficient, coefficients in stacked allocation order; the bit budget is
/// exactly (coefficients x n_b) for magnitude encoding and twice that for
/// real/imag.
struct FeedbackPacket {
    std::vector<uint8_t> bits;
    int bits_per_coeff = 4;   // n_b
    int users = 0;
    int phases = 0;
    PacketMode mode = PacketMode::Global;
    CoefficientEncoding encoding = CoefficientEncoding::Magnitude;
    double power = 0.0;       // constraint value, known at both ends

    int coefficients() const { return users * phases; }
};

/// Uniform scalar quantization of each coefficient with 2^n_b levels and
/// midpoint reconstruction.  The range is [0, sqrt P] with P the global
/// budget (Global mode) or the owning user's budget (Individual mode); the
/// constraint keeps every coefficient magnitude inside it.
FeedbackPacket quantize(const PowerAllocation& alloc, const UserPowers& powers,
                        int bits_per_coeff, PacketMode mode = PacketMode::Global,
                        CoefficientEncoding enc = CoefficientEncoding::Magnitude);

/// Independent bit flips with probability p_e.
FeedbackPacket bsc_transmit(const FeedbackPacket& pkt, double p_e, Rng& rng);

/// Midpoint reconstruction followed by exact renormalization to the
/// constraint (global norm or per-user budgets).
PowerAllocation dequantize(const FeedbackPacket& pkt, const UserPowers& powers);

/// Downlink fusion of per-user reports of the same global allocation:
/// plain averaging, then renormalization.
PowerAllocation fuse_average(const std::vector<PowerAllocation>& reports, double power);

/// Feedback bits per packet for a mode.
int bit_budget(int users, int phases, int bits_per_coeff, PacketMode mode,
               CoefficientEncoding enc = CoefficientEncoding::Magnitude);

}  // namespace jpais::feedback

#endif
