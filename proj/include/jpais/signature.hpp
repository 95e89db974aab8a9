#ifndef JPAIS_SIGNATURE_HPP
#define JPAIS_SIGNATURE_HPP

#include <vector>

#include "jpais/config.hpp"
#include "jpais/linalg.hpp"
#include "jpais/rng.hpp"

namespace jpais {

using linalg::CMatrix;
using linalg::CVector;
using linalg::cx;

/// Per-user spreading structures.  conv[k] is the M x L matrix whose column
/// l is the code shifted down by l chips; block[k] repeats it on the
/// diagonal once per phase; stacked is the horizontal concatenation of all
/// users' block matrices.  head/tail hold the adjacent-symbol spill of the
/// same chip convolution: tail[k] carries the previous symbol's last chips
/// into the first L-1 window positions, head[k] the next symbol's first
/// chips into the last L-1 positions.
struct SignatureSet {
    std::vector<CVector> codes;   // K codes of N chips, +-1/sqrt(N)
    std::vector<CMatrix> conv;    // K of M x L
    std::vector<CMatrix> tail;    // K of M x L
    std::vector<CMatrix> head;    // K of M x L
    std::vector<CMatrix> block;   // K of (n_r+1)M x (n_r+1)L
    CMatrix stacked;              // (n_r+1)M x K(n_r+1)L
    std::vector<CMatrix> gram_inv;  // K of L x L, (conv^H conv)^-1
};

/// Draws K distinct random binary codes at unit energy and assembles the
/// convolution structures.
SignatureSet build_signatures(const SystemConfig& cfg, Rng& rng);

/// Convolution matrix of an arbitrary code (column l = code shifted by l).
CMatrix code_conv_matrix(const CVector& code, int paths);
CMatrix code_tail_matrix(const CVector& code, int paths);
CMatrix code_head_matrix(const CVector& code, int paths);

}  // namespace jpais

#endif
