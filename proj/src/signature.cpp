#include "jpais/signature.hpp"

#include <cmath>
#include <set>

namespace jpais {

CMatrix code_conv_matrix(const CVector& code, int paths) {
    const int n = int(code.size());
    const int m = n + paths - 1;
    CMatrix d(m, paths);
    for (int l = 0; l < paths; ++l)
        for (int c = 0; c < n; ++c) d(c + l, l) = code[c];
    return d;
}

CMatrix code_tail_matrix(const CVector& code, int paths) {
    // Window position p < L-1 receives chip (N + p - l) of the previous
    // symbol through tap l, for l > p.
    const int n = int(code.size());
    const int m = n + paths - 1;
    CMatrix t(m, paths);
    for (int p = 0; p < paths - 1; ++p)
        for (int l = p + 1; l < paths; ++l) {
            const int c = n + p - l;
            if (c >= 0 && c < n) t(p, l) = code[c];
        }
    return t;
}

CMatrix code_head_matrix(const CVector& code, int paths) {
    // Window position p >= N receives chip (p - N - l) of the next symbol
    // through tap l, for l <= p - N.
    const int n = int(code.size());
    const int m = n + paths - 1;
    CMatrix h(m, paths);
    for (int p = n; p < m; ++p)
        for (int l = 0; l <= p - n && l < paths; ++l) {
            const int c = p - n - l;
            if (c >= 0 && c < n) h(p, l) = code[c];
        }
    return h;
}

SignatureSet build_signatures(const SystemConfig& cfg, Rng& rng) {
    cfg.validate();
    const int k_users = cfg.users;
    const int n = cfg.gain;
    const int paths = cfg.paths;
    const int phases = cfg.phases();
    const int m = cfg.window();

    SignatureSet s;
    s.codes.reserve(k_users);
    std::set<std::vector<int>> seen;
    const double amp = 1.0 / std::sqrt(double(n));
    while (int(s.codes.size()) < k_users) {
        std::vector<int> bits(n);
        for (auto& b : bits) b = (rng() >> 40) & 1u;
        if (!seen.insert(bits).second) continue;  // draw again on collision
        CVector code(n);
        for (int c = 0; c < n; ++c) code[c] = bits[c] ? amp : -amp;
        s.codes.push_back(std::move(code));
    }

    s.stacked = CMatrix(phases * m, k_users * phases * paths);
    for (int k = 0; k < k_users; ++k) {
        s.conv.push_back(code_conv_matrix(s.codes[k], paths));
        s.tail.push_back(code_tail_matrix(s.codes[k], paths));
        s.head.push_back(code_head_matrix(s.codes[k], paths));

        CMatrix blk(phases * m, phases * paths);
        for (int j = 0; j < phases; ++j)
            for (int r = 0; r < m; ++r)
                for (int l = 0; l < paths; ++l) blk(j * m + r, j * paths + l) = s.conv[k](r, l);
        for (int r = 0; r < blk.rows(); ++r)
            for (int c = 0; c < blk.cols(); ++c)
                s.stacked(r, k * phases * paths + c) = blk(r, c);
        s.block.push_back(std::move(blk));

        const CMatrix gram = linalg::hermitian(s.conv[k]) * s.conv[k];
        s.gram_inv.push_back(linalg::solve_hermitian_multi(gram, CMatrix::identity(paths)));
    }
    return s;
}

}  // namespace jpais
