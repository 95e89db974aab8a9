#include "jpais/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace jpais::linalg {

CMatrix CMatrix::identity(int n) {
    CMatrix I(n, n);
    for (int i = 0; i < n; ++i) I(i, i) = 1.0;
    return I;
}

CVector CMatrix::col(int c) const {
    CVector v(rows_);
    for (int r = 0; r < rows_; ++r) v[r] = (*this)(r, c);
    return v;
}

void CMatrix::set_col(int c, const CVector& v) {
    if (int(v.size()) != rows_) throw std::invalid_argument("set_col: length mismatch");
    for (int r = 0; r < rows_; ++r) (*this)(r, c) = v[r];
}

CMatrix& CMatrix::operator+=(const CMatrix& other) {
    if (rows_ != other.rows_ || cols_ != other.cols_)
        throw std::invalid_argument("CMatrix +=: shape mismatch");
    for (size_t i = 0; i < a_.size(); ++i) a_[i] += other.a_[i];
    return *this;
}

CMatrix& CMatrix::operator-=(const CMatrix& other) {
    if (rows_ != other.rows_ || cols_ != other.cols_)
        throw std::invalid_argument("CMatrix -=: shape mismatch");
    for (size_t i = 0; i < a_.size(); ++i) a_[i] -= other.a_[i];
    return *this;
}

CMatrix& CMatrix::operator*=(cx s) {
    for (auto& e : a_) e *= s;
    return *this;
}

CMatrix gemm(const CMatrix& A, const CMatrix& B) {
    if (A.cols() != B.rows()) throw std::invalid_argument("gemm: inner dimension mismatch");
    CMatrix C(A.rows(), B.cols());
    const int n = B.cols();
    for (int i = 0; i < A.rows(); ++i) {
        cx* ci = C.row(i);
        for (int k = 0; k < A.cols(); ++k) {
            const cx aik = A(i, k);
            if (aik == cx{}) continue;
            const cx* bk = B.row(k);
            for (int j = 0; j < n; ++j) ci[j] += aik * bk[j];
        }
    }
    return C;
}

CMatrix operator*(const CMatrix& A, const CMatrix& B) { return gemm(A, B); }
CMatrix operator+(CMatrix A, const CMatrix& B) { return A += B; }
CMatrix operator-(CMatrix A, const CMatrix& B) { return A -= B; }
CMatrix operator*(cx s, CMatrix A) { return A *= s; }

CVector gemv(const CMatrix& A, const CVector& x) {
    if (A.cols() != int(x.size())) throw std::invalid_argument("gemv: dimension mismatch");
    CVector y(A.rows());
    for (int i = 0; i < A.rows(); ++i) {
        const cx* ai = A.row(i);
        cx acc{};
        for (int j = 0; j < A.cols(); ++j) acc += ai[j] * x[j];
        y[i] = acc;
    }
    return y;
}

CVector gemv_hermitian(const CMatrix& A, const CVector& x) {
    if (A.rows() != int(x.size())) throw std::invalid_argument("gemv_hermitian: dimension mismatch");
    CVector y(A.cols());
    for (int i = 0; i < A.rows(); ++i) {
        const cx* ai = A.row(i);
        const cx xi = std::conj(x[i]);
        for (int j = 0; j < A.cols(); ++j) y[j] += std::conj(ai[j] * xi);
    }
    return y;
}

CMatrix hermitian(const CMatrix& A) {
    CMatrix H(A.cols(), A.rows());
    for (int i = 0; i < A.rows(); ++i)
        for (int j = 0; j < A.cols(); ++j) H(j, i) = std::conj(A(i, j));
    return H;
}

CMatrix outer(const CVector& u, const CVector& v) {
    CMatrix A(int(u.size()), int(v.size()));
    for (size_t i = 0; i < u.size(); ++i)
        for (size_t j = 0; j < v.size(); ++j) A(int(i), int(j)) = u[i] * std::conj(v[j]);
    return A;
}

void add_scaled_outer(CMatrix& A, cx s, const CVector& u, const CVector& v) {
    if (A.rows() != int(u.size()) || A.cols() != int(v.size()))
        throw std::invalid_argument("add_scaled_outer: shape mismatch");
    for (int i = 0; i < A.rows(); ++i) {
        const cx su = s * u[i];
        cx* ai = A.row(i);
        for (int j = 0; j < A.cols(); ++j) ai[j] += su * std::conj(v[j]);
    }
}

cx dot(const CVector& u, const CVector& v) {
    if (u.size() != v.size()) throw std::invalid_argument("dot: length mismatch");
    cx acc{};
    for (size_t i = 0; i < u.size(); ++i) acc += std::conj(u[i]) * v[i];
    return acc;
}

double norm2(const CVector& v) {
    double acc = 0.0;
    for (const auto& e : v) acc += std::norm(e);
    return std::sqrt(acc);
}

double norm_fro(const CMatrix& A) {
    double acc = 0.0;
    const cx* p = A.data();
    for (size_t i = 0, n = size_t(A.rows()) * A.cols(); i < n; ++i) acc += std::norm(p[i]);
    return std::sqrt(acc);
}

double norm1(const CMatrix& A) {
    double best = 0.0;
    for (int j = 0; j < A.cols(); ++j) {
        double s = 0.0;
        for (int i = 0; i < A.rows(); ++i) s += std::abs(A(i, j));
        best = std::max(best, s);
    }
    return best;
}

CVector& axpy(CVector& y, cx s, const CVector& x) {
    if (y.size() != x.size()) throw std::invalid_argument("axpy: length mismatch");
    for (size_t i = 0; i < y.size(); ++i) y[i] += s * x[i];
    return y;
}

CVector scaled(cx s, CVector v) {
    for (auto& e : v) e *= s;
    return v;
}

CVector vsub(const CVector& a, const CVector& b) {
    if (a.size() != b.size()) throw std::invalid_argument("vsub: length mismatch");
    CVector r(a.size());
    for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

namespace {

struct LuFactors {
    CMatrix lu;
    std::vector<int> piv;
    bool singular = false;
};

LuFactors lu_factor(CMatrix A) {
    const int n = A.rows();
    LuFactors f{std::move(A), std::vector<int>(n), false};
    CMatrix& M = f.lu;
    for (int k = 0; k < n; ++k) {
        int p = k;
        double best = std::abs(M(k, k));
        for (int i = k + 1; i < n; ++i) {
            const double v = std::abs(M(i, k));
            if (v > best) { best = v; p = i; }
        }
        f.piv[k] = p;
        if (best == 0.0) { f.singular = true; return f; }
        if (p != k)
            for (int j = 0; j < n; ++j) std::swap(M(k, j), M(p, j));
        const cx inv_pivot = 1.0 / M(k, k);
        for (int i = k + 1; i < n; ++i) {
            const cx lik = M(i, k) * inv_pivot;
            M(i, k) = lik;
            if (lik == cx{}) continue;
            cx* mi = M.row(i);
            const cx* mk = M.row(k);
            for (int j = k + 1; j < n; ++j) mi[j] -= lik * mk[j];
        }
    }
    return f;
}

CVector lu_solve(const LuFactors& f, CVector b) {
    const int n = f.lu.rows();
    for (int k = 0; k < n; ++k)
        if (f.piv[k] != k) std::swap(b[k], b[f.piv[k]]);
    for (int i = 1; i < n; ++i) {
        cx acc = b[i];
        const cx* li = f.lu.row(i);
        for (int j = 0; j < i; ++j) acc -= li[j] * b[j];
        b[i] = acc;
    }
    for (int i = n - 1; i >= 0; --i) {
        cx acc = b[i];
        const cx* ui = f.lu.row(i);
        for (int j = i + 1; j < n; ++j) acc -= ui[j] * b[j];
        b[i] = acc / ui[i];
    }
    return b;
}

CVector lu_solve_conj_transpose(const LuFactors& f, CVector b) {
    // Solves A^H x = b given A = P^T L U, i.e. U^H L^H P x = b.
    const int n = f.lu.rows();
    for (int i = 0; i < n; ++i) {
        cx acc = b[i];
        for (int j = 0; j < i; ++j) acc -= std::conj(f.lu(j, i)) * b[j];
        b[i] = acc / std::conj(f.lu(i, i));
    }
    for (int i = n - 1; i >= 0; --i) {
        cx acc = b[i];
        for (int j = i + 1; j < n; ++j) acc -= std::conj(f.lu(j, i)) * b[j];
        b[i] = acc;
    }
    for (int k = n - 1; k >= 0; --k)
        if (f.piv[k] != k) std::swap(b[k], b[f.piv[k]]);
    return b;
}

// Hager-style estimate of ||A^-1||_1 from an existing factorization.
double inverse_norm1_estimate(const LuFactors& f) {
    const int n = f.lu.rows();
    CVector x(n, cx{1.0 / n, 0.0});
    double est = 0.0;
    for (int iter = 0; iter < 5; ++iter) {
        CVector y = lu_solve(f, x);
        double y1 = 0.0;
        for (const auto& e : y) y1 += std::abs(e);
        est = std::max(est, y1);
        CVector z(n);
        for (int i = 0; i < n; ++i) {
            const double m = std::abs(y[i]);
            z[i] = m > 0 ? y[i] / m : cx{1.0, 0.0};
        }
        CVector w = lu_solve_conj_transpose(f, z);
        int jbest = 0;
        double wbest = 0.0;
        for (int i = 0; i < n; ++i) {
            const double m = std::abs(w[i]);
            if (m > wbest) { wbest = m; jbest = i; }
        }
        CVector e(n);
        e[jbest] = 1.0;
        if (iter > 0 && wbest <= std::real(dot(x, w)) + 1e-14) break;
        x = std::move(e);
    }
    return est;
}

void check_square_hermitian(const CMatrix& A, const char* who) {
    if (A.rows() != A.cols()) throw std::invalid_argument(std::string(who) + ": matrix not square");
    double scale = 0.0, dev = 0.0;
    for (int i = 0; i < A.rows(); ++i)
        for (int j = i; j < A.cols(); ++j) {
            scale = std::max({scale, std::abs(A(i, j)), std::abs(A(j, i))});
            dev = std::max(dev, std::abs(A(i, j) - std::conj(A(j, i))));
        }
    if (dev > 1e-8 * std::max(scale, 1e-300))
        throw std::invalid_argument(std::string(who) + ": matrix not Hermitian");
}

LuFactors factor_checked(const CMatrix& A, double cond_cap, const char* who) {
    check_square_hermitian(A, who);
    LuFactors f = lu_factor(A);
    if (f.singular) throw SolveFailure(std::string(who) + ": singular matrix", std::numeric_limits<double>::infinity());
    const double cond = norm1(A) * inverse_norm1_estimate(f);
    if (!(cond < cond_cap))
        throw SolveFailure(std::string(who) + ": condition estimate " + std::to_string(cond) +
                               " above cap " + std::to_string(cond_cap),
                           cond);
    return f;
}

}  // namespace

CVector solve_hermitian(const CMatrix& A, const CVector& b, double cond_cap) {
    if (A.rows() != int(b.size())) throw std::invalid_argument("solve_hermitian: rhs length mismatch");
    LuFactors f = factor_checked(A, cond_cap, "solve_hermitian");
    return lu_solve(f, b);
}

CMatrix solve_hermitian_multi(const CMatrix& A, const CMatrix& B, double cond_cap) {
    if (A.rows() != B.rows()) throw std::invalid_argument("solve_hermitian_multi: rhs shape mismatch");
    LuFactors f = factor_checked(A, cond_cap, "solve_hermitian_multi");
    CMatrix X(B.rows(), B.cols());
    for (int j = 0; j < B.cols(); ++j) X.set_col(j, lu_solve(f, B.col(j)));
    return X;
}

Cholesky::Cholesky(CMatrix A) : L_(std::move(A)) {
    const int n = L_.rows();
    if (n != L_.cols()) throw std::invalid_argument("Cholesky: matrix not square");
    for (int j = 0; j < n; ++j) {
        for (int i = j; i < n; ++i) {
            cx acc = L_(i, j);
            const cx* li = L_.row(i);
            const cx* lj = L_.row(j);
            for (int k = 0; k < j; ++k) acc -= li[k] * std::conj(lj[k]);
            if (i == j) {
                const double d = std::real(acc);
                if (!(d > 0.0)) throw SolveFailure("Cholesky: matrix not positive definite", 0.0);
                L_(j, j) = std::sqrt(d);
            } else {
                L_(i, j) = acc / std::real(L_(j, j));
            }
        }
        for (int k = j + 1; k < n; ++k) L_(j, k) = cx{};
    }
}

CVector Cholesky::solve(const CVector& b) const {
    const int n = L_.rows();
    if (int(b.size()) != n) throw std::invalid_argument("Cholesky::solve: rhs length mismatch");
    CVector y = b;
    for (int i = 0; i < n; ++i) {
        cx acc = y[i];
        const cx* li = L_.row(i);
        for (int j = 0; j < i; ++j) acc -= li[j] * y[j];
        y[i] = acc / std::real(L_(i, i));
    }
    for (int i = n - 1; i >= 0; --i) {
        cx acc = y[i];
        for (int j = i + 1; j < n; ++j) acc -= std::conj(L_(j, i)) * y[j];
        y[i] = acc / std::real(L_(i, i));
    }
    return y;
}

CMatrix Cholesky::solve_multi(const CMatrix& B) const {
    CMatrix X(B.rows(), B.cols());
    for (int j = 0; j < B.cols(); ++j) X.set_col(j, solve(B.col(j)));
    return X;
}

}  // namespace jpais::linalg
