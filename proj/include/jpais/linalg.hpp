#ifndef JPAIS_LINALG_HPP
#define JPAIS_LINALG_HPP

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace jpais::linalg {

using cx = std::complex<double>;
using CVector = std::vector<cx>;

/// Dense complex matrix, row-major.  All entries are finite after any
/// operation in this module given finite inputs.
class CMatrix {
public:
    CMatrix() = default;
    CMatrix(int rows, int cols) : rows_(rows), cols_(cols), a_(size_t(rows) * size_t(cols)) {
        if (rows < 0 || cols < 0) throw std::invalid_argument("CMatrix: negative dimension");
    }

    static CMatrix identity(int n);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    bool empty() const { return a_.empty(); }

    cx& operator()(int r, int c) { return a_[size_t(r) * cols_ + c]; }
    const cx& operator()(int r, int c) const { return a_[size_t(r) * cols_ + c]; }

    cx* data() { return a_.data(); }
    const cx* data() const { return a_.data(); }
    cx* row(int r) { return a_.data() + size_t(r) * cols_; }
    const cx* row(int r) const { return a_.data() + size_t(r) * cols_; }

    void fill(cx value) { a_.assign(a_.size(), value); }

    CVector col(int c) const;
    void set_col(int c, const CVector& v);

    CMatrix& operator+=(const CMatrix& other);
    CMatrix& operator-=(const CMatrix& other);
    CMatrix& operator*=(cx s);

private:
    int rows_ = 0, cols_ = 0;
    std::vector<cx> a_;
};

/// Thrown by solve routines on singular or unacceptably ill-conditioned input.
class SolveFailure : public std::runtime_error {
public:
    SolveFailure(const std::string& what, double cond) : std::runtime_error(what), cond_estimate(cond) {}
    double cond_estimate;
};

// -- products -------------------------------------------------------------

CMatrix gemm(const CMatrix& A, const CMatrix& B);
CMatrix operator*(const CMatrix& A, const CMatrix& B);
CMatrix operator+(CMatrix A, const CMatrix& B);
CMatrix operator-(CMatrix A, const CMatrix& B);
CMatrix operator*(cx s, CMatrix A);

CVector gemv(const CMatrix& A, const CVector& x);            // A x
CVector gemv_hermitian(const CMatrix& A, const CVector& x);  // A^H x

CMatrix hermitian(const CMatrix& A);     // conjugate transpose
CMatrix outer(const CVector& u, const CVector& v);  // u v^H
void add_scaled_outer(CMatrix& A, cx s, const CVector& u, const CVector& v);  // A += s u v^H

cx dot(const CVector& u, const CVector& v);  // u^H v
double norm2(const CVector& v);              // Euclidean norm, >= 0
double norm_fro(const CMatrix& A);
double norm1(const CMatrix& A);  // max column absolute sum

CVector& axpy(CVector& y, cx s, const CVector& x);  // y += s x
CVector scaled(cx s, CVector v);
CVector vsub(const CVector& a, const CVector& b);

// -- solvers --------------------------------------------------------------

/// Solves A x = b for Hermitian, numerically nonsingular A (LU with partial
/// pivoting on a copy).  Throws std::invalid_argument when A is not square /
/// not Hermitian, SolveFailure when singular or the 1-norm condition
/// estimate exceeds cond_cap.
CVector solve_hermitian(const CMatrix& A, const CVector& b, double cond_cap = 1e12);

/// Column-wise variant: solves A X = B.
CMatrix solve_hermitian_multi(const CMatrix& A, const CMatrix& B, double cond_cap = 1e12);

/// In-place Cholesky factorization of a Hermitian positive definite matrix;
/// throws SolveFailure when a pivot is not strictly positive.  Fast path for
/// covariance solves; no condition estimate.
class Cholesky {
public:
    explicit Cholesky(CMatrix A);
    CVector solve(const CVector& b) const;
    CMatrix solve_multi(const CMatrix& B) const;
    int dim() const { return L_.rows(); }

private:
    CMatrix L_;
};

}  // namespace jpais::linalg

#endif
