#ifndef GNNSTAB_LINALG_HPP_
#define GNNSTAB_LINALG_HPP_

#include <cstddef>
#include <vector>

namespace gnnstab {

using Vector = std::vector<double>;

// Dense real matrix, row-major. Entries are validated to be finite on
// construction; instances are immutable in spirit (all operations return new
// values) and safe to share across threads.
class Matrix {
  public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols);               // zero-filled
    Matrix(std::size_t rows, std::size_t cols, Vector data);  // takes ownership, checks finiteness

    static Matrix identity(std::size_t n);
    static Matrix diagonal(const Vector& d);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }

    const Vector& data() const { return data_; }

    bool same_shape(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    Vector data_;
};

Matrix matmul(const Matrix& a, const Matrix& b);
Vector matvec(const Matrix& a, const Vector& x);
Matrix transpose(const Matrix& a);

Matrix add(const Matrix& a, const Matrix& b);
Matrix subtract(const Matrix& a, const Matrix& b);
Matrix scale(const Matrix& a, double c);

double max_abs(const Matrix& a);
double frobenius_norm(const Matrix& a);

double norm(const Vector& x);
double dot(const Vector& x, const Vector& y);
Vector add(const Vector& x, const Vector& y);
Vector subtract(const Vector& x, const Vector& y);
Vector scale(const Vector& x, double c);

// Eigendecomposition of a symmetric matrix: S = V diag(values) V^T with
// values ascending and V's columns orthonormal. Column i pairs with value i.
struct EigenSystem {
    Vector values;
    Matrix vectors;
};

// Symmetric eigendecomposition by cyclic Jacobi rotations. Input must be
// square and symmetric to within 1e-12 relative; it is exactly symmetrized
// before iterating. Off-diagonal Frobenius threshold 1e-12 * ||S||_F, sweep
// cap 100. Eigenvector columns are sign-fixed so that the largest-magnitude
// entry of each column is positive (ties: lowest index), which makes the
// output deterministic.
EigenSystem sym_eig(const Matrix& s);

// Largest singular value via power iteration on A^T A with a fixed seeded
// start vector, relative tolerance 1e-10, iteration cap 10000. Throws
// ConvergenceError (carrying the last estimate) if the cap is reached.
double operator_norm(const Matrix& a);

}  // namespace gnnstab

#endif  // GNNSTAB_LINALG_HPP_
