#pragma once

#include <cstddef>
#include <vector>

namespace gandiv {

// Dense row-major matrix of doubles.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), values(r * c, fill) {}

    double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
    double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
    double* row(std::size_t r) { return values.data() + r * cols; }
    const double* row(std::size_t r) const { return values.data() + r * cols; }
};

// Symmetric matrix in full row-major storage. Construction verifies the
// off-diagonal agreement to 1e-9 relative and stores the exact average.
struct SymMatrix {
    std::size_t dim = 0;
    std::vector<double> values;

    SymMatrix() = default;
    explicit SymMatrix(std::size_t d) : dim(d), values(d * d, 0.0) {}
    static SymMatrix from_matrix(const Matrix& m);
    static SymMatrix identity(std::size_t d);

    double at(std::size_t r, std::size_t c) const { return values[r * dim + c]; }
    double& at(std::size_t r, std::size_t c) { return values[r * dim + c]; }
    double trace() const;
};

struct EighResult {
    std::vector<double> eigenvalues;  // descending
    Matrix eigenvectors;              // column k pairs with eigenvalues[k]
};

// C = A * B
Matrix matmul(const Matrix& a, const Matrix& b);
// C = A * B^T
Matrix matmul_nt(const Matrix& a, const Matrix& b);
// C = A^T * B
Matrix matmul_tn(const Matrix& a, const Matrix& b);

// Column means and the (n-1)-divisor sample covariance of row-sample data.
void mean_and_covariance(const Matrix& features, std::vector<double>& mean, SymMatrix& cov);

// Cyclic Jacobi eigendecomposition. Converges when the off-diagonal
// Frobenius norm drops below 1e-12 of the total norm; throws NumericError
// after 100 sweeps without convergence.
EighResult jacobi_eigh(const SymMatrix& s);

// Principal square root of a PSD matrix via eigendecomposition. Eigenvalues
// in [-1e-8, 0) are clamped to zero; anything lower is a NumericError.
SymMatrix sqrtm_psd(const SymMatrix& s);

// Tr((sr * ss)^(1/2)) for PSD inputs, computed from the eigenvalues of
// sqrt(sr) * ss * sqrt(sr), which shares them with sr * ss.
double trace_sqrt_product(const SymMatrix& sr, const SymMatrix& ss);

}  // namespace gandiv
