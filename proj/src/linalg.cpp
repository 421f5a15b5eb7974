#include "gandiv/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "gandiv/error.hpp"

namespace gandiv {

SymMatrix SymMatrix::from_matrix(const Matrix& m) {
    if (m.rows != m.cols) throw std::invalid_argument("sym: matrix is not square");
    SymMatrix s(m.rows);
    for (std::size_t i = 0; i < m.rows; ++i) {
        for (std::size_t j = i; j < m.cols; ++j) {
            const double a = m.at(i, j);
            const double b = m.at(j, i);
            if (std::abs(a - b) > 1e-9 * std::max(1.0, std::abs(a)))
                throw std::invalid_argument("sym: matrix is not symmetric at (" +
                                            std::to_string(i) + "," + std::to_string(j) + ")");
            const double v = 0.5 * (a + b);
            s.at(i, j) = v;
            s.at(j, i) = v;
        }
    }
    return s;
}

SymMatrix SymMatrix::identity(std::size_t d) {
    SymMatrix s(d);
    for (std::size_t i = 0; i < d; ++i) s.at(i, i) = 1.0;
    return s;
}

double SymMatrix::trace() const {
    double t = 0.0;
    for (std::size_t i = 0; i < dim; ++i) t += at(i, i);
    return t;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows) throw std::invalid_argument("matmul: inner dimensions differ");
    Matrix c(a.rows, b.cols, 0.0);
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* arow = a.row(i);
        double* crow = c.row(i);
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double aik = arow[k];
            const double* brow = b.row(k);
            for (std::size_t j = 0; j < b.cols; ++j) crow[j] += aik * brow[j];
        }
    }
    return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    if (a.cols != b.cols) throw std::invalid_argument("matmul_nt: inner dimensions differ");
    Matrix c(a.rows, b.rows, 0.0);
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* arow = a.row(i);
        double* crow = c.row(i);
        for (std::size_t j = 0; j < b.rows; ++j) {
            const double* brow = b.row(j);
            double acc = 0.0;
            for (std::size_t k = 0; k < a.cols; ++k) acc += arow[k] * brow[k];
            crow[j] = acc;
        }
    }
    return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    if (a.rows != b.rows) throw std::invalid_argument("matmul_tn: inner dimensions differ");
    Matrix c(a.cols, b.cols, 0.0);
    for (std::size_t k = 0; k < a.rows; ++k) {
        const double* arow = a.row(k);
        const double* brow = b.row(k);
        for (std::size_t i = 0; i < a.cols; ++i) {
            const double aki = arow[i];
            double* crow = c.row(i);
            for (std::size_t j = 0; j < b.cols; ++j) crow[j] += aki * brow[j];
        }
    }
    return c;
}

void mean_and_covariance(const Matrix& features, std::vector<double>& mean, SymMatrix& cov) {
    const std::size_t n = features.rows;
    const std::size_t d = features.cols;
    if (n < 2) throw std::invalid_argument("covariance needs at least 2 sample rows");

    mean.assign(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = features.row(i);
        for (std::size_t j = 0; j < d; ++j) mean[j] += row[j];
    }
    for (auto& m : mean) m /= static_cast<double>(n);

    Matrix centered(n, d);
    for (std::size_t i = 0; i < n; ++i) {
        const double* src = features.row(i);
        double* dst = centered.row(i);
        for (std::size_t j = 0; j < d; ++j) dst[j] = src[j] - mean[j];
    }
    Matrix prod = matmul_tn(centered, centered);
    const double inv = 1.0 / static_cast<double>(n - 1);
    cov = SymMatrix(d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j)
            cov.at(i, j) = 0.5 * (prod.at(i, j) + prod.at(j, i)) * inv;
}

namespace {

double off_diagonal_norm(const SymMatrix& a) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.dim; ++i)
        for (std::size_t j = i + 1; j < a.dim; ++j) s += 2.0 * a.at(i, j) * a.at(i, j);
    return std::sqrt(s);
}

double frobenius_norm(const SymMatrix& a) {
    double s = 0.0;
    for (double v : a.values) s += v * v;
    return std::sqrt(s);
}

}  // namespace

EighResult jacobi_eigh(const SymMatrix& s) {
    const std::size_t n = s.dim;
    if (n < 1) throw std::invalid_argument("eigh: dimension must be >= 1");
    for (double v : s.values)
        if (!std::isfinite(v)) throw NumericError("eigh: non-finite input");

    SymMatrix a = s;
    Matrix v(n, n, 0.0);
    for (std::size_t i = 0; i < n; ++i) v.at(i, i) = 1.0;

    const double total = frobenius_norm(a);
    const int max_sweeps = 100;
    bool converged = off_diagonal_norm(a) == 0.0;  // diagonal input, nothing to do
    for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a.at(p, q);
                if (apq == 0.0) continue;
                const double app = a.at(p, p);
                const double aqq = a.at(q, q);
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double sn = t * c;

                double* rp = a.values.data() + p * n;
                double* rq = a.values.data() + q * n;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = rp[k];
                    const double akq = rq[k];
                    rp[k] = c * akp - sn * akq;
                    rq[k] = sn * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    double* row = a.values.data() + k * n;
                    const double akp = row[p];
                    const double akq = row[q];
                    row[p] = c * akp - sn * akq;
                    row[q] = sn * akp + c * akq;
                }
                // the rotation annihilates the (p,q) entry exactly
                a.at(p, q) = 0.0;
                a.at(q, p) = 0.0;

                for (std::size_t k = 0; k < n; ++k) {
                    double* row = v.values.data() + k * n;
                    const double vkp = row[p];
                    const double vkq = row[q];
                    row[p] = c * vkp - sn * vkq;
                    row[q] = sn * vkp + c * vkq;
                }
            }
        }
        converged = off_diagonal_norm(a) < 1e-12 * total || off_diagonal_norm(a) == 0.0;
    }
    if (!converged)
        throw NumericError("eigh: Jacobi sweeps did not converge within 100 sweeps");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return a.at(i, i) > a.at(j, j); });

    EighResult res;
    res.eigenvalues.resize(n);
    res.eigenvectors = Matrix(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        res.eigenvalues[k] = a.at(order[k], order[k]);
        for (std::size_t i = 0; i < n; ++i)
            res.eigenvectors.at(i, k) = v.at(i, order[k]);
    }
    return res;
}

namespace {

// V * diag(f(lambda)) * V^T assembled symmetric.
SymMatrix recombine(const EighResult& e, const std::vector<double>& diag) {
    const std::size_t n = e.eigenvalues.size();
    SymMatrix out(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < n; ++k)
                acc += e.eigenvectors.at(i, k) * diag[k] * e.eigenvectors.at(j, k);
            out.at(i, j) = acc;
            out.at(j, i) = acc;
        }
    }
    return out;
}

void require_psd(const std::vector<double>& eigenvalues, const char* who) {
    for (double ev : eigenvalues)
        if (ev < -1e-8)
            throw NumericError(std::string(who) + ": matrix is not PSD (eigenvalue " +
                               std::to_string(ev) + ")");
}

}  // namespace

SymMatrix sqrtm_psd(const SymMatrix& s) {
    EighResult e = jacobi_eigh(s);
    require_psd(e.eigenvalues, "sqrtm");
    std::vector<double> roots(e.eigenvalues.size());
    for (std::size_t i = 0; i < roots.size(); ++i)
        roots[i] = std::sqrt(std::max(e.eigenvalues[i], 0.0));
    return recombine(e, roots);
}

double trace_sqrt_product(const SymMatrix& sr, const SymMatrix& ss) {
    if (sr.dim != ss.dim) throw std::invalid_argument("trace_sqrt_product: dimension mismatch");
    const std::size_t n = sr.dim;
    const SymMatrix a = sqrtm_psd(sr);

    // m = a * ss * a, symmetrized against round-off
    Matrix am(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) am.at(i, j) = a.at(i, j);
    Matrix sm(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) sm.at(i, j) = ss.at(i, j);
    Matrix prod = matmul(matmul(am, sm), am);
    SymMatrix m(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            m.at(i, j) = 0.5 * (prod.at(i, j) + prod.at(j, i));

    EighResult e = jacobi_eigh(m);
    // round-off on the product scales with its norm, so the PSD guard does too
    const double tol = 1e-8 * std::max(1.0, frobenius_norm(m));
    for (double ev : e.eigenvalues)
        if (ev < -tol)
            throw NumericError("trace_sqrt_product: product is not PSD (eigenvalue " +
                               std::to_string(ev) + ")");
    double acc = 0.0;
    for (double ev : e.eigenvalues) acc += std::sqrt(std::max(ev, 0.0));
    return acc;
}

}  // namespace gandiv
