#include "llg/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

namespace llg {

std::vector<double> DenseMatrix::multiply(std::span<const double> x) const {
    if (x.size() != cols_) {
        throw std::invalid_argument("dense multiply: dimension mismatch");
    }
    std::vector<double> y(rows_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i) {
        double s = 0.0;
        const double* row = data_.data() + i * cols_;
        for (std::size_t j = 0; j < cols_; ++j) {
            s += row[j] * x[j];
        }
        y[i] = s;
    }
    return y;
}

double DenseMatrix::max_abs() const noexcept {
    double m = 0.0;
    for (double v : data_) {
        m = std::max(m, std::abs(v));
    }
    return m;
}

CsrMatrix::CsrMatrix(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_offsets,
                     std::vector<std::size_t> col_indices, std::vector<double> values)
    : rows_(rows),
      cols_(cols),
      row_offsets_(std::move(row_offsets)),
      col_indices_(std::move(col_indices)),
      values_(std::move(values)) {
    validate();
}

void CsrMatrix::validate() const {
    if (row_offsets_.size() != rows_ + 1 || row_offsets_.front() != 0) {
        throw std::invalid_argument("csr: row offsets must have rows+1 entries starting at 0");
    }
    if (row_offsets_.back() != col_indices_.size() || col_indices_.size() != values_.size()) {
        throw std::invalid_argument("csr: offsets, indices and values disagree");
    }
    for (std::size_t i = 0; i < rows_; ++i) {
        if (row_offsets_[i + 1] < row_offsets_[i]) {
            throw std::invalid_argument("csr: row offsets not monotone");
        }
        for (std::size_t p = row_offsets_[i]; p < row_offsets_[i + 1]; ++p) {
            if (col_indices_[p] >= cols_) {
                throw std::invalid_argument("csr: column index out of range");
            }
            if (p > row_offsets_[i] && col_indices_[p] <= col_indices_[p - 1]) {
                throw std::invalid_argument("csr: column indices not strictly increasing");
            }
        }
    }
    for (double v : values_) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument("csr: non-finite value");
        }
    }
}

CsrMatrix CsrMatrix::identity(std::size_t n) {
    std::vector<std::size_t> offsets(n + 1);
    std::iota(offsets.begin(), offsets.end(), std::size_t{0});
    std::vector<std::size_t> cols(n);
    std::iota(cols.begin(), cols.end(), std::size_t{0});
    return {n, n, std::move(offsets), std::move(cols), std::vector<double>(n, 1.0)};
}

CsrMatrix CsrMatrix::from_dense(const DenseMatrix& a, double drop_tol) {
    std::vector<std::size_t> offsets{0};
    std::vector<std::size_t> cols;
    std::vector<double> vals;
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            if (std::abs(a(i, j)) > drop_tol) {
                cols.push_back(j);
                vals.push_back(a(i, j));
            }
        }
        offsets.push_back(cols.size());
    }
    return {a.rows(), a.cols(), std::move(offsets), std::move(cols), std::move(vals)};
}

double CsrMatrix::at(std::size_t i, std::size_t j) const {
    const auto first = col_indices_.begin() + static_cast<std::ptrdiff_t>(row_offsets_.at(i));
    const auto last = col_indices_.begin() + static_cast<std::ptrdiff_t>(row_offsets_.at(i + 1));
    const auto it = std::lower_bound(first, last, j);
    if (it == last || *it != j) {
        return 0.0;
    }
    return values_[static_cast<std::size_t>(it - col_indices_.begin())];
}

std::vector<double> CsrMatrix::diagonal() const {
    std::vector<double> d(std::min(rows_, cols_), 0.0);
    for (std::size_t i = 0; i < d.size(); ++i) {
        d[i] = at(i, i);
    }
    return d;
}

void CsrMatrix::multiply(std::span<const double> x, std::span<double> y) const {
    if (x.size() != cols_ || y.size() != rows_) {
        throw std::invalid_argument("spmv: dimension mismatch");
    }
    for (std::size_t i = 0; i < rows_; ++i) {
        double s = 0.0;
        for (std::size_t p = row_offsets_[i]; p < row_offsets_[i + 1]; ++p) {
            s += values_[p] * x[col_indices_[p]];
        }
        y[i] = s;
    }
}

void CsrMatrix::multiply_transpose(std::span<const double> x, std::span<double> y) const {
    if (x.size() != rows_ || y.size() != cols_) {
        throw std::invalid_argument("spmv transpose: dimension mismatch");
    }
    std::fill(y.begin(), y.end(), 0.0);
    for (std::size_t i = 0; i < rows_; ++i) {
        const double xi = x[i];
        for (std::size_t p = row_offsets_[i]; p < row_offsets_[i + 1]; ++p) {
            y[col_indices_[p]] += values_[p] * xi;
        }
    }
}

CsrMatrix CsrMatrix::transpose() const {
    std::vector<std::size_t> counts(cols_ + 1, 0);
    for (std::size_t c : col_indices_) {
        ++counts[c + 1];
    }
    std::partial_sum(counts.begin(), counts.end(), counts.begin());
    std::vector<std::size_t> cols(nnz());
    std::vector<double> vals(nnz());
    std::vector<std::size_t> next(counts.begin(), counts.end() - 1);
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t p = row_offsets_[i]; p < row_offsets_[i + 1]; ++p) {
            const std::size_t dst = next[col_indices_[p]]++;
            cols[dst] = i;
            vals[dst] = values_[p];
        }
    }
    return {cols_, rows_, std::move(counts), std::move(cols), std::move(vals)};
}

DenseMatrix CsrMatrix::to_dense() const {
    DenseMatrix d(rows_, cols_);
    for (std::size_t i = 0; i < rows_; ++i) {
        for (std::size_t p = row_offsets_[i]; p < row_offsets_[i + 1]; ++p) {
            d(i, col_indices_[p]) = values_[p];
        }
    }
    return d;
}

bool CsrMatrix::same_pattern(const CsrMatrix& other) const noexcept {
    return rows_ == other.rows_ && cols_ == other.cols_ && row_offsets_ == other.row_offsets_ &&
           col_indices_ == other.col_indices_;
}

CsrMatrix linear_combination(std::span<const double> coeffs, std::span<const CsrMatrix* const> terms) {
    if (coeffs.size() != terms.size() || terms.empty()) {
        throw std::invalid_argument("linear_combination: need one coefficient per term");
    }
    CsrMatrix out = *terms[0];
    auto vals = out.values();
    for (double& v : vals) {
        v *= coeffs[0];
    }
    for (std::size_t t = 1; t < terms.size(); ++t) {
        if (!terms[t]->same_pattern(out)) {
            throw std::invalid_argument("linear_combination: sparsity patterns differ");
        }
        const auto src = terms[t]->values();
        for (std::size_t p = 0; p < vals.size(); ++p) {
            vals[p] += coeffs[t] * src[p];
        }
    }
    return out;
}

std::vector<double> spmv(const CsrMatrix& a, std::span<const double> x) {
    std::vector<double> y(a.rows());
    a.multiply(x, y);
    return y;
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += a[i] * b[i];
    }
    return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

SolveResult cg_solve(const CsrMatrix& a, std::span<const double> b, double tol, std::size_t max_iter) {
    const std::size_t n = a.rows();
    if (a.cols() != n || b.size() != n) {
        throw std::invalid_argument("cg_solve: dimension mismatch");
    }
    if (max_iter == 0) {
        max_iter = 50 * std::max<std::size_t>(n, 1);
    }
    SolveResult res;
    res.x.assign(n, 0.0);
    const double bnorm = norm2(b);
    if (bnorm == 0.0) {
        return res;
    }
    std::vector<double> inv_diag = a.diagonal();
    for (double& d : inv_diag) {
        d = d > 0.0 ? 1.0 / d : 1.0;
    }
    std::vector<double> r(b.begin(), b.end());
    std::vector<double> z(n), p(n), ap(n);
    for (std::size_t i = 0; i < n; ++i) {
        z[i] = inv_diag[i] * r[i];
    }
    p = z;
    double rz = dot(r, z);
    double rnorm = bnorm;
    for (std::size_t it = 1; it <= max_iter; ++it) {
        a.multiply(p, ap);
        const double pap = dot(p, ap);
        if (!(pap > 0.0)) {
            throw NotConverged("cg_solve: matrix is not positive definite", rnorm / bnorm);
        }
        const double step = rz / pap;
        for (std::size_t i = 0; i < n; ++i) {
            res.x[i] += step * p[i];
            r[i] -= step * ap[i];
        }
        rnorm = norm2(r);
        res.iterations = it;
        if (rnorm <= tol * bnorm) {
            // Confirm on the true residual.
            std::vector<double> ax = spmv(a, res.x);
            for (std::size_t i = 0; i < n; ++i) {
                r[i] = b[i] - ax[i];
            }
            rnorm = norm2(r);
            if (rnorm <= tol * bnorm) {
                res.relative_residual = rnorm / bnorm;
                return res;
            }
        }
        for (std::size_t i = 0; i < n; ++i) {
            z[i] = inv_diag[i] * r[i];
        }
        const double rz_next = dot(r, z);
        const double beta = rz_next / rz;
        rz = rz_next;
        for (std::size_t i = 0; i < n; ++i) {
            p[i] = z[i] + beta * p[i];
        }
    }
    throw NotConverged("cg_solve: no convergence within " + std::to_string(max_iter) + " iterations",
                       rnorm / bnorm);
}

SolveResult gmres_solve(const LinearOperator& op, std::span<const double> b, const GmresOptions& options,
                        const LinearOperator& preconditioner) {
    const std::size_t n = b.size();
    const std::size_t restart = std::max<std::size_t>(1, std::min(options.restart, std::max<std::size_t>(n, 1)));
    const std::size_t max_iter = options.max_iter == 0 ? 50 * std::max<std::size_t>(n, 1) : options.max_iter;

    SolveResult res;
    res.x.assign(n, 0.0);
    const double bnorm = norm2(b);
    if (bnorm == 0.0) {
        return res;
    }

    std::vector<double> r(n), w(n), z(n);
    std::vector<std::vector<double>> basis(restart + 1, std::vector<double>(n));
    // Hessenberg matrix stored column-wise: h[j] has j+2 entries.
    std::vector<std::vector<double>> h(restart, std::vector<double>(restart + 1));
    std::vector<double> cs(restart), sn(restart), g(restart + 1), y(restart);
    std::vector<double> history;

    auto true_residual = [&]() {
        op(res.x, w);
        for (std::size_t i = 0; i < n; ++i) {
            r[i] = b[i] - w[i];
        }
        return norm2(r);
    };

    double rnorm = bnorm;
    std::size_t total = 0;
    while (total < max_iter) {
        rnorm = true_residual();
        history.push_back(rnorm / bnorm);
        if (rnorm <= options.tol * bnorm) {
            res.relative_residual = rnorm / bnorm;
            res.iterations = total;
            return res;
        }
        for (std::size_t i = 0; i < n; ++i) {
            basis[0][i] = r[i] / rnorm;
        }
        std::fill(g.begin(), g.end(), 0.0);
        g[0] = rnorm;

        std::size_t j = 0;
        for (; j < restart && total < max_iter; ++j, ++total) {
            if (preconditioner) {
                preconditioner(basis[j], z);
                op(z, w);
            } else {
                op(basis[j], w);
            }
            // Modified Gram-Schmidt.
            for (std::size_t i = 0; i <= j; ++i) {
                const double hij = dot(w, basis[i]);
                h[j][i] = hij;
                for (std::size_t l = 0; l < n; ++l) {
                    w[l] -= hij * basis[i][l];
                }
            }
            const double wnorm = norm2(w);
            h[j][j + 1] = wnorm;
            if (wnorm > 0.0) {
                for (std::size_t l = 0; l < n; ++l) {
                    basis[j + 1][l] = w[l] / wnorm;
                }
            }
            for (std::size_t i = 0; i < j; ++i) {
                const double t = cs[i] * h[j][i] + sn[i] * h[j][i + 1];
                h[j][i + 1] = -sn[i] * h[j][i] + cs[i] * h[j][i + 1];
                h[j][i] = t;
            }
            const double denom = std::hypot(h[j][j], h[j][j + 1]);
            cs[j] = denom == 0.0 ? 1.0 : h[j][j] / denom;
            sn[j] = denom == 0.0 ? 0.0 : h[j][j + 1] / denom;
            h[j][j] = denom;
            h[j][j + 1] = 0.0;
            g[j + 1] = -sn[j] * g[j];
            g[j] = cs[j] * g[j];
            const double estimate = std::abs(g[j + 1]);
            if (estimate <= 0.5 * options.tol * bnorm || wnorm == 0.0) {
                ++j;
                ++total;
                break;
            }
        }

        // Back substitution for the least-squares coefficients.
        for (std::size_t ii = j; ii-- > 0;) {
            double s = g[ii];
            for (std::size_t l = ii + 1; l < j; ++l) {
                s -= h[l][ii] * y[l];
            }
            y[ii] = s / h[ii][ii];
        }
        std::fill(w.begin(), w.end(), 0.0);
        for (std::size_t i = 0; i < j; ++i) {
            for (std::size_t l = 0; l < n; ++l) {
                w[l] += y[i] * basis[i][l];
            }
        }
        if (preconditioner) {
            preconditioner(w, z);
            for (std::size_t l = 0; l < n; ++l) {
                res.x[l] += z[l];
            }
        } else {
            for (std::size_t l = 0; l < n; ++l) {
                res.x[l] += w[l];
            }
        }
    }
    rnorm = true_residual();
    history.push_back(rnorm / bnorm);
    if (rnorm <= options.tol * bnorm) {
        res.relative_residual = rnorm / bnorm;
        res.iterations = total;
        return res;
    }
    throw NotConverged("gmres_solve: no convergence within " + std::to_string(max_iter) + " iterations",
                       rnorm / bnorm, std::move(history));
}

std::vector<double> dense_lu_solve(DenseMatrix a, std::span<const double> b) {
    const std::size_t n = a.rows();
    if (a.cols() != n || b.size() != n) {
        throw std::invalid_argument("dense_lu_solve: dimension mismatch");
    }
    const double threshold = 1e-14 * a.max_abs();
    std::vector<double> x(b.begin(), b.end());
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        double best = std::abs(a(k, k));
        for (std::size_t i = k + 1; i < n; ++i) {
            if (std::abs(a(i, k)) > best) {
                best = std::abs(a(i, k));
                piv = i;
            }
        }
        if (!(best >= threshold) || best == 0.0) {
            throw Singular("dense_lu_solve: pivot " + std::to_string(best) + " below threshold at column " +
                           std::to_string(k));
        }
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) {
                std::swap(a(k, j), a(piv, j));
            }
            std::swap(x[k], x[piv]);
        }
        const double inv = 1.0 / a(k, k);
        for (std::size_t i = k + 1; i < n; ++i) {
            const double factor = a(i, k) * inv;
            if (factor == 0.0) {
                continue;
            }
            a(i, k) = factor;
            for (std::size_t j = k + 1; j < n; ++j) {
                a(i, j) -= factor * a(k, j);
            }
            x[i] -= factor * x[k];
        }
    }
    for (std::size_t i = n; i-- > 0;) {
        double s = x[i];
        for (std::size_t j = i + 1; j < n; ++j) {
            s -= a(i, j) * x[j];
        }
        x[i] = s / a(i, i);
    }
    return x;
}

void SaddleSystem::validate() const {
    if (K.rows() != K.cols()) {
        throw std::invalid_argument("saddle: K must be square");
    }
    if (C.cols() != K.rows()) {
        throw std::invalid_argument("saddle: C columns must match K");
    }
    if (f.size() != K.rows()) {
        throw std::invalid_argument("saddle: f has wrong length");
    }
    if (!g.empty() && g.size() != C.rows()) {
        throw std::invalid_argument("saddle: g has wrong length");
    }
}

void SaddleSystem::apply(std::span<const double> in, std::span<double> out) const {
    const std::size_t n = primal_size();
    const std::size_t m = multiplier_size();
    const auto x = in.subspan(0, n);
    const auto lambda = in.subspan(n, m);
    auto top = out.subspan(0, n);
    auto bottom = out.subspan(n, m);
    K.multiply(x, top);
    // top += C^T lambda
    const auto offsets = C.row_offsets();
    const auto cols = C.col_indices();
    const auto vals = C.values();
    for (std::size_t j = 0; j < m; ++j) {
        const double lj = lambda[j];
        double s = 0.0;
        for (std::size_t p = offsets[j]; p < offsets[j + 1]; ++p) {
            top[cols[p]] += vals[p] * lj;
            s += vals[p] * x[cols[p]];
        }
        bottom[j] = s;
    }
}

DenseMatrix SaddleSystem::to_dense() const {
    validate();
    const std::size_t n = primal_size();
    DenseMatrix d(size(), size());
    const DenseMatrix kd = K.to_dense();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            d(i, j) = kd(i, j);
        }
    }
    const auto offsets = C.row_offsets();
    const auto cols = C.col_indices();
    const auto vals = C.values();
    for (std::size_t j = 0; j < multiplier_size(); ++j) {
        for (std::size_t p = offsets[j]; p < offsets[j + 1]; ++p) {
            d(n + j, cols[p]) = vals[p];
            d(cols[p], n + j) = vals[p];
        }
    }
    return d;
}

namespace {

std::vector<double> saddle_rhs(const SaddleSystem& sys) {
    std::vector<double> rhs(sys.size(), 0.0);
    std::copy(sys.f.begin(), sys.f.end(), rhs.begin());
    if (!sys.g.empty()) {
        std::copy(sys.g.begin(), sys.g.end(), rhs.begin() + static_cast<std::ptrdiff_t>(sys.primal_size()));
    }
    return rhs;
}

SaddleSolution split_solution(const SaddleSystem& sys, std::span<const double> sol) {
    SaddleSolution out;
    const std::size_t n = sys.primal_size();
    out.x.assign(sol.begin(), sol.begin() + static_cast<std::ptrdiff_t>(n));
    out.lambda.assign(sol.begin() + static_cast<std::ptrdiff_t>(n), sol.end());
    const std::vector<double> cx = spmv(sys.C, out.x);
    out.constraint_residual = norm2(cx);
    return out;
}

}  // namespace

namespace {

using EigenSparse = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

EigenSparse to_eigen(const SaddleSystem& sys) {
    const std::size_t n = sys.primal_size();
    std::vector<Eigen::Triplet<double, int>> triplets;
    triplets.reserve(sys.K.nnz() + 2 * sys.C.nnz());
    const auto add = [&](const CsrMatrix& a, std::size_t row_shift, std::size_t col_shift, bool transpose) {
        const auto offsets = a.row_offsets();
        const auto cols = a.col_indices();
        const auto vals = a.values();
        for (std::size_t i = 0; i < a.rows(); ++i) {
            for (std::size_t p = offsets[i]; p < offsets[i + 1]; ++p) {
                const auto r = static_cast<int>(row_shift + (transpose ? cols[p] : i));
                const auto c = static_cast<int>(col_shift + (transpose ? i : cols[p]));
                triplets.emplace_back(r, c, vals[p]);
            }
        }
    };
    add(sys.K, 0, 0, false);
    add(sys.C, n, 0, false);
    add(sys.C, 0, n, true);
    EigenSparse m(static_cast<int>(sys.size()), static_cast<int>(sys.size()));
    m.setFromTriplets(triplets.begin(), triplets.end());
    m.makeCompressed();
    return m;
}

}  // namespace

struct SaddleSolver::Factorization {
    Eigen::SparseLU<EigenSparse, Eigen::COLAMDOrdering<int>> lu;
    bool analyzed = false;
    std::size_t size = 0;
};

SaddleSolver::SaddleSolver(SaddlePreconditioner kind, std::size_t refactor_after)
    : kind_(kind), refactor_after_(refactor_after), factorization_(std::make_unique<Factorization>()) {}

SaddleSolver::~SaddleSolver() = default;
SaddleSolver::SaddleSolver(SaddleSolver&&) noexcept = default;
SaddleSolver& SaddleSolver::operator=(SaddleSolver&&) noexcept = default;

void SaddleSolver::factorize(const SaddleSystem& sys) {
    const EigenSparse mat = to_eigen(sys);
    auto& f = *factorization_;
    // The block pattern is fixed along a trajectory, so the ordering is reused.
    if (!f.analyzed || f.size != sys.size()) {
        f.lu.analyzePattern(mat);
        f.analyzed = true;
        f.size = sys.size();
    }
    f.lu.factorize(mat);
    if (f.lu.info() != Eigen::Success) {
        f.analyzed = false;
        throw Singular("solve_saddle: sparse LU factorization failed: " + f.lu.lastErrorMessage());
    }
    stale_ = false;
    ++factorizations_;
}

LinearOperator SaddleSolver::diagonal_preconditioner(const SaddleSystem& sys) const {
    const std::size_t n = sys.primal_size();
    const std::size_t m = sys.multiplier_size();
    std::vector<double> inv_k = sys.K.diagonal();
    for (double& d : inv_k) {
        d = d != 0.0 ? 1.0 / d : 1.0;
    }
    std::vector<double> inv_schur(m, 1.0);
    const auto offsets = sys.C.row_offsets();
    const auto cols = sys.C.col_indices();
    const auto vals = sys.C.values();
    for (std::size_t j = 0; j < m; ++j) {
        double s = 0.0;
        for (std::size_t p = offsets[j]; p < offsets[j + 1]; ++p) {
            s += vals[p] * vals[p] * std::abs(inv_k[cols[p]]);
        }
        inv_schur[j] = s > 0.0 ? 1.0 / s : 1.0;
    }
    return [n, m, inv_k = std::move(inv_k), inv_schur = std::move(inv_schur)](std::span<const double> in,
                                                                              std::span<double> out) {
        for (std::size_t i = 0; i < n; ++i) {
            out[i] = inv_k[i] * in[i];
        }
        for (std::size_t j = 0; j < m; ++j) {
            out[n + j] = -inv_schur[j] * in[n + j];
        }
    };
}

SaddleSolution SaddleSolver::solve(const SaddleSystem& sys, double tol) {
    sys.validate();
    const LinearOperator op = [&sys](std::span<const double> in, std::span<double> out) { sys.apply(in, out); };

    LinearOperator precond;
    if (kind_ == SaddlePreconditioner::SparseLU) {
        if (stale_ || factorization_->size != sys.size()) {
            factorize(sys);
        }
        precond = [this](std::span<const double> in, std::span<double> out) {
            const Eigen::Map<const Eigen::VectorXd> rhs(in.data(), static_cast<Eigen::Index>(in.size()));
            Eigen::Map<Eigen::VectorXd> dst(out.data(), static_cast<Eigen::Index>(out.size()));
            dst = factorization_->lu.solve(rhs);
        };
    } else {
        precond = diagonal_preconditioner(sys);
    }

    GmresOptions opts;
    opts.tol = tol;
    opts.restart = 200;
    opts.max_iter = 50 * sys.size();
    const std::vector<double> rhs = saddle_rhs(sys);
    SolveResult res;
    try {
        res = gmres_solve(op, rhs, opts, precond);
    } catch (const NotConverged&) {
        // A factorization from an earlier step may simply be too far off.
        if (kind_ != SaddlePreconditioner::SparseLU || factorizations_ == 0) {
            throw;
        }
        factorize(sys);
        res = gmres_solve(op, rhs, opts, precond);
    }
    if (kind_ == SaddlePreconditioner::SparseLU && res.iterations > refactor_after_) {
        stale_ = true;
    }
    SaddleSolution out = split_solution(sys, res.x);
    out.iterations = res.iterations;
    out.relative_residual = res.relative_residual;
    return out;
}

SaddleSolution solve_saddle(const SaddleSystem& sys, double tol, SaddlePreconditioner kind) {
    SaddleSolver solver(kind);
    return solver.solve(sys, tol);
}

SaddleSolution solve_saddle_dense(const SaddleSystem& sys) {
    const std::vector<double> rhs = saddle_rhs(sys);
    const std::vector<double> sol = dense_lu_solve(sys.to_dense(), rhs);
    SaddleSolution out = split_solution(sys, sol);
    std::vector<double> r(sys.size());
    sys.apply(sol, r);
    for (std::size_t i = 0; i < r.size(); ++i) {
        r[i] -= rhs[i];
    }
    const double bn = norm2(rhs);
    out.relative_residual = bn > 0.0 ? norm2(r) / bn : norm2(r);
    return out;
}

}  // namespace llg
