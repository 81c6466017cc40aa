#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace llg {

/// Row-major dense matrix. Only used for oracles and small verification problems.
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
    [[nodiscard]] std::span<const double> data() const noexcept { return data_; }

    [[nodiscard]] std::vector<double> multiply(std::span<const double> x) const;
    [[nodiscard]] double max_abs() const noexcept;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Compressed sparse row matrix.
///
/// Invariants: row offsets are monotone and start at 0, column indices are
/// strictly increasing within each row, all values are finite. Matrices that
/// share a sparsity pattern can be combined value-by-value.
class CsrMatrix {
public:
    CsrMatrix() = default;
    CsrMatrix(std::size_t rows, std::size_t cols, std::vector<std::size_t> row_offsets,
              std::vector<std::size_t> col_indices, std::vector<double> values);

    static CsrMatrix identity(std::size_t n);
    static CsrMatrix from_dense(const DenseMatrix& a, double drop_tol = 0.0);

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
    [[nodiscard]] std::size_t nnz() const noexcept { return values_.size(); }

    [[nodiscard]] std::span<const std::size_t> row_offsets() const noexcept { return row_offsets_; }
    [[nodiscard]] std::span<const std::size_t> col_indices() const noexcept { return col_indices_; }
    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
    [[nodiscard]] std::span<double> values() noexcept { return values_; }

    /// Entry (i, j); zero when (i, j) is outside the pattern.
    [[nodiscard]] double at(std::size_t i, std::size_t j) const;
    [[nodiscard]] std::vector<double> diagonal() const;

    /// y = A x
    void multiply(std::span<const double> x, std::span<double> y) const;
    /// y = A^T x
    void multiply_transpose(std::span<const double> x, std::span<double> y) const;

    [[nodiscard]] CsrMatrix transpose() const;
    [[nodiscard]] DenseMatrix to_dense() const;
    [[nodiscard]] bool same_pattern(const CsrMatrix& other) const noexcept;

    /// Throws std::invalid_argument if an invariant is violated.
    void validate() const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<std::size_t> row_offsets_{0};
    std::vector<std::size_t> col_indices_;
    std::vector<double> values_;
};

/// sum_i coeffs[i] * terms[i]; all terms must share one sparsity pattern.
[[nodiscard]] CsrMatrix linear_combination(std::span<const double> coeffs,
                                           std::span<const CsrMatrix* const> terms);

[[nodiscard]] std::vector<double> spmv(const CsrMatrix& a, std::span<const double> x);

// Small vector helpers shared by the solvers and the FE code.
[[nodiscard]] double dot(std::span<const double> a, std::span<const double> b);
[[nodiscard]] double norm2(std::span<const double> a);

class NotConverged : public std::runtime_error {
public:
    NotConverged(const std::string& what, double final_residual, std::vector<double> history = {})
        : std::runtime_error(what), final_residual_(final_residual), history_(std::move(history)) {}

    [[nodiscard]] double final_residual() const noexcept { return final_residual_; }
    [[nodiscard]] const std::vector<double>& residual_history() const noexcept { return history_; }

private:
    double final_residual_;
    std::vector<double> history_;
};

class Singular : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SolveResult {
    std::vector<double> x;
    std::size_t iterations = 0;
    double relative_residual = 0.0;
};

/// y = Op(x). Operators never alias x and y.
using LinearOperator = std::function<void(std::span<const double>, std::span<double>)>;

/// Conjugate gradients for SPD matrices with Jacobi preconditioning.
/// Stops when ||A x - b||_2 <= tol ||b||_2; throws NotConverged otherwise.
[[nodiscard]] SolveResult cg_solve(const CsrMatrix& a, std::span<const double> b, double tol = 1e-12,
                                   std::size_t max_iter = 0);

struct GmresOptions {
    double tol = 1e-10;
    std::size_t restart = 200;
    /// 0 selects 50 * dimension.
    std::size_t max_iter = 0;
};

/// Restarted GMRES with right preconditioning. The preconditioner (if given)
/// applies an approximation of the inverse. Convergence is judged on the true
/// residual ||b - A x||_2 <= tol ||b||_2.
[[nodiscard]] SolveResult gmres_solve(const LinearOperator& op, std::span<const double> b,
                                      const GmresOptions& options = {},
                                      const LinearOperator& preconditioner = nullptr);

/// Partial-pivoting LU. Throws Singular when a pivot falls below 1e-14 max|A|.
[[nodiscard]] std::vector<double> dense_lu_solve(DenseMatrix a, std::span<const double> b);

/// Block system [[K, C^T], [C, 0]] [x; lambda] = [f; g].
struct SaddleSystem {
    CsrMatrix K;
    CsrMatrix C;
    std::vector<double> f;
    std::vector<double> g;

    [[nodiscard]] std::size_t primal_size() const noexcept { return K.rows(); }
    [[nodiscard]] std::size_t multiplier_size() const noexcept { return C.rows(); }
    [[nodiscard]] std::size_t size() const noexcept { return K.rows() + C.rows(); }

    void validate() const;
    void apply(std::span<const double> in, std::span<double> out) const;
    [[nodiscard]] DenseMatrix to_dense() const;
};

struct SaddleSolution {
    std::vector<double> x;
    std::vector<double> lambda;
    std::size_t iterations = 0;
    double relative_residual = 0.0;
    /// ||C x||_2
    double constraint_residual = 0.0;
};

enum class SaddlePreconditioner {
    /// Sparse LU factorization of the block matrix.
    SparseLU,
    /// Jacobi on K, diag(C diag(K)^-1 C^T) on the multiplier block.
    Diagonal,
};

/// Restarted GMRES (restart 200) on the full block system with right preconditioning.
///
/// With the SparseLU preconditioner the factorization is kept across calls and
/// only recomputed once GMRES needs more than `refactor_after` iterations, so a
/// sequence of slowly varying systems (one per time step) shares factorizations.
class SaddleSolver {
public:
    explicit SaddleSolver(SaddlePreconditioner preconditioner = SaddlePreconditioner::SparseLU,
                          std::size_t refactor_after = 12);
    ~SaddleSolver();
    SaddleSolver(SaddleSolver&&) noexcept;
    SaddleSolver& operator=(SaddleSolver&&) noexcept;

    [[nodiscard]] SaddleSolution solve(const SaddleSystem& sys, double tol = 1e-10);
    [[nodiscard]] std::size_t factorizations() const noexcept { return factorizations_; }

private:
    struct Factorization;

    void factorize(const SaddleSystem& sys);
    [[nodiscard]] LinearOperator diagonal_preconditioner(const SaddleSystem& sys) const;

    SaddlePreconditioner kind_;
    std::size_t refactor_after_;
    bool stale_ = true;
    std::size_t factorizations_ = 0;
    std::unique_ptr<Factorization> factorization_;
};

[[nodiscard]] SaddleSolution solve_saddle(const SaddleSystem& sys, double tol = 1e-10,
                                          SaddlePreconditioner preconditioner = SaddlePreconditioner::SparseLU);

/// Dense LU on the assembled block matrix. Intended as a verification oracle.
[[nodiscard]] SaddleSolution solve_saddle_dense(const SaddleSystem& sys);

}  // namespace llg
