#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "llg/fem.hpp"
#include "llg/sparse.hpp"

namespace llg {

/// Coefficients of delta(z) = sum_{l=1..k} (1 - z)^l / l = sum_j delta_j z^j.
[[nodiscard]] std::vector<double> bdf_coefficients(int k);

/// Coefficients of gamma(z) = (1 - (1 - z)^k) / z = sum_i gamma_i z^i.
[[nodiscard]] std::vector<double> extrapolation_coefficients(int k);

/// Linearly implicit k-step BDF method, 1 <= k <= 5.
struct BdfScheme {
    int order = 1;
    std::vector<double> delta;  // delta_0 .. delta_k
    std::vector<double> gamma;  // gamma_0 .. gamma_{k-1}
    double eta = 0.0;
    /// Dahlquist G-matrix; only known for k <= 2.
    std::optional<DenseMatrix> gmatrix;
    double alpha_threshold = 0.0;

    static BdfScheme make(int k);
};

/// The k most recent magnetizations m^{n-k}, ..., m^{n-1} on a uniform time grid.
class StepHistory {
public:
    /// `fields` are ordered oldest first; `t_first` is the time of fields.front().
    StepHistory(int order, double tau, std::vector<NodalField> fields, double t_first = 0.0);

    [[nodiscard]] int order() const noexcept { return order_; }
    [[nodiscard]] double tau() const noexcept { return tau_; }
    /// m^{n-1-j}: j = 0 is the newest field.
    [[nodiscard]] const NodalField& previous(std::size_t j) const { return fields_.at(fields_.size() - 1 - j); }
    /// Time t_n of the next step.
    [[nodiscard]] double next_time() const noexcept { return t_first_ + static_cast<double>(order_) * tau_; }
    /// Drops the oldest field and appends the new one (time advances by tau).
    void push(NodalField field);

private:
    int order_;
    double tau_;
    double t_first_;
    std::deque<NodalField> fields_;
};

/// Unit extrapolation mhat^n at every quadrature point; (0,0,1) where the
/// gamma-weighted combination has length below 1e-12.
[[nodiscard]] QuadratureField extrapolate_normalized(const FiniteElementSpace& space, const BdfScheme& scheme,
                                                     const StepHistory& history);

inline constexpr Vec3 kFallbackDirection{0.0, 0.0, 1.0};

struct StepResult {
    NodalField m;
    NodalField mdot;
    std::vector<double> lambda;
    std::size_t iterations = 0;
    /// ||C mdot||_2 / max(1, ||mdot||_2)
    double tangency = 0.0;
};

/// One time step of the tangent-plane BDF scheme. Holds the time-independent
/// matrices so that a trajectory assembles only the skew and constraint parts.
class LlgStepper {
public:
    LlgStepper(const FiniteElementSpace& space, BdfScheme scheme, double alpha, double tau, double tol = 1e-10);

    [[nodiscard]] const BdfScheme& scheme() const noexcept { return scheme_; }
    [[nodiscard]] const CsrMatrix& mass() const noexcept { return mass_; }
    [[nodiscard]] const CsrMatrix& stiffness() const noexcept { return stiffness_; }

    /// K = alpha I(x)M + (tau/delta_0) I(x)A + S,  f = I(x)M H + (1/delta_0) I(x)A sum_{j>=1} delta_j m^{n-j}.
    [[nodiscard]] SaddleSystem build_system(const StepHistory& history, const NodalField& field) const;

    /// m^n from the solved time derivative.
    [[nodiscard]] NodalField reconstruct(const StepHistory& history, const NodalField& mdot) const;

    /// Solves one step and advances `history`.
    StepResult step(StepHistory& history, const NodalField& field) const;

    /// Same step, solved with dense LU on the block system (small problems only).
    StepResult step_dense(StepHistory& history, const NodalField& field) const;

private:
    StepResult finish(StepHistory& history, SaddleSolution sol) const;

    const FiniteElementSpace* space_;
    BdfScheme scheme_;
    double alpha_;
    double tau_;
    double tol_;
    CsrMatrix mass_;
    CsrMatrix stiffness_;
    CsrMatrix vector_mass_;
    CsrMatrix vector_stiffness_;
    // Factorization cache; reusing it does not change the computed step beyond the solver tolerance.
    mutable std::shared_ptr<SaddleSolver> solver_;
};

[[nodiscard]] StepResult bdf_step(const BdfScheme& scheme, const FiniteElementSpace& space, StepHistory& history,
                                  const NodalField& field, double tau, double alpha, double tol = 1e-10);

/// Exact solution used to measure errors along a trajectory.
struct ReferenceSolution {
    std::function<Vec3(const Vec3&, double)> value;
    std::function<Mat3(const Vec3&, double)> gradient;
};

/// Nodal values of the external field at time t.
using FieldSource = std::function<NodalField(double)>;

struct StepRecord {
    int step = 0;
    double time = 0.0;
    /// ||grad m^n||_{L2}
    double grad_norm = 0.0;
    /// ||mdot^n||_{L2}; zero for starting values.
    double mdot_norm = 0.0;
    /// ||H^n||_{L2} of the field used in the step; zero for starting values.
    double field_norm = 0.0;
    /// ||1 - |m^n| ||_{L2}
    double unit_deviation_l2 = 0.0;
    /// max |1 - |m^n|^2| over nodes and quadrature points.
    double unit_deviation_max = 0.0;
    std::size_t iterations = 0;
    double tangency = 0.0;
    std::optional<ErrorNorms> error;
};

struct Trajectory {
    int order = 1;
    double tau = 0.0;
    std::vector<StepRecord> records;
    NodalField final_field;
};

struct TrajectoryOptions {
    double alpha = 0.2;
    double tau = 0.01;
    int n_steps = 0;
    double tol = 1e-10;
    double t_start = 0.0;
    /// When set, errors against this solution are recorded for every field.
    std::optional<ReferenceSolution> reference;
    /// Called after every completed step with the step index and the new field.
    std::function<void(int, const NodalField&)> observer;
};

/// Integrates n_steps beyond the k starting values (records cover steps 0..k-1+n_steps).
[[nodiscard]] Trajectory run_trajectory(const BdfScheme& scheme, const FiniteElementSpace& space,
                                        std::vector<NodalField> initial, const FieldSource& field,
                                        const TrajectoryOptions& options);

/// Unit-length diagnostics of a field.
struct UnitDeviation {
    double l2 = 0.0;
    double max = 0.0;
};

[[nodiscard]] UnitDeviation unit_deviation(const FiniteElementSpace& space, const NodalField& m);

}  // namespace llg
