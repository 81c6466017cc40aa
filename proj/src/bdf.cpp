#include "llg/bdf.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "llg/stability.hpp"

namespace llg {

namespace {

void require_order(int k) {
    if (k < 1 || k > 5) {
        throw std::invalid_argument("BDF order must be in 1..5, got " + std::to_string(k));
    }
}

double binomial(int n, int j) {
    double b = 1.0;
    for (int i = 1; i <= j; ++i) {
        b = b * (n - j + i) / i;
    }
    return b;
}

}  // namespace

std::vector<double> bdf_coefficients(int k) {
    require_order(k);
    std::vector<double> delta(static_cast<std::size_t>(k) + 1, 0.0);
    for (int l = 1; l <= k; ++l) {
        for (int j = 0; j <= l; ++j) {
            const double sign = (j % 2 == 0) ? 1.0 : -1.0;
            delta[j] += sign * binomial(l, j) / l;
        }
    }
    return delta;
}

std::vector<double> extrapolation_coefficients(int k) {
    require_order(k);
    std::vector<double> gamma(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
        const double sign = (i % 2 == 0) ? 1.0 : -1.0;
        gamma[i] = sign * binomial(k, i + 1);
    }
    return gamma;
}

BdfScheme BdfScheme::make(int k) {
    require_order(k);
    BdfScheme s;
    s.order = k;
    s.delta = bdf_coefficients(k);
    s.gamma = extrapolation_coefficients(k);
    s.eta = multiplier_eta(k);
    if (k <= 2) {
        s.gmatrix = g_matrix(k);
    }
    s.alpha_threshold = s.eta / (1.0 - s.eta);
    return s;
}

StepHistory::StepHistory(int order, double tau, std::vector<NodalField> fields, double t_first)
    : order_(order), tau_(tau), t_first_(t_first), fields_(fields.begin(), fields.end()) {
    if (fields_.size() != static_cast<std::size_t>(order)) {
        throw std::invalid_argument("history needs exactly " + std::to_string(order) + " starting fields, got " +
                                    std::to_string(fields_.size()));
    }
    if (!(tau > 0.0)) {
        throw std::invalid_argument("time step must be positive");
    }
    for (const auto& f : fields_) {
        if (f.size() != fields_.front().size()) {
            throw std::invalid_argument("history fields have inconsistent sizes");
        }
    }
}

void StepHistory::push(NodalField field) {
    fields_.pop_front();
    fields_.push_back(std::move(field));
    t_first_ += tau_;
}

QuadratureField extrapolate_normalized(const FiniteElementSpace& space, const BdfScheme& scheme,
                                       const StepHistory& history) {
    NodalField combined(space.num_dofs());
    for (int j = 0; j < scheme.order; ++j) {
        const NodalField& prev = history.previous(static_cast<std::size_t>(j));
        const double g = scheme.gamma[j];
        for (std::size_t i = 0; i < combined.size(); ++i) {
            combined.values[i] += g * prev.values[i];
        }
    }
    QuadratureField out = evaluate_at_quadrature(space, combined);
    for (Vec3& v : out.values) {
        const double len = norm(v);
        v = len < 1e-12 ? kFallbackDirection : (1.0 / len) * v;
    }
    return out;
}

LlgStepper::LlgStepper(const FiniteElementSpace& space, BdfScheme scheme, double alpha, double tau, double tol)
    : space_(&space),
      scheme_(std::move(scheme)),
      alpha_(alpha),
      tau_(tau),
      tol_(tol),
      mass_(assemble_mass(space)),
      stiffness_(assemble_stiffness(space)),
      vector_mass_(vector_block_diagonal(space, mass_)),
      vector_stiffness_(vector_block_diagonal(space, stiffness_)) {
    if (!(alpha > 0.0)) {
        throw std::invalid_argument("damping alpha must be positive");
    }
    if (!(tau > 0.0)) {
        throw std::invalid_argument("time step must be positive");
    }
}

SaddleSystem LlgStepper::build_system(const StepHistory& history, const NodalField& field) const {
    if (history.order() != scheme_.order) {
        throw std::invalid_argument("history order does not match scheme");
    }
    const double delta0 = scheme_.delta[0];
    const QuadratureField mhat = extrapolate_normalized(*space_, scheme_, history);
    TangentOperators ops = assemble_tangent_operators(*space_, mhat);

    const std::array<double, 3> coeffs{alpha_, tau_ / delta0, 1.0};
    const std::array<const CsrMatrix*, 3> terms{&vector_mass_, &vector_stiffness_, &ops.skew};
    CsrMatrix k = linear_combination(coeffs, terms);

    const std::size_t n = space_->num_dofs();
    NodalField known(n);
    for (int j = 1; j <= scheme_.order; ++j) {
        const NodalField& prev = history.previous(static_cast<std::size_t>(j - 1));
        for (std::size_t i = 0; i < n; ++i) {
            known.values[i] += scheme_.delta[j] * prev.values[i];
        }
    }
    std::vector<double> f = spmv(vector_mass_, field.flatten());
    const std::vector<double> ak = spmv(vector_stiffness_, known.flatten());
    for (std::size_t i = 0; i < f.size(); ++i) {
        f[i] += ak[i] / delta0;
    }
    return {std::move(k), std::move(ops.constraint), std::move(f), {}};
}

NodalField LlgStepper::reconstruct(const StepHistory& history, const NodalField& mdot) const {
    const std::size_t n = space_->num_dofs();
    NodalField m(n);
    for (std::size_t i = 0; i < n; ++i) {
        Vec3 v = tau_ * mdot.values[i];
        for (int j = 1; j <= scheme_.order; ++j) {
            v += (-scheme_.delta[j]) * history.previous(static_cast<std::size_t>(j - 1)).values[i];
        }
        m.values[i] = (1.0 / scheme_.delta[0]) * v;
    }
    return m;
}

StepResult LlgStepper::finish(StepHistory& history, SaddleSolution sol) const {
    StepResult out;
    out.mdot = NodalField::from_flat(sol.x);
    out.m = reconstruct(history, out.mdot);
    out.lambda = std::move(sol.lambda);
    out.iterations = sol.iterations;
    out.tangency = sol.constraint_residual / std::max(1.0, norm2(sol.x));
    history.push(out.m);
    return out;
}

StepResult LlgStepper::step(StepHistory& history, const NodalField& field) const {
    const SaddleSystem sys = build_system(history, field);
    if (!solver_) {
        solver_ = std::make_shared<SaddleSolver>();
    }
    return finish(history, solver_->solve(sys, tol_));
}

StepResult LlgStepper::step_dense(StepHistory& history, const NodalField& field) const {
    const SaddleSystem sys = build_system(history, field);
    return finish(history, solve_saddle_dense(sys));
}

StepResult bdf_step(const BdfScheme& scheme, const FiniteElementSpace& space, StepHistory& history,
                    const NodalField& field, double tau, double alpha, double tol) {
    return LlgStepper(space, scheme, alpha, tau, tol).step(history, field);
}

UnitDeviation unit_deviation(const FiniteElementSpace& space, const NodalField& m) {
    UnitDeviation d;
    for (const Vec3& v : m.values) {
        d.max = std::max(d.max, std::abs(1.0 - dot(v, v)));
    }
    const QuadratureField q = evaluate_at_quadrature(space, m);
    const std::size_t nq = space.points_per_cell();
    double s = 0.0;
    for (std::size_t p = 0; p < q.values.size(); ++p) {
        const double len = norm(q.values[p]);
        d.max = std::max(d.max, std::abs(1.0 - len * len));
        s += space.weight(p % nq) * (1.0 - len) * (1.0 - len);
    }
    d.l2 = std::sqrt(s);
    return d;
}

namespace {

StepRecord describe(const FiniteElementSpace& space, const CsrMatrix& stiffness, int step, double time,
                    const NodalField& m, const std::optional<ReferenceSolution>& reference) {
    StepRecord rec;
    rec.step = step;
    rec.time = time;
    rec.grad_norm = std::sqrt(std::max(0.0, vector_quadratic_form(stiffness, m)));
    const UnitDeviation dev = unit_deviation(space, m);
    rec.unit_deviation_l2 = dev.l2;
    rec.unit_deviation_max = dev.max;
    if (reference) {
        rec.error = error_norms(
            space, m, [&](const Vec3& x) { return reference->value(x, time); },
            [&](const Vec3& x) { return reference->gradient(x, time); });
    }
    return rec;
}

}  // namespace

Trajectory run_trajectory(const BdfScheme& scheme, const FiniteElementSpace& space, std::vector<NodalField> initial,
                          const FieldSource& field, const TrajectoryOptions& options) {
    if (static_cast<int>(initial.size()) != scheme.order) {
        throw std::invalid_argument("run_trajectory: need " + std::to_string(scheme.order) + " starting fields");
    }
    if (options.n_steps < 0) {
        throw std::invalid_argument("run_trajectory: negative step count");
    }
    const LlgStepper stepper(space, scheme, options.alpha, options.tau, options.tol);
    Trajectory traj;
    traj.order = scheme.order;
    traj.tau = options.tau;
    for (int i = 0; i < scheme.order; ++i) {
        traj.records.push_back(describe(space, stepper.stiffness(), i, options.t_start + i * options.tau, initial[i],
                                        options.reference));
    }
    StepHistory history(scheme.order, options.tau, initial, options.t_start);
    traj.final_field = initial.back();
    for (int s = 0; s < options.n_steps; ++s) {
        const int n = scheme.order + s;
        const double t = options.t_start + n * options.tau;
        const NodalField h = field(t);
        StepResult res;
        try {
            res = stepper.step(history, h);
        } catch (const NotConverged& e) {
            throw NotConverged("step " + std::to_string(n) + ": " + e.what(), e.final_residual(),
                               e.residual_history());
        }
        StepRecord rec = describe(space, stepper.stiffness(), n, t, res.m, options.reference);
        rec.mdot_norm = std::sqrt(std::max(0.0, vector_quadratic_form(stepper.mass(), res.mdot)));
        rec.field_norm = std::sqrt(std::max(0.0, vector_quadratic_form(stepper.mass(), h)));
        rec.iterations = res.iterations;
        rec.tangency = res.tangency;
        traj.records.push_back(std::move(rec));
        if (options.observer) {
            options.observer(n, res.m);
        }
        traj.final_field = std::move(res.m);
    }
    return traj;
}

}  // namespace llg
