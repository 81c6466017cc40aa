#pragma once

#include <functional>
#include <optional>
#include <string>

#include "llg/bdf.hpp"
#include "llg/fem.hpp"
#include "llg/vec3.hpp"

namespace llg {

/// Parameters shared by the thin-film test problems.
struct ProblemParameters {
    double alpha = 0.2;
    double t_final = 0.2;
    /// Amplitude of the localized bump in the first exact solution.
    double amplitude = 400.0;
    /// Step of the central-difference Laplacian used for the forcing.
    double fd_step = 1e-5;
};

/// Smooth-in-time localized vortex, constant (0,0,1) outside the disk d(x) < 1/4.
[[nodiscard]] Vec3 exact_solution_1(const Vec3& x, double t, const ProblemParameters& p = {});
[[nodiscard]] Vec3 exact_solution_1_dt(const Vec3& x, double t, const ProblemParameters& p = {});
[[nodiscard]] Mat3 exact_solution_1_gradient(const Vec3& x, double t, const ProblemParameters& p = {});

/// Precessing profile depending on x_1 only.
[[nodiscard]] Vec3 exact_solution_2(const Vec3& x, double t, const ProblemParameters& p = {});
[[nodiscard]] Vec3 exact_solution_2_dt(const Vec3& x, double t, const ProblemParameters& p = {});
[[nodiscard]] Mat3 exact_solution_2_gradient(const Vec3& x, double t, const ProblemParameters& p = {});

/// Continuous but non-differentiable initial state for the energy experiment.
[[nodiscard]] Vec3 nonsmooth_initial(const Vec3& x);

inline constexpr Vec3 kNonsmoothField{0.0, 1.0, 1.0};

enum class ProblemKind { Exact1, Exact2, Nonsmooth };

/// A test problem: initial data, external field and (when known) the exact solution.
struct ProblemSpec {
    std::string label;
    ProblemKind kind = ProblemKind::Exact2;
    ProblemParameters params;

    [[nodiscard]] bool has_exact() const noexcept { return kind != ProblemKind::Nonsmooth; }
    [[nodiscard]] Vec3 value(const Vec3& x, double t) const;
    [[nodiscard]] Vec3 time_derivative(const Vec3& x, double t) const;
    [[nodiscard]] Mat3 gradient(const Vec3& x, double t) const;
    [[nodiscard]] Vec3 initial(const Vec3& x) const;
    [[nodiscard]] ReferenceSolution reference() const;
};

[[nodiscard]] ProblemSpec make_problem(const std::string& label, const ProblemParameters& params = {});

/// Second-order central-difference Laplacian of a vector function.
[[nodiscard]] Vec3 fd_laplacian(const std::function<Vec3(const Vec3&)>& f, const Vec3& x, double step);

/// H = alpha dm/dt + m x dm/dt - Laplace(m) for problems with an exact solution;
/// the constant field (0,1,1) for the nonsmooth problem.
[[nodiscard]] Vec3 forcing_field(const ProblemSpec& spec, const Vec3& x, double t);

/// Nodal interpolant of the forcing at time t.
[[nodiscard]] NodalField forcing_nodal(const FiniteElementSpace& space, const ProblemSpec& spec, double t);

}  // namespace llg
