#include "llg/problems.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace llg {

namespace {

constexpr double kExponentFloor = -700.0;

double distance_sq(const Vec3& x) {
    const double a = x[0] - 0.5;
    const double b = x[1] - 0.5;
    return a * a + b * b;
}

double g_of_t(double t, const ProblemParameters& p) { return (p.t_final + 0.1) / (p.t_final + 0.1 - t); }

double g_prime(double t, const ProblemParameters& p) {
    const double s = p.t_final + 0.1 - t;
    return (p.t_final + 0.1) / (s * s);
}

/// Bump factor E = C exp(-g/s) with s = 1/4 - d; nullopt where the field is (0,0,1).
struct Bump {
    double e;  // C exp(-g/s)
    double s;
    double d;
};

std::optional<Bump> bump(const Vec3& x, double t, const ProblemParameters& p) {
    const double d = distance_sq(x);
    const double s = 0.25 - d;
    if (!(s > 0.0)) {
        return std::nullopt;
    }
    const double exponent = -g_of_t(t, p) / s;
    if (exponent < kExponentFloor) {
        return std::nullopt;
    }
    return Bump{p.amplitude * std::exp(exponent), s, d};
}

double profile(double x1) { return x1 * x1 * x1 - 1.5 * x1 * x1 + 0.25; }
double profile_prime(double x1) { return 3.0 * x1 * x1 - 3.0 * x1; }

}  // namespace

Vec3 exact_solution_1(const Vec3& x, double t, const ProblemParameters& p) {
    const auto b = bump(x, t, p);
    if (!b) {
        return kUnitZ;
    }
    return {b->e * (x[0] - 0.5), b->e * (x[1] - 0.5), std::sqrt(1.0 - b->e * b->e * b->d)};
}

Vec3 exact_solution_1_dt(const Vec3& x, double t, const ProblemParameters& p) {
    const auto b = bump(x, t, p);
    if (!b) {
        return {0.0, 0.0, 0.0};
    }
    const double gp = g_prime(t, p);
    const double m3 = std::sqrt(1.0 - b->e * b->e * b->d);
    const double factor = -gp / b->s * b->e;
    return {factor * (x[0] - 0.5), factor * (x[1] - 0.5), gp / b->s * b->e * b->e * b->d / m3};
}

Mat3 exact_solution_1_gradient(const Vec3& x, double t, const ProblemParameters& p) {
    Mat3 jac{};
    const auto b = bump(x, t, p);
    if (!b) {
        return jac;
    }
    const double g = g_of_t(t, p);
    const double y1 = x[0] - 0.5;
    const double y2 = x[1] - 0.5;
    // dE/dx_b = -g E d'_b / s^2 with d' = (2 y1, 2 y2, 0).
    const Vec3 dd{2.0 * y1, 2.0 * y2, 0.0};
    const Vec3 de = (-g * b->e / (b->s * b->s)) * dd;
    const double m3 = std::sqrt(1.0 - b->e * b->e * b->d);
    for (std::size_t k = 0; k < 3; ++k) {
        jac[0][k] = y1 * de[k] + (k == 0 ? b->e : 0.0);
        jac[1][k] = y2 * de[k] + (k == 1 ? b->e : 0.0);
        jac[2][k] = -(2.0 * b->e * de[k] * b->d + b->e * b->e * dd[k]) / (2.0 * m3);
    }
    return jac;
}

Vec3 exact_solution_2(const Vec3& x, double t, const ProblemParameters& p) {
    const double q = profile(x[0]);
    const double w = 3.0 * std::numbers::pi / p.t_final;
    return {-q * std::sin(w * t), std::sqrt(1.0 - q * q), -q * std::cos(w * t)};
}

Vec3 exact_solution_2_dt(const Vec3& x, double t, const ProblemParameters& p) {
    const double q = profile(x[0]);
    const double w = 3.0 * std::numbers::pi / p.t_final;
    return {-q * w * std::cos(w * t), 0.0, q * w * std::sin(w * t)};
}

Mat3 exact_solution_2_gradient(const Vec3& x, double t, const ProblemParameters& p) {
    const double q = profile(x[0]);
    const double dq = profile_prime(x[0]);
    const double w = 3.0 * std::numbers::pi / p.t_final;
    Mat3 jac{};
    jac[0][0] = -dq * std::sin(w * t);
    jac[1][0] = -q * dq / std::sqrt(1.0 - q * q);
    jac[2][0] = -dq * std::cos(w * t);
    return jac;
}

Vec3 nonsmooth_initial(const Vec3& x) {
    const double d = distance_sq(x);
    if (d > 0.25) {
        return kUnitZ;
    }
    return {x[0] - 0.5, x[1] - 0.5, std::sqrt(1.0 - d)};
}

Vec3 ProblemSpec::value(const Vec3& x, double t) const {
    switch (kind) {
        case ProblemKind::Exact1:
            return exact_solution_1(x, t, params);
        case ProblemKind::Exact2:
            return exact_solution_2(x, t, params);
        case ProblemKind::Nonsmooth:
            break;
    }
    throw std::logic_error("problem '" + label + "' has no exact solution");
}

Vec3 ProblemSpec::time_derivative(const Vec3& x, double t) const {
    switch (kind) {
        case ProblemKind::Exact1:
            return exact_solution_1_dt(x, t, params);
        case ProblemKind::Exact2:
            return exact_solution_2_dt(x, t, params);
        case ProblemKind::Nonsmooth:
            break;
    }
    throw std::logic_error("problem '" + label + "' has no exact solution");
}

Mat3 ProblemSpec::gradient(const Vec3& x, double t) const {
    switch (kind) {
        case ProblemKind::Exact1:
            return exact_solution_1_gradient(x, t, params);
        case ProblemKind::Exact2:
            return exact_solution_2_gradient(x, t, params);
        case ProblemKind::Nonsmooth:
            break;
    }
    throw std::logic_error("problem '" + label + "' has no exact solution");
}

Vec3 ProblemSpec::initial(const Vec3& x) const {
    return kind == ProblemKind::Nonsmooth ? nonsmooth_initial(x) : value(x, 0.0);
}

ReferenceSolution ProblemSpec::reference() const {
    if (!has_exact()) {
        throw std::logic_error("problem '" + label + "' has no exact solution");
    }
    return {[spec = *this](const Vec3& x, double t) { return spec.value(x, t); },
            [spec = *this](const Vec3& x, double t) { return spec.gradient(x, t); }};
}

ProblemSpec make_problem(const std::string& label, const ProblemParameters& params) {
    ProblemSpec spec;
    spec.label = label;
    spec.params = params;
    if (label == "exact1") {
        spec.kind = ProblemKind::Exact1;
    } else if (label == "exact2") {
        spec.kind = ProblemKind::Exact2;
    } else if (label == "nonsmooth") {
        spec.kind = ProblemKind::Nonsmooth;
    } else {
        throw std::invalid_argument("unknown problem '" + label + "' (expected exact1, exact2 or nonsmooth)");
    }
    return spec;
}

Vec3 fd_laplacian(const std::function<Vec3(const Vec3&)>& f, const Vec3& x, double step) {
    const Vec3 center = f(x);
    Vec3 lap{0.0, 0.0, 0.0};
    for (std::size_t axis = 0; axis < 3; ++axis) {
        Vec3 xp = x;
        Vec3 xm = x;
        xp[axis] += step;
        xm[axis] -= step;
        const Vec3 fp = f(xp);
        const Vec3 fm = f(xm);
        for (std::size_t c = 0; c < 3; ++c) {
            lap[c] += (fp[c] - 2.0 * center[c] + fm[c]) / (step * step);
        }
    }
    return lap;
}

Vec3 forcing_field(const ProblemSpec& spec, const Vec3& x, double t) {
    if (!spec.has_exact()) {
        return kNonsmoothField;
    }
    const Vec3 m = spec.value(x, t);
    const Vec3 dm = spec.time_derivative(x, t);
    const Vec3 lap = fd_laplacian([&](const Vec3& y) { return spec.value(y, t); }, x, spec.params.fd_step);
    return spec.params.alpha * dm + cross(m, dm) - lap;
}

NodalField forcing_nodal(const FiniteElementSpace& space, const ProblemSpec& spec, double t) {
    return interpolate(space, [&](const Vec3& x) { return forcing_field(spec, x, t); });
}

}  // namespace llg
