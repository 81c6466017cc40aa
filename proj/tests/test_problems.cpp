#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "llg/problems.hpp"

namespace {

using llg::Vec3;
using llg::operator+;
using llg::operator-;
using llg::operator*;

Vec3 fd_dt(const llg::ProblemSpec& p, const Vec3& x, double t, double h) {
    return (0.5 / h) * (p.value(x, t + h) - p.value(x, t - h));
}

TEST(Exact1, CenterAndOutsideDisk) {
    for (double t : {0.0, 0.07, 0.2}) {
        EXPECT_EQ(llg::exact_solution_1({0.5, 0.5, 0.003}, t), llg::kUnitZ);
        EXPECT_EQ(llg::exact_solution_1_dt({0.5, 0.5, 0.003}, t), (Vec3{0.0, 0.0, 0.0}));
        // d = 0.3
        const Vec3 far{0.5 + std::sqrt(0.3), 0.5, 0.0};
        EXPECT_EQ(llg::exact_solution_1(far, t), llg::kUnitZ);
        EXPECT_EQ(llg::exact_solution_1_dt(far, t), (Vec3{0.0, 0.0, 0.0}));
        // right at the disk boundary the exponent is clamped to zero without NaNs
        const auto edge = llg::exact_solution_1({0.5 + 0.5 * (1.0 - 1e-15), 0.5, 0.0}, t);
        EXPECT_TRUE(std::isfinite(edge[0]) && std::isfinite(edge[2]));
    }
}

TEST(ManufacturedSolutions, UnitLengthAtRandomSamples) {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> u(0.0, 1.0), ut(0.0, 0.2);
    for (int s = 0; s < 10000; ++s) {
        const Vec3 x{u(rng), u(rng), 0.01 * u(rng)};
        const double t = ut(rng);
        EXPECT_NEAR(llg::norm(llg::exact_solution_1(x, t)), 1.0, 1e-12);
        EXPECT_NEAR(llg::norm(llg::exact_solution_2(x, t)), 1.0, 1e-12);
    }
}

TEST(ManufacturedSolutions, TimeDerivativesMatchFiniteDifferences) {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(0.0, 1.0), ut(0.01, 0.19);
    for (const char* label : {"exact1", "exact2"}) {
        const auto p = llg::make_problem(label);
        for (int s = 0; s < 500; ++s) {
            const Vec3 x{u(rng), u(rng), 0.01 * u(rng)};
            const double t = ut(rng);
            const auto fd = fd_dt(p, x, t, 1e-6);
            const auto an = p.time_derivative(x, t);
            for (int a = 0; a < 3; ++a) EXPECT_NEAR(an[a], fd[a], 1e-6 * std::max(1.0, std::abs(an[a])));
        }
    }
}

TEST(ManufacturedSolutions, GradientsMatchFiniteDifferences) {
    std::mt19937_64 rng(43);
    std::uniform_real_distribution<double> u(0.05, 0.95), ut(0.0, 0.2);
    for (const char* label : {"exact1", "exact2"}) {
        const auto p = llg::make_problem(label);
        for (int s = 0; s < 300; ++s) {
            const Vec3 x{u(rng), u(rng), 0.005};
            const double t = ut(rng);
            const auto g = p.gradient(x, t);
            for (int b = 0; b < 3; ++b) {
                const double h = 1e-6;
                Vec3 xp = x, xm = x;
                xp[b] += h;
                xm[b] -= h;
                const auto d = (0.5 / h) * (p.value(xp, t) - p.value(xm, t));
                for (int a = 0; a < 3; ++a) EXPECT_NEAR(g[a][b], d[a], 1e-5 * std::max(1.0, std::abs(g[a][b])));
            }
        }
    }
}

TEST(Exact2, BoundaryValues) {
    const auto a = llg::exact_solution_2({0.0, 0.3, 0.0}, 0.0);
    EXPECT_NEAR(a[0], 0.0, 1e-15);
    EXPECT_NEAR(a[1], std::sqrt(15.0) / 4.0, 1e-15);
    EXPECT_NEAR(a[2], -0.25, 1e-15);
    const auto b = llg::exact_solution_2({1.0, 0.7, 0.0}, 0.0);
    EXPECT_NEAR(b[1], std::sqrt(15.0) / 4.0, 1e-15);
    EXPECT_NEAR(b[2], 0.25, 1e-15);
}

TEST(Exact1, HomogeneousNeumannOnTheBoundary) {
    const auto p = llg::make_problem("exact1");
    std::mt19937_64 rng(44);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int s = 0; s < 200; ++s) {
        const double t = 0.2 * u(rng), y = u(rng);
        for (const Vec3& x : {Vec3{0.0, y, 0.005}, Vec3{1.0, y, 0.005}, Vec3{y, 0.0, 0.005}, Vec3{y, 1.0, 0.0}}) {
            const auto g = p.gradient(x, t);
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b) EXPECT_LE(std::abs(g[a][b]), 1e-6);
        }
    }
}

TEST(Nonsmooth, InitialData) {
    EXPECT_EQ(llg::nonsmooth_initial({0.5, 0.5, 0.0}), llg::kUnitZ);
    // d = 1/4 on the disk boundary
    const auto e = llg::nonsmooth_initial({1.0, 0.5, 0.01});
    EXPECT_NEAR(e[0], 0.5, 1e-15);
    EXPECT_NEAR(e[1], 0.0, 1e-15);
    EXPECT_NEAR(e[2], std::sqrt(3.0) / 2.0, 1e-15);
    EXPECT_NEAR(llg::norm(e), 1.0, 1e-15);
    // d = 1/16
    const auto i = llg::nonsmooth_initial({0.75, 0.5, 0.01});
    EXPECT_NEAR(i[0], 0.25, 1e-15);
    EXPECT_NEAR(i[2], std::sqrt(15.0) / 4.0, 1e-15);
    EXPECT_EQ(llg::nonsmooth_initial({0.0, 0.0, 0.0}), llg::kUnitZ);
    const auto p = llg::make_problem("nonsmooth");
    EXPECT_FALSE(p.has_exact());
    EXPECT_THROW((void)p.value({0.5, 0.5, 0.0}, 0.0), std::logic_error);
    EXPECT_EQ(llg::forcing_field(p, {0.1, 0.2, 0.0}, 0.1), llg::kNonsmoothField);
}

TEST(Forcing, SymbolicOracleForSolution2) {
    // m = (-q s, sqrt(1 - q^2), -q c) depends on x_1 only.
    const auto p = llg::make_problem("exact2");
    const double alpha = p.params.alpha, w = 3.0 * std::numbers::pi / p.params.t_final;
    std::mt19937_64 rng(45);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int s = 0; s < 100; ++s) {
        const Vec3 x{s == 0 ? 0.0 : u(rng), u(rng), 0.005};
        const double t = s == 0 ? 0.0 : 0.2 * u(rng);
        const double y = x[0];
        const double q = y * y * y - 1.5 * y * y + 0.25, q1 = 3 * y * y - 3 * y, q2 = 6 * y - 3;
        const double sn = std::sin(w * t), cs = std::cos(w * t), r = std::sqrt(1 - q * q);
        const Vec3 m{-q * sn, r, -q * cs};
        const Vec3 dt{-q * w * cs, 0.0, q * w * sn};
        const Vec3 lap{-q2 * sn, -(q1 * q1 + q * q2) / r - q * q * q1 * q1 / (r * r * r), -q2 * cs};
        const Vec3 h = alpha * dt + llg::cross(m, dt) - lap;
        const auto f = llg::forcing_field(p, x, t);
        // The central second difference with step 1e-5 carries a rounding error
        // of about 4 eps / step^2 ~ 4.4e-6 per component; at x_1 = 0, t = 0 the
        // profile is flat enough that 1e-6 is reached.
        for (int a = 0; a < 3; ++a) EXPECT_NEAR(f[a], h[a], s == 0 ? 1e-6 : 1e-5);
    }
}

TEST(Forcing, FiniteDifferenceStepInsensitivity) {
    std::mt19937_64 rng(46);
    std::uniform_real_distribution<double> u(0.1, 0.9);
    for (const char* label : {"exact1", "exact2"}) {
        llg::ProblemParameters fine;
        fine.fd_step = 5e-6;
        const auto a = llg::make_problem(label);
        const auto b = llg::make_problem(label, fine);
        for (int s = 0; s < 100; ++s) {
            const Vec3 x{u(rng), u(rng), 0.005};
            const double t = 0.2 * u(rng) * 0.9;
            const auto fa = llg::forcing_field(a, x, t), fb = llg::forcing_field(b, x, t);
            // Rounding in the second difference at step 5e-6 alone is up to
            // 4 eps / step^2 ~ 1.8e-5 for unit-length m, so it is added to the bound.
            const double rounding = 4.0 * std::numeric_limits<double>::epsilon() / (fine.fd_step * fine.fd_step);
            for (int c = 0; c < 3; ++c)
                EXPECT_NEAR(fa[c], fb[c], 1e-5 * std::max(1.0, std::abs(fa[c])) + rounding);
        }
    }
}

TEST(Forcing, ConstantFieldHasNoForcing) {
    const auto lap = llg::fd_laplacian([](const Vec3&) { return llg::kUnitZ; }, {0.3, 0.3, 0.3}, 1e-5);
    EXPECT_EQ(lap, (Vec3{0.0, 0.0, 0.0}));
    const auto quad = llg::fd_laplacian([](const Vec3& x) { return Vec3{x[0] * x[0], x[1] * x[2], x[2] * x[2] * 3}; },
                                        {0.3, 0.4, 0.5}, 1e-3);
    EXPECT_NEAR(quad[0], 2.0, 1e-8);
    EXPECT_NEAR(quad[1], 0.0, 1e-8);
    EXPECT_NEAR(quad[2], 6.0, 1e-8);
}

TEST(Forcing, CrossProductIdentity) {
    std::mt19937_64 rng(47);
    std::normal_distribution<double> n;
    for (int s = 0; s < 1000; ++s) {
        const Vec3 a{n(rng), n(rng), n(rng)}, b{n(rng), n(rng), n(rng)}, c{n(rng), n(rng), n(rng)};
        const auto lhs = llg::cross(a, llg::cross(b, c));
        const auto rhs = llg::dot(a, c) * b - llg::dot(a, b) * c;
        for (int i = 0; i < 3; ++i) EXPECT_NEAR(lhs[i], rhs[i], 1e-13 * (1 + std::abs(lhs[i])));
    }
}

TEST(Problems, Factory) {
    EXPECT_EQ(llg::make_problem("exact1").kind, llg::ProblemKind::Exact1);
    EXPECT_EQ(llg::make_problem("exact2").kind, llg::ProblemKind::Exact2);
    EXPECT_THROW((void)llg::make_problem("vortex"), std::invalid_argument);
    const auto p = llg::make_problem("exact2");
    const Vec3 x{0.3, 0.1, 0.0};
    EXPECT_EQ(p.initial(x), p.value(x, 0.0));
    const auto ref = p.reference();
    EXPECT_EQ(ref.value(x, 0.1), p.value(x, 0.1));
}

}  // namespace
