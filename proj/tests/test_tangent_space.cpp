#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "llg/tangent_space.hpp"
#include "support/oracles.hpp"

namespace {

using llg::NodalField;
using llg::Vec3;
using llg::operator+;
using llg::operator-;
using llg::operator*;

NodalField random_field(std::mt19937_64& rng, std::size_t n) {
    return NodalField::from_flat(oracle::random_vector(rng, 3 * n));
}

TEST(Projection, ConstantNormalRemovesZComponent) {
    std::mt19937_64 rng(31);
    const llg::FiniteElementSpace space(llg::build_box_mesh(2, 2, 1, 0.1), 2);
    const auto ez = llg::evaluate_at_quadrature(space, [](const Vec3&) { return llg::kUnitZ; });
    const auto v = random_field(rng, space.num_dofs());
    const auto p = llg::project_tangent(space, ez, v, 1e-12);
    for (std::size_t i = 0; i < v.size(); ++i) {
        EXPECT_NEAR(p.values[i][0], v.values[i][0], 1e-10);
        EXPECT_NEAR(p.values[i][1], v.values[i][1], 1e-10);
        EXPECT_NEAR(p.values[i][2], 0.0, 1e-10);
    }

    const NodalField ex(space.num_dofs(), llg::kUnitX);
    const auto px = llg::project_tangent(space, ez, ex);
    for (const auto& w : px.values) {
        EXPECT_NEAR(w[0], 1.0, 1e-9);
        EXPECT_NEAR(std::abs(w[1]) + std::abs(w[2]), 0.0, 1e-9);
    }
    const NodalField z(space.num_dofs(), llg::kUnitZ);
    for (const auto& w : llg::project_tangent(space, ez, z).values) EXPECT_NEAR(llg::norm(w), 0.0, 1e-9);
}

TEST(Projection, ResidualOfSimpleFields) {
    const double L = 0.25;
    const llg::FiniteElementSpace space(llg::build_box_mesh(2, 1, 1, L), 1);
    const auto ez = llg::evaluate_at_quadrature(space, [](const Vec3&) { return llg::kUnitZ; });
    EXPECT_NEAR(llg::tangent_residual(space, ez, NodalField(space.num_dofs(), llg::kUnitZ)), std::sqrt(L), 1e-10);
    EXPECT_EQ(llg::tangent_residual(space, ez, NodalField(space.num_dofs())), 0.0);
}

TEST(Projection, PropertiesForRandomNormals) {
    // Property suite: idempotence, self-adjointness, stability and tangency
    // for smooth normals drawn from a seeded family.
    std::mt19937_64 rng(32);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int trial = 0; trial < 4; ++trial) {
        const int r = 1 + trial % 2;
        const llg::FiniteElementSpace space(llg::build_box_mesh(2, 2, 2, 0.5), r);
        const double a = u(rng), b = u(rng), c = u(rng);
        const auto m = llg::evaluate_at_quadrature(space, [=](const Vec3& x) {
            const Vec3 v{std::sin(a * x[0] + x[2]), std::cos(b * x[1]), 1.5 + c * x[0] * x[2]};
            return (1.0 / llg::norm(v)) * v;
        });
        const llg::TangentProjector proj(space, m, 1e-12);
        const auto v = random_field(rng, space.num_dofs());
        const auto w = random_field(rng, space.num_dofs());
        const auto pv = proj.project(v);
        const auto pw = proj.project(w);
        const auto ppv = proj.project(pv);

        const auto& M = proj.mass();
        const auto diff_norm = [&](const NodalField& x, const NodalField& y) {
            NodalField d(x.size());
            for (std::size_t i = 0; i < x.size(); ++i) d.values[i] = x.values[i] - y.values[i];
            return std::sqrt(llg::l2_inner(M, d, d));
        };
        const double nv = std::sqrt(llg::l2_inner(M, v, v));
        const double nw = std::sqrt(llg::l2_inner(M, w, w));
        const double npv = std::sqrt(llg::l2_inner(M, pv, pv));
        EXPECT_LE(diff_norm(ppv, pv) / npv, 1e-8);
        EXPECT_LE(std::abs(llg::l2_inner(M, pv, w) - llg::l2_inner(M, v, pw)) / (nv * nw), 1e-9);
        EXPECT_LE(npv, nv + 1e-9);
        EXPECT_LE(proj.residual(pv), 1e-10);

        // v - P v is orthogonal to the tangent space
        NodalField rest(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) rest.values[i] = v.values[i] - pv.values[i];
        EXPECT_NEAR(llg::l2_inner(M, rest, pw) / (nv * nw), 0.0, 1e-9);
    }
}

TEST(Projection, LoadAndFieldInterfacesAgree) {
    std::mt19937_64 rng(33);
    const llg::FiniteElementSpace space(llg::build_box_mesh(2, 2, 1, 0.3), 2);
    const auto m = llg::evaluate_at_quadrature(space, llg::VectorFunction(oracle::swirl));
    const llg::TangentProjector proj(space, m, 1e-12);
    const auto v = random_field(rng, space.num_dofs());
    const auto load = llg::spmv(llg::vector_block_diagonal(space, proj.mass()), v.flatten());
    const auto a = proj.project(v);
    const auto b = proj.project_load(load);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (int k = 0; k < 3; ++k) EXPECT_NEAR(a.values[i][k], b.values[i][k], 1e-10);
    EXPECT_GT(proj.last_iterations(), 0u);
}

TEST(Projection, RejectsBadInput) {
    const llg::FiniteElementSpace space(llg::build_box_mesh(1, 1, 1, 1.0), 1);
    auto m = llg::evaluate_at_quadrature(space, [](const Vec3&) { return llg::kUnitZ; });
    const llg::TangentProjector proj(space, m);
    EXPECT_THROW((void)proj.project(NodalField(3)), std::invalid_argument);
    m.values[0] = {0.0, 0.0, 2.0};
    EXPECT_THROW(llg::TangentProjector(space, m), std::invalid_argument);
}

}  // namespace
