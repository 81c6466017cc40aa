#include "llg/tangent_space.hpp"

#include <cmath>
#include <stdexcept>

namespace llg {

TangentProjector::TangentProjector(const FiniteElementSpace& space, const QuadratureField& m, double tol)
    : space_(&space),
      tol_(tol),
      mass_(assemble_mass(space)),
      vector_mass_(vector_block_diagonal(space, mass_)),
      constraint_(assemble_constraint(space, m)) {}

NodalField TangentProjector::project(const NodalField& v) const {
    if (v.size() != space_->num_dofs()) {
        throw std::invalid_argument("project: field size does not match space");
    }
    const std::vector<double> flat = v.flatten();
    return project_load(spmv(vector_mass_, flat));
}

NodalField TangentProjector::project_load(std::span<const double> load) const {
    SaddleSystem sys{vector_mass_, constraint_, {load.begin(), load.end()}, {}};
    if (!solver_) {
        solver_ = std::make_shared<SaddleSolver>();
    }
    const SaddleSolution sol = solver_->solve(sys, tol_);
    last_iterations_ = sol.iterations;
    return NodalField::from_flat(sol.x);
}

double TangentProjector::residual(const NodalField& v_h) const {
    const std::vector<double> g = spmv(constraint_, v_h.flatten());
    if (norm2(g) == 0.0) {
        return 0.0;
    }
    const SolveResult y = cg_solve(mass_, g, 1e-13);
    return std::sqrt(std::max(0.0, dot(y.x, g)));
}

NodalField project_tangent(const FiniteElementSpace& space, const QuadratureField& m, const NodalField& v,
                           double tol) {
    return TangentProjector(space, m, tol).project(v);
}

double tangent_residual(const FiniteElementSpace& space, const QuadratureField& m, const NodalField& v_h) {
    return TangentProjector(space, m).residual(v_h);
}

double l2_inner(const CsrMatrix& mass, const NodalField& u, const NodalField& v) {
    const std::size_t n = mass.rows();
    if (u.size() != n || v.size() != n) {
        throw std::invalid_argument("l2_inner: size mismatch");
    }
    std::vector<double> comp(n), mu(n);
    double s = 0.0;
    for (std::size_t c = 0; c < 3; ++c) {
        for (std::size_t i = 0; i < n; ++i) {
            comp[i] = u.values[i][c];
        }
        mass.multiply(comp, mu);
        for (std::size_t i = 0; i < n; ++i) {
            s += mu[i] * v.values[i][c];
        }
    }
    return s;
}

}  // namespace llg
