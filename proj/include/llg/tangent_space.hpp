#pragma once

#include <memory>
#include <span>
#include <vector>

#include "llg/fem.hpp"
#include "llg/sparse.hpp"

namespace llg {

/// L2-orthogonal projection onto the discrete tangent space
///
///   T_h(m) = { v_h in V_h^3 : (m . v_h, w_h) = 0 for all w_h in V_h }.
///
/// The projection v_h = P_h(m) v is the primal part of the saddle problem
///
///   (v_h, w_h) + (m . w_h, lambda_h) = (v, w_h),   (m . v_h, mu_h) = 0,
///
/// solved with the same block solver as the time stepper. The constraint
/// field m is given at quadrature points and must be of unit length there.
class TangentProjector {
public:
    TangentProjector(const FiniteElementSpace& space, const QuadratureField& m, double tol = 1e-10);

    /// Projection of an FE field (right-hand side M v).
    [[nodiscard]] NodalField project(const NodalField& v) const;
    /// Projection of a general L2 function given through its load vector (v, e_a phi_i).
    [[nodiscard]] NodalField project_load(std::span<const double> load) const;

    /// ||Pi_h(m . v_h)||_{L2}; zero exactly on T_h(m).
    [[nodiscard]] double residual(const NodalField& v_h) const;

    /// GMRES iterations of the most recent projection.
    [[nodiscard]] std::size_t last_iterations() const noexcept { return last_iterations_; }

    [[nodiscard]] const CsrMatrix& constraint() const noexcept { return constraint_; }
    [[nodiscard]] const CsrMatrix& mass() const noexcept { return mass_; }

private:
    const FiniteElementSpace* space_;
    double tol_;
    CsrMatrix mass_;
    CsrMatrix vector_mass_;
    CsrMatrix constraint_;
    mutable std::size_t last_iterations_ = 0;
    // The block matrix is fixed, so one factorization serves every projection.
    mutable std::shared_ptr<SaddleSolver> solver_;
};

[[nodiscard]] NodalField project_tangent(const FiniteElementSpace& space, const QuadratureField& m,
                                         const NodalField& v, double tol = 1e-10);

[[nodiscard]] double tangent_residual(const FiniteElementSpace& space, const QuadratureField& m,
                                      const NodalField& v_h);

/// (u, v)_{L2} of two FE fields.
[[nodiscard]] double l2_inner(const CsrMatrix& mass, const NodalField& u, const NodalField& v);

}  // namespace llg
