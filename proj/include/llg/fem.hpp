#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "llg/mesh.hpp"
#include "llg/sparse.hpp"
#include "llg/vec3.hpp"

namespace llg {

/// Equispaced 1D Lagrange basis of degree r on [0,1]: values and first derivatives.
struct Basis1d {
    std::vector<double> values;
    std::vector<double> derivatives;
};

[[nodiscard]] Basis1d shape_eval_1d(int degree, double xi);

/// Gauss-Legendre rule with n points mapped to [0,1].
struct QuadratureRule1d {
    std::vector<double> points;
    std::vector<double> weights;
};

[[nodiscard]] QuadratureRule1d gauss_legendre(int n_points);

struct QuadraturePoint {
    Vec3 point;
    double weight;
};

/// Tensor Gauss-Legendre rule with degree+2 points per direction on the box
/// origin + [0,size_x] x [0,size_y] x [0,size_z]. Weights sum to the box volume.
[[nodiscard]] std::vector<QuadraturePoint> quadrature_rule(int degree, const Vec3& origin = {0.0, 0.0, 0.0},
                                                           const Vec3& size = {1.0, 1.0, 1.0});

/// Vector field stored as one 3-vector per scalar DOF.
struct NodalField {
    std::vector<Vec3> values;

    NodalField() = default;
    explicit NodalField(std::size_t n, const Vec3& fill = {0.0, 0.0, 0.0}) : values(n, fill) {}

    [[nodiscard]] std::size_t size() const noexcept { return values.size(); }
    /// Component-major layout [x_0..x_{N-1}, y_0.., z_0..] used by the block matrices.
    [[nodiscard]] std::vector<double> flatten() const;
    static NodalField from_flat(std::span<const double> flat);
};

/// One 3-vector per quadrature point, cell-major (cell * points_per_cell + q).
struct QuadratureField {
    std::vector<Vec3> values;
};

using VectorFunction = std::function<Vec3(const Vec3&)>;
using JacobianFunction = std::function<Mat3(const Vec3&)>;

/// Degree-r tensor-product Lagrange space on a structured hexahedral mesh.
///
/// Scalar DOFs sit on the (r nx + 1) x (r ny + 1) x (r nz + 1) grid of
/// equispaced nodes and are numbered lexicographically with x fastest. Since
/// all cells are translates of one box, basis tables and element matrices are
/// computed once on the reference cell.
class FiniteElementSpace {
public:
    FiniteElementSpace(Mesh mesh, int degree);

    [[nodiscard]] const Mesh& mesh() const noexcept { return mesh_; }
    [[nodiscard]] int degree() const noexcept { return degree_; }
    [[nodiscard]] std::size_t num_dofs() const noexcept { return num_dofs_; }
    [[nodiscard]] std::size_t dofs_per_cell() const noexcept { return dofs_per_cell_; }
    [[nodiscard]] std::size_t points_per_cell() const noexcept { return weights_.size(); }
    [[nodiscard]] std::size_t num_quadrature_points() const noexcept {
        return points_per_cell() * mesh_.num_cells();
    }
    [[nodiscard]] const std::array<std::size_t, 3>& dof_grid() const noexcept { return grid_; }

    [[nodiscard]] Vec3 node(std::size_t dof) const;
    [[nodiscard]] std::span<const std::size_t> cell_dofs(std::size_t c) const {
        return {cell_dofs_.data() + c * dofs_per_cell_, dofs_per_cell_};
    }

    /// Basis value of local function i at quadrature point q.
    [[nodiscard]] double basis(std::size_t q, std::size_t i) const { return basis_[q * dofs_per_cell_ + i]; }
    /// Physical gradient of local function i at quadrature point q.
    [[nodiscard]] const Vec3& basis_gradient(std::size_t q, std::size_t i) const {
        return gradients_[q * dofs_per_cell_ + i];
    }
    /// Physical quadrature weight (identical in every cell).
    [[nodiscard]] double weight(std::size_t q) const { return weights_[q]; }
    [[nodiscard]] Vec3 quadrature_point(std::size_t c, std::size_t q) const;

    /// Scalar N x N sparsity pattern (all DOF pairs sharing a cell).
    [[nodiscard]] std::span<const std::size_t> pattern_offsets() const noexcept { return offsets_; }
    [[nodiscard]] std::span<const std::size_t> pattern_columns() const noexcept { return columns_; }
    /// Position in the scalar pattern of local pair (a, b) in cell c.
    [[nodiscard]] std::size_t scatter_position(std::size_t c, std::size_t a, std::size_t b) const {
        return scatter_[(c * dofs_per_cell_ + a) * dofs_per_cell_ + b];
    }

    [[nodiscard]] const std::vector<double>& element_mass() const noexcept { return element_mass_; }
    [[nodiscard]] const std::vector<double>& element_stiffness() const noexcept { return element_stiffness_; }

private:
    Mesh mesh_;
    int degree_;
    std::array<std::size_t, 3> grid_{};
    std::size_t num_dofs_ = 0;
    std::size_t dofs_per_cell_ = 0;
    std::vector<std::size_t> cell_dofs_;
    std::vector<Vec3> ref_points_;  // quadrature points relative to the cell origin
    std::vector<double> weights_;
    std::vector<double> basis_;
    std::vector<Vec3> gradients_;
    std::vector<std::size_t> offsets_;
    std::vector<std::size_t> columns_;
    std::vector<std::size_t> scatter_;
    std::vector<double> element_mass_;
    std::vector<double> element_stiffness_;
};

/// m_ij = (phi_i, phi_j)
[[nodiscard]] CsrMatrix assemble_mass(const FiniteElementSpace& space);
/// a_ij = (grad phi_i, grad phi_j)
[[nodiscard]] CsrMatrix assemble_stiffness(const FiniteElementSpace& space);

/// I (x) scalar as a 3N x 3N matrix carrying the full 3x3 block pattern, so it
/// can be combined value-wise with the skew matrix.
[[nodiscard]] CsrMatrix vector_block_diagonal(const FiniteElementSpace& space, const CsrMatrix& scalar);

/// Skew operator, row = test function (j, a), column = trial function (i, b):
/// entry (mhat x e_b phi_i, e_a phi_j). Exactly antisymmetric.
[[nodiscard]] CsrMatrix assemble_skew(const FiniteElementSpace& space, const QuadratureField& mhat);

/// N x 3N constraint matrix: entry (j, (b, i)) = (mhat_b phi_i, phi_j).
[[nodiscard]] CsrMatrix assemble_constraint(const FiniteElementSpace& space, const QuadratureField& mhat);

struct TangentOperators {
    CsrMatrix skew;
    CsrMatrix constraint;
};

/// Skew and constraint matrices from a single pass over the cells.
[[nodiscard]] TangentOperators assemble_tangent_operators(const FiniteElementSpace& space,
                                                          const QuadratureField& mhat);

/// Rejects fields whose length deviates from 1 by more than `tolerance` anywhere.
void require_unit_field(const FiniteElementSpace& space, const QuadratureField& mhat, double tolerance = 1e-8);

[[nodiscard]] NodalField interpolate(const FiniteElementSpace& space, const VectorFunction& f);

[[nodiscard]] QuadratureField evaluate_at_quadrature(const FiniteElementSpace& space, const NodalField& field);
[[nodiscard]] QuadratureField evaluate_at_quadrature(const FiniteElementSpace& space, const VectorFunction& f);
/// Gradient of an FE field at every quadrature point (jac[a][b] = d u_a / d x_b).
[[nodiscard]] std::vector<Mat3> gradient_at_quadrature(const FiniteElementSpace& space, const NodalField& field);

/// Load vector (f, e_a phi_i) in component-major layout.
[[nodiscard]] std::vector<double> load_vector(const FiniteElementSpace& space, const QuadratureField& f);

struct ErrorNorms {
    double l2 = 0.0;
    /// Full H1 norm sqrt(l2^2 + |.|_{H1}^2).
    double h1 = 0.0;
};

[[nodiscard]] ErrorNorms error_norms(const FiniteElementSpace& space, const NodalField& field,
                                     const VectorFunction& exact, const JacobianFunction& exact_gradient);

/// u^T (I (x) scalar) u, e.g. ||grad u||^2 for the stiffness matrix.
[[nodiscard]] double vector_quadratic_form(const CsrMatrix& scalar, const NodalField& u);

/// ||field||_{L2}
[[nodiscard]] double l2_norm(const FiniteElementSpace& space, const NodalField& field);

}  // namespace llg
