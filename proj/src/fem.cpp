#include "llg/fem.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace llg {

Basis1d shape_eval_1d(int degree, double xi) {
    if (degree < 1) {
        throw std::invalid_argument("shape_eval_1d: degree must be >= 1");
    }
    const auto n = static_cast<std::size_t>(degree) + 1;
    std::vector<double> nodes(n);
    for (std::size_t j = 0; j < n; ++j) {
        nodes[j] = static_cast<double>(j) / degree;
    }
    Basis1d out{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)};
    for (std::size_t j = 0; j < n; ++j) {
        double value = 1.0;
        for (std::size_t m = 0; m < n; ++m) {
            if (m != j) {
                value *= (xi - nodes[m]) / (nodes[j] - nodes[m]);
            }
        }
        out.values[j] = value;

        double deriv = 0.0;
        for (std::size_t l = 0; l < n; ++l) {
            if (l == j) {
                continue;
            }
            double term = 1.0 / (nodes[j] - nodes[l]);
            for (std::size_t m = 0; m < n; ++m) {
                if (m != j && m != l) {
                    term *= (xi - nodes[m]) / (nodes[j] - nodes[m]);
                }
            }
            deriv += term;
        }
        out.derivatives[j] = deriv;
    }
    return out;
}

QuadratureRule1d gauss_legendre(int n_points) {
    if (n_points < 1) {
        throw std::invalid_argument("gauss_legendre: need at least one point");
    }
    const auto n = static_cast<std::size_t>(n_points);
    QuadratureRule1d rule{std::vector<double>(n), std::vector<double>(n)};
    for (std::size_t i = 0; i < n; ++i) {
        // Newton iteration on P_n from the Chebyshev-like initial guess.
        double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (n_points + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= n_points; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n_points * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) {
                break;
            }
        }
        // Recompute the derivative at the converged root for the weight.
        double p0 = 1.0;
        double p1 = x;
        for (int k = 2; k <= n_points; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = n_points * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        // Map [-1,1] -> [0,1]; store in increasing order.
        rule.points[n - 1 - i] = 0.5 * (x + 1.0);
        rule.weights[n - 1 - i] = 0.5 * w;
    }
    return rule;
}

std::vector<QuadraturePoint> quadrature_rule(int degree, const Vec3& origin, const Vec3& size) {
    if (degree < 1) {
        throw std::invalid_argument("quadrature_rule: degree must be >= 1");
    }
    const QuadratureRule1d g = gauss_legendre(degree + 2);
    const std::size_t n = g.points.size();
    std::vector<QuadraturePoint> pts;
    pts.reserve(n * n * n);
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t i = 0; i < n; ++i) {
                pts.push_back({{origin[0] + size[0] * g.points[i], origin[1] + size[1] * g.points[j],
                                origin[2] + size[2] * g.points[k]},
                               g.weights[i] * g.weights[j] * g.weights[k] * size[0] * size[1] * size[2]});
            }
        }
    }
    return pts;
}

std::vector<double> NodalField::flatten() const {
    const std::size_t n = values.size();
    std::vector<double> flat(3 * n);
    for (std::size_t i = 0; i < n; ++i) {
        flat[i] = values[i][0];
        flat[n + i] = values[i][1];
        flat[2 * n + i] = values[i][2];
    }
    return flat;
}

NodalField NodalField::from_flat(std::span<const double> flat) {
    if (flat.size() % 3 != 0) {
        throw std::invalid_argument("NodalField::from_flat: length must be a multiple of 3");
    }
    const std::size_t n = flat.size() / 3;
    NodalField f(n);
    for (std::size_t i = 0; i < n; ++i) {
        f.values[i] = {flat[i], flat[n + i], flat[2 * n + i]};
    }
    return f;
}

FiniteElementSpace::FiniteElementSpace(Mesh mesh, int degree) : mesh_(std::move(mesh)), degree_(degree) {
    if (degree < 1) {
        throw std::invalid_argument("finite element degree must be >= 1, got " + std::to_string(degree));
    }
    const auto r = static_cast<std::size_t>(degree);
    grid_ = {r * mesh_.nx() + 1, r * mesh_.ny() + 1, r * mesh_.nz() + 1};
    num_dofs_ = grid_[0] * grid_[1] * grid_[2];
    const std::size_t n1 = r + 1;
    dofs_per_cell_ = n1 * n1 * n1;

    const std::size_t n_cells = mesh_.num_cells();
    cell_dofs_.resize(n_cells * dofs_per_cell_);
    for (std::size_t c = 0; c < n_cells; ++c) {
        const auto idx = mesh_.cell_index(c);
        std::size_t local = 0;
        for (std::size_t k = 0; k < n1; ++k) {
            for (std::size_t j = 0; j < n1; ++j) {
                for (std::size_t i = 0; i < n1; ++i) {
                    const std::size_t gx = r * idx[0] + i;
                    const std::size_t gy = r * idx[1] + j;
                    const std::size_t gz = r * idx[2] + k;
                    cell_dofs_[c * dofs_per_cell_ + local++] = gx + grid_[0] * (gy + grid_[1] * gz);
                }
            }
        }
    }

    // Reference tables on the cell box.
    const QuadratureRule1d g = gauss_legendre(degree + 2);
    const std::size_t nq1 = g.points.size();
    std::vector<Basis1d> tab(nq1);
    for (std::size_t q = 0; q < nq1; ++q) {
        tab[q] = shape_eval_1d(degree, g.points[q]);
    }
    const double hx = mesh_.hx();
    const double hy = mesh_.hy();
    const double hz = mesh_.hz();
    const std::size_t nq = nq1 * nq1 * nq1;
    ref_points_.reserve(nq);
    weights_.reserve(nq);
    basis_.resize(nq * dofs_per_cell_);
    gradients_.resize(nq * dofs_per_cell_);
    std::size_t q = 0;
    for (std::size_t qk = 0; qk < nq1; ++qk) {
        for (std::size_t qj = 0; qj < nq1; ++qj) {
            for (std::size_t qi = 0; qi < nq1; ++qi, ++q) {
                ref_points_.push_back({hx * g.points[qi], hy * g.points[qj], hz * g.points[qk]});
                weights_.push_back(g.weights[qi] * g.weights[qj] * g.weights[qk] * hx * hy * hz);
                std::size_t local = 0;
                for (std::size_t k = 0; k < n1; ++k) {
                    for (std::size_t j = 0; j < n1; ++j) {
                        for (std::size_t i = 0; i < n1; ++i, ++local) {
                            const double vx = tab[qi].values[i];
                            const double vy = tab[qj].values[j];
                            const double vz = tab[qk].values[k];
                            basis_[q * dofs_per_cell_ + local] = vx * vy * vz;
                            gradients_[q * dofs_per_cell_ + local] = {tab[qi].derivatives[i] / hx * vy * vz,
                                                                      vx * tab[qj].derivatives[j] / hy * vz,
                                                                      vx * vy * tab[qk].derivatives[k] / hz};
                        }
                    }
                }
            }
        }
    }

    // Element matrices, symmetric by construction.
    element_mass_.assign(dofs_per_cell_ * dofs_per_cell_, 0.0);
    element_stiffness_.assign(dofs_per_cell_ * dofs_per_cell_, 0.0);
    for (std::size_t a = 0; a < dofs_per_cell_; ++a) {
        for (std::size_t b = a; b < dofs_per_cell_; ++b) {
            double m = 0.0;
            double s = 0.0;
            for (std::size_t p = 0; p < nq; ++p) {
                m += weights_[p] * basis(p, a) * basis(p, b);
                s += weights_[p] * dot(basis_gradient(p, a), basis_gradient(p, b));
            }
            element_mass_[a * dofs_per_cell_ + b] = element_mass_[b * dofs_per_cell_ + a] = m;
            element_stiffness_[a * dofs_per_cell_ + b] = element_stiffness_[b * dofs_per_cell_ + a] = s;
        }
    }

    // Scalar sparsity pattern.
    std::vector<std::vector<std::size_t>> rows(num_dofs_);
    for (std::size_t c = 0; c < n_cells; ++c) {
        const auto dofs = cell_dofs(c);
        for (std::size_t a : dofs) {
            rows[a].insert(rows[a].end(), dofs.begin(), dofs.end());
        }
    }
    offsets_.assign(num_dofs_ + 1, 0);
    for (std::size_t i = 0; i < num_dofs_; ++i) {
        auto& row = rows[i];
        std::sort(row.begin(), row.end());
        row.erase(std::unique(row.begin(), row.end()), row.end());
        offsets_[i + 1] = offsets_[i] + row.size();
    }
    columns_.reserve(offsets_.back());
    for (auto& row : rows) {
        columns_.insert(columns_.end(), row.begin(), row.end());
    }

    scatter_.resize(n_cells * dofs_per_cell_ * dofs_per_cell_);
    for (std::size_t c = 0; c < n_cells; ++c) {
        const auto dofs = cell_dofs(c);
        for (std::size_t a = 0; a < dofs_per_cell_; ++a) {
            const auto first = columns_.begin() + static_cast<std::ptrdiff_t>(offsets_[dofs[a]]);
            const auto last = columns_.begin() + static_cast<std::ptrdiff_t>(offsets_[dofs[a] + 1]);
            for (std::size_t b = 0; b < dofs_per_cell_; ++b) {
                const auto it = std::lower_bound(first, last, dofs[b]);
                scatter_[(c * dofs_per_cell_ + a) * dofs_per_cell_ + b] =
                    static_cast<std::size_t>(it - columns_.begin());
            }
        }
    }
}

Vec3 FiniteElementSpace::node(std::size_t dof) const {
    const std::size_t gx = dof % grid_[0];
    const std::size_t gy = (dof / grid_[0]) % grid_[1];
    const std::size_t gz = dof / (grid_[0] * grid_[1]);
    const double r = degree_;
    return {gx * mesh_.hx() / r, gy * mesh_.hy() / r, gz * mesh_.hz() / r};
}

Vec3 FiniteElementSpace::quadrature_point(std::size_t c, std::size_t q) const {
    return mesh_.cell_origin(c) + ref_points_[q];
}

namespace {

CsrMatrix scalar_from_element(const FiniteElementSpace& space, const std::vector<double>& element) {
    const auto offsets = space.pattern_offsets();
    const auto columns = space.pattern_columns();
    std::vector<double> values(columns.size(), 0.0);
    const std::size_t nloc = space.dofs_per_cell();
    for (std::size_t c = 0; c < space.mesh().num_cells(); ++c) {
        for (std::size_t a = 0; a < nloc; ++a) {
            for (std::size_t b = 0; b < nloc; ++b) {
                values[space.scatter_position(c, a, b)] += element[a * nloc + b];
            }
        }
    }
    return {space.num_dofs(), space.num_dofs(), {offsets.begin(), offsets.end()}, {columns.begin(), columns.end()},
            std::move(values)};
}

/// Builds a (row_blocks N) x (3N) matrix from scalar-pattern value arrays;
/// block(a, b) returns the value array for block row a and block column b,
/// or nullptr for a zero block that is still kept in the pattern.
template <typename BlockFn>
CsrMatrix expand_blocks(const FiniteElementSpace& space, std::size_t row_blocks, BlockFn block) {
    const std::size_t n = space.num_dofs();
    const auto offsets = space.pattern_offsets();
    const auto columns = space.pattern_columns();
    const std::size_t nnz = columns.size();
    std::vector<std::size_t> row_offsets(row_blocks * n + 1, 0);
    std::vector<std::size_t> cols(3 * row_blocks * nnz);
    std::vector<double> vals(3 * row_blocks * nnz, 0.0);
    std::size_t pos = 0;
    for (std::size_t a = 0; a < row_blocks; ++a) {
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t b = 0; b < 3; ++b) {
                const std::vector<double>* src = block(a, b);
                for (std::size_t p = offsets[j]; p < offsets[j + 1]; ++p, ++pos) {
                    cols[pos] = b * n + columns[p];
                    vals[pos] = src ? (*src)[p] : 0.0;
                }
            }
            row_offsets[a * n + j + 1] = pos;
        }
    }
    return {row_blocks * n, 3 * n, std::move(row_offsets), std::move(cols), std::move(vals)};
}

/// Per-component weighted mass arrays W_c = (mhat_c phi_i, phi_j) on the scalar pattern.
std::array<std::vector<double>, 3> weighted_mass(const FiniteElementSpace& space, const QuadratureField& mhat) {
    require_unit_field(space, mhat);
    const std::size_t nnz = space.pattern_columns().size();
    std::array<std::vector<double>, 3> w{std::vector<double>(nnz, 0.0), std::vector<double>(nnz, 0.0),
                                         std::vector<double>(nnz, 0.0)};
    const std::size_t nloc = space.dofs_per_cell();
    const std::size_t nq = space.points_per_cell();
    std::vector<double> local(3 * nloc * nloc);
    std::vector<double> phi(nloc);
    for (std::size_t c = 0; c < space.mesh().num_cells(); ++c) {
        std::fill(local.begin(), local.end(), 0.0);
        for (std::size_t q = 0; q < nq; ++q) {
            const Vec3& m = mhat.values[c * nq + q];
            const double wq = space.weight(q);
            for (std::size_t a = 0; a < nloc; ++a) {
                phi[a] = space.basis(q, a);
            }
            for (std::size_t a = 0; a < nloc; ++a) {
                const double wa = wq * phi[a];
                const double wx = wa * m[0];
                const double wy = wa * m[1];
                const double wz = wa * m[2];
                double* lx = local.data() + a * nloc;
                double* ly = lx + nloc * nloc;
                double* lz = ly + nloc * nloc;
                for (std::size_t b = a; b < nloc; ++b) {
                    lx[b] += wx * phi[b];
                    ly[b] += wy * phi[b];
                    lz[b] += wz * phi[b];
                }
            }
        }
        for (std::size_t comp = 0; comp < 3; ++comp) {
            const double* l = local.data() + comp * nloc * nloc;
            auto& dst = w[comp];
            for (std::size_t a = 0; a < nloc; ++a) {
                for (std::size_t b = a; b < nloc; ++b) {
                    const double v = l[a * nloc + b];
                    dst[space.scatter_position(c, a, b)] += v;
                    if (b != a) {
                        dst[space.scatter_position(c, b, a)] += v;
                    }
                }
            }
        }
    }
    return w;
}

CsrMatrix skew_from_weighted(const FiniteElementSpace& space, const std::array<std::vector<double>, 3>& w) {
    // Block (a, b) = sum_c eps_{a c b} W_c, stored with explicit negated copies.
    const std::size_t nnz = w[0].size();
    std::array<std::vector<double>, 3> neg{std::vector<double>(nnz), std::vector<double>(nnz),
                                           std::vector<double>(nnz)};
    for (std::size_t comp = 0; comp < 3; ++comp) {
        for (std::size_t p = 0; p < nnz; ++p) {
            neg[comp][p] = -w[comp][p];
        }
    }
    return expand_blocks(space, 3, [&](std::size_t a, std::size_t b) -> const std::vector<double>* {
        if (a == 0 && b == 1) return &neg[2];
        if (a == 1 && b == 0) return &w[2];
        if (a == 0 && b == 2) return &w[1];
        if (a == 2 && b == 0) return &neg[1];
        if (a == 1 && b == 2) return &neg[0];
        if (a == 2 && b == 1) return &w[0];
        return nullptr;
    });
}

CsrMatrix constraint_from_weighted(const FiniteElementSpace& space, const std::array<std::vector<double>, 3>& w) {
    return expand_blocks(space, 1, [&](std::size_t, std::size_t b) { return &w[b]; });
}

}  // namespace

CsrMatrix assemble_mass(const FiniteElementSpace& space) { return scalar_from_element(space, space.element_mass()); }

CsrMatrix assemble_stiffness(const FiniteElementSpace& space) {
    return scalar_from_element(space, space.element_stiffness());
}

CsrMatrix vector_block_diagonal(const FiniteElementSpace& space, const CsrMatrix& scalar) {
    if (scalar.rows() != space.num_dofs() || scalar.nnz() != space.pattern_columns().size()) {
        throw std::invalid_argument("vector_block_diagonal: matrix does not live on this space's pattern");
    }
    const std::vector<double> vals(scalar.values().begin(), scalar.values().end());
    return expand_blocks(space, 3, [&](std::size_t a, std::size_t b) { return a == b ? &vals : nullptr; });
}

void require_unit_field(const FiniteElementSpace& space, const QuadratureField& mhat, double tolerance) {
    if (mhat.values.size() != space.num_quadrature_points()) {
        throw std::invalid_argument("quadrature field has " + std::to_string(mhat.values.size()) +
                                    " entries, expected " + std::to_string(space.num_quadrature_points()));
    }
    for (const Vec3& v : mhat.values) {
        if (!(std::abs(norm(v) - 1.0) <= tolerance)) {
            throw std::invalid_argument("quadrature field is not of unit length (|v| = " + std::to_string(norm(v)) +
                                        ")");
        }
    }
}

CsrMatrix assemble_skew(const FiniteElementSpace& space, const QuadratureField& mhat) {
    return skew_from_weighted(space, weighted_mass(space, mhat));
}

CsrMatrix assemble_constraint(const FiniteElementSpace& space, const QuadratureField& mhat) {
    return constraint_from_weighted(space, weighted_mass(space, mhat));
}

TangentOperators assemble_tangent_operators(const FiniteElementSpace& space, const QuadratureField& mhat) {
    const auto w = weighted_mass(space, mhat);
    return {skew_from_weighted(space, w), constraint_from_weighted(space, w)};
}

NodalField interpolate(const FiniteElementSpace& space, const VectorFunction& f) {
    NodalField out(space.num_dofs());
    for (std::size_t i = 0; i < space.num_dofs(); ++i) {
        out.values[i] = f(space.node(i));
    }
    return out;
}

QuadratureField evaluate_at_quadrature(const FiniteElementSpace& space, const NodalField& field) {
    if (field.size() != space.num_dofs()) {
        throw std::invalid_argument("evaluate_at_quadrature: field size does not match space");
    }
    const std::size_t nloc = space.dofs_per_cell();
    const std::size_t nq = space.points_per_cell();
    QuadratureField out;
    out.values.resize(space.num_quadrature_points());
    std::vector<Vec3> local(nloc);
    for (std::size_t c = 0; c < space.mesh().num_cells(); ++c) {
        const auto dofs = space.cell_dofs(c);
        for (std::size_t a = 0; a < nloc; ++a) {
            local[a] = field.values[dofs[a]];
        }
        for (std::size_t q = 0; q < nq; ++q) {
            Vec3 v{0.0, 0.0, 0.0};
            for (std::size_t a = 0; a < nloc; ++a) {
                const double phi = space.basis(q, a);
                v[0] += phi * local[a][0];
                v[1] += phi * local[a][1];
                v[2] += phi * local[a][2];
            }
            out.values[c * nq + q] = v;
        }
    }
    return out;
}

QuadratureField evaluate_at_quadrature(const FiniteElementSpace& space, const VectorFunction& f) {
    const std::size_t nq = space.points_per_cell();
    QuadratureField out;
    out.values.resize(space.num_quadrature_points());
    for (std::size_t c = 0; c < space.mesh().num_cells(); ++c) {
        for (std::size_t q = 0; q < nq; ++q) {
            out.values[c * nq + q] = f(space.quadrature_point(c, q));
        }
    }
    return out;
}

std::vector<Mat3> gradient_at_quadrature(const FiniteElementSpace& space, const NodalField& field) {
    const std::size_t nloc = space.dofs_per_cell();
    const std::size_t nq = space.points_per_cell();
    std::vector<Mat3> out(space.num_quadrature_points());
    for (std::size_t c = 0; c < space.mesh().num_cells(); ++c) {
        const auto dofs = space.cell_dofs(c);
        for (std::size_t q = 0; q < nq; ++q) {
            Mat3 jac{};
            for (std::size_t a = 0; a < nloc; ++a) {
                const Vec3& u = field.values[dofs[a]];
                const Vec3& gphi = space.basis_gradient(q, a);
                for (std::size_t comp = 0; comp < 3; ++comp) {
                    for (std::size_t d = 0; d < 3; ++d) {
                        jac[comp][d] += u[comp] * gphi[d];
                    }
                }
            }
            out[c * nq + q] = jac;
        }
    }
    return out;
}

std::vector<double> load_vector(const FiniteElementSpace& space, const QuadratureField& f) {
    if (f.values.size() != space.num_quadrature_points()) {
        throw std::invalid_argument("load_vector: quadrature field size mismatch");
    }
    const std::size_t n = space.num_dofs();
    const std::size_t nloc = space.dofs_per_cell();
    const std::size_t nq = space.points_per_cell();
    std::vector<double> out(3 * n, 0.0);
    for (std::size_t c = 0; c < space.mesh().num_cells(); ++c) {
        const auto dofs = space.cell_dofs(c);
        for (std::size_t q = 0; q < nq; ++q) {
            const Vec3& v = f.values[c * nq + q];
            const double w = space.weight(q);
            for (std::size_t a = 0; a < nloc; ++a) {
                const double wp = w * space.basis(q, a);
                out[dofs[a]] += wp * v[0];
                out[n + dofs[a]] += wp * v[1];
                out[2 * n + dofs[a]] += wp * v[2];
            }
        }
    }
    return out;
}

ErrorNorms error_norms(const FiniteElementSpace& space, const NodalField& field, const VectorFunction& exact,
                       const JacobianFunction& exact_gradient) {
    const QuadratureField values = evaluate_at_quadrature(space, field);
    const std::vector<Mat3> grads = gradient_at_quadrature(space, field);
    const std::size_t nq = space.points_per_cell();
    double l2 = 0.0;
    double semi = 0.0;
    for (std::size_t c = 0; c < space.mesh().num_cells(); ++c) {
        for (std::size_t q = 0; q < nq; ++q) {
            const Vec3 x = space.quadrature_point(c, q);
            const double w = space.weight(q);
            const Vec3 diff = values.values[c * nq + q] - exact(x);
            l2 += w * dot(diff, diff);
            const Mat3 gex = exact_gradient(x);
            const Mat3& gh = grads[c * nq + q];
            for (std::size_t a = 0; a < 3; ++a) {
                const Vec3 d = gh[a] - gex[a];
                semi += w * dot(d, d);
            }
        }
    }
    return {std::sqrt(l2), std::sqrt(l2 + semi)};
}

double vector_quadratic_form(const CsrMatrix& scalar, const NodalField& u) {
    const std::size_t n = scalar.rows();
    if (u.size() != n) {
        throw std::invalid_argument("vector_quadratic_form: size mismatch");
    }
    std::vector<double> comp(n), out(n);
    double s = 0.0;
    for (std::size_t c = 0; c < 3; ++c) {
        for (std::size_t i = 0; i < n; ++i) {
            comp[i] = u.values[i][c];
        }
        scalar.multiply(comp, out);
        s += dot(std::span<const double>(comp), std::span<const double>(out));
    }
    return s;
}

double l2_norm(const FiniteElementSpace& space, const NodalField& field) {
    const QuadratureField values = evaluate_at_quadrature(space, field);
    const std::size_t nq = space.points_per_cell();
    double s = 0.0;
    for (std::size_t p = 0; p < values.values.size(); ++p) {
        s += space.weight(p % nq) * dot(values.values[p], values.values[p]);
    }
    return std::sqrt(s);
}

}  // namespace llg
