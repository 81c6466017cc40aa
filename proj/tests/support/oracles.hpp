#pragma once

// Brute-force references shared by the unit tests and the acceptance binary.
// Nothing here touches the library's reference-cell tables, DOF maps or
// scatter positions: global basis functions are rebuilt from node coordinates.

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <random>
#include <stdexcept>
#include <vector>

#include "llg/fem.hpp"
#include "llg/sparse.hpp"
#include "llg/vec3.hpp"

namespace oracle {

using llg::DenseMatrix;
using llg::Vec3;

// Gauss-Legendre on [-1,1] from closed-form tables, mapped to [0,1].
inline void gauss_table(int n, std::vector<double>& x, std::vector<double>& w) {
    std::vector<double> xs, ws;
    switch (n) {
        case 1:
            xs = {0.0};
            ws = {2.0};
            break;
        case 2:
            xs = {-1.0 / std::sqrt(3.0), 1.0 / std::sqrt(3.0)};
            ws = {1.0, 1.0};
            break;
        case 3:
            xs = {-std::sqrt(0.6), 0.0, std::sqrt(0.6)};
            ws = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
            break;
        case 4: {
            const double a = std::sqrt(3.0 / 7.0 - 2.0 / 7.0 * std::sqrt(1.2));
            const double b = std::sqrt(3.0 / 7.0 + 2.0 / 7.0 * std::sqrt(1.2));
            const double wa = (18.0 + std::sqrt(30.0)) / 36.0;
            const double wb = (18.0 - std::sqrt(30.0)) / 36.0;
            xs = {-b, -a, a, b};
            ws = {wb, wa, wa, wb};
            break;
        }
        default:
            throw std::invalid_argument("oracle gauss table has 1..4 points");
    }
    x.resize(xs.size());
    w.resize(ws.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        x[i] = 0.5 * (xs[i] + 1.0);
        w[i] = 0.5 * ws[i];
    }
}

// Lagrange polynomial a on nodes x0 + j*hc (j = 0..r) and its derivative.
inline double lagrange(int r, int a, double x0, double hc, double x) {
    double v = 1.0;
    for (int j = 0; j <= r; ++j) {
        if (j != a) v *= (x - (x0 + j * hc)) / ((a - j) * hc);
    }
    return v;
}

inline double lagrange_prime(int r, int a, double x0, double hc, double x) {
    double s = 0.0;
    for (int m = 0; m <= r; ++m) {
        if (m == a) continue;
        double term = 1.0 / ((a - m) * hc);
        for (int j = 0; j <= r; ++j) {
            if (j != a && j != m) term *= (x - (x0 + j * hc)) / ((a - j) * hc);
        }
        s += term;
    }
    return s;
}

// Values of all r+1 Lagrange basis functions on [0,1] via a Vandermonde solve.
inline std::vector<double> vandermonde_basis(int r, double xi) {
    const std::size_t n = static_cast<std::size_t>(r) + 1;
    // Column a of V^{-1} holds the monomial coefficients of basis a.
    DenseMatrix v(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t p = 0; p < n; ++p) v(i, p) = std::pow(static_cast<double>(i) / r, static_cast<double>(p));
    }
    std::vector<double> out(n);
    for (std::size_t a = 0; a < n; ++a) {
        std::vector<double> e(n, 0.0);
        e[a] = 1.0;
        const auto c = llg::dense_lu_solve(v, e);
        double s = 0.0;
        for (std::size_t p = 0; p < n; ++p) s += c[p] * std::pow(xi, static_cast<double>(p));
        out[a] = s;
    }
    return out;
}

struct DenseOperators {
    DenseMatrix mass, stiffness, skew, constraint;
};

// M, A, S, C by looping over cells and global node triples. mfun is evaluated at
// the oracle's own Gauss points (r+2 per direction, the same rule as the library).
inline DenseOperators brute_force_assembly(const llg::Mesh& mesh, int r, const std::function<Vec3(const Vec3&)>& mfun) {
    const std::size_t gx = static_cast<std::size_t>(r * mesh.nx() + 1);
    const std::size_t gy = static_cast<std::size_t>(r * mesh.ny() + 1);
    const std::size_t gz = static_cast<std::size_t>(r * mesh.nz() + 1);
    const std::size_t n = gx * gy * gz;
    DenseOperators out{DenseMatrix(n, n), DenseMatrix(n, n), DenseMatrix(3 * n, 3 * n), DenseMatrix(n, 3 * n)};

    std::vector<double> qx, qw;
    gauss_table(r + 2, qx, qw);
    const double h[3] = {mesh.hx(), mesh.hy(), mesh.hz()};

    for (int cz = 0; cz < mesh.nz(); ++cz) {
        for (int cy = 0; cy < mesh.ny(); ++cy) {
            for (int cx = 0; cx < mesh.nx(); ++cx) {
                const double o[3] = {cx * h[0], cy * h[1], cz * h[2]};
                std::vector<std::size_t> ids;
                std::vector<std::array<int, 3>> loc;
                for (int c = 0; c <= r; ++c)
                    for (int b = 0; b <= r; ++b)
                        for (int a = 0; a <= r; ++a) {
                            ids.push_back(static_cast<std::size_t>(cx * r + a) +
                                          gx * (static_cast<std::size_t>(cy * r + b) + gy * static_cast<std::size_t>(cz * r + c)));
                            loc.push_back({a, b, c});
                        }
                for (std::size_t i = 0; i < qx.size(); ++i)
                    for (std::size_t j = 0; j < qx.size(); ++j)
                        for (std::size_t k = 0; k < qx.size(); ++k) {
                            const Vec3 x{o[0] + h[0] * qx[i], o[1] + h[1] * qx[j], o[2] + h[2] * qx[k]};
                            const double w = qw[i] * qw[j] * qw[k] * h[0] * h[1] * h[2];
                            const Vec3 m = mfun(x);
                            std::vector<double> phi(ids.size());
                            std::vector<Vec3> grad(ids.size());
                            for (std::size_t s = 0; s < ids.size(); ++s) {
                                double v[3], d[3];
                                for (int ax = 0; ax < 3; ++ax) {
                                    const double hc = h[ax] / r;
                                    v[ax] = lagrange(r, loc[s][ax], o[ax], hc, x[ax]);
                                    d[ax] = lagrange_prime(r, loc[s][ax], o[ax], hc, x[ax]);
                                }
                                phi[s] = v[0] * v[1] * v[2];
                                grad[s] = {d[0] * v[1] * v[2], v[0] * d[1] * v[2], v[0] * v[1] * d[2]};
                            }
                            for (std::size_t s = 0; s < ids.size(); ++s) {
                                for (std::size_t t = 0; t < ids.size(); ++t) {
                                    const std::size_t I = ids[s];  // trial
                                    const std::size_t J = ids[t];  // test
                                    const double pp = w * phi[s] * phi[t];
                                    out.mass(J, I) += pp;
                                    out.stiffness(J, I) += w * llg::dot(grad[s], grad[t]);
                                    for (std::size_t b = 0; b < 3; ++b) {
                                        Vec3 eb{0.0, 0.0, 0.0};
                                        eb[b] = 1.0;
                                        const Vec3 mx = llg::cross(m, eb);
                                        for (std::size_t a = 0; a < 3; ++a) out.skew(a * n + J, b * n + I) += pp * mx[a];
                                        out.constraint(J, b * n + I) += pp * m[b];
                                    }
                                }
                            }
                        }
            }
        }
    }
    return out;
}

inline double max_abs_difference(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) return INFINITY;
    double d = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) d = std::max(d, std::abs(a(i, j) - b(i, j)));
    return d;
}

// Cholesky succeeds iff the symmetric matrix is positive definite.
inline bool cholesky_ok(const DenseMatrix& a) {
    const std::size_t n = a.rows();
    DenseMatrix l(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double s = a(j, j);
        for (std::size_t k = 0; k < j; ++k) s -= l(j, k) * l(j, k);
        if (!(s > 0.0)) return false;
        l(j, j) = std::sqrt(s);
        for (std::size_t i = j + 1; i < n; ++i) {
            double t = a(i, j);
            for (std::size_t k = 0; k < j; ++k) t -= l(i, k) * l(j, k);
            l(i, j) = t / l(j, j);
        }
    }
    return true;
}

// Smooth unit field for assembly checks.
inline Vec3 swirl(const Vec3& x) {
    const Vec3 v{std::sin(2.0 * x[0] + x[2]), std::cos(3.0 * x[1]) - 0.3, 1.0 + x[0] * x[1]};
    const double n = llg::norm(v);
    return {v[0] / n, v[1] / n, v[2] / n};
}

inline Vec3 random_unit(std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    Vec3 v{g(rng), g(rng), g(rng)};
    const double n = llg::norm(v);
    return {v[0] / n, v[1] / n, v[2] / n};
}

inline std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

}  // namespace oracle
