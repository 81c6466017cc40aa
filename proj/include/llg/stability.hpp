#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "llg/sparse.hpp"

namespace llg {

struct Trajectory;
struct BdfScheme;

/// Dahlquist G-matrix of BDF-k for k = 1, 2 (G = 1 and G = [[1,-2],[-2,5]]/4).
/// Throws std::invalid_argument for other orders.
[[nodiscard]] DenseMatrix g_matrix(int k);

/// Eigenvalues of a symmetric 1x1 or 2x2 matrix in ascending order.
[[nodiscard]] std::vector<double> symmetric_eigenvalues(const DenseMatrix& g);

/// Tabulated Nevanlinna-Odeh multipliers eta_1..eta_5 (four decimals).
[[nodiscard]] double multiplier_eta(int k);

/// eta_k / (1 - eta_k) for k = 3, 4, 5.
[[nodiscard]] double alpha_threshold(int k);

struct PositivityCheck {
    double min_value = 0.0;
    bool holds = false;
};

/// Minimum of Re[delta(e^{i theta}) / (1 - eta e^{i theta})] over n uniform
/// samples of the unit circle; holds iff the minimum is >= -1e-12.
[[nodiscard]] PositivityCheck check_positivity(int k, double eta, std::size_t n_samples = 100000);

/// Smallest eta in [0,1) for which check_positivity holds, by bisection to
/// `tolerance`. Zero for k = 1, 2.
[[nodiscard]] double optimal_multiplier(int k, std::size_t n_samples = 100000, double tolerance = 1e-12);

/// Worst violation max(RHS - LHS) of
///   (sum_i delta_i v_{k-i}, v_k - eta v_{k-1}) >= |V_k|_G^2 - |V_{k-1}|_G^2,
/// V_k = (v_1..v_k), V_{k-1} = (v_0..v_{k-1}), over random v_j in R^dim.
[[nodiscard]] double verify_g_inequality(int k, double eta, const DenseMatrix& g, std::size_t trials,
                                         std::size_t dim, std::uint64_t seed = 42);

/// Same inequality evaluated for one given set of vectors v_0..v_k (all of length dim).
[[nodiscard]] double g_inequality_violation(int k, double eta, const DenseMatrix& g,
                                            const std::vector<std::vector<double>>& v);

struct EnergyMargin {
    int step = 0;
    double lhs = 0.0;
    double rhs = 0.0;
    /// rhs - lhs
    double margin = 0.0;
};

/// Per-step margins of the discrete energy inequality for k <= 2:
///   g- |grad m^n|^2 + (alpha tau / 2) sum_{j=k..n} |mdot^j|^2
///     <= g+ sum_{i<k} |grad m^i|^2 + (tau / (2 alpha)) sum_{j=k..n} |H^j|^2,
/// with g-/g+ the extreme eigenvalues of the G-matrix.
[[nodiscard]] std::vector<EnergyMargin> discrete_energy_report(const Trajectory& trajectory, const BdfScheme& scheme,
                                                               double alpha, double tau);

}  // namespace llg
