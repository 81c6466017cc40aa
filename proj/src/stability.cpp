#include "llg/stability.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

#include "llg/bdf.hpp"

namespace llg {

DenseMatrix g_matrix(int k) {
    if (k == 1) {
        DenseMatrix g(1, 1);
        g(0, 0) = 1.0;
        return g;
    }
    if (k == 2) {
        DenseMatrix g(2, 2);
        g(0, 0) = 0.25;
        g(0, 1) = g(1, 0) = -0.5;
        g(1, 1) = 1.25;
        return g;
    }
    throw std::invalid_argument("g_matrix: only k = 1, 2 are available, got " + std::to_string(k));
}

std::vector<double> symmetric_eigenvalues(const DenseMatrix& g) {
    if (g.rows() == 1 && g.cols() == 1) {
        return {g(0, 0)};
    }
    if (g.rows() == 2 && g.cols() == 2) {
        const double mean = 0.5 * (g(0, 0) + g(1, 1));
        const double half_diff = 0.5 * (g(0, 0) - g(1, 1));
        const double radius = std::hypot(half_diff, g(0, 1));
        return {mean - radius, mean + radius};
    }
    throw std::invalid_argument("symmetric_eigenvalues: only 1x1 and 2x2 matrices are supported");
}

double multiplier_eta(int k) {
    switch (k) {
        case 1:
        case 2:
            return 0.0;
        case 3:
            return 0.0836;
        case 4:
            return 0.2878;
        case 5:
            return 0.8160;
        default:
            throw std::invalid_argument("multiplier_eta: k must be in 1..5, got " + std::to_string(k));
    }
}

double alpha_threshold(int k) {
    if (k < 3 || k > 5) {
        throw std::invalid_argument("alpha_threshold: k must be in 3..5, got " + std::to_string(k));
    }
    const double eta = multiplier_eta(k);
    return eta / (1.0 - eta);
}

PositivityCheck check_positivity(int k, double eta, std::size_t n_samples) {
    if (!(eta >= 0.0 && eta < 1.0)) {
        throw std::invalid_argument("check_positivity: eta must lie in [0, 1)");
    }
    if (n_samples < 1000) {
        throw std::invalid_argument("check_positivity: need at least 1000 samples");
    }
    const std::vector<double> delta = bdf_coefficients(k);
    PositivityCheck out{std::numeric_limits<double>::infinity(), false};
    for (std::size_t s = 0; s < n_samples; ++s) {
        const double theta = 2.0 * std::numbers::pi * static_cast<double>(s) / static_cast<double>(n_samples);
        const std::complex<double> z = std::polar(1.0, theta);
        std::complex<double> value = 0.0;
        std::complex<double> power = 1.0;
        for (double d : delta) {
            value += d * power;
            power *= z;
        }
        out.min_value = std::min(out.min_value, (value / (1.0 - eta * z)).real());
    }
    out.holds = out.min_value >= -1e-12;
    return out;
}

double optimal_multiplier(int k, std::size_t n_samples, double tolerance) {
    if (check_positivity(k, 0.0, n_samples).holds) {
        return 0.0;
    }
    double lo = 0.0;
    double hi = 0.999;
    while (hi - lo > tolerance) {
        const double mid = 0.5 * (lo + hi);
        if (check_positivity(k, mid, n_samples).holds) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return hi;
}

double g_inequality_violation(int k, double eta, const DenseMatrix& g, const std::vector<std::vector<double>>& v) {
    if (g.rows() != static_cast<std::size_t>(k) || g.cols() != static_cast<std::size_t>(k)) {
        throw std::invalid_argument("g_inequality_violation: G must be k x k");
    }
    if (v.size() != static_cast<std::size_t>(k) + 1) {
        throw std::invalid_argument("g_inequality_violation: need k+1 vectors");
    }
    const std::vector<double> delta = bdf_coefficients(k);
    const std::size_t dim = v.front().size();
    std::vector<double> left(dim, 0.0);
    std::vector<double> right(dim, 0.0);
    for (int i = 0; i <= k; ++i) {
        for (std::size_t d = 0; d < dim; ++d) {
            left[d] += delta[i] * v[k - i][d];
        }
    }
    for (std::size_t d = 0; d < dim; ++d) {
        right[d] = v[k][d] - eta * v[k - 1][d];
    }
    const double lhs = dot(left, right);
    double g_new = 0.0;
    double g_old = 0.0;
    for (int i = 1; i <= k; ++i) {
        for (int j = 1; j <= k; ++j) {
            g_new += g(i - 1, j - 1) * dot(v[i], v[j]);
            g_old += g(i - 1, j - 1) * dot(v[i - 1], v[j - 1]);
        }
    }
    return (g_new - g_old) - lhs;
}

double verify_g_inequality(int k, double eta, const DenseMatrix& g, std::size_t trials, std::size_t dim,
                           std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    double worst = -std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> v(static_cast<std::size_t>(k) + 1, std::vector<double>(dim));
    for (std::size_t t = 0; t < trials; ++t) {
        for (auto& vec : v) {
            for (double& x : vec) {
                x = normal(rng);
            }
        }
        worst = std::max(worst, g_inequality_violation(k, eta, g, v));
    }
    return worst;
}

std::vector<EnergyMargin> discrete_energy_report(const Trajectory& trajectory, const BdfScheme& scheme, double alpha,
                                                 double tau) {
    if (!scheme.gmatrix) {
        throw std::invalid_argument("discrete_energy_report: only available for k <= 2");
    }
    const std::vector<double> eig = symmetric_eigenvalues(*scheme.gmatrix);
    const double g_minus = eig.front();
    const double g_plus = eig.back();
    const auto k = static_cast<std::size_t>(scheme.order);
    if (trajectory.records.size() < k) {
        throw std::invalid_argument("discrete_energy_report: trajectory lacks starting values");
    }
    double start = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        start += trajectory.records[i].grad_norm * trajectory.records[i].grad_norm;
    }
    std::vector<EnergyMargin> out;
    double dissipation = 0.0;
    double forcing = 0.0;
    for (std::size_t n = k; n < trajectory.records.size(); ++n) {
        const StepRecord& rec = trajectory.records[n];
        dissipation += rec.mdot_norm * rec.mdot_norm;
        forcing += rec.field_norm * rec.field_norm;
        EnergyMargin m;
        m.step = rec.step;
        m.lhs = g_minus * rec.grad_norm * rec.grad_norm + 0.5 * alpha * tau * dissipation;
        m.rhs = g_plus * start + tau / (2.0 * alpha) * forcing;
        m.margin = m.rhs - m.lhs;
        out.push_back(m);
    }
    return out;
}

}  // namespace llg
