#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace llg {

struct MeshConfig {
    int nx = 8;
    int ny = 8;
    int nz = 1;
    double thickness = 0.01;
};

/// Parameters of one experiment sweep. Which lists are used depends on the sweep:
/// tau sweeps iterate `taus` for every k in `orders`, h sweeps iterate
/// `divisions` (h = 1/n in the plane) for every r in `degrees`.
struct ExperimentConfig {
    std::string problem = "exact2";
    std::vector<int> orders{1, 2};
    std::vector<int> degrees{2};
    MeshConfig mesh;
    std::vector<double> taus{0.1, 0.05, 0.025, 0.0125, 0.00625};
    double tau = 2e-3;
    std::vector<int> divisions{2, 4, 8, 16};
    double t_final = 0.2;
    double alpha = 0.2;
    double solver_tol = 1e-10;
    std::string csv_path;
    std::string svg_path;
    std::uint64_t seed = 42;

    /// Throws std::invalid_argument on non-positive parameters or unknown problems.
    void validate() const;
};

[[nodiscard]] ExperimentConfig default_tau_config();
[[nodiscard]] ExperimentConfig default_h_config();
[[nodiscard]] ExperimentConfig default_energy_config();
[[nodiscard]] ExperimentConfig default_projection_config();

/// Overrides the fields present in a JSON object; unknown keys are rejected.
[[nodiscard]] ExperimentConfig parse_config(std::string_view json_text, ExperimentConfig base);
[[nodiscard]] ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base);

/// Number of steps n with n tau <= t_final (1e-12 slack).
[[nodiscard]] int steps_within(double t_final, double tau);

/// Comma-separated table with a header row.
struct Csv {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    [[nodiscard]] std::string str() const;
    [[nodiscard]] std::size_t column(std::string_view name) const;
};

/// 17 significant digits.
[[nodiscard]] std::string format_number(double value);
[[nodiscard]] std::string format_optional(const std::optional<double>& value);

/// Throws std::invalid_argument on ragged rows or an empty header.
[[nodiscard]] Csv parse_csv(std::string_view text);

/// log(e_prev / e) / log(step_prev / step)
[[nodiscard]] double eoc(double e_prev, double e, double step_prev, double step);

struct ConvergenceRow {
    int k = 0;
    int r = 0;
    double h = 0.0;
    double tau = 0.0;
    int n_steps = 0;
    double h1_error = 0.0;
    double l2_error = 0.0;
    /// ||m_h - I_h m||_{H1}: error against the nodal interpolant of the exact solution.
    double h1_error_interp = 0.0;
    std::optional<double> eoc;
    std::optional<double> eoc_interp;
    std::size_t iterations = 0;
    /// max over steps of ||C mdot|| / max(1, ||mdot||)
    double max_tangency = 0.0;
    /// Not written to CSV so that output stays byte-deterministic.
    double wall_seconds = 0.0;
};

enum class Sweep { Tau, H };

struct ConvergenceTable {
    Sweep sweep = Sweep::Tau;
    std::vector<ConvergenceRow> rows;

    [[nodiscard]] Csv to_csv() const;
    /// Rows of one (k, r) series in sweep order.
    [[nodiscard]] std::vector<ConvergenceRow> series(int k, int r) const;
};

/// H1 error at the final time against the manufactured solution for every
/// (k, tau). Step sizes too coarse to fit k starting values are skipped.
[[nodiscard]] ConvergenceTable run_convergence_tau(const ExperimentConfig& config);

/// H1 error at the final time for every (r, h) on n x n x nz meshes, first k of `orders`.
[[nodiscard]] ConvergenceTable run_convergence_h(const ExperimentConfig& config);

struct EnergyRow {
    int k = 0;
    double tau = 0.0;
    int step = 0;
    double time = 0.0;
    double grad_norm = 0.0;
    /// max |1 - |m|^2| over FE nodes
    double unit_deviation_nodes = 0.0;
    /// max |1 - |m|^2| over nodes and quadrature points
    double unit_deviation_max = 0.0;
    /// rhs - lhs of the energy inequality; empty for starting values and k > 2.
    std::optional<double> margin;
    std::optional<double> rhs;
};

struct EnergyRun {
    int k = 0;
    double tau = 0.0;
    std::vector<EnergyRow> rows;
    double max_tangency = 0.0;

    [[nodiscard]] double initial_energy() const;
    [[nodiscard]] double final_energy() const;
    [[nodiscard]] double max_unit_deviation() const;
    /// min over steps of margin / rhs; +inf without margins.
    [[nodiscard]] double worst_relative_margin() const;
};

struct EnergyReport {
    std::vector<EnergyRun> runs;

    [[nodiscard]] Csv to_csv() const;
};

/// Nonsmooth problem for every (k, tau); k >= 2 starts from k-1 steps of BDF1.
[[nodiscard]] EnergyReport run_energy_decay(const ExperimentConfig& config);

struct StabilityRow {
    int k = 0;
    double eta = 0.0;
    double eta_optimal = 0.0;
    std::optional<double> alpha_threshold;
    double positivity_min = 0.0;
    double positivity_min_optimal = 0.0;
    double positivity_min_zero = 0.0;
    double coefficient_residual = 0.0;
    double gamma_abs_sum = 0.0;
    std::optional<double> g_min_eig;
    std::optional<double> g_max_eig;
    std::optional<double> g_worst_violation;
    /// k = 1 only: the same check with G = [1/2], the normalization of the k = 2 matrix.
    std::optional<double> g_half_worst_violation;
};

struct StabilityReport {
    std::vector<StabilityRow> rows;
    std::vector<std::string> failures;

    [[nodiscard]] bool ok() const noexcept { return failures.empty(); }
    [[nodiscard]] Csv to_csv() const;
};

/// Coefficients, multipliers, positivity and G-matrix checks for k = 1..5.
[[nodiscard]] StabilityReport stability_report(std::uint64_t seed = 42, std::size_t samples = 100000,
                                               std::size_t trials = 10000);

struct ProjectionRow {
    int r = 0;
    double h = 0.0;
    double l2_error = 0.0;
    std::optional<double> eoc;
    /// ||P_h P_h u - P_h u|| / ||P_h u||
    double idempotence = 0.0;
    /// |(P_h u, w) - (u, P_h w)| / (||u|| ||w||)
    double self_adjointness = 0.0;
};

struct ProjectionReport {
    std::vector<ProjectionRow> rows;

    [[nodiscard]] Csv to_csv() const;
};

/// ||(P_h - P) v||_{L2} for smooth m, v on the unit cube with n^3 cells, n in `divisions`.
[[nodiscard]] ProjectionReport run_projection_test(const ExperimentConfig& config);

enum class PlotKind { ConvergenceTau, ConvergenceH, Energy };

/// SVG polyline plot of a CSV produced by the sweeps above. Convergence plots
/// are log-log with dashed reference slopes, energy plots are linear.
/// Throws std::invalid_argument on malformed or empty data.
[[nodiscard]] std::string emit_plot(std::string_view csv_text, PlotKind kind);

void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace llg
