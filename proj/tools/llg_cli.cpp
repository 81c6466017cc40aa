// Command-line driver for the desk-scale experiments.

#include <cmath>
#include <cstdio>
#include <exception>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "llg/experiments.hpp"
#include "llg/sparse.hpp"

namespace {

struct Overrides {
    std::string config;
    std::optional<std::string> problem;
    std::vector<int> orders;
    std::vector<int> degrees;
    std::vector<double> taus;
    std::vector<int> divisions;
    std::optional<double> tau;
    std::optional<int> nx, ny, nz;
    std::optional<double> thickness;
    std::optional<double> t_final;
    std::optional<double> alpha;
    std::optional<double> tol;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> csv;
    std::optional<std::string> svg;
};

void add_common(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--config", o.config, "JSON config file");
    cmd->add_option("--problem", o.problem, "exact1, exact2 or nonsmooth");
    cmd->add_option("--k", o.orders, "BDF orders")->delimiter(',');
    cmd->add_option("--r", o.degrees, "polynomial degrees")->delimiter(',');
    cmd->add_option("--taus", o.taus, "time step list")->delimiter(',');
    cmd->add_option("--tau", o.tau, "single time step (h sweep)");
    cmd->add_option("--divisions", o.divisions, "in-plane cell counts (h = 1/n)")->delimiter(',');
    cmd->add_option("--nx", o.nx);
    cmd->add_option("--ny", o.ny);
    cmd->add_option("--nz", o.nz);
    cmd->add_option("--thickness", o.thickness, "film thickness L");
    cmd->add_option("--t-final", o.t_final);
    cmd->add_option("--alpha", o.alpha, "damping parameter");
    cmd->add_option("--tol", o.tol, "linear solver tolerance");
    cmd->add_option("--seed", o.seed);
    cmd->add_option("--csv", o.csv, "CSV output path");
    cmd->add_option("--svg", o.svg, "SVG output path");
}

llg::ExperimentConfig resolve(const Overrides& o, llg::ExperimentConfig c) {
    if (!o.config.empty()) {
        c = llg::load_config(o.config, std::move(c));
    }
    if (o.problem) c.problem = *o.problem;
    if (!o.orders.empty()) c.orders = o.orders;
    if (!o.degrees.empty()) c.degrees = o.degrees;
    if (!o.taus.empty()) c.taus = o.taus;
    if (!o.divisions.empty()) c.divisions = o.divisions;
    if (o.tau) c.tau = *o.tau;
    if (o.nx) c.mesh.nx = *o.nx;
    if (o.ny) c.mesh.ny = *o.ny;
    if (o.nz) c.mesh.nz = *o.nz;
    if (o.thickness) c.mesh.thickness = *o.thickness;
    if (o.t_final) c.t_final = *o.t_final;
    if (o.alpha) c.alpha = *o.alpha;
    if (o.tol) c.solver_tol = *o.tol;
    if (o.seed) c.seed = *o.seed;
    if (o.csv) c.csv_path = *o.csv;
    if (o.svg) c.svg_path = *o.svg;
    c.validate();
    return c;
}

void write_outputs(const llg::ExperimentConfig& c, const std::string& csv, std::optional<llg::PlotKind> plot) {
    if (!c.csv_path.empty()) {
        llg::write_text_file(c.csv_path, csv);
    } else {
        std::fputs(csv.c_str(), stdout);
    }
    if (!c.svg_path.empty() && plot) {
        llg::write_text_file(c.svg_path, llg::emit_plot(csv, *plot));
    }
}

// The summary shares stdout with the CSV only when the CSV goes to a file.
std::FILE* summary_stream(const llg::ExperimentConfig& c) { return c.csv_path.empty() ? stderr : stdout; }

// Nominal step-size conditions with unit constants; the true constants are unknown, so this only warns.
void warn_step_ratio(int k, double tau, double h) {
    const bool large = k <= 2 ? std::pow(tau, k) > std::sqrt(h) : tau > h;
    if (large) {
        std::fprintf(stderr, "warning: k=%d tau=%.4g h=%.4g exceeds the nominal step condition %s\n", k, tau, h,
                     k <= 2 ? "tau^k <= h^(1/2)" : "tau <= h");
    }
}

std::string fmt_opt(const std::optional<double>& v) { return v ? fmt::format("{:6.3f}", *v) : "     -"; }

int check_convergence(const llg::ConvergenceTable& table, const llg::ExperimentConfig& c) {
    int failures = 0;
    for (const auto& row : table.rows) {
        warn_step_ratio(row.k, row.tau, row.h);
        std::fprintf(summary_stream(c), "%s\n",
                     fmt::format("k={} r={} h={:.4g} tau={:.4g} H1={:.6e} eoc={} interp-H1={:.6e} eoc={} its={} "
                                 "time={:.2f}s",
                                 row.k, row.r, row.h, row.tau, row.h1_error, fmt_opt(row.eoc), row.h1_error_interp,
                                 fmt_opt(row.eoc_interp), row.iterations, row.wall_seconds)
                         .c_str());
        if (!std::isfinite(row.h1_error) || !std::isfinite(row.l2_error)) {
            std::fprintf(stderr, "assertion failed: non-finite error\n");
            ++failures;
        }
        if (row.max_tangency > 10.0 * c.solver_tol) {
            std::fprintf(stderr, "assertion failed: constraint residual %.3e above 10 tol\n", row.max_tangency);
            ++failures;
        }
    }
    return failures;
}

int run(int argc, char** argv) {
    CLI::App app{"Tangent-plane BDF experiments for the Landau-Lifshitz-Gilbert equation"};
    app.require_subcommand(1);
    Overrides o;
    auto* tau_cmd = app.add_subcommand("converge-tau", "H1 error at the final time versus tau");
    auto* h_cmd = app.add_subcommand("converge-h", "H1 error at the final time versus h");
    auto* energy_cmd = app.add_subcommand("energy", "energy decay and unit-length deviation, nonsmooth data");
    auto* stab_cmd = app.add_subcommand("stability-report", "BDF coefficients, multipliers and G-matrices");
    auto* proj_cmd = app.add_subcommand("projection-test", "discrete tangent projection properties");
    for (auto* cmd : {tau_cmd, h_cmd, energy_cmd, stab_cmd, proj_cmd}) {
        add_common(cmd, o);
    }
    CLI11_PARSE(app, argc, argv);

    int failures = 0;
    if (tau_cmd->parsed()) {
        const auto c = resolve(o, llg::default_tau_config());
        const auto table = llg::run_convergence_tau(c);
        failures += check_convergence(table, c);
        write_outputs(c, table.to_csv().str(), llg::PlotKind::ConvergenceTau);
    } else if (h_cmd->parsed()) {
        const auto c = resolve(o, llg::default_h_config());
        const auto table = llg::run_convergence_h(c);
        failures += check_convergence(table, c);
        write_outputs(c, table.to_csv().str(), llg::PlotKind::ConvergenceH);
    } else if (energy_cmd->parsed()) {
        const auto c = resolve(o, llg::default_energy_config());
        const auto report = llg::run_energy_decay(c);
        for (const auto& run : report.runs) {
            const double worst = run.worst_relative_margin();
            warn_step_ratio(run.k, run.tau, 1.0 / std::max(c.mesh.nx, c.mesh.ny));
            std::fprintf(summary_stream(c), "%s\n",
                         fmt::format("k={} tau={:.4g} energy {:.6f} -> {:.6f} max|1-|m|^2|={:.3e} "
                                     "worst margin/rhs={:.3e}",
                                     run.k, run.tau, run.initial_energy(), run.final_energy(),
                                     run.max_unit_deviation(), worst)
                             .c_str());
            if (worst < -1e-6) {
                std::fprintf(stderr, "assertion failed: energy inequality violated\n");
                ++failures;
            }
            if (run.max_tangency > 10.0 * c.solver_tol) {
                std::fprintf(stderr, "assertion failed: constraint residual %.3e above 10 tol\n", run.max_tangency);
                ++failures;
            }
        }
        write_outputs(c, report.to_csv().str(), llg::PlotKind::Energy);
    } else if (stab_cmd->parsed()) {
        const auto c = resolve(o, llg::ExperimentConfig{});
        const auto report = llg::stability_report(c.seed);
        for (const auto& f : report.failures) {
            std::fprintf(stderr, "assertion failed: %s\n", f.c_str());
        }
        failures += static_cast<int>(report.failures.size());
        std::fprintf(summary_stream(c), "stability report: %zu orders checked, %zu failed checks\n",
                     report.rows.size(), report.failures.size());
        write_outputs(c, report.to_csv().str(), std::nullopt);
    } else if (proj_cmd->parsed()) {
        const auto c = resolve(o, llg::default_projection_config());
        const auto report = llg::run_projection_test(c);
        for (const auto& row : report.rows) {
            std::fprintf(summary_stream(c), "%s\n",
                         fmt::format("r={} h={:.4g} L2={:.6e} eoc={} idempotence={:.2e} self-adjointness={:.2e}",
                                     row.r, row.h, row.l2_error, fmt_opt(row.eoc), row.idempotence,
                                     row.self_adjointness)
                             .c_str());
            if (row.idempotence > 1e-8 || row.self_adjointness > 1e-9) {
                std::fprintf(stderr, "assertion failed: projection properties\n");
                ++failures;
            }
        }
        write_outputs(c, report.to_csv().str(), std::nullopt);
    }
    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const llg::NotConverged& e) {
        std::fprintf(stderr, "error: %s (final residual %.3e)\n", e.what(), e.final_residual());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
    }
    return 2;
}
