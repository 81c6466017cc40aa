#include "llg/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>
#include <json.hpp>

#include "llg/bdf.hpp"
#include "llg/fem.hpp"
#include "llg/mesh.hpp"
#include "llg/problems.hpp"
#include "llg/stability.hpp"
#include "llg/tangent_space.hpp"

namespace llg {

namespace {

using Json = nlohmann::json;

template <class T>
void require_positive(const std::vector<T>& values, const char* name) {
    if (values.empty()) {
        throw std::invalid_argument(std::string("config: '") + name + "' must not be empty");
    }
    for (T v : values) {
        if (!(v > T{0})) {
            throw std::invalid_argument(std::string("config: '") + name + "' entries must be positive");
        }
    }
}

template <class T>
std::vector<T> scalar_or_list(const Json& j) {
    if (j.is_array()) {
        return j.get<std::vector<T>>();
    }
    return {j.get<T>()};
}

}  // namespace

void ExperimentConfig::validate() const {
    (void)make_problem(problem);
    require_positive(orders, "orders");
    require_positive(degrees, "degrees");
    require_positive(taus, "taus");
    require_positive(divisions, "divisions");
    for (int k : orders) {
        if (k > 5) {
            throw std::invalid_argument("config: BDF orders are limited to 1..5");
        }
    }
    if (mesh.nx < 1 || mesh.ny < 1 || mesh.nz < 1 || !(mesh.thickness > 0.0)) {
        throw std::invalid_argument("config: mesh counts and thickness must be positive");
    }
    if (!(tau > 0.0) || !(t_final > 0.0) || !(alpha > 0.0) || !(solver_tol > 0.0)) {
        throw std::invalid_argument("config: tau, t_final, alpha and solver_tol must be positive");
    }
}

ExperimentConfig default_tau_config() {
    ExperimentConfig c;
    c.problem = "exact2";
    c.orders = {1, 2, 3, 4};
    c.degrees = {2};
    return c;
}

ExperimentConfig default_h_config() {
    ExperimentConfig c;
    c.problem = "exact1";
    c.orders = {2};
    c.degrees = {1, 2};
    c.tau = 2e-3;
    c.divisions = {2, 4, 8, 16};
    return c;
}

ExperimentConfig default_energy_config() {
    ExperimentConfig c;
    c.problem = "nonsmooth";
    c.orders = {1, 2};
    c.degrees = {1};
    c.mesh = {16, 16, 1, 0.01};
    c.taus = {1e-2, 5e-3};
    return c;
}

ExperimentConfig default_projection_config() {
    ExperimentConfig c;
    c.degrees = {1, 2};
    c.divisions = {2, 4, 8};
    return c;
}

ExperimentConfig parse_config(std::string_view json_text, ExperimentConfig base) {
    Json j;
    try {
        j = Json::parse(json_text);
    } catch (const Json::parse_error& e) {
        throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) {
        throw std::invalid_argument("config: expected a JSON object");
    }
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "problem") {
                base.problem = value.get<std::string>();
            } else if (key == "orders" || key == "k") {
                base.orders = scalar_or_list<int>(value);
            } else if (key == "degrees" || key == "r") {
                base.degrees = scalar_or_list<int>(value);
            } else if (key == "mesh") {
                for (const auto& [mk, mv] : value.items()) {
                    if (mk == "nx") {
                        base.mesh.nx = mv.get<int>();
                    } else if (mk == "ny") {
                        base.mesh.ny = mv.get<int>();
                    } else if (mk == "nz") {
                        base.mesh.nz = mv.get<int>();
                    } else if (mk == "thickness" || mk == "L") {
                        base.mesh.thickness = mv.get<double>();
                    } else {
                        throw std::invalid_argument("config: unknown mesh key '" + mk + "'");
                    }
                }
            } else if (key == "taus" || key == "tau_list") {
                base.taus = scalar_or_list<double>(value);
            } else if (key == "tau") {
                base.tau = value.get<double>();
            } else if (key == "divisions") {
                base.divisions = scalar_or_list<int>(value);
            } else if (key == "t_final") {
                base.t_final = value.get<double>();
            } else if (key == "alpha") {
                base.alpha = value.get<double>();
            } else if (key == "solver_tol") {
                base.solver_tol = value.get<double>();
            } else if (key == "csv") {
                base.csv_path = value.get<std::string>();
            } else if (key == "svg") {
                base.svg_path = value.get<std::string>();
            } else if (key == "seed") {
                base.seed = value.get<std::uint64_t>();
            } else {
                throw std::invalid_argument("config: unknown key '" + key + "'");
            }
        }
    } catch (const Json::exception& e) {
        throw std::invalid_argument(std::string("config: wrong value type: ") + e.what());
    }
    base.validate();
    return base;
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::invalid_argument("config: cannot open '" + path.string() + "'");
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), std::move(base));
}

int steps_within(double t_final, double tau) {
    if (!(tau > 0.0) || !(t_final >= 0.0)) {
        throw std::invalid_argument("steps_within: need tau > 0 and t_final >= 0");
    }
    return static_cast<int>(std::floor((t_final + 1e-12) / tau));
}

std::string Csv::str() const {
    std::string out;
    const auto append_row = [&out](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i > 0) {
                out += ',';
            }
            out += cells[i];
        }
        out += '\n';
    };
    append_row(header);
    for (const auto& row : rows) {
        append_row(row);
    }
    return out;
}

std::size_t Csv::column(std::string_view name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
        throw std::invalid_argument("csv: missing column '" + std::string(name) + "'");
    }
    return static_cast<std::size_t>(it - header.begin());
}

std::string format_number(double value) { return fmt::format("{:.17g}", value); }

std::string format_optional(const std::optional<double>& value) { return value ? format_number(*value) : ""; }

Csv parse_csv(std::string_view text) {
    Csv csv;
    std::size_t pos = 0;
    bool first = true;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) {
            end = text.size();
        }
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> cells;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = line.find(',', start);
            cells.emplace_back(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
            if (comma == std::string_view::npos) {
                break;
            }
            start = comma + 1;
        }
        if (first) {
            csv.header = std::move(cells);
            first = false;
        } else {
            if (cells.size() != csv.header.size()) {
                throw std::invalid_argument("csv: row has " + std::to_string(cells.size()) + " cells, header has " +
                                            std::to_string(csv.header.size()));
            }
            csv.rows.push_back(std::move(cells));
        }
    }
    if (csv.header.empty()) {
        throw std::invalid_argument("csv: missing header");
    }
    return csv;
}

double eoc(double e_prev, double e, double step_prev, double step) {
    return std::log(e_prev / e) / std::log(step_prev / step);
}

namespace {

std::vector<double> extract_numbers(const Csv& csv, std::size_t col) {
    std::vector<double> out;
    out.reserve(csv.rows.size());
    for (const auto& row : csv.rows) {
        const std::string& cell = row[col];
        if (cell.empty()) {
            out.push_back(std::numeric_limits<double>::quiet_NaN());
            continue;
        }
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(cell, &used);
        } catch (const std::exception&) {
            throw std::invalid_argument("csv: non-numeric cell '" + cell + "'");
        }
        if (used != cell.size()) {
            throw std::invalid_argument("csv: non-numeric cell '" + cell + "'");
        }
        out.push_back(v);
    }
    return out;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void fill_eocs(std::vector<ConvergenceRow>& rows, Sweep sweep) {
    std::map<std::pair<int, int>, const ConvergenceRow*> previous;
    for (ConvergenceRow& row : rows) {
        const auto key = std::make_pair(row.k, row.r);
        const auto it = previous.find(key);
        if (it != previous.end()) {
            const ConvergenceRow& p = *it->second;
            const double step_prev = sweep == Sweep::Tau ? p.tau : p.h;
            const double step = sweep == Sweep::Tau ? row.tau : row.h;
            row.eoc = eoc(p.h1_error, row.h1_error, step_prev, step);
            row.eoc_interp = eoc(p.h1_error_interp, row.h1_error_interp, step_prev, step);
        }
        previous[key] = &row;
    }
}

/// Runs one manufactured-solution trajectory up to n_total tau and fills the error columns.
ConvergenceRow convergence_cell(const ProblemSpec& spec, const FiniteElementSpace& space, int k, double tau,
                                int n_total, const ExperimentConfig& config) {
    const auto start = std::chrono::steady_clock::now();
    const BdfScheme scheme = BdfScheme::make(k);
    std::vector<NodalField> initial;
    for (int i = 0; i < k; ++i) {
        const double t = i * tau;
        initial.push_back(interpolate(space, [&](const Vec3& x) { return spec.value(x, t); }));
    }
    TrajectoryOptions opts;
    opts.alpha = config.alpha;
    opts.tau = tau;
    opts.n_steps = n_total - (k - 1);
    opts.tol = config.solver_tol;
    Trajectory traj;
    try {
        traj = run_trajectory(
            scheme, space, std::move(initial), [&](double t) { return forcing_nodal(space, spec, t); }, opts);
    } catch (const NotConverged& e) {
        throw NotConverged(fmt::format("k={} tau={}: {}", k, format_number(tau), e.what()), e.final_residual(),
                           e.residual_history());
    }
    const double t_end = n_total * tau;
    ConvergenceRow row;
    row.k = k;
    row.r = space.degree();
    row.h = space.mesh().meshwidth();
    row.tau = tau;
    row.n_steps = n_total;
    const ErrorNorms err = error_norms(
        space, traj.final_field, [&](const Vec3& x) { return spec.value(x, t_end); },
        [&](const Vec3& x) { return spec.gradient(x, t_end); });
    row.h1_error = err.h1;
    row.l2_error = err.l2;
    NodalField diff = traj.final_field;
    const NodalField exact = interpolate(space, [&](const Vec3& x) { return spec.value(x, t_end); });
    for (std::size_t i = 0; i < diff.size(); ++i) {
        diff.values[i] = diff.values[i] - exact.values[i];
    }
    const ErrorNorms derr = error_norms(
        space, diff, [](const Vec3&) { return Vec3{0.0, 0.0, 0.0}; }, [](const Vec3&) { return Mat3{}; });
    row.h1_error_interp = derr.h1;
    for (const StepRecord& rec : traj.records) {
        row.iterations += rec.iterations;
        row.max_tangency = std::max(row.max_tangency, rec.tangency);
    }
    row.wall_seconds = seconds_since(start);
    return row;
}

ProblemParameters problem_parameters(const ExperimentConfig& config) {
    ProblemParameters p;
    p.alpha = config.alpha;
    p.t_final = config.t_final;
    return p;
}

}  // namespace

Csv ConvergenceTable::to_csv() const {
    Csv csv;
    csv.header = {"k", "r", "h", "tau", "n_steps", "h1_error", "l2_error", "h1_error_interp", "eoc", "eoc_interp",
                  "iterations", "max_tangency"};
    for (const ConvergenceRow& row : rows) {
        csv.rows.push_back({std::to_string(row.k), std::to_string(row.r), format_number(row.h),
                            format_number(row.tau), std::to_string(row.n_steps), format_number(row.h1_error),
                            format_number(row.l2_error), format_number(row.h1_error_interp), format_optional(row.eoc),
                            format_optional(row.eoc_interp), std::to_string(row.iterations),
                            format_number(row.max_tangency)});
    }
    return csv;
}

std::vector<ConvergenceRow> ConvergenceTable::series(int k, int r) const {
    std::vector<ConvergenceRow> out;
    for (const ConvergenceRow& row : rows) {
        if (row.k == k && row.r == r) {
            out.push_back(row);
        }
    }
    return out;
}

ConvergenceTable run_convergence_tau(const ExperimentConfig& config) {
    config.validate();
    const ProblemSpec spec = make_problem(config.problem, problem_parameters(config));
    if (!spec.has_exact()) {
        throw std::invalid_argument("run_convergence_tau: problem '" + config.problem + "' has no exact solution");
    }
    ConvergenceTable table;
    table.sweep = Sweep::Tau;
    for (int r : config.degrees) {
        const FiniteElementSpace space(
            build_box_mesh(config.mesh.nx, config.mesh.ny, config.mesh.nz, config.mesh.thickness), r);
        for (int k : config.orders) {
            for (double tau : config.taus) {
                const int n_total = steps_within(config.t_final, tau);
                if (n_total < k) {
                    continue;
                }
                table.rows.push_back(convergence_cell(spec, space, k, tau, n_total, config));
            }
        }
    }
    fill_eocs(table.rows, Sweep::Tau);
    return table;
}

ConvergenceTable run_convergence_h(const ExperimentConfig& config) {
    config.validate();
    const ProblemSpec spec = make_problem(config.problem, problem_parameters(config));
    if (!spec.has_exact()) {
        throw std::invalid_argument("run_convergence_h: problem '" + config.problem + "' has no exact solution");
    }
    const int k = config.orders.front();
    const int n_total = steps_within(config.t_final, config.tau);
    if (n_total < k) {
        throw std::invalid_argument("run_convergence_h: tau too large for the starting values");
    }
    ConvergenceTable table;
    table.sweep = Sweep::H;
    for (int r : config.degrees) {
        for (int n : config.divisions) {
            const FiniteElementSpace space(build_box_mesh(n, n, config.mesh.nz, config.mesh.thickness), r);
            table.rows.push_back(convergence_cell(spec, space, k, config.tau, n_total, config));
        }
    }
    fill_eocs(table.rows, Sweep::H);
    return table;
}

double EnergyRun::initial_energy() const { return rows.empty() ? 0.0 : rows.front().grad_norm; }

double EnergyRun::final_energy() const { return rows.empty() ? 0.0 : rows.back().grad_norm; }

double EnergyRun::max_unit_deviation() const {
    double m = 0.0;
    for (const EnergyRow& row : rows) {
        m = std::max(m, row.unit_deviation_max);
    }
    return m;
}

double EnergyRun::worst_relative_margin() const {
    double worst = std::numeric_limits<double>::infinity();
    for (const EnergyRow& row : rows) {
        if (row.margin && row.rhs && *row.rhs > 0.0) {
            worst = std::min(worst, *row.margin / *row.rhs);
        }
    }
    return worst;
}

Csv EnergyReport::to_csv() const {
    Csv csv;
    csv.header = {"k", "tau", "step", "time", "grad_norm", "unit_deviation_nodes", "unit_deviation_max", "margin",
                  "rhs"};
    for (const EnergyRun& run : runs) {
        for (const EnergyRow& row : run.rows) {
            csv.rows.push_back({std::to_string(row.k), format_number(row.tau), std::to_string(row.step),
                                format_number(row.time), format_number(row.grad_norm),
                                format_number(row.unit_deviation_nodes), format_number(row.unit_deviation_max),
                                format_optional(row.margin), format_optional(row.rhs)});
        }
    }
    return csv;
}

namespace {

double nodal_deviation(const NodalField& m) {
    double d = 0.0;
    for (const Vec3& v : m.values) {
        d = std::max(d, std::abs(1.0 - dot(v, v)));
    }
    return d;
}

EnergyRun energy_run(const ProblemSpec& spec, const FiniteElementSpace& space, int k, double tau,
                     const ExperimentConfig& config) {
    const int n_total = steps_within(config.t_final, tau);
    const FieldSource field = [&](double t) { return forcing_nodal(space, spec, t); };
    TrajectoryOptions opts;
    opts.alpha = config.alpha;
    opts.tau = tau;
    opts.tol = config.solver_tol;

    // Starting values m^0 (interpolated) and m^1..m^{k-1} from BDF1.
    std::vector<NodalField> fields{interpolate(space, [&](const Vec3& x) { return spec.initial(x); })};
    std::vector<double> node_dev{nodal_deviation(fields.front())};
    const int n_boot = std::min(k - 1, n_total);
    Trajectory boot;
    if (n_boot > 0) {
        TrajectoryOptions bopts = opts;
        bopts.n_steps = n_boot;
        bopts.observer = [&](int, const NodalField& m) {
            fields.push_back(m);
            node_dev.push_back(nodal_deviation(m));
        };
        boot = run_trajectory(BdfScheme::make(1), space, {fields.front()}, field, bopts);
    }

    EnergyRun run;
    run.k = k;
    run.tau = tau;
    const auto emit = [&](const StepRecord& rec, double dev_nodes) {
        EnergyRow row;
        row.k = k;
        row.tau = tau;
        row.step = rec.step;
        row.time = rec.time;
        row.grad_norm = rec.grad_norm;
        row.unit_deviation_nodes = dev_nodes;
        row.unit_deviation_max = rec.unit_deviation_max;
        run.max_tangency = std::max(run.max_tangency, rec.tangency);
        run.rows.push_back(row);
    };

    if (n_total < k) {
        if (n_boot > 0) {
            for (std::size_t i = 0; i < boot.records.size(); ++i) {
                emit(boot.records[i], node_dev[i]);
            }
        } else {
            const TrajectoryOptions none = opts;
            const Trajectory t0 = run_trajectory(BdfScheme::make(1), space, {fields.front()}, field, none);
            emit(t0.records.front(), node_dev.front());
        }
        return run;
    }

    const BdfScheme scheme = BdfScheme::make(k);
    TrajectoryOptions mopts = opts;
    mopts.n_steps = n_total - (k - 1);
    mopts.observer = [&](int, const NodalField& m) { node_dev.push_back(nodal_deviation(m)); };
    Trajectory traj;
    try {
        traj = run_trajectory(scheme, space, fields, field, mopts);
    } catch (const NotConverged& e) {
        throw NotConverged(fmt::format("k={} tau={}: {}", k, format_number(tau), e.what()), e.final_residual(),
                           e.residual_history());
    }
    for (int i = 0; i < n_boot; ++i) {
        // Tangency of the bootstrap steps belongs to the run as well.
        run.max_tangency = std::max(run.max_tangency, boot.records[static_cast<std::size_t>(i) + 1].tangency);
    }
    for (std::size_t i = 0; i < traj.records.size(); ++i) {
        emit(traj.records[i], node_dev[i]);
    }
    if (scheme.gmatrix) {
        const std::vector<EnergyMargin> margins = discrete_energy_report(traj, scheme, config.alpha, tau);
        for (const EnergyMargin& m : margins) {
            EnergyRow& row = run.rows[static_cast<std::size_t>(m.step)];
            row.margin = m.margin;
            row.rhs = m.rhs;
        }
    }
    return run;
}

}  // namespace

EnergyReport run_energy_decay(const ExperimentConfig& config) {
    config.validate();
    const ProblemSpec spec = make_problem(config.problem, problem_parameters(config));
    EnergyReport report;
    for (int r : config.degrees) {
        const FiniteElementSpace space(
            build_box_mesh(config.mesh.nx, config.mesh.ny, config.mesh.nz, config.mesh.thickness), r);
        for (int k : config.orders) {
            for (double tau : config.taus) {
                report.runs.push_back(energy_run(spec, space, k, tau, config));
            }
        }
    }
    return report;
}

namespace {

constexpr std::array<double, 3> kAlphaTable{0.0913, 0.4041, 4.4348};

double order_condition_residual(int k) {
    const std::vector<double> delta = bdf_coefficients(k);
    const std::vector<double> gamma = extrapolation_coefficients(k);
    double worst = 0.0;
    for (int l = 0; l <= k; ++l) {
        const double target = l == 0 ? 0.0 : l * std::pow(k, l - 1);
        double sd = 0.0;
        for (int i = 0; i <= k; ++i) {
            sd += std::pow(k - i, l) * delta[static_cast<std::size_t>(i)];
        }
        worst = std::max(worst, std::abs(sd - target) / std::max(1.0, std::abs(target)));
        if (l >= 1) {
            double sg = 0.0;
            for (int i = 0; i < k; ++i) {
                sg += std::pow(k - i - 1, l - 1) * gamma[static_cast<std::size_t>(i)];
            }
            worst = std::max(worst, std::abs(l * sg - target) / std::max(1.0, std::abs(target)));
        }
    }
    return worst;
}

}  // namespace

StabilityReport stability_report(std::uint64_t seed, std::size_t samples, std::size_t trials) {
    StabilityReport report;
    const auto fail = [&report](int k, const std::string& what) {
        report.failures.push_back(fmt::format("k={}: {}", k, what));
    };
    for (int k = 1; k <= 5; ++k) {
        StabilityRow row;
        row.k = k;
        row.coefficient_residual = order_condition_residual(k);
        if (row.coefficient_residual > 1e-12) {
            fail(k, fmt::format("order conditions violated by {:.3e}", row.coefficient_residual));
        }
        for (double g : extrapolation_coefficients(k)) {
            row.gamma_abs_sum += std::abs(g);
        }
        if (row.gamma_abs_sum != std::ldexp(1.0, k) - 1.0) {
            fail(k, "sum |gamma_j| differs from 2^k - 1");
        }
        row.eta = multiplier_eta(k);
        row.eta_optimal = optimal_multiplier(k, samples, 1e-10);
        row.positivity_min = check_positivity(k, row.eta, samples).min_value;
        const PositivityCheck at_optimal = check_positivity(k, row.eta_optimal, samples);
        row.positivity_min_optimal = at_optimal.min_value;
        const PositivityCheck at_zero = check_positivity(k, 0.0, samples);
        row.positivity_min_zero = at_zero.min_value;
        if (!at_optimal.holds) {
            fail(k, "positivity fails at the computed multiplier");
        }
        if (std::abs(row.eta_optimal - row.eta) > 0.5e-4 + 1e-9) {
            fail(k, fmt::format("computed multiplier {:.6f} does not round to {:.4f}", row.eta_optimal, row.eta));
        }
        if (k >= 3) {
            row.alpha_threshold = alpha_threshold(k);
            const double table = kAlphaTable[static_cast<std::size_t>(k - 3)];
            const double rounded_up = std::ceil(*row.alpha_threshold * 1e4 - 1e-9) / 1e4;
            if (std::abs(*row.alpha_threshold - table) >= 1e-4 || std::abs(rounded_up - table) > 1e-12) {
                fail(k, fmt::format("alpha threshold {:.6f} does not reproduce {:.4f}", *row.alpha_threshold, table));
            }
            if (at_zero.holds) {
                fail(k, "positivity unexpectedly holds without multiplier");
            }
        } else {
            if (!at_zero.holds) {
                fail(k, "positivity fails for eta = 0");
            }
            const DenseMatrix g = g_matrix(k);
            const std::vector<double> eig = symmetric_eigenvalues(g);
            row.g_min_eig = eig.front();
            row.g_max_eig = eig.back();
            const double expect_min = k == 1 ? 1.0 : (3.0 - 2.0 * std::numbers::sqrt2) / 4.0;
            const double expect_max = k == 1 ? 1.0 : (3.0 + 2.0 * std::numbers::sqrt2) / 4.0;
            if (std::abs(eig.front() - expect_min) > 1e-12 || std::abs(eig.back() - expect_max) > 1e-12) {
                fail(k, "G-matrix eigenvalues differ from (3 +- 2 sqrt 2) / 4");
            }
            row.g_worst_violation = verify_g_inequality(k, 0.0, g, trials, 5, seed);
            if (*row.g_worst_violation > 1e-10) {
                fail(k, fmt::format("G-inequality violated by {:.3e}", *row.g_worst_violation));
            }
            if (k == 1) {
                DenseMatrix half(1, 1);
                half(0, 0) = 0.5;
                row.g_half_worst_violation = verify_g_inequality(k, 0.0, half, trials, 5, seed);
            }
        }
        report.rows.push_back(row);
    }
    return report;
}

Csv StabilityReport::to_csv() const {
    Csv csv;
    csv.header = {"k",
                  "eta",
                  "eta_optimal",
                  "alpha_threshold",
                  "positivity_min",
                  "positivity_min_optimal",
                  "positivity_min_zero",
                  "coefficient_residual",
                  "gamma_abs_sum",
                  "g_min_eig",
                  "g_max_eig",
                  "g_worst_violation",
                  "g_half_worst_violation"};
    for (const StabilityRow& row : rows) {
        csv.rows.push_back({std::to_string(row.k), format_number(row.eta), format_number(row.eta_optimal),
                            format_optional(row.alpha_threshold), format_number(row.positivity_min),
                            format_number(row.positivity_min_optimal), format_number(row.positivity_min_zero),
                            format_number(row.coefficient_residual), format_number(row.gamma_abs_sum),
                            format_optional(row.g_min_eig), format_optional(row.g_max_eig),
                            format_optional(row.g_worst_violation),
                            format_optional(row.g_half_worst_violation)});
    }
    return csv;
}

namespace {

Vec3 projection_direction(const Vec3& x) {
    const Vec3 w{x[0] - 0.3, x[1] - 0.6, 1.0 + 0.5 * x[2]};
    return (1.0 / norm(w)) * w;
}

Vec3 projection_field(const Vec3& x) {
    return {std::sin(std::numbers::pi * x[0]) * std::cos(x[1]), x[2] * x[2] - x[0] * x[1],
            std::cos(std::numbers::pi * x[1]) + x[2]};
}

NodalField random_field(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    NodalField f(n);
    for (Vec3& v : f.values) {
        for (double& c : v) {
            c = normal(rng);
        }
    }
    return f;
}

}  // namespace

ProjectionReport run_projection_test(const ExperimentConfig& config) {
    config.validate();
    ProjectionReport report;
    std::mt19937_64 rng(config.seed);
    for (int r : config.degrees) {
        const ProjectionRow* previous = nullptr;
        for (int n : config.divisions) {
            const FiniteElementSpace space(build_box_mesh(n, n, n, 1.0), r);
            const QuadratureField m = evaluate_at_quadrature(space, projection_direction);
            const TangentProjector proj(space, m, config.solver_tol);

            ProjectionRow row;
            row.r = r;
            row.h = 1.0 / n;
            const QuadratureField v = evaluate_at_quadrature(space, projection_field);
            const NodalField pv = proj.project_load(load_vector(space, v));
            const QuadratureField pv_q = evaluate_at_quadrature(space, pv);
            const std::size_t nq = space.points_per_cell();
            double err = 0.0;
            for (std::size_t p = 0; p < v.values.size(); ++p) {
                const Vec3& vv = v.values[p];
                const Vec3& mm = m.values[p];
                const Vec3 exact = vv - dot(mm, vv) * mm;
                const Vec3 d = pv_q.values[p] - exact;
                err += space.weight(p % nq) * dot(d, d);
            }
            row.l2_error = std::sqrt(err);

            const NodalField u = random_field(space.num_dofs(), rng);
            const NodalField w = random_field(space.num_dofs(), rng);
            const NodalField pu = proj.project(u);
            const NodalField ppu = proj.project(pu);
            NodalField diff = ppu;
            for (std::size_t i = 0; i < diff.size(); ++i) {
                diff.values[i] = diff.values[i] - pu.values[i];
            }
            const CsrMatrix& mass = proj.mass();
            row.idempotence = std::sqrt(std::max(0.0, l2_inner(mass, diff, diff))) /
                              std::sqrt(std::max(1e-300, l2_inner(mass, pu, pu)));
            const NodalField pw = proj.project(w);
            row.self_adjointness = std::abs(l2_inner(mass, pu, w) - l2_inner(mass, u, pw)) /
                                   std::sqrt(l2_inner(mass, u, u) * l2_inner(mass, w, w));
            if (previous != nullptr) {
                row.eoc = eoc(previous->l2_error, row.l2_error, previous->h, row.h);
            }
            report.rows.push_back(row);
            previous = &report.rows.back();
        }
    }
    return report;
}

Csv ProjectionReport::to_csv() const {
    Csv csv;
    csv.header = {"r", "h", "l2_error", "eoc", "idempotence", "self_adjointness"};
    for (const ProjectionRow& row : rows) {
        csv.rows.push_back({std::to_string(row.r), format_number(row.h), format_number(row.l2_error),
                            format_optional(row.eoc), format_number(row.idempotence),
                            format_number(row.self_adjointness)});
    }
    return csv;
}

namespace {

constexpr std::array<const char*, 8> kPalette{"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                              "#ff7f0e", "#17becf", "#8c564b", "#e377c2"};

struct Series {
    std::string label;
    double slope = 0.0;
    std::vector<std::pair<double, double>> points;
};

struct Frame {
    double width = 640.0;
    double height = 480.0;
    double left = 70.0;
    double right = 20.0;
    double top = 20.0;
    double bottom = 50.0;
};

std::string svg_number(double v) { return fmt::format("{:.3f}", v); }

}  // namespace

std::string emit_plot(std::string_view csv_text, PlotKind kind) {
    const Csv csv = parse_csv(csv_text);
    if (csv.rows.empty()) {
        throw std::invalid_argument("emit_plot: no data rows");
    }
    const bool log_scale = kind != PlotKind::Energy;
    std::vector<Series> series;
    std::map<std::string, std::size_t> index;
    if (kind == PlotKind::Energy) {
        const auto k = extract_numbers(csv, csv.column("k"));
        const auto tau = extract_numbers(csv, csv.column("tau"));
        const auto t = extract_numbers(csv, csv.column("time"));
        const auto e = extract_numbers(csv, csv.column("grad_norm"));
        for (std::size_t i = 0; i < csv.rows.size(); ++i) {
            const std::string label = fmt::format("k={} tau={}", k[i], tau[i]);
            if (!index.contains(label)) {
                index[label] = series.size();
                series.push_back({label, 0.0, {}});
            }
            if (std::isfinite(t[i]) && std::isfinite(e[i])) {
                series[index[label]].points.emplace_back(t[i], e[i]);
            }
        }
    } else {
        const bool tau_sweep = kind == PlotKind::ConvergenceTau;
        const auto key = extract_numbers(csv, csv.column(tau_sweep ? "k" : "r"));
        const auto other = extract_numbers(csv, csv.column(tau_sweep ? "r" : "k"));
        const auto x = extract_numbers(csv, csv.column(tau_sweep ? "tau" : "h"));
        const auto y = extract_numbers(csv, csv.column("h1_error"));
        for (std::size_t i = 0; i < csv.rows.size(); ++i) {
            const std::string label = tau_sweep ? fmt::format("k={} (r={})", key[i], other[i])
                                                : fmt::format("r={} (k={})", key[i], other[i]);
            if (!index.contains(label)) {
                index[label] = series.size();
                series.push_back({label, key[i], {}});
            }
            if (x[i] > 0.0 && y[i] > 0.0 && std::isfinite(x[i]) && std::isfinite(y[i])) {
                series[index[label]].points.emplace_back(x[i], y[i]);
            }
        }
    }
    std::erase_if(series, [](const Series& s) { return s.points.empty(); });
    if (series.empty()) {
        throw std::invalid_argument("emit_plot: no plottable points");
    }

    const auto tx = [log_scale](double v) { return log_scale ? std::log10(v) : v; };
    double xmin = std::numeric_limits<double>::infinity();
    double xmax = -xmin;
    double ymin = xmin;
    double ymax = -xmin;
    for (const Series& s : series) {
        for (const auto& [x, y] : s.points) {
            xmin = std::min(xmin, tx(x));
            xmax = std::max(xmax, tx(x));
            ymin = std::min(ymin, tx(y));
            ymax = std::max(ymax, tx(y));
        }
    }
    if (log_scale) {
        xmin = std::floor(xmin);
        xmax = std::ceil(xmax);
        ymin = std::floor(ymin);
        ymax = std::ceil(ymax);
    } else {
        ymin = std::min(ymin, 0.0);
    }
    if (xmax - xmin < 1e-12) {
        xmin -= 0.5;
        xmax += 0.5;
    }
    if (ymax - ymin < 1e-12) {
        ymin -= 0.5;
        ymax += 0.5;
    }

    const Frame f;
    const double pw = f.width - f.left - f.right;
    const double ph = f.height - f.top - f.bottom;
    const auto px = [&](double v) { return f.left + (tx(v) - xmin) / (xmax - xmin) * pw; };
    const auto py = [&](double v) { return f.top + (ymax - tx(v)) / (ymax - ymin) * ph; };

    std::string out;
    out += fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n",
        svg_number(f.width), svg_number(f.height), svg_number(f.width), svg_number(f.height));
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n",
                       svg_number(f.left), svg_number(f.top), svg_number(pw), svg_number(ph));
    out += fmt::format("<clipPath id=\"plot\"><rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\"/></clipPath>\n",
                       svg_number(f.left), svg_number(f.top), svg_number(pw), svg_number(ph));

    const auto tick_positions = [log_scale](double lo, double hi) {
        std::vector<double> out;
        if (log_scale) {
            for (double e = lo; e <= hi + 1e-9; e += 1.0) {
                out.push_back(e);
            }
        } else {
            for (int i = 0; i <= 5; ++i) {
                out.push_back(lo + (hi - lo) * i / 5.0);
            }
        }
        return out;
    };
    const auto tick_label = [log_scale](double v) {
        return log_scale ? fmt::format("1e{}", static_cast<int>(std::lround(v))) : fmt::format("{:.3g}", v);
    };
    for (double fx : tick_positions(xmin, xmax)) {
        const double sx = f.left + (fx - xmin) / (xmax - xmin) * pw;
        out += fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"middle\">{}</text>\n",
                           svg_number(sx), svg_number(f.top + ph + 16.0), tick_label(fx));
    }
    for (double fy : tick_positions(ymin, ymax)) {
        const double sy = f.top + (ymax - fy) / (ymax - ymin) * ph;
        out += fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"11\" text-anchor=\"end\">{}</text>\n",
                           svg_number(f.left - 6.0), svg_number(sy + 4.0), tick_label(fy));
    }
    const std::string xlabel = kind == PlotKind::Energy ? "time" : kind == PlotKind::ConvergenceTau ? "tau" : "h";
    const std::string ylabel = kind == PlotKind::Energy ? "|grad m|_L2" : "H1 error";
    out += fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\">{}</text>\n",
                       svg_number(f.left + pw / 2.0), svg_number(f.height - 10.0), xlabel);
    out += fmt::format(
        "<text x=\"14\" y=\"{}\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 14 {})\">{}</text>\n",
        svg_number(f.top + ph / 2.0), svg_number(f.top + ph / 2.0), ylabel);

    for (std::size_t s = 0; s < series.size(); ++s) {
        const Series& ser = series[s];
        const char* color = kPalette[s % kPalette.size()];
        std::string pts;
        for (const auto& [x, y] : ser.points) {
            if (!pts.empty()) {
                pts += ' ';
            }
            pts += svg_number(px(x)) + "," + svg_number(py(y));
        }
        out += fmt::format(
            "<polyline clip-path=\"url(#plot)\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            color, pts);
        if (log_scale && ser.points.size() >= 2) {
            // Reference slope through the coarsest point, shifted down by a factor of two.
            const auto [x0, y0] = ser.points.front();
            const double x1 = ser.points.back().first;
            const double y1 = 0.5 * y0 * std::pow(x1 / x0, ser.slope);
            out += fmt::format(
                "<line clip-path=\"url(#plot)\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"{}\" "
                "stroke-dasharray=\"6,4\"/>\n",
                svg_number(px(x0)), svg_number(py(0.5 * y0)), svg_number(px(x1)), svg_number(py(y1)), color);
        }
        out += fmt::format("<text x=\"{}\" y=\"{}\" font-size=\"11\" fill=\"{}\">{}</text>\n",
                           svg_number(f.left + 8.0), svg_number(f.top + 14.0 + 13.0 * static_cast<double>(s)), color,
                           ser.label);
    }
    out += "</svg>\n";
    return out;
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write '" + path.string() + "'");
    }
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) {
        throw std::runtime_error("write to '" + path.string() + "' failed");
    }
}

}  // namespace llg
