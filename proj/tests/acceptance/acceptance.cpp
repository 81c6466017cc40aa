// Acceptance run: one PASS/FAIL line per criterion, followed by the measured
// values. Scaled-down sweeps use the same defaults as the CLI subcommands.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "llg/bdf.hpp"
#include "llg/experiments.hpp"
#include "llg/fem.hpp"
#include "llg/problems.hpp"
#include "llg/sparse.hpp"
#include "llg/stability.hpp"
#include "support/oracles.hpp"

namespace {

using llg::NodalField;
using llg::Vec3;

struct Outcome {
    bool pass = true;
    std::vector<std::string> details;

    void require(bool ok, std::string what) {
        if (!ok) pass = false;
        details.push_back((ok ? "  ok   " : "  FAIL ") + std::move(what));
    }
    void info(std::string what) { details.push_back("  info " + std::move(what)); }
};

int failures = 0;

void report(int id, const char* title, const std::function<Outcome()>& body) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
        out = body();
    } catch (const std::exception& e) {
        out.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!out.pass) ++failures;
    std::printf("%s criterion %d: %s (%.1f s)\n", out.pass ? "PASS" : "FAIL", id, title, secs);
    for (const auto& d : out.details) std::printf("%s\n", d.c_str());
    std::fflush(stdout);
}

Outcome coefficients() {
    Outcome out;
    for (int k = 1; k <= 5; ++k) {
        const auto d = llg::bdf_coefficients(k);
        const auto g = llg::extrapolation_coefficients(k);
        double worst = 0.0;
        for (int l = 0; l <= k; ++l) {
            double lhs = 0.0, rhs_g = 0.0;
            for (int i = 0; i <= k; ++i) lhs += std::pow(k - i, l) * d[i];
            if (l > 0) {
                for (int i = 0; i < k; ++i) rhs_g += std::pow(k - i - 1, l - 1) * g[i];
                rhs_g *= l;
            }
            const double target = l * std::pow(k, l - 1);
            worst = std::max({worst, std::abs(lhs - target), std::abs(rhs_g - target)});
        }
        double gsum = 0.0;
        for (double v : g) gsum += std::abs(v);
        out.require(worst <= 1e-12, fmt::format("k={} order conditions, worst residual {:.2e} <= 1e-12", k, worst));
        out.require(gsum == std::pow(2.0, k) - 1.0, fmt::format("k={} sum |gamma| = {} == 2^k - 1", k, gsum));
    }
    return out;
}

Outcome stability_tables() {
    Outcome out;
    const double expected[] = {0.0913, 0.4041, 4.4348};
    for (int k = 3; k <= 5; ++k) {
        // A damping threshold is a lower bound, so the table rounds it up.
        const double a = llg::alpha_threshold(k);
        const double up = std::ceil(a * 1e4 - 1e-9) / 1e4;
        out.require(std::abs(up - expected[k - 3]) <= 1e-12,
                    fmt::format("alpha_{} = {:.6f}, rounded up {:.4f}, expected {:.4f}", k, a, up, expected[k - 3]));
    }
    const auto ev = llg::symmetric_eigenvalues(llg::g_matrix(2));
    const double lo = (3.0 - 2.0 * std::sqrt(2.0)) / 4.0, hi = (3.0 + 2.0 * std::sqrt(2.0)) / 4.0;
    out.require(std::abs(ev[0] - lo) <= 1e-12 && std::abs(ev[1] - hi) <= 1e-12,
                fmt::format("G(2) eigenvalues {:.15f}, {:.15f}", ev[0], ev[1]));
    for (int k = 1; k <= 5; ++k) {
        const auto c = llg::check_positivity(k, llg::multiplier_eta(k), 100000);
        out.require(c.holds, fmt::format("positivity holds for k={}, eta={}: min {:.3e}", k, llg::multiplier_eta(k),
                                         c.min_value));
    }
    for (int k = 3; k <= 5; ++k) {
        const double opt = llg::optimal_multiplier(k, 100000);
        out.info(fmt::format("k={}: smallest admissible eta {:.7f}, min at eta {:.4f}: {:.3e}", k, opt,
                             std::ceil(opt * 1e4) / 1e4, llg::check_positivity(k, std::ceil(opt * 1e4) / 1e4).min_value));
    }
    for (int k = 3; k <= 5; ++k) {
        const auto c = llg::check_positivity(k, 0.0, 100000);
        out.require(!c.holds, fmt::format("positivity fails for k={}, eta=0: min {:.3e}", k, c.min_value));
    }
    return out;
}

Outcome multiplier_inequality() {
    Outcome out;
    for (int k = 1; k <= 2; ++k) {
        const double v = llg::verify_g_inequality(k, 0.0, llg::g_matrix(k), 10000, 5, 42);
        out.require(v <= 1e-10, fmt::format("k={} with the tabulated G: worst violation {:.3e} <= 1e-10", k, v));
    }
    llg::DenseMatrix half(1, 1);
    half(0, 0) = 0.5;
    out.info(fmt::format("k=1 with G = [1/2]: worst violation {:.3e}",
                         llg::verify_g_inequality(1, 0.0, half, 10000, 5, 42)));
    return out;
}

Outcome assembly_oracle() {
    Outcome out;
    struct Case {
        int nx, ny, nz;
        double thickness;
        int r;
    };
    for (const Case& c : {Case{1, 1, 1, 1.0, 1}, Case{2, 2, 1, 0.25, 1}, Case{2, 2, 1, 0.01, 1}, Case{1, 1, 1, 1.0, 2},
                          Case{2, 2, 1, 0.5, 2}, Case{2, 2, 1, 0.01, 2}}) {
        const auto mesh = llg::build_box_mesh(c.nx, c.ny, c.nz, c.thickness);
        const llg::FiniteElementSpace space(mesh, c.r);
        const auto ref = oracle::brute_force_assembly(mesh, c.r, oracle::swirl);
        const auto mhat = llg::evaluate_at_quadrature(space, llg::VectorFunction(oracle::swirl));
        const auto M = llg::assemble_mass(space).to_dense();
        const auto A = llg::assemble_stiffness(space).to_dense();
        const auto S = llg::assemble_skew(space, mhat).to_dense();
        const auto C = llg::assemble_constraint(space, mhat).to_dense();
        const double dm = oracle::max_abs_difference(M, ref.mass);
        const double da = oracle::max_abs_difference(A, ref.stiffness);
        const double ds = oracle::max_abs_difference(S, ref.skew);
        const double dc = oracle::max_abs_difference(C, ref.constraint);
        double skew = 0.0, null = 0.0;
        for (std::size_t i = 0; i < S.rows(); ++i)
            for (std::size_t j = 0; j < S.cols(); ++j) skew = std::max(skew, std::abs(S(i, j) + S(j, i)));
        for (std::size_t i = 0; i < A.rows(); ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < A.cols(); ++j) s += A(i, j);
            null = std::max(null, std::abs(s));
        }
        const bool spd = oracle::cholesky_ok(M);
        const bool ok = std::max({dm, da, ds, dc}) <= 1e-12 && skew == 0.0 && null <= 1e-12 && spd;
        out.require(ok, fmt::format("{}x{}x{} L={} r={}: |dM|={:.1e} |dA|={:.1e} |dS|={:.1e} |dC|={:.1e} "
                                    "|S+S^T|={:.1e} |A1|={:.1e} M SPD={}",
                                    c.nx, c.ny, c.nz, c.thickness, c.r, dm, da, ds, dc, skew, null, spd));
    }
    return out;
}

double relative_difference(const llg::SaddleSolution& a, const llg::SaddleSolution& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.x.size(); ++i) {
        num += (a.x[i] - b.x[i]) * (a.x[i] - b.x[i]);
        den += b.x[i] * b.x[i];
    }
    for (std::size_t i = 0; i < a.lambda.size(); ++i) {
        num += (a.lambda[i] - b.lambda[i]) * (a.lambda[i] - b.lambda[i]);
        den += b.lambda[i] * b.lambda[i];
    }
    return std::sqrt(num / den);
}

Outcome saddle_oracle() {
    Outcome out;
    struct Case {
        const char* problem;
        int nx, ny, r, k;
    };
    constexpr double tol = 1e-10;
    for (const Case& c : {Case{"exact2", 2, 2, 1, 1}, Case{"exact1", 2, 2, 2, 2}, Case{"exact1", 8, 8, 1, 2},
                          Case{"exact2", 5, 6, 2, 2}}) {
        const llg::FiniteElementSpace space(llg::build_box_mesh(c.nx, c.ny, 1, 0.01), c.r);
        const auto problem = llg::make_problem(c.problem);
        const double tau = 0.01;
        std::vector<NodalField> start;
        for (int j = 0; j < c.k; ++j)
            start.push_back(llg::interpolate(space, [&](const Vec3& x) { return problem.value(x, j * tau); }));
        llg::StepHistory history(c.k, tau, start);
        const llg::LlgStepper stepper(space, llg::BdfScheme::make(c.k), problem.params.alpha, tau, tol);
        double worst = 0.0, tangency = 0.0;
        std::size_t dim = 0;
        for (int n = 0; n < 3; ++n) {
            const auto field = llg::forcing_nodal(space, problem, history.next_time());
            const auto sys = stepper.build_system(history, field);
            dim = sys.size();
            const auto iterative = llg::solve_saddle(sys, tol);
            worst = std::max(worst, relative_difference(iterative, llg::solve_saddle_dense(sys)));
            const auto res = stepper.step(history, field);
            tangency = std::max(tangency, res.tangency);
        }
        out.require(worst <= 1e-7 && tangency <= 10 * tol,
                    fmt::format("{} r={} k={} dimension {}: relative difference {:.2e}, constraint residual {:.2e}",
                                c.problem, c.r, c.k, dim, worst, tangency));
    }
    return out;
}

Outcome projection() {
    Outcome out;
    const auto rep = llg::run_projection_test(llg::default_projection_config());
    for (const auto& row : rep.rows) {
        bool ok = row.idempotence <= 1e-8 && row.self_adjointness <= 1e-9;
        if (row.eoc) ok = ok && std::abs(*row.eoc - (row.r + 1)) <= 0.5;
        out.require(ok, fmt::format("r={} h={}: L2 {:.4e} EOC {} idempotence {:.1e} self-adjointness {:.1e}", row.r,
                                    row.h, row.l2_error, row.eoc ? fmt::format("{:.3f}", *row.eoc) : "-",
                                    row.idempotence, row.self_adjointness));
    }
    return out;
}

// Filled by criterion 7 so that criterion 5's tangency bound covers the sweeps as well.
double sweep_tangency = 0.0;

Outcome tau_convergence() {
    Outcome out;
    const auto cfg = llg::default_tau_config();
    const auto table = llg::run_convergence_tau(cfg);
    for (int k : cfg.orders) {
        const auto s = table.series(k, cfg.degrees.front());
        std::string eocs, interp;
        for (const auto& row : s) {
            sweep_tangency = std::max(sweep_tangency, row.max_tangency);
            if (row.eoc) eocs += fmt::format(" {:.3f}", *row.eoc);
            if (row.eoc_interp) interp += fmt::format(" {:.3f}", *row.eoc_interp);
        }
        // k = 1, 2: the last two refinements; k = 3, 4: the finest pair.
        const std::size_t checked = k <= 2 ? 2 : 1;
        bool ok = s.size() > checked;
        for (std::size_t i = s.size() - std::min(checked, s.size()); ok && i < s.size(); ++i) {
            const double e = s[i].eoc.value_or(NAN);
            ok = k == 4 ? e >= 2.5 : std::abs(e - k) <= (k <= 2 ? 0.4 : 0.5);
        }
        const char* band = k <= 2 ? "k +- 0.4 on the last two refinements"
                                  : (k == 3 ? "k +- 0.5 on the finest pair" : ">= 2.5 on the finest pair");
        out.require(ok, fmt::format("k={}: EOC{} ({}); finest H1 error {:.4e}", k, eocs, band, s.back().h1_error));
        if (k >= 3) out.info(fmt::format("k={}: EOC against the nodal interpolant{}", k, interp));
    }
    return out;
}

Outcome h_convergence() {
    Outcome out;
    const auto cfg = llg::default_h_config();
    const auto table = llg::run_convergence_h(cfg);
    for (int r : cfg.degrees) {
        const auto s = table.series(cfg.orders.front(), r);
        std::string eocs;
        for (const auto& row : s) {
            sweep_tangency = std::max(sweep_tangency, row.max_tangency);
            if (row.eoc) eocs += fmt::format(" {:.3f}", *row.eoc);
        }
        // Same reading as the tau sweep: the last two refinements.
        bool ok = s.size() > 2;
        for (std::size_t i = s.size() - std::min<std::size_t>(2, s.size()); ok && i < s.size(); ++i)
            ok = std::abs(s[i].eoc.value_or(NAN) - r) <= 0.4;
        out.require(ok, fmt::format("r={}: EOC{} (r +- 0.4 on the last two refinements); finest H1 error {:.4e}", r,
                                    eocs, s.back().h1_error));
        out.info(fmt::format("r={}: H1 error on the coarsest mesh {:.4e}", r, s.front().h1_error));
    }
    return out;
}

llg::EnergyReport energy_report;

Outcome energy() {
    Outcome out;
    energy_report = llg::run_energy_decay(llg::default_energy_config());
    for (const auto& run : energy_report.runs) {
        sweep_tangency = std::max(sweep_tangency, run.max_tangency);
        const double worst = run.worst_relative_margin();
        const bool ok = worst >= -1e-6 && run.final_energy() < run.initial_energy();
        out.require(ok, fmt::format("k={} tau={}: worst margin/RHS {:.3e} >= -1e-6, energy {:.6f} -> {:.6f}", run.k,
                                    run.tau, worst, run.initial_energy(), run.final_energy()));
    }
    return out;
}

Outcome normality() {
    Outcome out;
    const auto& runs = energy_report.runs;
    for (std::size_t i = 0; i < runs.size(); ++i)
        for (std::size_t j = 0; j < runs.size(); ++j) {
            if (runs[j].k != runs[i].k || std::abs(runs[j].tau - 0.5 * runs[i].tau) > 1e-15 * runs[i].tau) continue;
            const double coarse = runs[i].max_unit_deviation(), fine = runs[j].max_unit_deviation();
            out.require(fine <= 1.2 * coarse,
                        fmt::format("k={}: max |1 - |m|^2| {:.4e} at tau={} vs {:.4e} at tau={} (factor {:.3f} <= 1.2)",
                                    runs[i].k, fine, runs[j].tau, coarse, runs[i].tau, fine / coarse));
        }
    if (out.details.empty()) out.require(false, "no pair of runs with halved tau");
    return out;
}

}  // namespace

int main() {
    report(1, "coefficient exactness", coefficients);
    report(2, "stability tables", stability_tables);
    report(3, "multiplier inequality", multiplier_inequality);
    report(4, "assembly oracle equivalence", assembly_oracle);
    report(6, "projection properties", projection);
    report(7, "tau convergence", tau_convergence);
    report(8, "h convergence", h_convergence);
    report(9, "energy inequality", energy);
    report(10, "normality", normality);
    // Criterion 5 last: its constraint-residual bound also covers every step of the sweeps above.
    report(5, "saddle solver oracle", [] {
        Outcome out = saddle_oracle();
        out.require(sweep_tangency <= 1e-9,
                    fmt::format("constraint residual over all sweep steps {:.2e} <= 10 tol", sweep_tangency));
        return out;
    });
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
