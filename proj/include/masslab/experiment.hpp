#pragma once
// Runs an ExperimentConfig and renders its CSV outputs in memory; the CLI writes them under
// <output_dir>/<name>-<hash>/.

#include <atomic>
#include <filesystem>
#include <map>
#include <mutex>
#include <thread>

#include "masslab/config.hpp"
#include "masslab/io.hpp"

namespace masslab {

struct ExperimentOutput {
    std::string dir;                            // relative to output_dir
    std::map<std::string, std::string> files;   // file name -> contents (sorted by name)
    std::vector<std::pair<std::string, std::string>> summary;
};

namespace detail {

inline std::string num(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

// Short form for file names.
inline std::string tag_num(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

inline Metadata base_meta(const ExperimentConfig& c) {
    return {{"config_hash", c.hash}, {"name", c.name}};
}

inline std::function<double(double)> data_function(const InitialData& d) {
    if (d.kind == "box") return [d](double r) { return r < d.radius ? d.height : 0.0; };
    return [d](double r) {
        const double q = 1 - (r / d.radius) * (r / d.radius);
        return r < d.radius ? d.height * q * q : 0.0;
    };
}

inline std::optional<ClosedFormSolution> initial_solution(const ExperimentConfig& c) {
    if (c.initial.kind != "closed_form") return std::nullopt;
    return make_solution(*c.initial.solution, c.spec, c.initial.mass, c.initial.extras);
}

struct SolveOutcome {
    RunRecord rec;
    std::optional<RateFit> fit;
};

inline SolveOutcome solve_one(const ExperimentConfig& c) {
    const auto grid = RadialGrid::uniform(c.spec.N, c.R, c.cells);
    const auto sol = initial_solution(c);
    const double t0 = c.initial.t0;
    const Field f = sol ? init_state(grid, *sol, t0) : init_state(grid, data_function(c.initial), t0);
    SolverConfig cfg = c.solver;
    if (cfg.outer_bc == OuterBC::DirichletFn) {
        const auto s = *sol;
        const double R = grid.R;
        cfg.boundary_value = [s, R](double t) { return evaluate(s, R, t); };
    }
    SolveOutcome out{run(c.spec, f, grid, cfg, c.reference ? &*sol : nullptr), std::nullopt};
    if (c.fit) out.fit = loss_rate(out.rec.ledger, *c.fit);
    return out;
}

inline void add_regime(std::vector<std::pair<std::string, std::string>>& s, const EquationSpec& spec) {
    const auto rep = classify(spec);
    s.emplace_back("regime", to_string(rep.regime));
    s.emplace_back("conserves_mass", rep.conserves_mass ? "true" : "false");
}

inline void add_ledger_summary(std::vector<std::pair<std::string, std::string>>& s, const MassLedger& L, int steps,
                               int rejected) {
    s.emplace_back("steps", std::to_string(steps));
    s.emplace_back("rejected_steps", std::to_string(rejected));
    s.emplace_back("mass_initial", num(L.masses.front()));
    s.emplace_back("mass_final", num(L.masses.back()));
    s.emplace_back("outflux_cum", num(L.boundary_outflux.back()));
    s.emplace_back("closure_error", num(L.closure_error()));
    if (!std::isnan(L.l1_to_reference.back())) s.emplace_back("l1_to_reference_final", num(L.l1_to_reference.back()));
}

inline std::string summary_csv(const ExperimentConfig& c,
                               const std::vector<std::pair<std::string, std::string>>& s) {
    CsvWriter w(base_meta(c), {"key", "value"});
    for (const auto& [k, v] : s) w.row(k, v);
    return w.str();
}

inline ExperimentConfig with_axis(ExperimentConfig c, const std::string& axis, double v) {
    if (axis == "R") {
        const double h = c.R / c.cells;
        c.R = v;
        c.cells = static_cast<int>(std::lround(v / h));
    } else if (axis == "cells") {
        c.cells = static_cast<int>(std::lround(v));
    } else if (axis == "height") {
        c.initial.height = v;
    } else if (axis == "m") {
        c.spec.m = v;
    } else if (axis == "p") {
        c.spec.p = v;
    }
    c.spec.validate();
    return c;
}

inline void run_solve(const ExperimentConfig& c, ExperimentOutput& out) {
    const auto r = solve_one(c);
    const auto meta = base_meta(c);
    out.files["ledger.csv"] = ledger_csv(r.rec.ledger, meta).str();
    if (c.profiles)
        for (std::size_t k = 0; k < r.rec.checkpoints.size(); ++k)
            out.files["profile_" + std::to_string(k) + ".csv"] = profile_csv(r.rec.grid, r.rec.checkpoints[k], meta).str();
    auto& s = out.summary;
    s.emplace_back("spec", c.spec.describe());
    s.emplace_back("grid", r.rec.grid.tag());
    s.emplace_back("outer_bc", to_string(c.solver.outer_bc));
    add_regime(s, c.spec);
    add_ledger_summary(s, r.rec.ledger, r.rec.steps, r.rec.rejected);
    if (r.fit) {
        s.emplace_back("fit_slope", num(r.fit->slope));
        s.emplace_back("fit_intercept", num(r.fit->intercept));
        s.emplace_back("fit_r2", num(r.fit->r2));
    }
}

// Sweep points run on a worker pool; results land in fixed slots, so output order never depends on scheduling.
inline void run_sweep(const ExperimentConfig& c, ExperimentOutput& out) {
    const auto& sw = *c.sweep;
    const std::vector<double> groups = sw.group.empty() ? std::vector<double>{NAN} : sw.group_values;
    struct Point {
        double g, x;
        ExperimentConfig cfg;
    };
    std::vector<Point> pts;
    for (double g : groups)
        for (double x : sw.values) {
            auto cfg = sw.group.empty() ? c : with_axis(c, sw.group, g);
            pts.push_back({g, x, with_axis(cfg, sw.axis, x)});
        }
    std::vector<std::optional<SolveOutcome>> results(pts.size());
    std::vector<std::string> errors(pts.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t i; (i = next++) < pts.size();) {
            try {
                results[i] = solve_one(pts[i].cfg);
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    };
    std::vector<std::thread> pool;
    const int n = std::min<int>(c.workers, static_cast<int>(pts.size()));
    for (int k = 0; k < n; ++k) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    for (std::size_t i = 0; i < pts.size(); ++i)
        if (!errors[i].empty()) throw NumericalError("sweep point " + sw.axis + "=" + num(pts[i].x) + ": " + errors[i]);

    const auto meta = base_meta(c);
    for (double g : groups) {
        auto m = meta;
        m.emplace_back("spec", (sw.group.empty() ? c : with_axis(c, sw.group, g)).spec.describe());
        std::string fname = "sweep_" + sw.axis + ".csv";
        if (!sw.group.empty()) {
            m.emplace_back(sw.group, num(g));
            fname = "sweep_" + sw.axis + "_" + sw.group + "=" + tag_num(g) + ".csv";
        }
        CsvWriter w(m, {sw.axis, "mass_initial", "mass_final", "outflux_cum", "loss_fraction", "closure_error",
                        "extinction_time", "steps"});
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < pts.size(); ++i)
            if (sw.group.empty() || pts[i].g == g) idx.push_back(i);
        std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return pts[a].x < pts[b].x; });
        for (auto i : idx) {
            const auto& L = results[i]->rec.ledger;
            const auto T = extinction_time(results[i]->rec, 1e-6 * L.sup_u.front());
            w.row(pts[i].x, L.masses.front(), L.masses.back(), L.boundary_outflux.back(),
                  L.boundary_outflux.back() / L.masses.front(), L.closure_error(), T ? *T : NAN,
                  results[i]->rec.steps);
        }
        out.files[fname] = w.str();
    }
    for (std::size_t i = 0; i < pts.size(); ++i) {
        std::string tag = sw.axis + "=" + tag_num(pts[i].x);
        if (!sw.group.empty()) tag = sw.group + "=" + tag_num(pts[i].g) + "_" + tag;
        auto m = meta;
        m.emplace_back("spec", pts[i].cfg.spec.describe());
        out.files["ledger_" + tag + ".csv"] = ledger_csv(results[i]->rec.ledger, m).str();
    }
    out.summary.emplace_back("spec", c.spec.describe());
    out.summary.emplace_back("sweep_axis", sw.axis);
    out.summary.emplace_back("sweep_points", std::to_string(pts.size()));
    if (!sw.group.empty()) out.summary.emplace_back("sweep_group", sw.group);
}

inline std::string frac_profile_csv(const FracGrid& g, const Field& f, Metadata meta) {
    meta.emplace_back("t", num(f.time));
    if (g.N == 1) {
        CsvWriter w(meta, {"x", "u"});
        for (int i = 0; i < g.n; ++i) w.row(g.center(i), f.values[i]);
        return w.str();
    }
    CsvWriter w(meta, {"x", "y", "u"});
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j) w.row(g.center(i), g.center(j), f.values[static_cast<std::size_t>(i) * g.n + j]);
    return w.str();
}

inline void run_frac(const ExperimentConfig& c, ExperimentOutput& out) {
    const auto sol = initial_solution(c);
    const auto& g = c.frac_grid;
    const Field f = sol ? frac_init(g, *sol, c.initial.t0) : frac_init(g, data_function(c.initial), c.initial.t0);
    const auto rec = frac_run(c.spec, f, g, c.frac, c.reference ? &*sol : nullptr);
    const auto meta = base_meta(c);
    out.files["ledger.csv"] = ledger_csv(rec.ledger, meta).str();
    if (c.profiles)
        for (std::size_t k = 0; k < rec.checkpoints.size(); ++k)
            out.files["profile_" + std::to_string(k) + ".csv"] = frac_profile_csv(g, rec.checkpoints[k], meta);
    auto& s = out.summary;
    s.emplace_back("spec", c.spec.describe());
    s.emplace_back("grid", g.tag());
    s.emplace_back("scheme", c.frac.scheme == FracScheme::Implicit ? "implicit" : "explicit");
    add_regime(s, c.spec);
    add_ledger_summary(s, rec.ledger, rec.steps, rec.rejected);
    if (c.fit) {
        const auto fit = loss_rate(rec.ledger, *c.fit);
        s.emplace_back("fit_slope", num(fit.slope));
        s.emplace_back("fit_r2", num(fit.r2));
    }
}

inline std::string ple1d_csv(const std::vector<PLE1DRow>& rows, const PLE1DOptions& opt, Metadata meta) {
    meta.emplace_back("flux_time", num(opt.flux_time));
    std::vector<std::string> cols = {"eps", "p", "bound_ratio_max"};
    for (double R : opt.flux_radii) cols.push_back("flux_R=" + num(R));
    for (double t : opt.sup_times) cols.push_back("sup_t=" + num(t));
    CsvWriter w(meta, cols);
    for (const auto& r : rows) {
        std::vector<double> v = {r.row.eps, r.row.param, r.bound_ratio_max};
        v.insert(v.end(), r.flux.begin(), r.flux.end());
        v.insert(v.end(), r.sup.begin(), r.sup.end());
        w.row(v);
    }
    return w.str();
}

inline void run_scan(const ExperimentConfig& c, ExperimentOutput& out) {
    auto meta = base_meta(c);
    const auto& sc = c.scan;
    if (!sc.eps.empty()) {
        auto m = meta;
        m.emplace_back("family", sc.family == ScanFamily::PME ? "pme" : "ple");
        m.emplace_back("N", std::to_string(sc.N));
        const auto rows = concentration_scan(sc.family, sc.N, sc.eps, sc.options);
        out.files["scan.csv"] = scan_csv(rows, m).str();
        out.summary.emplace_back("scan_rows", std::to_string(rows.size()));
    }
    if (!sc.ple1d_eps.empty()) {
        PLE1DOptions opt;
        opt.M = sc.options.M;
        const auto rows = ple1d_limit_scan(sc.ple1d_eps, opt);
        out.files["ple1d.csv"] = ple1d_csv(rows, opt, meta);
        out.summary.emplace_back("ple1d_rows", std::to_string(rows.size()));
    }
}

}  // namespace detail

inline ExperimentOutput run_experiment(const ExperimentConfig& c) {
    ExperimentOutput out;
    out.dir = c.name + "-" + c.hash;
    switch (c.command) {
        case Command::Solve:
            if (c.sweep) detail::run_sweep(c, out);
            else detail::run_solve(c, out);
            break;
        case Command::Frac: detail::run_frac(c, out); break;
        case Command::Scan: detail::run_scan(c, out); break;
    }
    out.files["summary.csv"] = detail::summary_csv(c, out.summary);
    return out;
}

inline std::filesystem::path write_outputs(const ExperimentOutput& out, const std::string& output_dir) {
    const auto dir = std::filesystem::path(output_dir) / out.dir;
    std::filesystem::create_directories(dir);
    for (const auto& [name, text] : out.files) save_text((dir / name).string(), text);
    return dir;
}

}  // namespace masslab
