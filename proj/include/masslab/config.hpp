#pragma once
// Experiment configs (YAML). Every mapping is checked against a fixed key set before anything runs;
// errors carry the line and column of the offending node.

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "masslab/closed_forms.hpp"
#include "masslab/diagnostics.hpp"
#include "masslab/fractional.hpp"
#include "masslab/grid_solver.hpp"
#include "masslab/io.hpp"
#include "masslab/limits.hpp"

namespace masslab {

enum class Command { Solve, Frac, Scan };

struct InitialData {
    std::string kind = "bump";  // closed_form | bump | box
    std::optional<SolutionKind> solution;
    double mass = 1;
    double t0 = 0;
    Extras extras;
    double height = 1;
    double radius = 1;
};

struct SweepSpec {
    std::string axis;  // R, cells, height, m, p
    std::vector<double> values;
    std::string group;  // optional second axis, one CSV per value
    std::vector<double> group_values;
};

struct ScanConfig {
    ScanFamily family = ScanFamily::PME;
    int N = 3;
    std::vector<double> eps;
    ScanOptions options;
    std::vector<double> ple1d_eps;
};

struct ExperimentConfig {
    Command command = Command::Solve;
    std::string name = "run";
    std::string output_dir = "results";
    EquationSpec spec;
    InitialData initial;
    // radial grid
    double R = 1;
    int cells = 100;
    SolverConfig solver;
    // fractional box
    FracGrid frac_grid;
    FracConfig frac;
    bool reference = false;
    bool profiles = true;
    std::optional<Window> fit;
    std::optional<SweepSpec> sweep;
    int workers = 1;
    ScanConfig scan;
    std::string hash;  // of the canonical YAML dump
};

namespace detail {

inline std::string where(const YAML::Node& n) {
    const auto m = n.Mark();
    if (m.line < 0) return "";
    return " (line " + std::to_string(m.line + 1) + ", column " + std::to_string(m.column + 1) + ")";
}

[[noreturn]] inline void config_error(const YAML::Node& n, const std::string& what) {
    throw ValidationError("config: " + what + where(n));
}

inline void check_keys(const YAML::Node& n, const std::string& ctx, const std::set<std::string>& allowed) {
    if (!n.IsMap()) config_error(n, ctx + " must be a mapping");
    for (const auto& kv : n) {
        const auto key = kv.first.as<std::string>();
        if (!allowed.count(key)) config_error(kv.first, "unknown key '" + key + "' in " + ctx);
    }
}

template <class T>
T get(const YAML::Node& n, const std::string& ctx) {
    try {
        return n.as<T>();
    } catch (const YAML::Exception&) {
        config_error(n, ctx + " has the wrong type");
    }
}

template <class T>
void read_opt(const YAML::Node& parent, const char* key, T& out, const std::string& ctx) {
    if (const auto n = parent[key]) out = get<T>(n, ctx + "." + key);
}

inline std::vector<double> read_list(const YAML::Node& n, const std::string& ctx) {
    if (!n.IsSequence()) config_error(n, ctx + " must be a list");
    std::vector<double> v;
    for (const auto& x : n) v.push_back(get<double>(x, ctx));
    return v;
}

inline EquationSpec read_equation(const YAML::Node& n) {
    check_keys(n, "equation", {"family", "N", "m", "p", "s", "exps"});
    if (!n["family"]) config_error(n, "equation.family is required");
    EquationSpec e;
    try {
        e.family = family_from_string(get<std::string>(n["family"], "equation.family"));
    } catch (const ValidationError& ex) {
        config_error(n["family"], ex.what());
    }
    e.N = e.family == Family::LOGDIFF ? 2 : 1;
    read_opt(n, "N", e.N, "equation");
    if (n["m"]) e.m = get<double>(n["m"], "equation.m");
    if (n["p"]) e.p = get<double>(n["p"], "equation.p");
    if (n["s"]) e.s = get<double>(n["s"], "equation.s");
    if (n["exps"]) e.exps = read_list(n["exps"], "equation.exps");
    try {
        e.validate();
    } catch (const ValidationError& ex) {
        config_error(n, ex.what());
    }
    return e;
}

inline InitialData read_initial(const YAML::Node& n) {
    check_keys(n, "initial", {"kind", "solution", "mass", "t0", "C", "T", "a", "height", "radius"});
    InitialData d;
    read_opt(n, "kind", d.kind, "initial");
    if (d.kind != "closed_form" && d.kind != "bump" && d.kind != "box")
        config_error(n["kind"], "initial.kind must be closed_form, bump or box");
    if (n["solution"]) {
        try {
            d.solution = solution_kind_from_string(get<std::string>(n["solution"], "initial.solution"));
        } catch (const ValidationError& ex) {
            config_error(n["solution"], ex.what());
        }
    }
    if (d.kind == "closed_form" && !d.solution) config_error(n, "initial.solution is required for closed_form");
    read_opt(n, "mass", d.mass, "initial");
    read_opt(n, "t0", d.t0, "initial");
    if (n["C"]) d.extras.C = get<double>(n["C"], "initial.C");
    if (n["T"]) d.extras.T = get<double>(n["T"], "initial.T");
    if (n["a"]) d.extras.a = get<double>(n["a"], "initial.a");
    read_opt(n, "height", d.height, "initial");
    read_opt(n, "radius", d.radius, "initial");
    if (!(d.radius > 0)) config_error(n, "initial.radius must be > 0");
    return d;
}

inline OuterBC outer_bc_from_string(const YAML::Node& n) {
    const auto s = get<std::string>(n, "solver.outer_bc");
    if (s == "dirichlet0") return OuterBC::Dirichlet0;
    if (s == "zero_flux") return OuterBC::ZeroFlux;
    if (s == "dirichlet_fn") return OuterBC::DirichletFn;
    config_error(n, "solver.outer_bc must be dirichlet0, zero_flux or dirichlet_fn");
}

}  // namespace detail

inline ExperimentConfig parse_config(const YAML::Node& root) {
    using namespace detail;
    check_keys(root, "config",
               {"command", "name", "output_dir", "equation", "initial", "grid", "solver", "checkpoints", "reference",
                "profiles", "fit", "sweep", "workers", "scan"});
    ExperimentConfig c;
    c.hash = content_hash(YAML::Dump(root));
    std::string cmd = "solve";
    read_opt(root, "command", cmd, "config");
    if (cmd == "solve") c.command = Command::Solve;
    else if (cmd == "frac") c.command = Command::Frac;
    else if (cmd == "scan") c.command = Command::Scan;
    else config_error(root["command"], "command must be solve, frac or scan");
    read_opt(root, "name", c.name, "config");
    read_opt(root, "output_dir", c.output_dir, "config");
    read_opt(root, "workers", c.workers, "config");
    if (c.workers < 1) config_error(root["workers"], "workers must be >= 1");

    if (c.command == Command::Scan) {
        for (const char* k : {"equation", "initial", "grid", "solver", "checkpoints", "reference", "fit", "sweep"})
            if (root[k]) config_error(root[k], std::string("'") + k + "' is not used by scan configs");
        const auto s = root["scan"];
        if (!s) config_error(root, "scan section is required");
        check_keys(s, "scan", {"family", "N", "eps", "halvings", "M", "R", "x0", "ple1d_eps"});
        if (s["family"]) {
            try {
                c.scan.family = scan_family_from_string(get<std::string>(s["family"], "scan.family"));
            } catch (const ValidationError& ex) {
                config_error(s["family"], ex.what());
            }
        }
        read_opt(s, "N", c.scan.N, "scan");
        if (s["eps"] && s["halvings"]) config_error(s, "give either scan.eps or scan.halvings");
        if (s["eps"]) c.scan.eps = read_list(s["eps"], "scan.eps");
        if (const auto h = s["halvings"]) {
            check_keys(h, "scan.halvings", {"start", "count"});
            double start = 2e-3;
            int count = 7;
            read_opt(h, "start", start, "scan.halvings");
            read_opt(h, "count", count, "scan.halvings");
            for (int k = 0; k < count; ++k) c.scan.eps.push_back(start * std::pow(0.5, k));
        }
        read_opt(s, "M", c.scan.options.M, "scan");
        read_opt(s, "R", c.scan.options.R, "scan");
        read_opt(s, "x0", c.scan.options.x0, "scan");
        if (s["ple1d_eps"]) c.scan.ple1d_eps = read_list(s["ple1d_eps"], "scan.ple1d_eps");
        if (c.scan.eps.empty() && c.scan.ple1d_eps.empty()) config_error(s, "scan needs eps, halvings or ple1d_eps");
        return c;
    }
    if (root["scan"]) config_error(root["scan"], "'scan' is only used by scan configs");

    if (!root["equation"]) config_error(root, "equation section is required");
    c.spec = read_equation(root["equation"]);
    if (root["initial"]) c.initial = read_initial(root["initial"]);
    read_opt(root, "reference", c.reference, "config");
    read_opt(root, "profiles", c.profiles, "config");
    if (c.reference && c.initial.kind != "closed_form")
        config_error(root["reference"], "reference: true needs a closed_form initial");
    if (!root["checkpoints"]) config_error(root, "checkpoints are required");
    const auto cps = read_list(root["checkpoints"], "checkpoints");
    if (const auto f = root["fit"]) {
        check_keys(f, "fit", {"window"});
        const auto w = read_list(f["window"], "fit.window");
        if (w.size() != 2 || !(w[0] < w[1])) config_error(f["window"], "fit.window must be [lo, hi] with lo < hi");
        c.fit = Window{w[0], w[1]};
    }

    const auto g = root["grid"];
    if (!g) config_error(root, "grid section is required");
    const auto sv = root["solver"];
    if (c.command == Command::Solve) {
        check_keys(g, "grid", {"R", "cells", "h"});
        read_opt(g, "R", c.R, "grid");
        if (g["cells"] && g["h"]) config_error(g, "give either grid.cells or grid.h");
        read_opt(g, "cells", c.cells, "grid");
        if (g["h"]) c.cells = static_cast<int>(std::lround(c.R / get<double>(g["h"], "grid.h")));
        if (!(c.R > 0) || c.cells < 2) config_error(g, "grid needs R > 0 and at least 2 cells");
        if (sv) {
            check_keys(sv, "solver", {"dt", "dt_min", "dt_max", "dt_growth", "outer_bc", "reg_eps", "newton_tol",
                                      "newton_max_iter"});
            read_opt(sv, "dt", c.solver.dt, "solver");
            read_opt(sv, "dt_min", c.solver.dt_min, "solver");
            read_opt(sv, "dt_max", c.solver.dt_max, "solver");
            read_opt(sv, "dt_growth", c.solver.dt_growth, "solver");
            if (sv["outer_bc"]) c.solver.outer_bc = outer_bc_from_string(sv["outer_bc"]);
            read_opt(sv, "reg_eps", c.solver.reg_eps, "solver");
            read_opt(sv, "newton_tol", c.solver.newton_tol, "solver");
            read_opt(sv, "newton_max_iter", c.solver.newton_max_iter, "solver");
        }
        if (c.solver.outer_bc == OuterBC::DirichletFn && c.initial.kind != "closed_form")
            config_error(sv["outer_bc"], "dirichlet_fn takes its values from a closed_form initial");
        c.solver.checkpoint_times = cps;
        auto probe = c.solver;  // boundary values come from the closed form at run time
        if (probe.outer_bc == OuterBC::DirichletFn) probe.boundary_value = [](double) { return 0.0; };
        try {
            probe.validate();
        } catch (const ValidationError& ex) {
            config_error(sv ? sv : root, ex.what());
        }
    } else {
        check_keys(g, "grid", {"L", "n", "h"});
        c.frac_grid.N = c.spec.N;
        read_opt(g, "L", c.frac_grid.L, "grid");
        if (g["n"] && g["h"]) config_error(g, "give either grid.n or grid.h");
        read_opt(g, "n", c.frac_grid.n, "grid");
        if (g["h"]) c.frac_grid.n = static_cast<int>(std::lround(2 * c.frac_grid.L / get<double>(g["h"], "grid.h")));
        try {
            c.frac_grid.validate();
        } catch (const ValidationError& ex) {
            config_error(g, ex.what());
        }
        if (sv) {
            check_keys(sv, "solver", {"scheme", "dt", "dt_min", "dt_max", "dt_growth", "cfl", "reg_eps", "newton_tol",
                                      "newton_max_iter", "cg_tol", "cg_max_iter"});
            if (sv["scheme"]) {
                const auto s = get<std::string>(sv["scheme"], "solver.scheme");
                if (s == "implicit") c.frac.scheme = FracScheme::Implicit;
                else if (s == "explicit") c.frac.scheme = FracScheme::Explicit;
                else config_error(sv["scheme"], "solver.scheme must be implicit or explicit");
            }
            read_opt(sv, "dt", c.frac.dt, "solver");
            read_opt(sv, "dt_min", c.frac.dt_min, "solver");
            read_opt(sv, "dt_max", c.frac.dt_max, "solver");
            read_opt(sv, "dt_growth", c.frac.dt_growth, "solver");
            read_opt(sv, "cfl", c.frac.cfl, "solver");
            read_opt(sv, "reg_eps", c.frac.reg_eps, "solver");
            read_opt(sv, "newton_tol", c.frac.newton_tol, "solver");
            read_opt(sv, "newton_max_iter", c.frac.newton_max_iter, "solver");
            read_opt(sv, "cg_tol", c.frac.cg_tol, "solver");
            read_opt(sv, "cg_max_iter", c.frac.cg_max_iter, "solver");
        }
        c.frac.checkpoint_times = cps;
        try {
            c.frac.validate();
        } catch (const ValidationError& ex) {
            config_error(sv ? sv : root, ex.what());
        }
    }

    if (const auto s = root["sweep"]) {
        if (c.command != Command::Solve) config_error(s, "sweeps are supported for solve configs");
        check_keys(s, "sweep", {"axis", "values", "group"});
        SweepSpec sw;
        const std::set<std::string> axes = {"R", "cells", "height", "m", "p"};
        if (!s["axis"]) config_error(s, "sweep.axis is required");
        sw.axis = get<std::string>(s["axis"], "sweep.axis");
        if (!axes.count(sw.axis)) config_error(s["axis"], "sweep.axis must be one of R, cells, height, m, p");
        if (!s["values"]) config_error(s, "sweep.values is required");
        sw.values = read_list(s["values"], "sweep.values");
        if (const auto gr = s["group"]) {
            check_keys(gr, "sweep.group", {"axis", "values"});
            if (!gr["axis"] || !gr["values"]) config_error(gr, "sweep.group needs axis and values");
            sw.group = get<std::string>(gr["axis"], "sweep.group.axis");
            if (!axes.count(sw.group) || sw.group == sw.axis)
                config_error(gr["axis"], "sweep.group.axis must be another of R, cells, height, m, p");
            sw.group_values = read_list(gr["values"], "sweep.group.values");
        }
        c.sweep = std::move(sw);
    }
    return c;
}

inline ExperimentConfig parse_config_text(const std::string& text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& ex) {
        throw ValidationError("config: " + std::string(ex.what()));
    }
    return parse_config(root);
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ValidationError("cannot read config " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config_text(ss.str());
}

}  // namespace masslab
