// masslab command-line driver.
//   exponents  regime, critical value and similarity exponents of a spec (or a sweep of specs)
//   solve      radial finite-volume run from a config
//   frac       fractional run from a config, or --kernel export
//   scan       concentration scans from a config or flags
//   verify     acceptance suite (fast | full)
//   plot       SVG line plot from CSV columns
// Exit codes: 0 pass, 1 validation error, 2 criterion failure, 3 numerical failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <iostream>

#include "masslab/masslab.hpp"

using namespace masslab;

namespace {

struct SpecArgs {
    std::string family;
    int N = 1;
    std::optional<double> m, p, s;
    std::vector<double> exps;
    std::string sweep;  // param=lo:hi:count
};

EquationSpec make_spec(const SpecArgs& a) {
    EquationSpec e;
    e.family = family_from_string(a.family);
    e.N = a.N;
    e.m = a.m;
    e.p = a.p;
    e.s = a.s;
    e.exps = a.exps;
    if (is_anisotropic(e.family) && !e.exps.empty()) e.N = static_cast<int>(e.exps.size());
    if (e.family == Family::LOGDIFF) e.N = 2;
    e.validate();
    return e;
}

std::string num(double v, int prec = 10) {
    std::ostringstream os;
    os.precision(prec);
    os << v;
    return os.str();
}

void print_exponent_row(const EquationSpec& e) {
    const auto rep = classify(e);
    std::string alpha = "-", beta = "-", sig;
    try {
        const auto ex = similarity_exponents(e);
        alpha = num(ex.alpha);
        beta = num(ex.beta);
        if (ex.sigmas)
            for (double x : *ex.sigmas) sig += (sig.empty() ? "" : ";") + num(x);
    } catch (const NoFiniteMassSelfSimilar& ex) {
        alpha = beta = "NoFiniteMassSelfSimilar";
        sig = ex.what();
    }
    std::cout << e.describe() << ',' << to_string(rep.regime) << ','
              << (std::isnan(rep.critical_value) ? "-" : num(rep.critical_value)) << ',' << alpha << ',' << beta
              << ',' << (rep.conserves_mass ? "conserves" : "no conservation") << ',' << sig
              << (rep.note.empty() ? "" : " " + rep.note) << '\n';
}

int cmd_exponents(const SpecArgs& a) {
    std::cout << "spec,regime,critical,alpha,beta,mass,notes\n";
    if (a.sweep.empty()) {
        print_exponent_row(make_spec(a));
        return kExitPass;
    }
    const auto eq = a.sweep.find('='), c1 = a.sweep.find(':'), c2 = a.sweep.rfind(':');
    if (eq == std::string::npos || c1 == std::string::npos || c1 == c2)
        throw ValidationError("--sweep expects param=lo:hi:count");
    const std::string param = a.sweep.substr(0, eq);
    const double lo = std::stod(a.sweep.substr(eq + 1, c1 - eq - 1));
    const double hi = std::stod(a.sweep.substr(c1 + 1, c2 - c1 - 1));
    const int n = std::stoi(a.sweep.substr(c2 + 1));
    if (n < 1) throw ValidationError("--sweep count must be >= 1");
    for (int k = 0; k < n; ++k) {
        const double v = n == 1 ? lo : lo + (hi - lo) * k / (n - 1);
        SpecArgs b = a;
        if (param == "m") b.m = v;
        else if (param == "p") b.p = v;
        else if (param == "s") b.s = v;
        else if (param == "N") b.N = static_cast<int>(std::lround(v));
        else throw ValidationError("--sweep param must be m, p, s or N");
        try {
            print_exponent_row(make_spec(b));
        } catch (const ValidationError& ex) {
            std::cout << param << '=' << num(v) << ",invalid,,,,," << ex.what() << '\n';
        }
    }
    return kExitPass;
}

int run_config(const std::string& path, std::optional<Command> expected, const std::string& out_override,
               int workers) {
    auto cfg = load_config(path);
    if (expected && cfg.command != *expected)
        throw ValidationError("config command does not match this subcommand");
    if (!out_override.empty()) cfg.output_dir = out_override;
    if (workers > 0) cfg.workers = workers;
    const auto out = run_experiment(cfg);
    const auto dir = write_outputs(out, cfg.output_dir);
    std::cout << "output: " << dir.string() << '\n';
    for (const auto& [k, v] : out.summary) std::cout << "  " << k << " = " << v << '\n';
    return kExitPass;
}

int cmd_kernel(double s, int N, double L, double h, const std::string& out) {
    const auto g = FracGrid::make(N, L, h);
    const auto f = kernel_field(s, g);
    Metadata meta = {{"s", num(s, 17)}, {"N", std::to_string(N)}};
    const std::string text = detail::frac_profile_csv(g, f, meta);
    if (out.empty()) std::cout << text;
    else save_text(out, text);
    return kExitPass;
}

int cmd_scan_flags(const std::string& family, int N, std::vector<double> eps, int halvings, double start,
                   const std::string& out) {
    if (eps.empty())
        for (int k = 0; k < halvings; ++k) eps.push_back(start * std::pow(0.5, k));
    const auto rows = concentration_scan(scan_family_from_string(family), N, eps);
    const auto text = scan_csv(rows, {{"family", family}, {"N", std::to_string(N)}}).str();
    if (out.empty()) std::cout << text;
    else save_text(out, text);
    return kExitPass;
}

int cmd_verify(const std::string& suite, double beta_fault, const std::vector<int>& only, const std::string& json_path,
               const std::string& csv_path) {
    if (suite != "fast" && suite != "full") throw ValidationError("suite must be fast or full");
    acceptance::Options opt;
    opt.beta_fault = beta_fault;
    std::vector<acceptance::Result> results;
    for (const auto& e : acceptance::registry()) {
        if (!only.empty() && std::find(only.begin(), only.end(), e.id) == only.end()) continue;
        if (only.empty() && suite == "fast" && !e.fast) continue;
        results.push_back(acceptance::run_guarded(e, opt));
        std::cout << acceptance::line(results.back()) << '\n';
        for (const auto& d : results.back().details) std::cout << "    " << d << '\n';
        std::cout.flush();
    }
    bool all = true;
    nlohmann::json j = nlohmann::json::array();
    CsvWriter w({{"suite", suite}}, {"id", "name", "measured", "expected", "tolerance", "pass", "seconds"});
    auto quote = [](std::string s) {
        std::string q = "\"";
        for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
        return q + "\"";
    };
    for (const auto& r : results) {
        all = all && r.pass;
        j.push_back({{"id", r.id}, {"name", r.name}, {"measured", r.measured}, {"expected", r.expected},
                     {"tolerance", r.tolerance}, {"pass", r.pass}, {"seconds", r.seconds}, {"details", r.details}});
        w.row(r.id, quote(r.name), quote(r.measured), quote(r.expected), quote(r.tolerance), r.pass ? 1 : 0, r.seconds);
    }
    if (!json_path.empty()) save_text(json_path, j.dump(2) + "\n");
    if (!csv_path.empty()) w.save(csv_path);
    std::cout << (all ? "all criteria passed" : "some criteria failed") << '\n';
    return all ? kExitPass : kExitCriterion;
}

int cmd_plot(const std::string& csv, const std::string& xcol, const std::vector<std::string>& ycols,
             const std::string& out, bool logx, bool logy, std::string title) {
    const auto t = read_csv(csv);
    std::vector<Series> series;
    const auto x = t.column(xcol);
    for (const auto& y : ycols) series.push_back({y, x, t.column(y)});
    if (title.empty()) title = csv;
    save_text(out, svg_plot(series, title, xcol, ycols.size() == 1 ? ycols[0] : "", logx, logy));
    return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"masslab: mass conservation experiments for nonlinear and fractional diffusion"};
    app.require_subcommand(1);

    SpecArgs sa;
    auto* ex = app.add_subcommand("exponents", "regime and similarity exponents");
    ex->add_option("--family", sa.family, "he, pme, fde, ple, fhe, fpme, fple, logdiff, tvf, dnle, aniso_pme, aniso_ple")
        ->required();
    ex->add_option("--N", sa.N, "space dimension");
    ex->add_option("--m", sa.m);
    ex->add_option("--p", sa.p);
    ex->add_option("--s", sa.s);
    ex->add_option("--exps", sa.exps, "anisotropic exponents (one per direction)");
    ex->add_option("--sweep", sa.sweep, "param=lo:hi:count");

    std::string config, out_dir;
    int workers = 0;
    auto* so = app.add_subcommand("solve", "radial run from a config");
    so->add_option("config", config)->required()->check(CLI::ExistingFile);
    so->add_option("--output-dir", out_dir);
    so->add_option("--workers", workers, "sweep worker threads");

    std::string fconfig, kout;
    bool kernel = false;
    double ks = 0.5, kL = 10, kh = 0.05;
    int kN = 1;
    auto* fr = app.add_subcommand("frac", "fractional run from a config, or kernel export");
    fr->add_option("config", fconfig)->check(CLI::ExistingFile);
    fr->add_option("--output-dir", out_dir);
    fr->add_flag("--kernel", kernel, "export the fundamental solution at t=1");
    fr->add_option("--s", ks);
    fr->add_option("--N", kN);
    fr->add_option("--L", kL, "box half-width");
    fr->add_option("--dx", kh, "cell size");
    fr->add_option("--out", kout, "CSV path (stdout if omitted)");

    std::string sconfig, sfamily = "pme", sout;
    int sN = 3, shalv = 7;
    double sstart = 2e-3;
    std::vector<double> seps;
    auto* sc = app.add_subcommand("scan", "concentration scans");
    sc->add_option("config", sconfig)->check(CLI::ExistingFile);
    sc->add_option("--output-dir", out_dir);
    sc->add_option("--family", sfamily, "pme or ple");
    sc->add_option("--N", sN);
    sc->add_option("--eps", seps);
    sc->add_option("--halvings", shalv, "number of eps values start*2^-k");
    sc->add_option("--start", sstart);
    sc->add_option("--out", sout);

    std::string suite = "fast", jpath, cpath;
    double fault = 0;
    std::vector<int> only;
    auto* ve = app.add_subcommand("verify", "acceptance suite");
    ve->add_option("suite", suite, "fast or full")->check(CLI::IsMember({"fast", "full"}));
    ve->add_option("--inject-beta-error", fault, "add this to every beta in the exponent check");
    ve->add_option("--only", only, "criterion ids");
    ve->add_option("--json", jpath, "write a JSON report");
    ve->add_option("--csv", cpath, "write a CSV report");

    std::string pcsv, px = "t", pout = "plot.svg", ptitle;
    std::vector<std::string> py;
    bool logx = false, logy = false;
    auto* pl = app.add_subcommand("plot", "SVG plot of CSV columns");
    pl->add_option("csv", pcsv)->required()->check(CLI::ExistingFile);
    pl->add_option("--x", px);
    pl->add_option("--y", py)->required();
    pl->add_option("--out", pout);
    pl->add_option("--title", ptitle);
    pl->add_flag("--logx", logx);
    pl->add_flag("--logy", logy);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitPass : kExitValidation;
    }

    try {
        if (*ex) return cmd_exponents(sa);
        if (*so) return run_config(config, Command::Solve, out_dir, workers);
        if (*fr) {
            if (kernel) return cmd_kernel(ks, kN, kL, kh, kout);
            if (fconfig.empty()) throw ValidationError("frac needs a config or --kernel");
            return run_config(fconfig, Command::Frac, out_dir, 0);
        }
        if (*sc) {
            if (!sconfig.empty()) return run_config(sconfig, Command::Scan, out_dir, 0);
            return cmd_scan_flags(sfamily, sN, seps, shalv, sstart, sout);
        }
        if (*ve) return cmd_verify(suite, fault, only, jpath, cpath);
        if (*pl) return cmd_plot(pcsv, px, py, pout, logx, logy, ptitle);
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumerical;
    }
    return kExitPass;
}
