#pragma once
// CSV output with a metadata comment block, CSV reading for plots, and a small SVG line plot.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "masslab/errors.hpp"
#include "masslab/grid_solver.hpp"
#include "masslab/limits.hpp"

namespace masslab {

inline constexpr const char* kVersion = "1.0.0";

// FNV-1a, used to key outputs by config contents.
inline std::string content_hash(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

using Metadata = std::vector<std::pair<std::string, std::string>>;

class CsvWriter {
public:
    CsvWriter(const Metadata& meta, const std::vector<std::string>& columns) {
        os_.precision(17);
        os_ << "# masslab " << kVersion << '\n';
        for (const auto& [k, v] : meta) os_ << "# " << k << '=' << v << '\n';
        for (std::size_t i = 0; i < columns.size(); ++i) os_ << (i ? "," : "") << columns[i];
        os_ << '\n';
        ncols_ = columns.size();
    }
    template <class... T>
    void row(const T&... v) {
        static_assert(sizeof...(T) > 0);
        std::size_t i = 0;
        ((os_ << (i++ ? "," : "") << v), ...);
        os_ << '\n';
    }
    void row(const std::vector<double>& v) {
        for (std::size_t i = 0; i < v.size(); ++i) os_ << (i ? "," : "") << v[i];
        os_ << '\n';
    }
    std::string str() const { return os_.str(); }
    void save(const std::string& path) const {
        std::ofstream f(path, std::ios::binary);
        if (!f) throw ValidationError("cannot write " + path);
        f << os_.str();
    }

private:
    std::ostringstream os_;
    std::size_t ncols_ = 0;
};

inline CsvWriter ledger_csv(const MassLedger& L, const Metadata& meta) {
    CsvWriter w(meta, {"t", "mass", "outflux_cum", "sup_u", "l1_to_reference", "clipped_cum"});
    for (std::size_t i = 0; i < L.size(); ++i)
        w.row(L.times[i], L.masses[i], L.boundary_outflux[i], L.sup_u[i], L.l1_to_reference[i], L.clipped[i]);
    return w;
}

inline CsvWriter profile_csv(const RadialGrid& g, const Field& f, const Metadata& meta) {
    auto m = meta;
    m.emplace_back("t", std::to_string(f.time));
    CsvWriter w(m, {"r", "u"});
    for (int i = 0; i < g.cells; ++i) w.row(g.center(i), f.values[i]);
    return w;
}

inline CsvWriter scan_csv(const std::vector<ScanRow>& rows, const Metadata& meta) {
    CsvWriter w(meta, {"eps", "param", "log_C", "C", "log_K", "K", "log_d", "d", "outer_mass_frac", "log_value_x0",
                       "mass_check", "c8", "c9", "flags"});
    for (const auto& r : rows)
        w.row(r.eps, r.param, r.log_C, r.C, r.log_K, r.K, r.log_d, r.d, r.outer_mass_frac, r.log_value_x0,
              r.mass_check, r.c8, r.c9, r.flag_string());
    return w;
}

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    std::vector<double> column(const std::string& name) const {
        for (std::size_t j = 0; j < columns.size(); ++j)
            if (columns[j] == name) {
                std::vector<double> v;
                for (const auto& r : rows) v.push_back(j < r.size() ? r[j] : std::nan(""));
                return v;
            }
        throw ValidationError("no column named '" + name + "'");
    }
};

// Reads numeric CSV; '#' lines are skipped and non-numeric cells become NaN.
inline Table read_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ValidationError("cannot read " + path);
    Table t;
    std::string line;
    bool header = false;
    while (std::getline(f, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string c;
        while (std::getline(ss, c, ',')) cells.push_back(c);
        if (!header) {
            t.columns = cells;
            header = true;
            continue;
        }
        std::vector<double> r;
        for (const auto& x : cells) {
            try {
                std::size_t pos = 0;
                const double v = std::stod(x, &pos);
                r.push_back(pos == x.size() ? v : std::nan(""));
            } catch (const std::exception&) {
                r.push_back(std::nan(""));
            }
        }
        t.rows.push_back(std::move(r));
    }
    if (!header) throw ValidationError(path + " has no header row");
    return t;
}

struct Series {
    std::string label;
    std::vector<double> x, y;
};

// Self-contained SVG line plot.
inline std::string svg_plot(const std::vector<Series>& series, const std::string& title, const std::string& xlabel,
                            const std::string& ylabel, bool logx = false, bool logy = false) {
    const double W = 640, H = 420, ml = 70, mr = 20, mt = 40, mb = 50;
    auto tx = [&](double v) { return logx ? std::log10(v) : v; };
    auto ty = [&](double v) { return logy ? std::log10(v) : v; };
    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            const double a = tx(s.x[i]), b = ty(s.y[i]);
            if (!std::isfinite(a) || !std::isfinite(b)) continue;
            x0 = std::min(x0, a);
            x1 = std::max(x1, a);
            y0 = std::min(y0, b);
            y1 = std::max(y1, b);
        }
    if (!(x1 > x0)) x1 = x0 + 1;
    if (!(y1 > y0)) y1 = y0 + 1;
    auto px = [&](double a) { return ml + (a - x0) / (x1 - x0) * (W - ml - mr); };
    auto py = [&](double b) { return H - mb - (b - y0) / (y1 - y0) * (H - mt - mb); };
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
    std::ostringstream os;
    os.precision(6);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << title << "</text>\n";
    os << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << W - ml - mr << "\" height=\"" << H - mt - mb
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double a = x0 + (x1 - x0) * k / 4, b = y0 + (y1 - y0) * k / 4;
        os << "<text x=\"" << px(a) << "\" y=\"" << H - mb + 16 << "\" text-anchor=\"middle\" font-size=\"11\">"
           << (logx ? "1e" : "") << a << "</text>\n";
        os << "<text x=\"" << ml - 6 << "\" y=\"" << py(b) + 4 << "\" text-anchor=\"end\" font-size=\"11\">"
           << (logy ? "1e" : "") << b << "</text>\n";
    }
    os << "<text x=\"" << W / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\" font-size=\"12\">" << xlabel
       << "</text>\n";
    os << "<text x=\"16\" y=\"" << H / 2 << "\" transform=\"rotate(-90 16 " << H / 2
       << ")\" text-anchor=\"middle\" font-size=\"12\">" << ylabel << "</text>\n";
    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        os << "<polyline fill=\"none\" stroke=\"" << colors[k % 6] << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            const double a = tx(s.x[i]), b = ty(s.y[i]);
            if (std::isfinite(a) && std::isfinite(b)) os << px(a) << ',' << py(b) << ' ';
        }
        os << "\"/>\n";
        os << "<text x=\"" << W - mr - 8 << "\" y=\"" << mt + 16 + 14 * k << "\" text-anchor=\"end\" font-size=\"11\" fill=\""
           << colors[k % 6] << "\">" << s.label << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

inline void save_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ValidationError("cannot write " + path);
    f << text;
}

}  // namespace masslab
