#pragma once
// Radial grid and sampled fields.

#include <cmath>
#include <string>
#include <vector>

#include "masslab/errors.hpp"
#include "masslab/special.hpp"

namespace masslab {

// Cell-centred radial grid on [0, R] with the N-dimensional measure omega_N r^{N-1} dr.
struct RadialGrid {
    int N = 1;
    double R = 1;
    int cells = 0;
    std::vector<double> r_faces;

    static RadialGrid uniform(int N, double R, int cells) {
        if (N < 1) throw ValidationError("grid: N must be >= 1");
        if (!(R > 0)) throw ValidationError("grid: R must be > 0");
        if (cells < 2) throw ValidationError("grid: need at least 2 cells");
        RadialGrid g{N, R, cells, std::vector<double>(static_cast<std::size_t>(cells) + 1)};
        for (int i = 0; i <= cells; ++i) g.r_faces[i] = R * i / cells;
        g.r_faces.back() = R;
        return g;
    }

    void validate() const {
        if (static_cast<int>(r_faces.size()) != cells + 1) throw ValidationError("grid: face count mismatch");
        if (r_faces.front() != 0 || r_faces.back() != R) throw ValidationError("grid: faces must span [0,R]");
        for (int i = 0; i < cells; ++i)
            if (!(r_faces[i + 1] > r_faces[i])) throw ValidationError("grid: faces must increase strictly");
    }

    double center(int i) const { return 0.5 * (r_faces[i] + r_faces[i + 1]); }
    double width(int i) const { return r_faces[i + 1] - r_faces[i]; }
    double spacing() const { return R / cells; }  // nominal h for uniform grids

    // omega_N r^{N-1} at a face.
    double face_area(int j) const {
        return surface_area(N) * std::pow(r_faces[j], N - 1);
    }
    // Integral of omega_N r^{N-1} over cell i.
    double volume(int i) const {
        return surface_area(N) / N * (std::pow(r_faces[i + 1], N) - std::pow(r_faces[i], N));
    }

    std::string tag() const {
        return "radial(N=" + std::to_string(N) + ",R=" + std::to_string(R) + ",cells=" + std::to_string(cells) + ")";
    }
};

struct Field {
    std::vector<double> values;
    double time = 0;
};

inline double field_mass(const RadialGrid& g, const Field& f) {
    double m = 0;
    for (int i = 0; i < g.cells; ++i) m += g.volume(i) * f.values[i];
    return m;
}

inline double field_sup(const Field& f) {
    double s = 0;
    for (double v : f.values) s = std::max(s, v);
    return s;
}

}  // namespace masslab
