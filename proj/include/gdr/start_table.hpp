#pragma once

#include <string>
#include <vector>

#include "gdr/gaussian.hpp"
#include "gdr/image.hpp"
#include "gdr/schedule.hpp"

namespace gdr {

enum class StatKind { second_moment };

// Monotone map from blur std to the diffusion timestep at which the
// forward-diffused blurry image becomes statistically indistinguishable
// from the forward-diffused clean image. Immutable once built.
struct StartTable {
    struct Entry {
        double std = 0.0;
        int t_start = 0;
    };
    std::vector<Entry> entries;  // ascending by std
    double tol = 1e-3;
    StatKind stat = StatKind::second_moment;
    int T = 0;

    // header "# dsst tol=<val> stat=<kind> T=<T>", then "std<TAB>t_start" lines
    void save(const std::string& path) const;
    static StartTable load(const std::string& path);
};

struct LookupResult {
    int t_start = 0;
    bool clamped = false;  // std_hat was outside the grid
};

// Statistic: per-pixel second moment about the scalar corpus mean m, with
// the forward noise contributing analytically:
//   X_t = abar_t * m_x + (1 - abar_t),   Y_t(std) = abar_t * m_y(std) + (1 - abar_t).
// t(std) is the smallest t with log X_t - log Y_t <= tol.
StartTable build_start_table(const std::vector<Image>& corpus, const StdGrid& grid, double tol,
                             const DiffusionSchedule& sched);

// Same scan from precomputed moments; exposed so the closed-form cases are
// directly testable.
StartTable build_start_table_from_moments(double m_x, const std::vector<double>& m_y,
                                          const StdGrid& grid, double tol,
                                          const DiffusionSchedule& sched);

// Snaps std_hat to the nearest grid entry (ties toward larger std); values
// outside the grid clamp to the boundary and set the flag.
LookupResult lookup(const StartTable& table, double std_hat);

}  // namespace gdr
