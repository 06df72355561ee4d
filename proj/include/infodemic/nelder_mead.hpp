#pragma once

#include <functional>
#include <span>
#include <vector>

namespace infodemic::optim {

using Objective = std::function<double(std::span<const double>)>;

struct Box {
    std::vector<double> lower;
    std::vector<double> upper;

    [[nodiscard]] std::vector<double> project(std::vector<double> x) const;
};

struct NelderMeadOptions {
    /// Per-coordinate edge of the initial simplex; empty means 10% of |x0|
    /// (or 0.05 for coordinates at zero).
    std::vector<double> initial_step;
    /// A run stops when every vertex lies within x_tolerance * max(1, |best|)
    /// of the best vertex in every coordinate.
    double x_tolerance = 1e-11;
    int max_evaluations = 40000;
    /// After a run stops the simplex is rebuilt around the best point. The
    /// result is converged once a restart improves the objective by no more
    /// than this fraction.
    double restart_improvement = 1e-8;
    /// Improvements smaller than this absolute amount never count as progress.
    double improvement_floor = 0.0;
    int max_restarts = 10;
};

struct NelderMeadResult {
    std::vector<double> x;
    double value = 0.0;
    int evaluations = 0;
    int restarts = 0;
    bool converged = false;
    /// Objective value at the end of every run (first run, then each restart).
    std::vector<double> history;
};

/// Derivative-free simplex minimisation on a box. Trial points outside the
/// box are projected onto it. NaN objective values count as +inf.
NelderMeadResult nelder_mead(const Objective& f, std::vector<double> x0, const Box& box,
                             const NelderMeadOptions& options = {});

}  // namespace infodemic::optim
