#include "infodemic/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace infodemic::optim {

std::vector<double> Box::project(std::vector<double> x) const {
    for (std::size_t j = 0; j < x.size(); ++j) {
        if (j < lower.size()) x[j] = std::max(x[j], lower[j]);
        if (j < upper.size()) x[j] = std::min(x[j], upper[j]);
    }
    return x;
}

namespace {

constexpr double kReflect = 1.0;
constexpr double kExpand = 2.0;
constexpr double kContract = 0.5;
constexpr double kShrink = 0.5;

struct Vertex {
    std::vector<double> x;
    double f;
};

class Runner {
public:
    Runner(const Objective& f, const Box& box, const NelderMeadOptions& opt, int& evaluations)
        : f_(f), box_(box), opt_(opt), evaluations_(evaluations) {}

    double eval(const std::vector<double>& x) {
        ++evaluations_;
        const double v = f_(x);
        return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
    }

    // One simplex descent from `start`. Returns true when it stopped on the
    // size criterion rather than the evaluation budget.
    bool run(Vertex& best, const std::vector<double>& steps) {
        const std::size_t n = best.x.size();
        std::vector<Vertex> simplex;
        simplex.reserve(n + 1);
        simplex.push_back(best);
        for (std::size_t j = 0; j < n; ++j) {
            std::vector<double> x = best.x;
            x[j] += steps[j];
            if (j < box_.upper.size() && x[j] > box_.upper[j]) x[j] = best.x[j] - steps[j];
            x = box_.project(std::move(x));
            if (x[j] == best.x[j]) x[j] = best.x[j] + 0.5 * steps[j] * (x[j] >= 0 ? 1.0 : -1.0);
            x = box_.project(std::move(x));
            const double fx = eval(x);
            simplex.push_back({std::move(x), fx});
        }

        std::vector<double> centroid(n);
        for (;;) {
            std::stable_sort(simplex.begin(), simplex.end(),
                             [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
            if (small_enough(simplex)) {
                best = simplex.front();
                return true;
            }
            if (evaluations_ >= opt_.max_evaluations) {
                best = simplex.front();
                return false;
            }

            std::fill(centroid.begin(), centroid.end(), 0.0);
            for (std::size_t v = 0; v < n; ++v)
                for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[v].x[j];
            for (auto& c : centroid) c /= static_cast<double>(n);

            Vertex& worst = simplex.back();
            auto along = [&](double coef) {
                std::vector<double> x(n);
                for (std::size_t j = 0; j < n; ++j) x[j] = centroid[j] + coef * (worst.x[j] - centroid[j]);
                return box_.project(std::move(x));
            };

            Vertex reflected{along(-kReflect), 0.0};
            reflected.f = eval(reflected.x);
            if (reflected.f < simplex.front().f) {
                Vertex expanded{along(-kExpand), 0.0};
                expanded.f = eval(expanded.x);
                worst = expanded.f < reflected.f ? std::move(expanded) : std::move(reflected);
                continue;
            }
            if (reflected.f < simplex[n - 1].f) {
                worst = std::move(reflected);
                continue;
            }
            const bool outside = reflected.f < worst.f;
            Vertex contracted{along(outside ? -kContract : kContract), 0.0};
            contracted.f = eval(contracted.x);
            if (contracted.f < (outside ? reflected.f : worst.f)) {
                worst = std::move(contracted);
                continue;
            }
            for (std::size_t v = 1; v <= n; ++v) {
                for (std::size_t j = 0; j < n; ++j)
                    simplex[v].x[j] = simplex[0].x[j] + kShrink * (simplex[v].x[j] - simplex[0].x[j]);
                simplex[v].x = box_.project(std::move(simplex[v].x));
                simplex[v].f = eval(simplex[v].x);
            }
        }
    }

private:
    bool small_enough(const std::vector<Vertex>& simplex) const {
        const auto& best = simplex.front().x;
        for (std::size_t v = 1; v < simplex.size(); ++v)
            for (std::size_t j = 0; j < best.size(); ++j)
                if (std::abs(simplex[v].x[j] - best[j]) > opt_.x_tolerance * std::max(1.0, std::abs(best[j])))
                    return false;
        return true;
    }

    const Objective& f_;
    const Box& box_;
    const NelderMeadOptions& opt_;
    int& evaluations_;
};

}  // namespace

NelderMeadResult nelder_mead(const Objective& f, std::vector<double> x0, const Box& box,
                             const NelderMeadOptions& options) {
    if (x0.empty()) throw std::invalid_argument("nelder_mead needs at least one coordinate");
    std::vector<double> steps = options.initial_step;
    if (steps.empty()) {
        steps.resize(x0.size());
        for (std::size_t j = 0; j < x0.size(); ++j) steps[j] = x0[j] != 0.0 ? 0.1 * std::abs(x0[j]) : 0.05;
    }
    if (steps.size() != x0.size()) throw std::invalid_argument("initial_step size mismatch");

    NelderMeadResult result;
    Runner runner(f, box, options, result.evaluations);
    Vertex best{box.project(std::move(x0)), 0.0};
    best.f = runner.eval(best.x);

    bool finished = runner.run(best, steps);
    result.history.push_back(best.f);
    while (finished) {
        if (result.restarts >= options.max_restarts) break;
        const double before = best.f;
        ++result.restarts;
        finished = runner.run(best, steps);
        result.history.push_back(best.f);
        const double gain = before - best.f;
        if (finished && gain <= options.restart_improvement * std::abs(before) + options.improvement_floor) {
            result.converged = true;
            break;
        }
    }
    result.x = std::move(best.x);
    result.value = best.f;
    return result;
}

}  // namespace infodemic::optim
