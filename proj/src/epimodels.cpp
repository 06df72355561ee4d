#include "infodemic/epimodels.hpp"

#include <cmath>
#include <limits>

#include "infodemic/csv.hpp"

namespace infodemic::epi {

double exp_model_eval_unchecked(const ExpParams& params, double t) noexcept {
    const double exponent = t * (std::log(params.r0) - t * std::log1p(params.d));
    return std::exp(exponent);
}

double exp_model_eval(const ExpParams& params, double t) {
    if (!params.valid()) throw std::invalid_argument("EXP parameters require r0 > 0 and d >= 0");
    if (t < 0.0) throw std::invalid_argument("EXP model time must be non-negative");
    const double v = exp_model_eval_unchecked(params, t);
    if (!std::isfinite(v)) throw DivergenceError("curve diverged");
    return v;
}

double exp_model_peak_time(const ExpParams& params) {
    if (params.d == 0.0) return std::numeric_limits<double>::infinity();
    return std::log(params.r0) / (2.0 * std::log1p(params.d));
}

namespace {

struct State {
    double s, i, r;
};

inline State derivative(const State& x, double beta, double gamma, double n) {
    const double infection = beta * x.s * x.i / n;
    const double recovery = gamma * x.i;
    return {-infection, infection - recovery, recovery};
}

inline State axpy(const State& x, double h, const State& k) { return {x.s + h * k.s, x.i + h * k.i, x.r + h * k.r}; }

inline State rk4_step(const State& x, double h, double beta, double gamma, double n) {
    const State k1 = derivative(x, beta, gamma, n);
    const State k2 = derivative(axpy(x, 0.5 * h, k1), beta, gamma, n);
    const State k3 = derivative(axpy(x, 0.5 * h, k2), beta, gamma, n);
    const State k4 = derivative(axpy(x, h, k3), beta, gamma, n);
    const double w = h / 6.0;
    return {x.s + w * (k1.s + 2.0 * k2.s + 2.0 * k3.s + k4.s), x.i + w * (k1.i + 2.0 * k2.i + 2.0 * k3.i + k4.i),
            x.r + w * (k1.r + 2.0 * k2.r + 2.0 * k3.r + k4.r)};
}

}  // namespace

SirTrajectory sir_integrate(const SirParams& params, const std::vector<double>& grid, double step) {
    if (!(step > 0.0)) throw std::invalid_argument("integration step must be positive");
    if (!params.valid()) throw std::invalid_argument("invalid SIR parameters");
    for (std::size_t k = 1; k < grid.size(); ++k)
        if (!(grid[k] > grid[k - 1])) throw std::invalid_argument("integration grid must be strictly increasing");

    SirTrajectory traj;
    traj.population = params.population;
    traj.t = grid;
    traj.s.reserve(grid.size());
    traj.i.reserve(grid.size());
    traj.r.reserve(grid.size());
    if (grid.empty()) return traj;

    State x{params.population - params.initial_infected, params.initial_infected, 0.0};
    auto record = [&] {
        traj.s.push_back(x.s);
        traj.i.push_back(x.i);
        traj.r.push_back(x.r);
    };
    record();
    for (std::size_t k = 1; k < grid.size(); ++k) {
        const double span = grid[k] - grid[k - 1];
        // Equal sub-steps no longer than `step` that land exactly on the grid point.
        const auto n = static_cast<long>(std::ceil(span / step - 1e-9));
        const double h = span / static_cast<double>(n < 1 ? 1 : n);
        for (long j = 0; j < (n < 1 ? 1 : n); ++j) x = rk4_step(x, h, params.beta, params.gamma, params.population);
        record();
    }
    return traj;
}

std::vector<double> sir_cumulative_authors(const SirTrajectory& traj) {
    std::vector<double> out(traj.i.size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = traj.i[k] + traj.r[k];
    return out;
}

double r0_of_sir(const SirParams& params) {
    if (!(params.gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
    return params.beta / params.gamma;
}

double herd_threshold(const SirParams& params) {
    const double r0 = r0_of_sir(params);
    if (params.beta == 0.0) throw std::domain_error("subcritical, no threshold");
    return params.population / r0;
}

std::string trajectory_to_csv(const SirTrajectory& traj) {
    std::string out = "t,s,i,r\n";
    for (std::size_t k = 0; k < traj.t.size(); ++k) {
        out += csv::format_double(traj.t[k]) + "," + csv::format_double(traj.s[k]) + "," +
               csv::format_double(traj.i[k]) + "," + csv::format_double(traj.r[k]) + "\n";
    }
    return out;
}

}  // namespace infodemic::epi
