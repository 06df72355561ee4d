#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace infodemic::epi {

/// Damped exponential growth I(t) = [r0 / (1+d)^t]^t.
struct ExpParams {
    double r0 = 1.0;
    double d = 0.0;

    [[nodiscard]] bool valid() const { return r0 > 0.0 && d >= 0.0; }
};

struct SirParams {
    double beta = 0.0;
    double gamma = 1.0;
    double population = 1.0;
    double initial_infected = 1.0;

    [[nodiscard]] bool valid() const {
        return beta >= 0.0 && gamma > 0.0 && population > 0.0 && initial_infected > 0.0 &&
               initial_infected <= population;
    }
};

struct SirTrajectory {
    std::vector<double> t;
    std::vector<double> s;
    std::vector<double> i;
    std::vector<double> r;
    double population = 0.0;
};

/// Raised when a model evaluation leaves the representable range.
class DivergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Evaluated as exp(t * (ln r0 - t * ln(1+d))). Throws DivergenceError on overflow.
double exp_model_eval(const ExpParams& params, double t);

/// Same formula without the overflow check; returns +inf on overflow. Used
/// inside objective functions where an infinite residual is a valid signal.
double exp_model_eval_unchecked(const ExpParams& params, double t) noexcept;

/// Turning point of the EXP curve, ln r0 / (2 ln(1+d)); +inf when d = 0.
double exp_model_peak_time(const ExpParams& params);

constexpr double kDefaultSirStep = 0.05;

/// Fixed-step classical RK4 of the SIR system starting at grid.front()
/// with S = N - I0, I = I0, R = 0. Grid points that are not multiples of
/// the step from the start are reached with a shortened final step.
SirTrajectory sir_integrate(const SirParams& params, const std::vector<double>& grid, double step = kDefaultSirStep);

/// I + R at every grid point.
std::vector<double> sir_cumulative_authors(const SirTrajectory& traj);

/// beta / gamma.
double r0_of_sir(const SirParams& params);

/// population / R0, the susceptible level below which infections decline.
double herd_threshold(const SirParams& params);

std::string trajectory_to_csv(const SirTrajectory& traj);

}  // namespace infodemic::epi
