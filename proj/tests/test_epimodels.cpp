#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "infodemic/epimodels.hpp"
#include "infodemic/rng.hpp"

using namespace infodemic;
using namespace infodemic::epi;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

std::vector<double> grid(double last, double spacing = 1.0) {
    std::vector<double> g;
    for (double t = 0; t <= last + 1e-12; t += spacing) g.push_back(t);
    return g;
}

}  // namespace

TEST_CASE("exp model values") {
    CHECK(exp_model_eval({2.0, 0.0}, 3.0) == doctest::Approx(8.0).epsilon(1e-14));
    CHECK(exp_model_eval({1.0, 0.0}, 17.3) == 1.0);
    // long double evaluation of [r0 / (1+d)^t]^t
    const long double r0 = 1.5L, d = 0.01L, t = 10.0L;
    const long double oracle = std::pow(r0 / std::pow(1.0L + d, t), t);
    CHECK(rel(exp_model_eval({1.5, 0.01}, 10.0), static_cast<double>(oracle)) < 1e-13);
    CHECK(exp_model_eval({1.5, 0.01}, 10.0) == doctest::Approx(21.32).epsilon(1e-3));
}

TEST_CASE("exp model overflow") {
    CHECK_THROWS_AS(exp_model_eval({50.0, 0.0}, 400.0), DivergenceError);
    CHECK(std::isinf(exp_model_eval_unchecked({50.0, 0.0}, 400.0)));
}

TEST_CASE("exp turning point matches the numerical argmax") {
    for (const ExpParams p : {ExpParams{1.5, 0.01}, ExpParams{2.6, 0.05}, ExpParams{1.2, 0.002}}) {
        const double analytic = exp_model_peak_time(p);
        const double h = 1e-3;
        double best_t = 0.0, best = -1.0;
        for (double t = 0.0; t <= 2.0 * analytic; t += h) {
            const double v = exp_model_eval(p, t);
            if (v > best) {
                best = v;
                best_t = t;
            }
        }
        CHECK(std::abs(best_t - analytic) <= h);
        // increasing before the turning point, decreasing after
        CHECK(exp_model_eval(p, analytic * 0.9) < exp_model_eval(p, analytic * 0.95));
        CHECK(exp_model_eval(p, analytic * 1.1) < exp_model_eval(p, analytic * 1.05));
    }
    CHECK(std::isinf(exp_model_peak_time({1.5, 0.0})));
}

TEST_CASE("SIR conservation and non-negativity") {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        SirParams p{rng.uniform(0.0, 3.0), rng.uniform(0.05, 2.0), rng.uniform(10.0, 1e6), 0.0};
        p.initial_infected = p.population * rng.uniform(1e-6, 0.5);
        const auto traj = sir_integrate(p, grid(60.0));
        double prev_r = -1.0;
        for (std::size_t k = 0; k < traj.t.size(); ++k) {
            const double total = traj.s[k] + traj.i[k] + traj.r[k];
            CHECK(std::abs(total - p.population) <= 1e-9 * p.population);
            CHECK(traj.s[k] >= -1e-12 * p.population);
            CHECK(traj.i[k] >= -1e-12 * p.population);
            CHECK(traj.r[k] >= prev_r);
            prev_r = traj.r[k];
        }
        const auto c = sir_cumulative_authors(traj);
        for (std::size_t k = 1; k < c.size(); ++k) CHECK(c[k] >= c[k - 1] - 1e-9 * p.population);
    }
}

TEST_CASE("beta = 0 gives exponential decay of I") {
    const SirParams p{0.0, 0.3, 1000.0, 5.0};
    const auto traj = sir_integrate(p, grid(20.0), 1e-3);
    for (std::size_t k = 0; k < traj.t.size(); ++k) {
        CHECK(traj.s[k] == doctest::Approx(995.0).epsilon(1e-12));
        CHECK(rel(traj.i[k], 5.0 * std::exp(-0.3 * traj.t[k])) < 1e-6);
    }
    for (double c : sir_cumulative_authors(traj)) CHECK(c == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("tiny initial infection stays at the fixed point") {
    // Near (N, 0, 0) the system is linear: I grows like I0 e^{(beta-gamma)t}
    // while S stays at N.
    const SirParams p{0.5, 0.25, 1000.0, 1e-12 * 1000.0};
    const auto traj = sir_integrate(p, grid(30.0));
    for (std::size_t k = 0; k < traj.t.size(); ++k) {
        CHECK(rel(traj.s[k], 1000.0) < 1e-8);
        CHECK(rel(traj.i[k], p.initial_infected * std::exp(0.25 * traj.t[k])) < 1e-6);
        CHECK(traj.i[k] < 1e-5);
    }
}

TEST_CASE("step halving agrees") {
    const SirParams p{0.5, 0.25, 1000.0, 1.0};
    const auto g = grid(30.0);
    const auto a = sir_integrate(p, g, 0.05);
    const auto b = sir_integrate(p, g, 0.025);
    for (std::size_t k = 0; k < g.size(); ++k) {
        CHECK(rel(a.s[k], b.s[k]) < 1e-6);
        CHECK(rel(a.i[k], b.i[k]) < 1e-6);
        CHECK(std::abs(a.r[k] - b.r[k]) <= 1e-6 * std::max(b.r[k], 1.0));
    }
    const auto c = sir_cumulative_authors(a);
    CHECK(c.front() == doctest::Approx(1.0));
    CHECK(c.back() < p.population);
    for (std::size_t k = 1; k < c.size(); ++k) CHECK(c[k] >= c[k - 1]);
}

TEST_CASE("grid points off the step lattice") {
    const SirParams p{0.5, 0.25, 1000.0, 1.0};
    const auto coarse = sir_integrate(p, {0.0, 0.37, 1.0}, 0.05);
    const auto fine = sir_integrate(p, {0.0, 0.37, 1.0}, 0.001);
    CHECK(rel(coarse.i[1], fine.i[1]) < 1e-8);
    CHECK(rel(coarse.i[2], fine.i[2]) < 1e-8);
}

TEST_CASE("integration argument errors") {
    const SirParams p{0.5, 0.25, 1000.0, 1.0};
    CHECK_THROWS_AS(sir_integrate(p, grid(5.0), 0.0), std::invalid_argument);
    CHECK_THROWS_AS(sir_integrate(p, {0.0, 2.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(sir_integrate({0.5, 0.0, 1000.0, 1.0}, grid(5.0)), std::invalid_argument);
}

TEST_CASE("R0 and herd threshold") {
    CHECK(r0_of_sir({0.5, 0.25, 1000.0, 1.0}) == 2.0);
    CHECK(r0_of_sir({0.0, 0.4, 1000.0, 1.0}) == 0.0);
    CHECK_THROWS_AS(r0_of_sir({0.5, 0.0, 1000.0, 1.0}), std::invalid_argument);
    CHECK(herd_threshold({0.5, 0.25, 1000.0, 1.0}) == 500.0);
    CHECK(herd_threshold({0.3, 0.3, 800.0, 1.0}) == 800.0);
    CHECK_THROWS(herd_threshold({0.0, 0.25, 1000.0, 1.0}));
}

TEST_CASE("trajectory csv header") {
    const auto traj = sir_integrate({0.5, 0.25, 100.0, 1.0}, {0.0, 1.0});
    const auto text = trajectory_to_csv(traj);
    CHECK(text.rfind("t,s,i,r\n", 0) == 0);
}
