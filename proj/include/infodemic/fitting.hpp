#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "infodemic/epimodels.hpp"
#include "infodemic/types.hpp"

namespace infodemic::fitting {

enum class Model { exp, sir };

std::string_view to_string(Model m);
Model model_from_string(std::string_view name);

/// Fitted R0 above this value is flagged as unrealistic.
constexpr double kUnrealisticR0 = 20.0;

struct FitOptions {
    /// EXP model time is t = day - time_origin. SIR time always starts at the
    /// first curve day, so this setting does not affect SIR fits.
    Day time_origin = 0;
    /// SIR integration step in days.
    double sir_step = epi::kDefaultSirStep;
    /// Explicit starting points; empty selects the built-in multi-start grid.
    std::vector<epi::ExpParams> exp_starts;
    std::vector<epi::SirParams> sir_starts;
    /// Simplex size tolerance used for every start.
    double x_tolerance = 1e-11;
};

struct FitResult {
    Model model = Model::exp;
    std::variant<epi::ExpParams, epi::SirParams> params;
    double sse = 0.0;
    std::vector<Day> day;
    std::vector<double> fitted;
    /// observed - fitted, aligned with `day`.
    std::vector<double> residuals;
    bool converged = false;
    int evaluations = 0;
    std::vector<std::string> warnings;

    [[nodiscard]] double r0() const;
    [[nodiscard]] const epi::ExpParams& exp_params() const { return std::get<epi::ExpParams>(params); }
    [[nodiscard]] const epi::SirParams& sir_params() const { return std::get<epi::SirParams>(params); }
};

/// Multi-start grid used when FitOptions leaves the starts empty.
std::vector<epi::ExpParams> default_exp_starts();
std::vector<epi::SirParams> default_sir_starts(const EpiCurve& curve);

/// Least-squares fit of the EXP model on raw counts.
FitResult fit_exp(const EpiCurve& curve, const FitOptions& options = {});

/// Least-squares fit of I+R of the SIR model. beta in [0, 20], gamma in
/// (0, 20], population in [max value, 1e4 * max value], I0 in (0, population].
FitResult fit_sir(const EpiCurve& curve, const FitOptions& options = {});

FitResult fit(const EpiCurve& curve, Model model, const FitOptions& options = {});

/// Model values on the curve days for the given parameters.
std::vector<double> predict(const EpiCurve& curve, const FitResult& fit, const FitOptions& options = {});

struct BootstrapInterval {
    std::string quantity;  // "R0_EXP" or "R0_SIR"
    double lower = 0.0;
    double upper = 0.0;
    int replicates = 0;
    double point = 0.0;
    std::uint64_t seed = 0;
    int failures = 0;
};

enum class IntervalMethod {
    /// Plain empirical quantiles at the nominal levels.
    percentile,
    /// Quantile levels shifted by the median bias z0 of the replicates
    /// relative to the point estimate; equals `percentile` when z0 = 0.
    bias_corrected,
};

struct BootstrapOptions {
    IntervalMethod method = IntervalMethod::bias_corrected;
    double lower_quantile = 0.05;
    double upper_quantile = 0.95;
    /// More failed replicate fits than this fraction aborts the bootstrap.
    double max_failure_fraction = 0.2;
    unsigned threads = 1;
    /// Running-max monotonization of replicate curves built from a
    /// non-decreasing input curve.
    bool enforce_monotone = true;
    FitOptions fit;
    /// Simplex tolerance for replicate refits, which start from the base fit.
    double replicate_x_tolerance = 1e-9;
};

struct BootstrapResult {
    FitResult base;
    BootstrapInterval interval;
    /// R0 of every replicate in replicate order; NaN marks a failed refit.
    std::vector<double> replicate_r0;
};

/// Residual-resampling bootstrap of R0. Residuals are centered before
/// resampling; replicate curves are clamped at zero and, when the input is
/// non-decreasing, monotonized by running max. Replicate b draws from
/// Rng(derive_seed(seed, b)), so the result does not depend on thread count.
BootstrapResult bootstrap_r0(const EpiCurve& curve, Model model, int replicates, std::uint64_t seed,
                             const BootstrapOptions& options = {});

/// z0 = Phi^-1(share of replicates below the point estimate, ties half).
double median_bias(const std::vector<double>& sorted, double point);

/// Empirical quantile with linear interpolation between order statistics
/// (type 7). `sorted` must be ascending and non-empty.
double quantile_sorted(const std::vector<double>& sorted, double q);

enum class Criticality { supercritical, subcritical, inconclusive };

std::string_view to_string(Criticality c);

/// supercritical when lower > 1, subcritical when upper < 1, otherwise
/// the interval straddles 1.
Criticality classify_interval(const BootstrapInterval& interval);

struct LabeledInterval {
    std::string platform;
    BootstrapInterval interval;
};

struct CriticalityRow {
    std::string platform;
    std::string quantity;
    BootstrapInterval interval;
    Criticality status = Criticality::inconclusive;
    /// Table-style rendering, e.g. "[1.42, 1.52]".
    std::string rendered;
};

std::vector<CriticalityRow> supercriticality_report(const std::vector<LabeledInterval>& intervals);

std::string report_to_csv(const std::vector<CriticalityRow>& rows);

/// JSON document with the FitResult fields and, when present, the bootstrap interval.
std::string fit_to_json(const FitResult& fit, const BootstrapInterval* interval = nullptr);

}  // namespace infodemic::fitting
