#include "infodemic/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <boost/math/distributions/normal.hpp>
#include <json.hpp>

#include "infodemic/csv.hpp"
#include "infodemic/nelder_mead.hpp"
#include "infodemic/parallel.hpp"
#include "infodemic/rng.hpp"

namespace infodemic::fitting {

std::string_view to_string(Model m) { return m == Model::exp ? "exp" : "sir"; }

Model model_from_string(std::string_view name) {
    if (name == "exp" || name == "EXP") return Model::exp;
    if (name == "sir" || name == "SIR") return Model::sir;
    throw std::invalid_argument("unknown model: " + std::string(name));
}

double FitResult::r0() const {
    if (model == Model::exp) return exp_params().r0;
    return epi::r0_of_sir(sir_params());
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_growth(const EpiCurve& curve, std::size_t min_length) {
    curve.validate();
    if (curve.size() < min_length)
        throw std::invalid_argument("curve needs at least " + std::to_string(min_length) + " points");
    const auto [lo, hi] = std::minmax_element(curve.value.begin(), curve.value.end());
    if (*lo == *hi) throw DataError("no growth signal");
    for (double v : curve.value)
        if (!std::isfinite(v)) throw std::invalid_argument("curve values must be finite");
}

double sum_of_squares(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
}

// Absolute noise floor below which restart improvements are ignored.
double improvement_floor(const EpiCurve& curve) { return 1e-24 * std::max(sum_of_squares(curve.value), 1.0); }

struct ExpObjective {
    std::vector<double> t;
    std::vector<double> t2;
    const std::vector<double>* y;

    double sse(double r0, double d) const {
        if (!(r0 > 0.0) || d < 0.0) return kInf;
        const double a = std::log(r0);
        const double b = std::log1p(d);
        double s = 0.0;
        for (std::size_t k = 0; k < t.size(); ++k) {
            const double r = std::exp(t[k] * a - t2[k] * b) - (*y)[k];
            s += r * r;
        }
        return s;
    }
};

ExpObjective make_exp_objective(const EpiCurve& curve, Day origin) {
    ExpObjective obj;
    obj.y = &curve.value;
    obj.t.reserve(curve.size());
    for (Day d : curve.day) {
        const auto t = static_cast<double>(d - origin);
        if (t < 0.0) throw std::invalid_argument("EXP model time must be non-negative; adjust the time origin");
        obj.t.push_back(t);
        obj.t2.push_back(t * t);
    }
    return obj;
}

optim::Box exp_box() { return {{1e-9, 0.0}, {1e6, 10.0}}; }

std::vector<double> exp_steps(const epi::ExpParams& p) {
    return {std::max(0.1 * p.r0, 1e-3), p.d > 0.0 ? 0.1 * p.d : 0.01};
}

struct SirObjective {
    std::vector<double> grid;  // days relative to the first curve day
    const std::vector<double>* y;
    double step;

    double sse(const epi::SirParams& p) const {
        if (!p.valid()) return kInf;
        const auto traj = epi::sir_integrate(p, grid, step);
        double s = 0.0;
        for (std::size_t k = 0; k < grid.size(); ++k) {
            const double r = traj.i[k] + traj.r[k] - (*y)[k];
            s += r * r;
        }
        return s;
    }
};

SirObjective make_sir_objective(const EpiCurve& curve, double step) {
    SirObjective obj;
    obj.y = &curve.value;
    obj.step = step;
    for (Day d : curve.day) obj.grid.push_back(static_cast<double>(d - curve.day.front()));
    return obj;
}

// SIR search space: (ln beta, ln gamma, ln N, ln(I0 / N)).
struct SirSpace {
    double max_value;

    optim::Box box() const {
        return {{std::log(1e-10), std::log(1e-10), std::log(max_value), std::log(1e-15)},
                {std::log(20.0), std::log(20.0), std::log(1e4 * max_value), 0.0}};
    }

    static epi::SirParams decode(std::span<const double> x) {
        epi::SirParams p;
        p.beta = std::exp(x[0]);
        p.gamma = std::exp(x[1]);
        p.population = std::exp(x[2]);
        p.initial_infected = p.population * std::exp(x[3]);
        return p;
    }

    std::vector<double> encode(const epi::SirParams& p) const {
        return box().project({std::log(std::max(p.beta, 1e-10)), std::log(p.gamma), std::log(p.population),
                              std::log(p.initial_infected / p.population)});
    }
};

std::vector<double> exp_predict(const EpiCurve& curve, const epi::ExpParams& p, Day origin) {
    std::vector<double> out;
    out.reserve(curve.size());
    for (Day d : curve.day) out.push_back(epi::exp_model_eval_unchecked(p, static_cast<double>(d - origin)));
    return out;
}

std::vector<double> sir_predict(const EpiCurve& curve, const epi::SirParams& p, double step) {
    std::vector<double> grid;
    for (Day d : curve.day) grid.push_back(static_cast<double>(d - curve.day.front()));
    return epi::sir_cumulative_authors(epi::sir_integrate(p, grid, step));
}

void finish(FitResult& result, const EpiCurve& curve) {
    result.day = curve.day;
    result.residuals.resize(curve.size());
    for (std::size_t k = 0; k < curve.size(); ++k) result.residuals[k] = curve.value[k] - result.fitted[k];
    result.sse = sum_of_squares(result.residuals);
}

FitResult run_exp(const EpiCurve& curve, const std::vector<epi::ExpParams>& starts, const FitOptions& options) {
    const auto obj = make_exp_objective(curve, options.time_origin);
    const optim::Objective f = [&](std::span<const double> x) { return obj.sse(x[0], x[1]); };
    optim::NelderMeadOptions nm;
    nm.x_tolerance = options.x_tolerance;
    nm.improvement_floor = improvement_floor(curve);

    FitResult result;
    result.model = Model::exp;
    optim::NelderMeadResult best;
    best.value = kInf;
    int evaluations = 0;
    for (const auto& start : starts) {
        nm.initial_step = exp_steps(start);
        auto run = optim::nelder_mead(f, {start.r0, start.d}, exp_box(), nm);
        evaluations += run.evaluations;
        if (run.value < best.value || best.x.empty()) best = std::move(run);
    }
    result.params = epi::ExpParams{best.x[0], best.x[1]};
    result.converged = best.converged && std::isfinite(best.value);
    result.evaluations = evaluations;
    result.fitted = exp_predict(curve, result.exp_params(), options.time_origin);
    finish(result, curve);
    if (result.r0() > kUnrealisticR0)
        result.warnings.push_back("fitted R0 " + csv::format_double(result.r0(), 4) + " exceeds " +
                                  csv::format_double(kUnrealisticR0) + ": unrealistic value");
    return result;
}

FitResult run_sir(const EpiCurve& curve, const std::vector<epi::SirParams>& starts, const FitOptions& options) {
    const auto obj = make_sir_objective(curve, options.sir_step);
    const SirSpace space{*std::max_element(curve.value.begin(), curve.value.end())};
    const optim::Objective f = [&](std::span<const double> x) { return obj.sse(SirSpace::decode(x)); };
    optim::NelderMeadOptions nm;
    nm.x_tolerance = options.x_tolerance;
    nm.improvement_floor = improvement_floor(curve);
    nm.initial_step = {0.3, 0.3, 0.5, 0.5};

    FitResult result;
    result.model = Model::sir;
    optim::NelderMeadResult best;
    best.value = kInf;
    int evaluations = 0;
    for (const auto& start : starts) {
        auto run = optim::nelder_mead(f, space.encode(start), space.box(), nm);
        evaluations += run.evaluations;
        if (run.value < best.value || best.x.empty()) best = std::move(run);
    }
    const auto p = SirSpace::decode(best.x);
    result.params = p;
    result.converged = best.converged && std::isfinite(best.value);
    result.evaluations = evaluations;
    result.fitted = sir_predict(curve, p, options.sir_step);
    finish(result, curve);

    const double r0 = result.r0();
    if (r0 > kUnrealisticR0)
        result.warnings.push_back("fitted R0 " + csv::format_double(r0, 4) + " exceeds " +
                                  csv::format_double(kUnrealisticR0) + ": unrealistic value");
    const auto box = space.box();
    if (best.x[2] <= box.lower[2] + 1e-9 || best.x[2] >= box.upper[2] - 1e-9)
        result.warnings.push_back("population N at its bound; beta, gamma and N are weakly identified");
    if (best.x[0] >= box.upper[0] - 1e-9 || best.x[1] >= box.upper[1] - 1e-9)
        result.warnings.push_back("rate parameter at its upper bound 20");
    return result;
}

}  // namespace

std::vector<epi::ExpParams> default_exp_starts() {
    std::vector<epi::ExpParams> out;
    for (double d : {0.0, 0.05})
        for (double r0 : {1.1, 1.5, 2.0, 4.0}) out.push_back({r0, d});
    return out;
}

std::vector<epi::SirParams> default_sir_starts(const EpiCurve& curve) {
    const double max_value = *std::max_element(curve.value.begin(), curve.value.end());
    const double population = 2.0 * max_value;
    const double first = curve.value.front();
    const double i0 = first > 0.0 ? std::min(first, population) : 1e-3 * max_value;
    std::vector<epi::SirParams> out;
    for (double gamma : {0.1, 0.5})
        for (double ratio : {1.5, 3.0, 6.0, 12.0}) out.push_back({ratio * gamma, gamma, population, i0});
    return out;
}

FitResult fit_exp(const EpiCurve& curve, const FitOptions& options) {
    require_growth(curve, 3);
    return run_exp(curve, options.exp_starts.empty() ? default_exp_starts() : options.exp_starts, options);
}

FitResult fit_sir(const EpiCurve& curve, const FitOptions& options) {
    require_growth(curve, 5);
    if (*std::max_element(curve.value.begin(), curve.value.end()) <= 0.0) throw DataError("no growth signal");
    return run_sir(curve, options.sir_starts.empty() ? default_sir_starts(curve) : options.sir_starts, options);
}

FitResult fit(const EpiCurve& curve, Model model, const FitOptions& options) {
    return model == Model::exp ? fit_exp(curve, options) : fit_sir(curve, options);
}

std::vector<double> predict(const EpiCurve& curve, const FitResult& fit, const FitOptions& options) {
    if (fit.model == Model::exp) return exp_predict(curve, fit.exp_params(), options.time_origin);
    return sir_predict(curve, fit.sir_params(), options.sir_step);
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) throw std::invalid_argument("quantile of an empty sample");
    const double h = (static_cast<double>(sorted.size()) - 1.0) * std::clamp(q, 0.0, 1.0);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

BootstrapResult bootstrap_r0(const EpiCurve& curve, Model model, int replicates, std::uint64_t seed,
                             const BootstrapOptions& options) {
    if (replicates < 100) throw std::invalid_argument("bootstrap needs at least 100 replicates");
    BootstrapResult out;
    out.base = fit(curve, model, options.fit);
    const bool cumulative = options.enforce_monotone && curve.non_decreasing();

    FitOptions refit = options.fit;
    refit.x_tolerance = options.replicate_x_tolerance;
    if (model == Model::exp)
        refit.exp_starts = {out.base.exp_params()};
    else
        refit.sir_starts = {out.base.sir_params()};

    const auto n = curve.size();
    std::vector<double> residuals = out.base.residuals;
    const double mean = std::accumulate(residuals.begin(), residuals.end(), 0.0) / static_cast<double>(n);
    for (double& r : residuals) r -= mean;
    out.replicate_r0.assign(static_cast<std::size_t>(replicates), std::numeric_limits<double>::quiet_NaN());
    parallel_for(static_cast<std::size_t>(replicates), options.threads, [&](std::size_t b) {
        Rng rng(derive_seed(seed, b));
        EpiCurve sample = curve;
        double running = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            double v = out.base.fitted[k] + residuals[rng.below(n)];
            v = std::max(v, 0.0);
            if (cumulative) v = running = std::max(running, v);
            sample.value[k] = v;
        }
        try {
            const auto r = fit(sample, model, refit);
            if (r.converged) out.replicate_r0[b] = r.r0();
        } catch (const std::exception&) {
            // counted as a failed replicate below
        }
    });

    std::vector<double> ok;
    ok.reserve(out.replicate_r0.size());
    for (double r : out.replicate_r0)
        if (std::isfinite(r)) ok.push_back(r);
    const int failures = replicates - static_cast<int>(ok.size());
    if (static_cast<double>(failures) > options.max_failure_fraction * replicates)
        throw DataError("unstable bootstrap: " + std::to_string(failures) + " of " + std::to_string(replicates) +
                        " replicate fits failed");
    std::sort(ok.begin(), ok.end());

    auto& iv = out.interval;
    iv.quantity = model == Model::exp ? "R0_EXP" : "R0_SIR";
    iv.replicates = replicates;
    iv.seed = seed;
    iv.point = out.base.r0();
    iv.failures = failures;
    double lower_level = options.lower_quantile;
    double upper_level = options.upper_quantile;
    if (options.method == IntervalMethod::bias_corrected) {
        const double z0 = median_bias(ok, iv.point);
        const boost::math::normal_distribution<double> std_normal;
        lower_level = boost::math::cdf(std_normal, 2.0 * z0 + boost::math::quantile(std_normal, lower_level));
        upper_level = boost::math::cdf(std_normal, 2.0 * z0 + boost::math::quantile(std_normal, upper_level));
    }
    iv.lower = quantile_sorted(ok, lower_level);
    iv.upper = quantile_sorted(ok, upper_level);
    return out;
}

double median_bias(const std::vector<double>& sorted, double point) {
    if (sorted.empty()) throw std::invalid_argument("median bias of an empty sample");
    const auto below = std::lower_bound(sorted.begin(), sorted.end(), point) - sorted.begin();
    const auto ties = std::upper_bound(sorted.begin(), sorted.end(), point) - sorted.begin() - below;
    const double n = static_cast<double>(sorted.size());
    double fraction = (static_cast<double>(below) + 0.5 * static_cast<double>(ties)) / n;
    fraction = std::clamp(fraction, 0.5 / n, 1.0 - 0.5 / n);
    return boost::math::quantile(boost::math::normal_distribution<double>{}, fraction);
}

std::string_view to_string(Criticality c) {
    switch (c) {
        case Criticality::supercritical: return "supercritical";
        case Criticality::subcritical: return "subcritical";
        case Criticality::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

Criticality classify_interval(const BootstrapInterval& interval) {
    if (interval.lower > 1.0) return Criticality::supercritical;
    if (interval.upper < 1.0) return Criticality::subcritical;
    return Criticality::inconclusive;
}

namespace {

// Three significant digits; scientific form once values reach 100.
std::string render_value(double x) {
    if (std::abs(x) >= 100.0) {
        const int exponent = static_cast<int>(std::floor(std::log10(std::abs(x))));
        const double mantissa = x / std::pow(10.0, exponent);
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.1fx10^%d", mantissa, exponent);
        return buf;
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", x);
    return buf;
}

}  // namespace

std::vector<CriticalityRow> supercriticality_report(const std::vector<LabeledInterval>& intervals) {
    if (intervals.empty()) throw std::invalid_argument("no intervals to report");
    std::vector<CriticalityRow> rows;
    rows.reserve(intervals.size());
    for (const auto& li : intervals) {
        CriticalityRow row;
        row.platform = li.platform;
        row.quantity = li.interval.quantity;
        row.interval = li.interval;
        row.status = classify_interval(li.interval);
        row.rendered = "[" + render_value(li.interval.lower) + ", " + render_value(li.interval.upper) + "]";
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string report_to_csv(const std::vector<CriticalityRow>& rows) {
    std::string out = "platform,quantity,point,lower,upper,replicates,failures,seed,interval,status\n";
    for (const auto& r : rows) {
        out += csv::join({r.platform, r.quantity, csv::format_double(r.interval.point),
                          csv::format_double(r.interval.lower), csv::format_double(r.interval.upper),
                          std::to_string(r.interval.replicates), std::to_string(r.interval.failures),
                          std::to_string(r.interval.seed), r.rendered, std::string(to_string(r.status))});
        out += "\n";
    }
    return out;
}

std::string fit_to_json(const FitResult& fit, const BootstrapInterval* interval) {
    nlohmann::ordered_json j;
    j["model"] = to_string(fit.model);
    if (fit.model == Model::exp) {
        j["params"] = {{"r0", fit.exp_params().r0}, {"d", fit.exp_params().d}};
    } else {
        const auto& p = fit.sir_params();
        j["params"] = {{"beta", p.beta},
                       {"gamma", p.gamma},
                       {"population", p.population},
                       {"initial_infected", p.initial_infected}};
    }
    j["r0"] = fit.r0();
    j["sse"] = fit.sse;
    j["day"] = fit.day;
    j["fitted"] = fit.fitted;
    j["residuals"] = fit.residuals;
    j["converged"] = fit.converged;
    j["evaluations"] = fit.evaluations;
    j["warnings"] = fit.warnings;
    if (interval != nullptr) {
        j["bootstrap"] = {{"quantity", interval->quantity}, {"lower", interval->lower},
                          {"upper", interval->upper},       {"replicates", interval->replicates},
                          {"point", interval->point},       {"seed", interval->seed},
                          {"failures", interval->failures}, {"status", to_string(classify_interval(*interval))}};
    }
    return j.dump(2) + "\n";
}

}  // namespace infodemic::fitting
