#pragma once

// Seeded synthetic data with known answers. Every generator is a pure
// function of its arguments; randomness comes from infodemic::Rng only.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "infodemic/epimodels.hpp"
#include "infodemic/reliability.hpp"
#include "infodemic/topics.hpp"
#include "infodemic/types.hpp"

namespace infodemic::synth {

enum class Kind { exp_curve, sir_curve, clustered_vectors, labeled_posts, platform_corpus };

std::string_view to_string(Kind k);
Kind kind_from_string(std::string_view name);

struct CurveNoise {
    /// Standard deviation as a fraction of the final noiseless value.
    double sigma = 0.0;
    std::uint64_t seed = 0;
    /// Round values to integers, as counts from real data would be.
    bool round = false;
};

struct GeneratedCurve {
    EpiCurve curve;
    /// Noiseless model values on the same days.
    std::vector<double> exact;
};

/// EXP values at t = day - time_origin. With sigma > 0, additive Gaussian
/// noise is clamped at zero and made non-decreasing by running max.
GeneratedCurve gen_exp_curve(const epi::ExpParams& params, DayRange days, const CurveNoise& noise = {},
                             Day time_origin = 0);

/// I + R of the SIR model sampled daily, time starting at days.first. Noise
/// as for gen_exp_curve.
GeneratedCurve gen_sir_curve(const epi::SirParams& params, DayRange days, const CurveNoise& noise = {},
                             double step = epi::kDefaultSirStep);

struct ClusteredVectors {
    topics::Vectors vectors;
    std::vector<int> labels;
};

constexpr double kModerateSeparation = 6.0;

/// Cluster c has points separation * e_c + N(0, I), where e_c are random
/// orthonormal directions. Requires n_clusters <= dim.
ClusteredVectors gen_clustered_vectors(std::size_t n_clusters, std::size_t points_per_cluster, std::size_t dim,
                                       double separation, std::uint64_t seed);

enum class ReactionLaw { constant, poisson };

struct ReactionSpec {
    ReactionLaw law = ReactionLaw::constant;
    double mean = 1.0;
};

struct LabeledPostsSpec {
    std::size_t n_questionable = 0;
    std::size_t n_reliable = 0;
    ReactionSpec questionable;
    ReactionSpec reliable;
    Platform platform = Platform::twitter;
    DayRange days{1, 30};
};

struct LabeledPostsFixture {
    PlatformCorpus corpus;
    reliability::SourceList sources;
    /// Law means; undefined for an empty class.
    std::optional<double> expected_e_unreliable;
    std::optional<double> expected_e_reliable;
    std::optional<double> expected_alpha;
};

/// Questionable posts link to dubious.example, reliable ones to
/// trusted.example.
LabeledPostsFixture gen_labeled_posts(const LabeledPostsSpec& spec, std::uint64_t seed);

struct PlatformCorpusSpec {
    Platform platform = Platform::reddit;
    DayRange window{1, 45};
    epi::ExpParams growth{1.25, 0.002};
    /// Each new author posts once to a questionable source, this many times
    /// to reliable sources, once to a social link and once without a URL.
    int reliable_per_questionable = 2;
    std::int64_t questionable_reactions = 6;
    std::int64_t reliable_reactions = 3;
};

struct PlatformCorpusFixture {
    PlatformCorpus corpus;
    reliability::SourceList sources;
    /// round(growth curve) on every window day; equals cumulative_new_authors.
    EpiCurve authors;
    double expected_alpha = 0.0;
    /// Slope of cumulative questionable posts against reliable posts.
    double expected_rho_posts = 0.0;
    double expected_matched_fraction = 0.0;
    double expected_questionable_share = 0.0;
};

/// Corpus whose distinct-author curve follows the growth model, with a
/// fixed link pattern per author so that reliability answers are exact.
PlatformCorpusFixture gen_platform_corpus(const PlatformCorpusSpec& spec, std::uint64_t seed);

/// Source list shared by the labeled generators.
reliability::SourceList fixture_sources();

/// UTC seconds for a moment on `day` under the default epoch.
std::int64_t timestamp_on(Day day, std::int64_t seconds_into_day);

}  // namespace infodemic::synth
