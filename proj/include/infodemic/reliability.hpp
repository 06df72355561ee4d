#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "infodemic/types.hpp"

namespace infodemic::reliability {

enum class SourceLabel { questionable, reliable };

std::string_view to_string(SourceLabel l);
SourceLabel source_label_from_string(std::string_view s);

/// Normalized host: lowercase, no scheme, no userinfo, no port, no path,
/// one leading "www." removed. nullopt when no plausible host exists.
std::optional<std::string> normalize_domain(std::string_view url);

class SourceList {
public:
    SourceList() = default;

    /// Normalizes `domain`; throws std::invalid_argument on an invalid or
    /// duplicate domain.
    void add(std::string_view domain, SourceLabel label);

    /// Looks up `host` and then each parent domain ("a.b.c" -> "b.c").
    /// Returns the matched listed domain and its label.
    [[nodiscard]] std::optional<std::pair<std::string, SourceLabel>> match(std::string_view host) const;

    [[nodiscard]] std::size_t size() const { return entries_.size(); }
    [[nodiscard]] bool empty() const { return entries_.empty(); }
    [[nodiscard]] std::size_t count(SourceLabel label) const;
    [[nodiscard]] const std::map<std::string, SourceLabel>& entries() const { return entries_; }

    /// CSV `domain,label`.
    static SourceList from_csv(const std::filesystem::path& path);

private:
    std::map<std::string, SourceLabel> entries_;
};

/// Offline expansion of shortened links, keyed by the exact short URL.
using ShortenerMap = std::map<std::string, std::string>;

/// CSV `short_url,expanded_url`.
ShortenerMap shortener_map_from_csv(const std::filesystem::path& path);

enum class PostLabel { questionable, reliable, unmatched, no_url };

std::string_view to_string(PostLabel l);

struct LabeledPost {
    std::size_t post_index = 0;  // position in the classified corpus
    std::string post_id;
    std::string author_id;
    Day day = 0;
    std::optional<std::string> matched_domain;
    PostLabel label = PostLabel::no_url;
    std::int64_t interactions = 0;
    /// Normalized hosts of every URL after expansion; invalid URLs omitted.
    std::vector<std::string> hosts;
    std::size_t url_count = 0;
};

/// Labels every post by its first URL (document order) whose domain is in
/// `sources`.
std::vector<LabeledPost> classify_posts(const PlatformCorpus& corpus, const SourceList& sources,
                                        const ShortenerMap* shorteners = nullptr);

struct MatchStats {
    std::size_t url_posts = 0;
    std::size_t matched = 0;
    std::size_t questionable = 0;
    std::size_t reliable = 0;
    /// matched / url_posts; nullopt when there are no URL posts.
    std::optional<double> matched_fraction;
    /// Shares among matched posts; nullopt when nothing matched.
    std::optional<double> questionable_share;
    std::optional<double> reliable_share;
};

MatchStats match_stats(std::span<const LabeledPost> labeled);

/// Social-platform name -> domains. Names are free-form so that columns
/// beyond the Platform enum (e.g. facebook) can be reported.
using SocialRegistry = std::map<std::string, std::vector<std::string>>;

SocialRegistry default_social_registry();

/// Column order used by default_social_registry reports.
std::vector<std::string> default_social_columns();

struct CrosslinkRow {
    std::size_t total_urls = 0;
    /// Fraction of all URLs whose host belongs to each registry entry.
    std::map<std::string, double> fraction;
};

CrosslinkRow crosslink_stats(std::span<const LabeledPost> labeled, const SocialRegistry& registry);

enum class SeriesQuantity { posts, interactions, users };

std::string_view to_string(SeriesQuantity q);

struct PairedSeries {
    std::vector<Day> day;
    std::vector<double> reliable;      // x
    std::vector<double> questionable;  // y
};

/// Day-aligned cumulative series of the two classes over `window`. The
/// users variant counts distinct authors per class; an author linking both
/// classes counts in both.
PairedSeries paired_cumulative_series(std::span<const LabeledPost> labeled, SeriesQuantity quantity, DayRange window);

struct RegressionResult {
    double intercept = 0.0;
    double slope = 0.0;  // rho
    double r_squared = 0.0;
    std::size_t n = 0;
};

/// Ordinary least squares y = intercept + slope * x, single-pass
/// co-moment accumulation. Throws DataError("degenerate regressor") when x
/// is constant.
RegressionResult linear_regression(std::span<const double> x, std::span<const double> y);

struct AmplificationReport {
    std::size_t questionable_posts = 0;
    std::size_t reliable_posts = 0;
    std::int64_t questionable_interactions = 0;
    std::int64_t reliable_interactions = 0;
    std::optional<double> e_unreliable;
    std::optional<double> e_reliable;
    /// e_unreliable / e_reliable; nullopt when either class is empty or
    /// e_reliable is zero.
    std::optional<double> alpha;
};

AmplificationReport amplification(std::span<const LabeledPost> labeled);

/// alpha from already-averaged engagement values.
std::optional<double> relative_amplification(double e_unreliable, double e_reliable);

}  // namespace infodemic::reliability
