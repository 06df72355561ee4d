#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace infodemic {

enum class Platform { gab, reddit, youtube, instagram, twitter, other };

std::string_view to_string(Platform p);
/// Throws std::invalid_argument on an unknown name.
Platform platform_from_string(std::string_view name);
std::vector<Platform> all_platforms();

enum class PostKind { post, comment };

std::string_view to_string(PostKind k);
PostKind post_kind_from_string(std::string_view name);

/// Day index relative to a configured epoch. With the default epoch
/// (2020-01-01 = day 1), 2020-02-14 is day 45.
using Day = std::int64_t;

struct DayRange {
    Day first = 1;
    Day last = 1;

    [[nodiscard]] bool contains(Day d) const { return d >= first && d <= last; }
    [[nodiscard]] std::int64_t length() const { return last - first + 1; }
};

struct Post {
    std::string id;
    Platform platform = Platform::other;
    std::string author_id;
    std::int64_t timestamp = 0;  // UTC seconds since the Unix epoch
    Day day = 0;                 // UTC calendar day relative to the corpus epoch
    PostKind kind = PostKind::post;
    std::string text;
    std::vector<std::string> urls;
    std::map<std::string, std::int64_t> reactions;

    /// Sum of every reaction kind, comment counts included.
    [[nodiscard]] std::int64_t interactions() const;
};

struct PlatformCorpus {
    Platform platform = Platform::other;
    DayRange window;
    std::vector<Post> posts;
};

enum class CurveQuantity { cumulative_authors, cumulative_posts, cumulative_interactions, daily };

std::string_view to_string(CurveQuantity q);

/// Day-indexed series. Values are stored as reals so that model-generated
/// curves can be fit without rounding; curves built from data carry
/// integral values.
struct EpiCurve {
    std::vector<Day> day;
    std::vector<double> value;
    CurveQuantity quantity = CurveQuantity::cumulative_authors;

    [[nodiscard]] std::size_t size() const { return day.size(); }
    [[nodiscard]] bool non_decreasing() const;
    /// Throws std::invalid_argument when lengths differ or days are not strictly increasing.
    void validate() const;
};

/// Daily increments of a cumulative curve; the first day keeps its value.
EpiCurve to_daily(const EpiCurve& cumulative);

/// Error raised when an input carries no usable signal (empty corpus,
/// flat curve, and similar).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace infodemic
