#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "infodemic/types.hpp"

namespace infodemic::ingest {

/// Calendar date that maps to day 1. Defaults to 2020-01-01.
struct Epoch {
    std::chrono::sys_days day_one = std::chrono::sys_days{std::chrono::year{2020} / 1 / 1};
};

/// Parses "YYYY-MM-DD".
std::optional<std::chrono::sys_days> parse_date(std::string_view text);
/// Parses ISO-8601 "YYYY-MM-DD[T ]HH:MM[:SS[.fff]][Z|+HH:MM|-HH:MM]" or a
/// bare date into UTC seconds since the Unix epoch.
std::optional<std::int64_t> parse_timestamp(std::string_view text);

Day day_of(std::int64_t utc_seconds, const Epoch& epoch = {});
Day day_of(std::chrono::sys_days date, const Epoch& epoch = {});
std::chrono::sys_days date_of(Day day, const Epoch& epoch = {});

struct LoadReport {
    std::size_t lines = 0;          // non-blank lines seen
    std::size_t rejected = 0;       // schema or parse failures, platform mismatches, duplicates
    std::size_t out_of_window = 0;  // valid records dated outside the window
};

struct LoadedCorpus {
    PlatformCorpus corpus;
    LoadReport report;
};

/// Parses one JSONL record. Returns nullopt on any schema violation.
std::optional<Post> parse_post(std::string_view line, const Epoch& epoch = {});

/// Loads a JSONL export. Malformed lines are skipped and counted; the load
/// fails if more than half the lines are malformed or the file is unreadable.
LoadedCorpus load_corpus(const std::filesystem::path& path, Platform platform, DayRange window,
                         const Epoch& epoch = {});

/// Same contract as load_corpus for in-memory text.
LoadedCorpus parse_corpus(std::string_view jsonl, Platform platform, DayRange window,
                          const Epoch& epoch = {});

std::string to_jsonl(const Post& post);

/// Keeps posts whose lowercased text or any lowercased URL contains one of
/// the keywords as a substring.
PlatformCorpus filter_keywords(const PlatformCorpus& corpus, const std::vector<std::string>& keywords);

/// One keyword per line; blank lines and lines starting with '#' skipped;
/// keywords are lowercased.
std::vector<std::string> read_keywords(const std::filesystem::path& path);

EpiCurve cumulative_new_authors(const PlatformCorpus& corpus);

EpiCurve cumulative_posts(const PlatformCorpus& corpus, std::optional<PostKind> kind = std::nullopt);

EpiCurve cumulative_interactions(const PlatformCorpus& corpus);

/// Per author: items authored plus reactions received on them.
std::map<std::string, std::int64_t> activity_histogram(const PlatformCorpus& corpus);

std::string curve_to_csv(const EpiCurve& curve);
/// Reads a `day,value` CSV.
EpiCurve curve_from_csv(const std::filesystem::path& path, CurveQuantity quantity = CurveQuantity::cumulative_authors);
std::string histogram_to_csv(const std::map<std::string, std::int64_t>& histogram);

}  // namespace infodemic::ingest
