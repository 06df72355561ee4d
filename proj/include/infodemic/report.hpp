#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "infodemic/fitting.hpp"
#include "infodemic/reliability.hpp"
#include "infodemic/types.hpp"

namespace infodemic::report {

inline constexpr const char* kVersion = "0.1.0";

/// Invalid or incomplete run configuration; raised before any compute.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Stage { fit, reliability, topics };

std::string_view to_string(Stage s);

struct TopicSettings {
    std::size_t dim = 16;
    std::size_t window = 3;
    int epochs = 5;
    double rate = 0.025;
    std::size_t k_min = 2;
    std::size_t k_max = 40;
    int stability_reps = 20;
    int pam_restarts = 3;
    std::uint64_t seed = 0;
};

/// Flat `key = value` file; '#' starts a comment. Relative paths resolve
/// against the file's directory. Keys:
///   output_dir, window_start, window_end (YYYY-MM-DD), keywords,
///   sources, shorteners, platforms (comma list), corpus.<platform>,
///   stages (comma list of fit, reliability, topics), models (exp, sir),
///   bootstrap_replicates, bootstrap_seed, time_origin, threads,
///   topics.dim, topics.window, topics.epochs, topics.rate, topics.k_min,
///   topics.k_max, topics.stability_reps, topics.pam_restarts, topics.seed.
/// Seeds have no defaults and must be given for the stages that use them.
struct RunConfig {
    std::filesystem::path output_dir;
    DayRange window;
    std::string window_start;
    std::string window_end;
    std::optional<std::filesystem::path> keywords;
    std::optional<std::filesystem::path> sources;
    std::optional<std::filesystem::path> shorteners;
    std::vector<Platform> platforms;
    std::map<Platform, std::filesystem::path> corpora;
    std::vector<Stage> stages;
    std::vector<fitting::Model> models{fitting::Model::exp, fitting::Model::sir};
    int bootstrap_replicates = 1000;
    std::optional<std::uint64_t> bootstrap_seed;
    Day time_origin = 0;
    unsigned threads = 1;
    TopicSettings topics;
    bool topics_seed_set = false;

    [[nodiscard]] bool has_stage(Stage s) const;
};

RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = ".");
RunConfig load_config(const std::filesystem::path& path);

/// Checks required keys and that every referenced file exists. Throws
/// ConfigError.
void validate(const RunConfig& config);

struct ReportFiles {
    std::filesystem::path directory;
    std::vector<std::string> outputs;  // relative to directory
};

/// Runs the requested stages for every platform and writes the report.
/// Outputs are first written with a ".partial" suffix and renamed once all
/// stages succeed; on failure the partial files stay and the error is
/// rethrown.
ReportFiles run_report(const RunConfig& config);

struct PlatformReliability {
    std::string platform;
    reliability::MatchStats match;
    reliability::AmplificationReport amplification;
    reliability::CrosslinkRow crosslinks;
    /// Questionable against reliable cumulative series per quantity;
    /// nullopt when the reliable series is constant.
    std::map<reliability::SeriesQuantity, std::optional<reliability::RegressionResult>> regressions;
};

PlatformReliability analyze_reliability(const PlatformCorpus& corpus, const reliability::SourceList& sources,
                                        const reliability::ShortenerMap* shorteners = nullptr);

/// platform,url_posts,matched,matched_fraction,questionable,reliable,questionable_share,reliable_share
std::string matching_csv(const std::vector<PlatformReliability>& rows);
/// platform,questionable_posts,reliable_posts,questionable_interactions,reliable_interactions,e_unreliable,e_reliable,alpha
std::string amplification_csv(const std::vector<PlatformReliability>& rows);
/// platform,quantity,rho,intercept,r_squared,n
std::string regressions_csv(const std::vector<PlatformReliability>& rows);
/// platform,total_urls,gab,reddit,youtube,instagram,twitter,facebook
std::string crosslinks_csv(const std::vector<PlatformReliability>& rows);

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

}  // namespace infodemic::report
