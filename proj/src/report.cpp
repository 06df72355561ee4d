#include "infodemic/report.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>
#include <json.hpp>

#include "infodemic/csv.hpp"
#include "infodemic/ingest.hpp"
#include "infodemic/parallel.hpp"
#include "infodemic/topics.hpp"

namespace infodemic::report {

namespace fs = std::filesystem;

std::string_view to_string(Stage s) {
    switch (s) {
        case Stage::fit: return "fit";
        case Stage::reliability: return "reliability";
        case Stage::topics: return "topics";
    }
    return "fit";
}

bool RunConfig::has_stage(Stage s) const { return std::find(stages.begin(), stages.end(), s) != stages.end(); }

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ','))
        if (auto t = trim(item); !t.empty()) out.push_back(std::move(t));
    return out;
}

template <class T>
T parse_number(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        T out{};
        if constexpr (std::is_same_v<T, double>)
            out = std::stod(value, &used);
        else if constexpr (std::is_same_v<T, std::uint64_t>)
            out = std::stoull(value, &used);
        else
            out = static_cast<T>(std::stoll(value, &used));
        if (used != value.size()) throw std::invalid_argument("trailing text");
        return out;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': not a number: " + value);
    }
}

Stage stage_from_string(const std::string& s) {
    for (Stage st : {Stage::fit, Stage::reliability, Stage::topics})
        if (to_string(st) == s) return st;
    throw ConfigError("unknown stage: " + s);
}

}  // namespace

RunConfig parse_config(const std::string& text, const fs::path& base_dir) {
    std::map<std::string, std::string> kv;
    std::stringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        auto key = trim(std::string_view(line).substr(0, eq));
        auto value = trim(std::string_view(line).substr(eq + 1));
        if (!kv.emplace(key, value).second) throw ConfigError("config key repeated: " + key);
    }

    auto path_of = [&](const std::string& v) { return fs::path(v).is_absolute() ? fs::path(v) : base_dir / v; };
    RunConfig c;
    c.stages = {Stage::fit, Stage::reliability};
    for (const auto& [key, value] : kv) {
        if (key == "output_dir") c.output_dir = path_of(value);
        else if (key == "window_start") c.window_start = value;
        else if (key == "window_end") c.window_end = value;
        else if (key == "keywords") c.keywords = path_of(value);
        else if (key == "sources") c.sources = path_of(value);
        else if (key == "shorteners") c.shorteners = path_of(value);
        else if (key == "platforms") {
            for (const auto& p : split_list(value)) {
                try {
                    c.platforms.push_back(platform_from_string(p));
                } catch (const std::invalid_argument& e) {
                    throw ConfigError(e.what());
                }
            }
        } else if (key.starts_with("corpus.")) {
            try {
                c.corpora[platform_from_string(key.substr(7))] = path_of(value);
            } catch (const std::invalid_argument& e) {
                throw ConfigError(e.what());
            }
        } else if (key == "stages") {
            c.stages.clear();
            for (const auto& s : split_list(value)) c.stages.push_back(stage_from_string(s));
        } else if (key == "models") {
            c.models.clear();
            for (const auto& m : split_list(value)) {
                try {
                    c.models.push_back(fitting::model_from_string(m));
                } catch (const std::invalid_argument& e) {
                    throw ConfigError(e.what());
                }
            }
        } else if (key == "bootstrap_replicates") c.bootstrap_replicates = parse_number<int>(key, value);
        else if (key == "bootstrap_seed") c.bootstrap_seed = parse_number<std::uint64_t>(key, value);
        else if (key == "time_origin") c.time_origin = parse_number<Day>(key, value);
        else if (key == "threads") c.threads = parse_number<unsigned>(key, value);
        else if (key == "topics.dim") c.topics.dim = parse_number<std::size_t>(key, value);
        else if (key == "topics.window") c.topics.window = parse_number<std::size_t>(key, value);
        else if (key == "topics.epochs") c.topics.epochs = parse_number<int>(key, value);
        else if (key == "topics.rate") c.topics.rate = parse_number<double>(key, value);
        else if (key == "topics.k_min") c.topics.k_min = parse_number<std::size_t>(key, value);
        else if (key == "topics.k_max") c.topics.k_max = parse_number<std::size_t>(key, value);
        else if (key == "topics.stability_reps") c.topics.stability_reps = parse_number<int>(key, value);
        else if (key == "topics.pam_restarts") c.topics.pam_restarts = parse_number<int>(key, value);
        else if (key == "topics.seed") {
            c.topics.seed = parse_number<std::uint64_t>(key, value);
            c.topics_seed_set = true;
        } else {
            throw ConfigError("unknown config key: " + key);
        }
    }

    if (!c.window_start.empty() && !c.window_end.empty()) {
        const auto from = ingest::parse_date(c.window_start);
        const auto to = ingest::parse_date(c.window_end);
        if (!from || !to) throw ConfigError("window dates must be YYYY-MM-DD");
        c.window = {ingest::day_of(*from), ingest::day_of(*to)};
    }
    return c;
}

RunConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.parent_path().empty() ? fs::path(".") : path.parent_path());
}

void validate(const RunConfig& c) {
    auto need_file = [](const fs::path& p, const std::string& what) {
        if (!fs::is_regular_file(p)) throw ConfigError(what + " not found: " + p.string());
    };
    if (c.output_dir.empty()) throw ConfigError("output_dir is required");
    if (c.window_start.empty() || c.window_end.empty()) throw ConfigError("window_start and window_end are required");
    if (c.window.first > c.window.last) throw ConfigError("window_start is after window_end");
    if (c.platforms.empty()) throw ConfigError("platforms is required");
    if (c.stages.empty()) throw ConfigError("no stages requested");
    for (Platform p : c.platforms) {
        const auto it = c.corpora.find(p);
        if (it == c.corpora.end()) throw ConfigError("missing corpus." + std::string(to_string(p)));
        need_file(it->second, "corpus for " + std::string(to_string(p)));
    }
    if (c.keywords) need_file(*c.keywords, "keyword file");
    if (c.has_stage(Stage::reliability)) {
        if (!c.sources) throw ConfigError("reliability stage requires a sources file");
        need_file(*c.sources, "source list");
    }
    if (c.shorteners) need_file(*c.shorteners, "shortener map");
    if (c.has_stage(Stage::fit)) {
        if (!c.bootstrap_seed) throw ConfigError("fit stage requires bootstrap_seed");
        if (c.bootstrap_replicates < 100) throw ConfigError("bootstrap_replicates must be at least 100");
        if (c.models.empty()) throw ConfigError("fit stage requires at least one model");
    }
    if (c.has_stage(Stage::topics) && !c.topics_seed_set) throw ConfigError("topics stage requires topics.seed");
}

std::string sha256_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (ctx == nullptr || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
        EVP_MD_CTX_free(ctx);
        throw std::runtime_error("sha256 unavailable");
    }
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof buf);
        if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, digest, &len);
    EVP_MD_CTX_free(ctx);
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
        out += kHex[digest[i] >> 4];
        out += kHex[digest[i] & 0xF];
    }
    return out;
}

PlatformReliability analyze_reliability(const PlatformCorpus& corpus, const reliability::SourceList& sources,
                                        const reliability::ShortenerMap* shorteners) {
    using namespace reliability;
    PlatformReliability out;
    out.platform = std::string(to_string(corpus.platform));
    const auto labeled = classify_posts(corpus, sources, shorteners);
    out.match = match_stats(labeled);
    out.amplification = amplification(labeled);
    out.crosslinks = crosslink_stats(labeled, default_social_registry());
    for (SeriesQuantity q : {SeriesQuantity::users, SeriesQuantity::posts, SeriesQuantity::interactions}) {
        const auto series = paired_cumulative_series(labeled, q, corpus.window);
        try {
            out.regressions[q] = linear_regression(series.reliable, series.questionable);
        } catch (const DataError&) {
            out.regressions[q] = std::nullopt;
        } catch (const std::invalid_argument&) {
            out.regressions[q] = std::nullopt;
        }
    }
    return out;
}

namespace {

std::string opt(const std::optional<double>& x) { return x ? csv::format_double(*x) : std::string("NA"); }

}  // namespace

std::string matching_csv(const std::vector<PlatformReliability>& rows) {
    std::string out = "platform,url_posts,matched,matched_fraction,questionable,reliable,questionable_share,reliable_share\n";
    for (const auto& r : rows) {
        const auto& m = r.match;
        out += csv::join({r.platform, std::to_string(m.url_posts), std::to_string(m.matched), opt(m.matched_fraction),
                          std::to_string(m.questionable), std::to_string(m.reliable), opt(m.questionable_share),
                          opt(m.reliable_share)}) +
               "\n";
    }
    return out;
}

std::string amplification_csv(const std::vector<PlatformReliability>& rows) {
    std::string out =
        "platform,questionable_posts,reliable_posts,questionable_interactions,reliable_interactions,e_unreliable,"
        "e_reliable,alpha\n";
    for (const auto& r : rows) {
        const auto& a = r.amplification;
        out += csv::join({r.platform, std::to_string(a.questionable_posts), std::to_string(a.reliable_posts),
                          std::to_string(a.questionable_interactions), std::to_string(a.reliable_interactions),
                          opt(a.e_unreliable), opt(a.e_reliable), opt(a.alpha)}) +
               "\n";
    }
    return out;
}

std::string regressions_csv(const std::vector<PlatformReliability>& rows) {
    std::string out = "platform,quantity,rho,intercept,r_squared,n\n";
    for (const auto& r : rows)
        for (const auto& [q, reg] : r.regressions) {
            if (reg)
                out += csv::join({r.platform, std::string(to_string(q)), csv::format_double(reg->slope),
                                  csv::format_double(reg->intercept), csv::format_double(reg->r_squared),
                                  std::to_string(reg->n)});
            else
                out += csv::join({r.platform, std::string(to_string(q)), "NA", "NA", "NA", "NA"});
            out += "\n";
        }
    return out;
}

std::string crosslinks_csv(const std::vector<PlatformReliability>& rows) {
    const auto columns = reliability::default_social_columns();
    std::string out = "platform,total_urls";
    for (const auto& c : columns) out += "," + c;
    out += "\n";
    for (const auto& r : rows) {
        csv::Row fields{r.platform, std::to_string(r.crosslinks.total_urls)};
        for (const auto& c : columns) {
            const auto it = r.crosslinks.fraction.find(c);
            fields.push_back(csv::format_double(it == r.crosslinks.fraction.end() ? 0.0 : it->second));
        }
        out += csv::join(fields) + "\n";
    }
    return out;
}

namespace {

struct PlatformOutcome {
    std::optional<std::string> error;
    std::optional<EpiCurve> authors;
    std::vector<fitting::LabeledInterval> intervals;
    std::optional<PlatformReliability> reliability;
    std::optional<topics::PipelineResult> topics;
};

std::string now_iso8601() {
    const auto now = std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
    const auto day = std::chrono::floor<std::chrono::days>(now);
    const std::chrono::year_month_day ymd{day};
    const std::chrono::hh_mm_ss hms{now - day};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                  static_cast<int>(hms.seconds().count()));
    return buf;
}

}  // namespace

ReportFiles run_report(const RunConfig& config) {
    validate(config);

    std::vector<std::string> keywords;
    if (config.keywords) keywords = ingest::read_keywords(*config.keywords);
    std::optional<reliability::SourceList> sources;
    std::optional<reliability::ShortenerMap> shorteners;
    if (config.has_stage(Stage::reliability)) sources = reliability::SourceList::from_csv(*config.sources);
    if (config.shorteners) shorteners = reliability::shortener_map_from_csv(*config.shorteners);

    const std::size_t n = config.platforms.size();
    const unsigned outer = std::min<unsigned>(resolve_threads(config.threads), static_cast<unsigned>(n));
    const unsigned inner = std::max(1u, resolve_threads(config.threads) / std::max(1u, outer));
    std::vector<PlatformOutcome> outcomes(n);
    parallel_for(n, outer, [&](std::size_t i) {
        auto& out = outcomes[i];
        const Platform platform = config.platforms[i];
        try {
            auto loaded = ingest::load_corpus(config.corpora.at(platform), platform, config.window);
            PlatformCorpus corpus = keywords.empty() ? std::move(loaded.corpus)
                                                     : ingest::filter_keywords(loaded.corpus, keywords);
            if (config.has_stage(Stage::fit)) {
                out.authors = ingest::cumulative_new_authors(corpus);
                for (auto model : config.models) {
                    fitting::BootstrapOptions opts;
                    opts.threads = inner;
                    opts.fit.time_origin = config.time_origin;
                    const auto boot =
                        fitting::bootstrap_r0(*out.authors, model, config.bootstrap_replicates, *config.bootstrap_seed, opts);
                    out.intervals.push_back({std::string(to_string(platform)), boot.interval});
                }
            }
            if (config.has_stage(Stage::reliability))
                out.reliability = analyze_reliability(corpus, *sources, shorteners ? &*shorteners : nullptr);
            if (config.has_stage(Stage::topics)) {
                std::vector<std::string> texts, ids;
                for (const auto& p : corpus.posts) {
                    texts.push_back(p.text);
                    ids.push_back(p.id);
                }
                topics::PipelineOptions po;
                po.skipgram.dim = config.topics.dim;
                po.skipgram.window = config.topics.window;
                po.skipgram.epochs = config.topics.epochs;
                po.skipgram.rate = config.topics.rate;
                po.k_min = config.topics.k_min;
                po.k_max = config.topics.k_max;
                po.stability_reps = config.topics.stability_reps;
                po.pam_restarts = config.topics.pam_restarts;
                po.seed = config.topics.seed;
                po.threads = inner;
                out.topics = topics::run_pipeline(texts, ids, po);
            }
        } catch (const std::exception& e) {
            out.error = std::string(to_string(platform)) + ": " + e.what();
        }
    });

    ReportFiles files;
    files.directory = config.output_dir;
    fs::create_directories(config.output_dir);
    std::vector<std::string> errors;
    for (const auto& o : outcomes)
        if (o.error) errors.push_back(*o.error);

    auto emit = [&](const std::string& name, const std::string& content) {
        csv::write_file_atomic(config.output_dir / (name + ".partial"), content);
        files.outputs.push_back(name);
    };

    if (config.has_stage(Stage::fit)) {
        std::vector<fitting::LabeledInterval> all;
        for (std::size_t i = 0; i < n; ++i) {
            const auto& o = outcomes[i];
            all.insert(all.end(), o.intervals.begin(), o.intervals.end());
            if (o.authors)
                emit("authors_" + std::string(to_string(config.platforms[i])) + ".csv", ingest::curve_to_csv(*o.authors));
        }
        if (!all.empty()) emit("r0_intervals.csv", fitting::report_to_csv(fitting::supercriticality_report(all)));
    }
    if (config.has_stage(Stage::reliability)) {
        std::vector<PlatformReliability> rows;
        for (const auto& o : outcomes)
            if (o.reliability) rows.push_back(*o.reliability);
        emit("amplification.csv", amplification_csv(rows));
        emit("regressions.csv", regressions_csv(rows));
        emit("matching.csv", matching_csv(rows));
        emit("crosslinks.csv", crosslinks_csv(rows));
    }
    if (config.has_stage(Stage::topics)) {
        for (std::size_t i = 0; i < n; ++i) {
            if (!outcomes[i].topics) continue;
            const std::string dir = "topics_" + std::string(to_string(config.platforms[i]));
            topics::write_outputs(*outcomes[i].topics, config.output_dir / (dir + ".partial"));
            for (const char* f : {"vocab.csv", "clusters.csv", "silhouette.csv", "stability.csv", "topics.csv"})
                files.outputs.push_back(dir + "/" + f);
        }
    }

    nlohmann::ordered_json manifest;
    manifest["tool"] = "infodemic";
    manifest["version"] = kVersion;
    manifest["generated_at"] = now_iso8601();
    manifest["status"] = errors.empty() ? "complete" : "failed";
    if (!errors.empty()) manifest["errors"] = errors;
    nlohmann::ordered_json cfg;
    cfg["window_start"] = config.window_start;
    cfg["window_end"] = config.window_end;
    cfg["window_days"] = {config.window.first, config.window.last};
    std::vector<std::string> names;
    for (Platform p : config.platforms) names.emplace_back(to_string(p));
    cfg["platforms"] = names;
    std::vector<std::string> stages;
    for (Stage s : config.stages) stages.emplace_back(to_string(s));
    cfg["stages"] = stages;
    std::vector<std::string> models;
    for (auto m : config.models) models.emplace_back(fitting::to_string(m));
    cfg["models"] = models;
    cfg["bootstrap_replicates"] = config.bootstrap_replicates;
    cfg["time_origin"] = config.time_origin;
    cfg["threads"] = config.threads;
    if (config.has_stage(Stage::topics))
        cfg["topics"] = {{"dim", config.topics.dim},
                         {"window", config.topics.window},
                         {"epochs", config.topics.epochs},
                         {"rate", config.topics.rate},
                         {"k_min", config.topics.k_min},
                         {"k_max", config.topics.k_max},
                         {"stability_reps", config.topics.stability_reps},
                         {"pam_restarts", config.topics.pam_restarts}};
    manifest["config"] = cfg;
    nlohmann::ordered_json seeds = nlohmann::ordered_json::object();
    if (config.bootstrap_seed) seeds["bootstrap_seed"] = *config.bootstrap_seed;
    if (config.topics_seed_set) seeds["topics_seed"] = config.topics.seed;
    manifest["seeds"] = seeds;
    nlohmann::ordered_json inputs = nlohmann::ordered_json::array();
    auto add_input = [&](const std::string& role, const fs::path& p) {
        inputs.push_back({{"role", role}, {"path", p.string()}, {"sha256", sha256_file(p)}});
    };
    for (Platform p : config.platforms) add_input("corpus." + std::string(to_string(p)), config.corpora.at(p));
    if (config.keywords) add_input("keywords", *config.keywords);
    if (config.sources && config.has_stage(Stage::reliability)) add_input("sources", *config.sources);
    if (config.shorteners) add_input("shorteners", *config.shorteners);
    manifest["inputs"] = inputs;
    manifest["outputs"] = files.outputs;
    csv::write_file_atomic(config.output_dir / "manifest.json.partial", manifest.dump(2) + "\n");

    if (!errors.empty()) {
        std::string msg = "report failed";
        for (const auto& e : errors) msg += "\n  " + e;
        throw std::runtime_error(msg);
    }

    auto promote = [&](const fs::path& partial, const fs::path& final_path) {
        if (fs::exists(final_path)) fs::remove_all(final_path);
        fs::rename(partial, final_path);
    };
    std::vector<std::string> promoted;
    for (const auto& name : files.outputs) {
        const auto slash = name.find('/');
        const std::string top = slash == std::string::npos ? name : name.substr(0, slash);
        if (std::find(promoted.begin(), promoted.end(), top) != promoted.end()) continue;
        promoted.push_back(top);
        promote(config.output_dir / (top + ".partial"), config.output_dir / top);
    }
    promote(config.output_dir / "manifest.json.partial", config.output_dir / "manifest.json");
    files.outputs.push_back("manifest.json");
    return files;
}

}  // namespace infodemic::report
