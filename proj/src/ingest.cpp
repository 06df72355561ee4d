#include "infodemic/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "infodemic/csv.hpp"

namespace infodemic {

namespace {

constexpr std::string_view kPlatformNames[] = {"gab", "reddit", "youtube", "instagram", "twitter", "other"};

std::string lowercase(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

}  // namespace

std::string_view to_string(Platform p) { return kPlatformNames[static_cast<int>(p)]; }

Platform platform_from_string(std::string_view name) {
    const std::string lower = lowercase(name);
    for (int i = 0; i < 6; ++i)
        if (kPlatformNames[i] == lower) return static_cast<Platform>(i);
    throw std::invalid_argument("unknown platform: " + std::string(name));
}

std::vector<Platform> all_platforms() {
    return {Platform::gab, Platform::reddit, Platform::youtube, Platform::instagram, Platform::twitter, Platform::other};
}

std::string_view to_string(PostKind k) { return k == PostKind::post ? "post" : "comment"; }

PostKind post_kind_from_string(std::string_view name) {
    if (name == "post") return PostKind::post;
    if (name == "comment") return PostKind::comment;
    throw std::invalid_argument("unknown post kind: " + std::string(name));
}

std::string_view to_string(CurveQuantity q) {
    switch (q) {
        case CurveQuantity::cumulative_authors: return "cumulative_authors";
        case CurveQuantity::cumulative_posts: return "cumulative_posts";
        case CurveQuantity::cumulative_interactions: return "cumulative_interactions";
        case CurveQuantity::daily: return "daily";
    }
    return "unknown";
}

std::int64_t Post::interactions() const {
    std::int64_t total = 0;
    for (const auto& [kind, count] : reactions) total += count;
    return total;
}

bool EpiCurve::non_decreasing() const { return std::is_sorted(value.begin(), value.end()); }

void EpiCurve::validate() const {
    if (day.size() != value.size()) throw std::invalid_argument("curve day/value lengths differ");
    for (std::size_t i = 1; i < day.size(); ++i)
        if (day[i] <= day[i - 1]) throw std::invalid_argument("curve days must be strictly increasing");
}

EpiCurve to_daily(const EpiCurve& cumulative) {
    EpiCurve out = cumulative;
    out.quantity = CurveQuantity::daily;
    for (std::size_t i = out.value.size(); i-- > 1;) out.value[i] = cumulative.value[i] - cumulative.value[i - 1];
    return out;
}

namespace ingest {

namespace {

bool parse_int(std::string_view s, int& out) {
    if (s.empty()) return false;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

}  // namespace

std::optional<std::chrono::sys_days> parse_date(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
    int y = 0, m = 0, d = 0;
    if (!parse_int(text.substr(0, 4), y) || !parse_int(text.substr(5, 2), m) || !parse_int(text.substr(8, 2), d))
        return std::nullopt;
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                                          std::chrono::day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) return std::nullopt;
    return std::chrono::sys_days{ymd};
}

std::optional<std::int64_t> parse_timestamp(std::string_view text) {
    if (text.size() < 10) return std::nullopt;
    const auto date = parse_date(text.substr(0, 10));
    if (!date) return std::nullopt;
    std::int64_t seconds = std::chrono::duration_cast<std::chrono::seconds>(date->time_since_epoch()).count();
    std::string_view rest = text.substr(10);
    if (rest.empty()) return seconds;
    if (rest[0] != 'T' && rest[0] != 't' && rest[0] != ' ') return std::nullopt;
    rest.remove_prefix(1);
    int hh = 0, mm = 0, ss = 0;
    if (rest.size() < 5 || rest[2] != ':' || !parse_int(rest.substr(0, 2), hh) || !parse_int(rest.substr(3, 2), mm))
        return std::nullopt;
    rest.remove_prefix(5);
    if (!rest.empty() && rest[0] == ':') {
        if (rest.size() < 3 || !parse_int(rest.substr(1, 2), ss)) return std::nullopt;
        rest.remove_prefix(3);
        if (!rest.empty() && rest[0] == '.') {
            std::size_t i = 1;
            while (i < rest.size() && std::isdigit(static_cast<unsigned char>(rest[i]))) ++i;
            if (i == 1) return std::nullopt;
            rest.remove_prefix(i);
        }
    }
    if (hh > 23 || mm > 59 || ss > 60) return std::nullopt;
    seconds += hh * 3600 + mm * 60 + ss;
    if (rest.empty() || rest == "Z" || rest == "z") return seconds;
    if ((rest[0] == '+' || rest[0] == '-') && rest.size() == 6 && rest[3] == ':') {
        int oh = 0, om = 0;
        if (!parse_int(rest.substr(1, 2), oh) || !parse_int(rest.substr(4, 2), om)) return std::nullopt;
        const int offset = oh * 3600 + om * 60;
        return rest[0] == '+' ? seconds - offset : seconds + offset;
    }
    return std::nullopt;
}

Day day_of(std::chrono::sys_days date, const Epoch& epoch) { return (date - epoch.day_one).count() + 1; }

Day day_of(std::int64_t utc_seconds, const Epoch& epoch) {
    const auto tp = std::chrono::sys_seconds{std::chrono::seconds{utc_seconds}};
    return day_of(std::chrono::floor<std::chrono::days>(tp), epoch);
}

std::chrono::sys_days date_of(Day day, const Epoch& epoch) { return epoch.day_one + std::chrono::days{day - 1}; }

std::optional<Post> parse_post(std::string_view line, const Epoch& epoch) {
    using nlohmann::json;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) return std::nullopt;
    try {
        Post p;
        const auto& id = j.at("id");
        if (id.is_string())
            p.id = id.get<std::string>();
        else if (id.is_number_integer())
            p.id = id.dump();
        else
            return std::nullopt;
        if (p.id.empty()) return std::nullopt;
        p.platform = platform_from_string(j.at("platform").get<std::string>());
        const auto& author = j.at("author_id");
        p.author_id = author.is_string() ? author.get<std::string>() : author.dump();
        if (p.author_id.empty() || author.is_null()) return std::nullopt;
        const auto ts = parse_timestamp(j.at("timestamp").get<std::string>());
        if (!ts) return std::nullopt;
        p.timestamp = *ts;
        p.day = day_of(*ts, epoch);
        p.kind = post_kind_from_string(j.at("kind").get<std::string>());
        p.text = j.value("text", std::string{});
        if (j.contains("urls")) {
            for (const auto& u : j.at("urls")) p.urls.push_back(u.get<std::string>());
        }
        if (j.contains("reactions")) {
            for (const auto& [key, val] : j.at("reactions").items()) {
                if (!val.is_number_integer()) return std::nullopt;
                const auto count = val.get<std::int64_t>();
                if (count < 0) return std::nullopt;
                p.reactions[key] = count;
            }
        }
        return p;
    } catch (const std::exception&) {
        return std::nullopt;
    }
}

LoadedCorpus parse_corpus(std::string_view jsonl, Platform platform, DayRange window, const Epoch& epoch) {
    if (window.first > window.last) throw std::invalid_argument("window start after window end");
    LoadedCorpus out;
    out.corpus.platform = platform;
    out.corpus.window = window;
    std::unordered_set<std::string> seen;
    std::size_t pos = 0;
    while (pos < jsonl.size()) {
        std::size_t end = jsonl.find('\n', pos);
        if (end == std::string_view::npos) end = jsonl.size();
        std::string_view line = jsonl.substr(pos, end - pos);
        pos = end + 1;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
        ++out.report.lines;
        auto post = parse_post(line, epoch);
        if (!post || post->platform != platform || !seen.insert(post->id).second) {
            ++out.report.rejected;
            continue;
        }
        if (!window.contains(post->day)) {
            ++out.report.out_of_window;
            continue;
        }
        out.corpus.posts.push_back(std::move(*post));
    }
    if (out.report.lines > 0 && 2 * out.report.rejected > out.report.lines)
        throw DataError("more than half of the lines are malformed (" + std::to_string(out.report.rejected) + " of " +
                        std::to_string(out.report.lines) + "); wrong input file?");
    return out;
}

LoadedCorpus load_corpus(const std::filesystem::path& path, Platform platform, DayRange window, const Epoch& epoch) {
    return parse_corpus(csv::read_text(path), platform, window, epoch);
}

std::string to_jsonl(const Post& post) {
    nlohmann::ordered_json j;
    j["id"] = post.id;
    j["platform"] = to_string(post.platform);
    j["author_id"] = post.author_id;
    const auto tp = std::chrono::sys_seconds{std::chrono::seconds{post.timestamp}};
    const auto date = std::chrono::floor<std::chrono::days>(tp);
    const std::chrono::year_month_day ymd{date};
    const std::chrono::hh_mm_ss hms{tp - date};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                  static_cast<int>(hms.seconds().count()));
    j["timestamp"] = buf;
    j["kind"] = to_string(post.kind);
    j["text"] = post.text;
    j["urls"] = post.urls;
    j["reactions"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : post.reactions) j["reactions"][k] = v;
    return j.dump();
}

PlatformCorpus filter_keywords(const PlatformCorpus& corpus, const std::vector<std::string>& keywords) {
    if (keywords.empty()) throw std::invalid_argument("keyword list is empty");
    std::vector<std::string> lowered;
    lowered.reserve(keywords.size());
    for (const auto& k : keywords) lowered.push_back(lowercase(k));
    auto matches = [&](const std::string& haystack) {
        const std::string lower = lowercase(haystack);
        return std::any_of(lowered.begin(), lowered.end(),
                           [&](const std::string& k) { return lower.find(k) != std::string::npos; });
    };
    PlatformCorpus out;
    out.platform = corpus.platform;
    out.window = corpus.window;
    for (const auto& p : corpus.posts) {
        if (matches(p.text) || std::any_of(p.urls.begin(), p.urls.end(), matches)) out.posts.push_back(p);
    }
    return out;
}

std::vector<std::string> read_keywords(const std::filesystem::path& path) {
    std::istringstream in(csv::read_text(path));
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        const auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos || line[b] == '#') continue;
        const auto e = line.find_last_not_of(" \t\r");
        out.push_back(lowercase(line.substr(b, e - b + 1)));
    }
    return out;
}

namespace {

// Accumulates per-day increments over the window and carries the running
// total forward so every day of the window is present.
EpiCurve accumulate(const DayRange& window, const std::vector<std::pair<Day, double>>& increments, CurveQuantity q) {
    EpiCurve curve;
    curve.quantity = q;
    const auto n = static_cast<std::size_t>(std::max<std::int64_t>(window.length(), 0));
    curve.day.resize(n);
    std::vector<double> daily(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) curve.day[i] = window.first + static_cast<Day>(i);
    for (const auto& [d, inc] : increments)
        if (window.contains(d)) daily[static_cast<std::size_t>(d - window.first)] += inc;
    curve.value.resize(n);
    double running = 0.0;
    for (std::size_t i = 0; i < n; ++i) curve.value[i] = (running += daily[i]);
    return curve;
}

}  // namespace

EpiCurve cumulative_new_authors(const PlatformCorpus& corpus) {
    std::unordered_map<std::string, Day> first_seen;
    for (const auto& p : corpus.posts) {
        if (!corpus.window.contains(p.day)) continue;
        auto [it, inserted] = first_seen.emplace(p.author_id, p.day);
        if (!inserted) it->second = std::min(it->second, p.day);
    }
    if (first_seen.empty()) throw DataError("no data");
    std::vector<std::pair<Day, double>> inc;
    inc.reserve(first_seen.size());
    for (const auto& [author, day] : first_seen) inc.emplace_back(day, 1.0);
    return accumulate(corpus.window, inc, CurveQuantity::cumulative_authors);
}

EpiCurve cumulative_posts(const PlatformCorpus& corpus, std::optional<PostKind> kind) {
    std::vector<std::pair<Day, double>> inc;
    for (const auto& p : corpus.posts)
        if (!kind || p.kind == *kind) inc.emplace_back(p.day, 1.0);
    return accumulate(corpus.window, inc, CurveQuantity::cumulative_posts);
}

EpiCurve cumulative_interactions(const PlatformCorpus& corpus) {
    std::vector<std::pair<Day, double>> inc;
    for (const auto& p : corpus.posts) inc.emplace_back(p.day, static_cast<double>(p.interactions()));
    return accumulate(corpus.window, inc, CurveQuantity::cumulative_interactions);
}

std::map<std::string, std::int64_t> activity_histogram(const PlatformCorpus& corpus) {
    std::map<std::string, std::int64_t> out;
    for (const auto& p : corpus.posts) out[p.author_id] += 1 + p.interactions();
    return out;
}

std::string curve_to_csv(const EpiCurve& curve) {
    std::string out = "day,value\n";
    for (std::size_t i = 0; i < curve.size(); ++i)
        out += std::to_string(curve.day[i]) + "," + csv::format_double(curve.value[i]) + "\n";
    return out;
}

EpiCurve curve_from_csv(const std::filesystem::path& path, CurveQuantity quantity) {
    csv::Row header;
    const auto rows = csv::read_file(path, &header);
    if (header.size() < 2 || header[0] != "day" || header[1] != "value")
        throw std::runtime_error(path.string() + ": expected header 'day,value'");
    EpiCurve curve;
    curve.quantity = quantity;
    for (const auto& r : rows) {
        if (r.size() < 2) throw std::runtime_error(path.string() + ": short row");
        try {
            curve.day.push_back(std::stoll(r[0]));
            curve.value.push_back(std::stod(r[1]));
        } catch (const std::exception&) {
            throw std::runtime_error(path.string() + ": unparseable row '" + csv::join(r) + "'");
        }
    }
    curve.validate();
    return curve;
}

std::string histogram_to_csv(const std::map<std::string, std::int64_t>& histogram) {
    std::string out = "author_id,activity\n";
    for (const auto& [author, count] : histogram) out += csv::quote(author) + "," + std::to_string(count) + "\n";
    return out;
}

}  // namespace ingest
}  // namespace infodemic
