#include "infodemic/reliability.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>
#include <unordered_set>

#include "infodemic/csv.hpp"

namespace infodemic::reliability {

std::string_view to_string(SourceLabel l) { return l == SourceLabel::questionable ? "questionable" : "reliable"; }

SourceLabel source_label_from_string(std::string_view s) {
    std::string lower(s);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "questionable") return SourceLabel::questionable;
    if (lower == "reliable") return SourceLabel::reliable;
    throw std::invalid_argument("unknown source label: " + std::string(s));
}

std::string_view to_string(PostLabel l) {
    switch (l) {
        case PostLabel::questionable: return "questionable";
        case PostLabel::reliable: return "reliable";
        case PostLabel::unmatched: return "unmatched";
        case PostLabel::no_url: return "no_url";
    }
    return "no_url";
}

std::string_view to_string(SeriesQuantity q) {
    switch (q) {
        case SeriesQuantity::posts: return "posts";
        case SeriesQuantity::interactions: return "interactions";
        case SeriesQuantity::users: return "users";
    }
    return "posts";
}

std::optional<std::string> normalize_domain(std::string_view url) {
    auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
    while (!url.empty() && is_space(url.front())) url.remove_prefix(1);
    while (!url.empty() && is_space(url.back())) url.remove_suffix(1);
    if (url.empty() || std::any_of(url.begin(), url.end(), is_space)) return std::nullopt;

    if (const auto scheme = url.find("://"); scheme != std::string_view::npos) {
        const auto name = url.substr(0, scheme);
        if (name.empty() || !std::all_of(name.begin(), name.end(), [](char c) {
                return std::isalnum(static_cast<unsigned char>(c)) || c == '+' || c == '-' || c == '.';
            }))
            return std::nullopt;
        url.remove_prefix(scheme + 3);
    } else if (url.starts_with("//")) {
        url.remove_prefix(2);
    }
    url = url.substr(0, url.find_first_of("/?#"));
    if (const auto at = url.rfind('@'); at != std::string_view::npos) url.remove_prefix(at + 1);
    if (const auto colon = url.rfind(':'); colon != std::string_view::npos) {
        const auto port = url.substr(colon + 1);
        if (!std::all_of(port.begin(), port.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
            return std::nullopt;
        url = url.substr(0, colon);
    }
    std::string host(url);
    std::transform(host.begin(), host.end(), host.begin(), [](unsigned char c) { return std::tolower(c); });
    if (!host.empty() && host.back() == '.') host.pop_back();
    if (host.starts_with("www.")) host.erase(0, 4);

    if (host.empty() || host.find('.') == std::string::npos) return std::nullopt;
    if (host.front() == '.' || host.find("..") != std::string::npos) return std::nullopt;
    if (!std::all_of(host.begin(), host.end(), [](char c) {
            return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.';
        }))
        return std::nullopt;
    const auto tld = std::string_view(host).substr(host.rfind('.') + 1);
    if (!std::any_of(tld.begin(), tld.end(), [](char c) { return std::isalpha(static_cast<unsigned char>(c)); }))
        return std::nullopt;
    return host;
}

void SourceList::add(std::string_view domain, SourceLabel label) {
    auto normalized = normalize_domain(domain);
    if (!normalized) throw std::invalid_argument("invalid source domain: " + std::string(domain));
    if (!entries_.emplace(std::move(*normalized), label).second)
        throw std::invalid_argument("duplicate source domain: " + std::string(domain));
}

std::optional<std::pair<std::string, SourceLabel>> SourceList::match(std::string_view host) const {
    for (;;) {
        if (auto it = entries_.find(std::string(host)); it != entries_.end()) return *it;
        const auto dot = host.find('.');
        if (dot == std::string_view::npos) return std::nullopt;
        host.remove_prefix(dot + 1);
    }
}

std::size_t SourceList::count(SourceLabel label) const {
    return static_cast<std::size_t>(
        std::count_if(entries_.begin(), entries_.end(), [&](const auto& e) { return e.second == label; }));
}

SourceList SourceList::from_csv(const std::filesystem::path& path) {
    csv::Row header;
    const auto rows = csv::read_file(path, &header);
    if (header.size() < 2 || header[0] != "domain" || header[1] != "label")
        throw std::runtime_error(path.string() + ": expected header 'domain,label'");
    SourceList list;
    for (const auto& r : rows) {
        if (r.size() < 2) throw std::runtime_error(path.string() + ": short row");
        list.add(r[0], source_label_from_string(r[1]));
    }
    return list;
}

ShortenerMap shortener_map_from_csv(const std::filesystem::path& path) {
    csv::Row header;
    const auto rows = csv::read_file(path, &header);
    if (header.size() < 2 || header[0] != "short_url" || header[1] != "expanded_url")
        throw std::runtime_error(path.string() + ": expected header 'short_url,expanded_url'");
    ShortenerMap map;
    for (const auto& r : rows)
        if (r.size() >= 2) map[r[0]] = r[1];
    return map;
}

std::vector<LabeledPost> classify_posts(const PlatformCorpus& corpus, const SourceList& sources,
                                        const ShortenerMap* shorteners) {
    if (sources.empty()) throw std::invalid_argument("source list is empty");
    std::vector<LabeledPost> out;
    out.reserve(corpus.posts.size());
    for (std::size_t idx = 0; idx < corpus.posts.size(); ++idx) {
        const Post& p = corpus.posts[idx];
        LabeledPost lp;
        lp.post_index = idx;
        lp.post_id = p.id;
        lp.author_id = p.author_id;
        lp.day = p.day;
        lp.interactions = p.interactions();
        lp.url_count = p.urls.size();
        lp.label = p.urls.empty() ? PostLabel::no_url : PostLabel::unmatched;
        for (const auto& raw : p.urls) {
            std::string_view url = raw;
            if (shorteners != nullptr)
                if (auto it = shorteners->find(raw); it != shorteners->end()) url = it->second;
            const auto host = normalize_domain(url);
            if (!host) continue;
            lp.hosts.push_back(*host);
            if (lp.matched_domain) continue;
            if (auto m = sources.match(*host)) {
                lp.matched_domain = m->first;
                lp.label = m->second == SourceLabel::questionable ? PostLabel::questionable : PostLabel::reliable;
            }
        }
        out.push_back(std::move(lp));
    }
    return out;
}

MatchStats match_stats(std::span<const LabeledPost> labeled) {
    MatchStats s;
    for (const auto& lp : labeled) {
        if (lp.label == PostLabel::no_url) continue;
        ++s.url_posts;
        if (lp.label == PostLabel::questionable) ++s.questionable;
        if (lp.label == PostLabel::reliable) ++s.reliable;
    }
    s.matched = s.questionable + s.reliable;
    if (s.url_posts > 0) s.matched_fraction = static_cast<double>(s.matched) / static_cast<double>(s.url_posts);
    if (s.matched > 0) {
        s.questionable_share = static_cast<double>(s.questionable) / static_cast<double>(s.matched);
        s.reliable_share = 1.0 - *s.questionable_share;
    }
    return s;
}

SocialRegistry default_social_registry() {
    return {
        {"gab", {"gab.com", "gab.ai"}},
        {"reddit", {"reddit.com", "redd.it"}},
        {"youtube", {"youtube.com", "youtu.be"}},
        {"instagram", {"instagram.com", "instagr.am"}},
        {"twitter", {"twitter.com"}},
        {"facebook", {"facebook.com", "fb.com", "fb.me"}},
    };
}

std::vector<std::string> default_social_columns() {
    return {"gab", "reddit", "youtube", "instagram", "twitter", "facebook"};
}

CrosslinkRow crosslink_stats(std::span<const LabeledPost> labeled, const SocialRegistry& registry) {
    CrosslinkRow row;
    std::map<std::string, std::size_t> hits;
    for (const auto& [name, domains] : registry) hits[name] = 0;
    auto belongs = [](const std::string& host, const std::string& domain) {
        return host == domain ||
               (host.size() > domain.size() && host.ends_with(domain) && host[host.size() - domain.size() - 1] == '.');
    };
    for (const auto& lp : labeled) {
        row.total_urls += lp.url_count;
        for (const auto& host : lp.hosts)
            for (const auto& [name, domains] : registry)
                if (std::any_of(domains.begin(), domains.end(), [&](const auto& d) { return belongs(host, d); }))
                    ++hits[name];
    }
    for (const auto& [name, count] : hits)
        row.fraction[name] = row.total_urls == 0 ? 0.0 : static_cast<double>(count) / static_cast<double>(row.total_urls);
    return row;
}

PairedSeries paired_cumulative_series(std::span<const LabeledPost> labeled, SeriesQuantity quantity, DayRange window) {
    PairedSeries s;
    const auto n = static_cast<std::size_t>(std::max<std::int64_t>(window.length(), 0));
    s.day.resize(n);
    for (std::size_t i = 0; i < n; ++i) s.day[i] = window.first + static_cast<Day>(i);
    std::vector<double> rel(n, 0.0), que(n, 0.0);

    std::vector<const LabeledPost*> ordered;
    for (const auto& lp : labeled)
        if ((lp.label == PostLabel::questionable || lp.label == PostLabel::reliable) && window.contains(lp.day))
            ordered.push_back(&lp);
    std::stable_sort(ordered.begin(), ordered.end(), [](const auto* a, const auto* b) { return a->day < b->day; });

    std::unordered_set<std::string> seen_rel, seen_que;
    for (const auto* lp : ordered) {
        const bool q = lp->label == PostLabel::questionable;
        auto& bucket = (q ? que : rel)[static_cast<std::size_t>(lp->day - window.first)];
        switch (quantity) {
            case SeriesQuantity::posts: bucket += 1.0; break;
            case SeriesQuantity::interactions: bucket += static_cast<double>(lp->interactions); break;
            case SeriesQuantity::users:
                if ((q ? seen_que : seen_rel).insert(lp->author_id).second) bucket += 1.0;
                break;
        }
    }
    s.reliable.resize(n);
    s.questionable.resize(n);
    double rx = 0.0, qy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        s.reliable[i] = (rx += rel[i]);
        s.questionable[i] = (qy += que[i]);
    }
    return s;
}

RegressionResult linear_regression(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("regression inputs differ in length");
    if (x.size() < 2) throw std::invalid_argument("regression needs at least two points");
    double mean_x = 0.0, mean_y = 0.0, sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double n = static_cast<double>(k + 1);
        const double dx = x[k] - mean_x;
        const double dy = y[k] - mean_y;
        mean_x += dx / n;
        mean_y += dy / n;
        sxx += dx * (x[k] - mean_x);
        sxy += dx * (y[k] - mean_y);
        syy += dy * (y[k] - mean_y);
    }
    if (!(sxx > 0.0)) throw DataError("degenerate regressor");
    RegressionResult r;
    r.n = x.size();
    r.slope = sxy / sxx;
    r.intercept = mean_y - r.slope * mean_x;
    r.r_squared = syy > 0.0 ? std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0) : 1.0;
    return r;
}

std::optional<double> relative_amplification(double e_unreliable, double e_reliable) {
    if (!(e_reliable > 0.0)) return std::nullopt;
    return e_unreliable / e_reliable;
}

AmplificationReport amplification(std::span<const LabeledPost> labeled) {
    AmplificationReport a;
    for (const auto& lp : labeled) {
        if (lp.label == PostLabel::questionable) {
            ++a.questionable_posts;
            a.questionable_interactions += lp.interactions;
        } else if (lp.label == PostLabel::reliable) {
            ++a.reliable_posts;
            a.reliable_interactions += lp.interactions;
        }
    }
    if (a.questionable_posts > 0)
        a.e_unreliable = static_cast<double>(a.questionable_interactions) / static_cast<double>(a.questionable_posts);
    if (a.reliable_posts > 0)
        a.e_reliable = static_cast<double>(a.reliable_interactions) / static_cast<double>(a.reliable_posts);
    if (a.e_unreliable && a.e_reliable) a.alpha = relative_amplification(*a.e_unreliable, *a.e_reliable);
    return a;
}

}  // namespace infodemic::reliability
