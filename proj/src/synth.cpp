#include "infodemic/synth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "infodemic/ingest.hpp"
#include "infodemic/rng.hpp"

namespace infodemic::synth {

std::string_view to_string(Kind k) {
    switch (k) {
        case Kind::exp_curve: return "exp_curve";
        case Kind::sir_curve: return "sir_curve";
        case Kind::clustered_vectors: return "clustered_vectors";
        case Kind::labeled_posts: return "labeled_posts";
        case Kind::platform_corpus: return "platform_corpus";
    }
    return "exp_curve";
}

Kind kind_from_string(std::string_view name) {
    for (Kind k : {Kind::exp_curve, Kind::sir_curve, Kind::clustered_vectors, Kind::labeled_posts,
                   Kind::platform_corpus})
        if (to_string(k) == name) return k;
    throw std::invalid_argument("unknown synth kind: " + std::string(name));
}

namespace {

std::vector<Day> day_grid(DayRange days) {
    if (days.last < days.first) throw std::invalid_argument("empty day range");
    std::vector<Day> out;
    for (Day d = days.first; d <= days.last; ++d) out.push_back(d);
    return out;
}

GeneratedCurve finish_curve(std::vector<Day> days, std::vector<double> exact, const CurveNoise& noise) {
    if (!(noise.sigma >= 0.0)) throw std::invalid_argument("noise sigma must be non-negative");
    GeneratedCurve out;
    out.curve.day = std::move(days);
    out.curve.value = exact;
    if (noise.sigma > 0.0) {
        Rng rng(noise.seed);
        const double scale = noise.sigma * exact.back();
        double running = 0.0;
        for (auto& v : out.curve.value) {
            v = std::max(v + scale * rng.normal(), 0.0);
            running = std::max(running, v);
            v = running;
        }
    }
    if (noise.round)
        for (auto& v : out.curve.value) v = std::round(v);
    out.exact = std::move(exact);
    return out;
}

}  // namespace

GeneratedCurve gen_exp_curve(const epi::ExpParams& params, DayRange days, const CurveNoise& noise, Day time_origin) {
    auto grid = day_grid(days);
    std::vector<double> exact;
    for (Day d : grid) exact.push_back(epi::exp_model_eval(params, static_cast<double>(d - time_origin)));
    return finish_curve(std::move(grid), std::move(exact), noise);
}

GeneratedCurve gen_sir_curve(const epi::SirParams& params, DayRange days, const CurveNoise& noise, double step) {
    auto grid = day_grid(days);
    std::vector<double> t;
    for (Day d : grid) t.push_back(static_cast<double>(d - days.first));
    auto exact = epi::sir_cumulative_authors(epi::sir_integrate(params, t, step));
    return finish_curve(std::move(grid), std::move(exact), noise);
}

ClusteredVectors gen_clustered_vectors(std::size_t n_clusters, std::size_t points_per_cluster, std::size_t dim,
                                       double separation, std::uint64_t seed) {
    if (n_clusters == 0 || points_per_cluster == 0) throw std::invalid_argument("empty cluster spec");
    if (n_clusters > dim) throw std::invalid_argument("more clusters than dimensions");
    Rng rng(seed);

    // Gram-Schmidt on Gaussian draws.
    std::vector<std::vector<double>> centers;
    while (centers.size() < n_clusters) {
        std::vector<double> c(dim);
        for (auto& x : c) x = rng.normal();
        for (const auto& prev : centers) {
            double proj = 0.0;
            for (std::size_t j = 0; j < dim; ++j) proj += c[j] * prev[j];
            for (std::size_t j = 0; j < dim; ++j) c[j] -= proj * prev[j];
        }
        double norm = 0.0;
        for (double x : c) norm += x * x;
        norm = std::sqrt(norm);
        if (norm < 1e-8) continue;
        for (auto& x : c) x /= norm;
        centers.push_back(std::move(c));
    }

    ClusteredVectors out;
    out.vectors = topics::Vectors(n_clusters * points_per_cluster, dim);
    for (std::size_t c = 0; c < n_clusters; ++c)
        for (std::size_t p = 0; p < points_per_cluster; ++p) {
            auto row = out.vectors.row(c * points_per_cluster + p);
            for (std::size_t j = 0; j < dim; ++j) row[j] = separation * centers[c][j] + rng.normal();
            out.labels.push_back(static_cast<int>(c));
        }
    return out;
}

reliability::SourceList fixture_sources() {
    reliability::SourceList sources;
    sources.add("dubious.example", reliability::SourceLabel::questionable);
    sources.add("trusted.example", reliability::SourceLabel::reliable);
    return sources;
}

std::int64_t timestamp_on(Day day, std::int64_t seconds_into_day) {
    const auto date = ingest::date_of(day);
    return std::chrono::duration_cast<std::chrono::seconds>(date.time_since_epoch()).count() + seconds_into_day;
}

namespace {

std::int64_t draw_reactions(const ReactionSpec& spec, Rng& rng) {
    if (spec.mean < 0.0) throw std::invalid_argument("reaction mean must be non-negative");
    if (spec.law == ReactionLaw::constant) {
        if (spec.mean != std::floor(spec.mean)) throw std::invalid_argument("constant reactions must be integral");
        return static_cast<std::int64_t>(spec.mean);
    }
    return rng.poisson(spec.mean);
}

Post make_post(std::string id, Platform platform, std::string author, Day day, Rng& rng) {
    Post p;
    p.id = std::move(id);
    p.platform = platform;
    p.author_id = std::move(author);
    p.day = day;
    p.timestamp = timestamp_on(day, static_cast<std::int64_t>(rng.below(86400)));
    return p;
}

}  // namespace

LabeledPostsFixture gen_labeled_posts(const LabeledPostsSpec& spec, std::uint64_t seed) {
    LabeledPostsFixture out;
    out.sources = fixture_sources();
    out.corpus.platform = spec.platform;
    out.corpus.window = spec.days;
    Rng rng(seed);
    auto day = [&] { return spec.days.first + static_cast<Day>(rng.below(static_cast<std::uint64_t>(spec.days.length()))); };

    for (std::size_t i = 0; i < spec.n_questionable; ++i) {
        Post p = make_post("q" + std::to_string(i), spec.platform, "qa" + std::to_string(i), day(), rng);
        p.text = "covid story " + std::to_string(i);
        p.urls = {"https://dubious.example/story/" + std::to_string(i)};
        p.reactions["likes"] = draw_reactions(spec.questionable, rng);
        out.corpus.posts.push_back(std::move(p));
    }
    for (std::size_t i = 0; i < spec.n_reliable; ++i) {
        Post p = make_post("r" + std::to_string(i), spec.platform, "ra" + std::to_string(i), day(), rng);
        p.text = "covid report " + std::to_string(i);
        p.urls = {"https://www.trusted.example/news/" + std::to_string(i)};
        p.reactions["likes"] = draw_reactions(spec.reliable, rng);
        out.corpus.posts.push_back(std::move(p));
    }
    if (spec.n_questionable > 0) out.expected_e_unreliable = spec.questionable.mean;
    if (spec.n_reliable > 0) out.expected_e_reliable = spec.reliable.mean;
    if (out.expected_e_unreliable && out.expected_e_reliable)
        out.expected_alpha = reliability::relative_amplification(*out.expected_e_unreliable, *out.expected_e_reliable);
    return out;
}

PlatformCorpusFixture gen_platform_corpus(const PlatformCorpusSpec& spec, std::uint64_t seed) {
    if (spec.reliable_per_questionable < 1) throw std::invalid_argument("reliable_per_questionable must be >= 1");
    if (spec.questionable_reactions < 0 || spec.reliable_reactions <= 0)
        throw std::invalid_argument("reaction counts must be positive");
    PlatformCorpusFixture out;
    out.sources = fixture_sources();
    out.corpus.platform = spec.platform;
    out.corpus.window = spec.window;
    out.authors.quantity = CurveQuantity::cumulative_authors;

    static constexpr std::string_view kWords[] = {
        "vaccine", "lockdown", "hospital", "masks",   "testing", "economy", "schools", "travel",
        "symptoms", "outbreak", "quarantine", "doctors", "markets", "borders", "research", "cases",
    };
    static constexpr std::string_view kSocial[] = {"https://youtu.be/", "https://www.reddit.com/r/",
                                                   "https://gab.com/", "https://twitter.com/"};

    Rng rng(seed);
    auto sentence = [&] {
        std::string s = "coronavirus";
        for (int w = 0; w < 6; ++w) s += " " + std::string(kWords[rng.below(std::size(kWords))]);
        return s;
    };

    const std::string tag(to_string(spec.platform));
    double previous = 0.0;
    std::int64_t author = 0;
    std::int64_t post = 0;
    for (Day d = spec.window.first; d <= spec.window.last; ++d) {
        const double target = std::round(epi::exp_model_eval(spec.growth, static_cast<double>(d)));
        const double cumulative = std::max(target, previous);
        for (double n = previous; n < cumulative; n += 1.0) {
            const std::string who = tag + "_u" + std::to_string(author++);
            auto add = [&](std::vector<std::string> urls, std::int64_t reactions) {
                Post p = make_post(tag + "_p" + std::to_string(post++), spec.platform, who, d, rng);
                p.text = sentence();
                p.urls = std::move(urls);
                p.reactions["likes"] = reactions;
                out.corpus.posts.push_back(std::move(p));
            };
            add({"https://dubious.example/a/" + std::to_string(post)}, spec.questionable_reactions);
            for (int r = 0; r < spec.reliable_per_questionable; ++r)
                add({"https://trusted.example/b/" + std::to_string(post)}, spec.reliable_reactions);
            add({std::string(kSocial[rng.below(std::size(kSocial))]) + std::to_string(post)}, 1);
            add({}, 0);
        }
        previous = cumulative;
        out.authors.day.push_back(d);
        out.authors.value.push_back(cumulative);
    }

    const double k = spec.reliable_per_questionable;
    out.expected_alpha =
        static_cast<double>(spec.questionable_reactions) / static_cast<double>(spec.reliable_reactions);
    out.expected_rho_posts = 1.0 / k;
    out.expected_matched_fraction = (1.0 + k) / (2.0 + k);
    out.expected_questionable_share = 1.0 / (1.0 + k);
    return out;
}

}  // namespace infodemic::synth
