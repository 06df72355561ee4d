// Acceptance checks, one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>

#include "infodemic/epimodels.hpp"
#include "infodemic/fitting.hpp"
#include "infodemic/ingest.hpp"
#include "infodemic/reliability.hpp"
#include "infodemic/report.hpp"
#include "infodemic/rng.hpp"
#include "infodemic/synth.hpp"
#include "infodemic/topics.hpp"

using namespace infodemic;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

struct Outcome {
    bool ok = true;
    std::ostringstream detail;

    void require(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            detail << " [failed: " << what << "]";
        }
    }
};

int failures = 0;

void report(int id, const std::string& name, Outcome& o) {
    std::printf("%s criterion %d: %s.%s\n", o.ok ? "PASS" : "FAIL", id, name.c_str(), o.detail.str().c_str());
    std::fflush(stdout);
    if (!o.ok) ++failures;
}

void run(int id, const std::string& name, const std::function<void(Outcome&)>& body) {
    Outcome o;
    try {
        body(o);
    } catch (const std::exception& e) {
        o.ok = false;
        o.detail << " [exception: " << e.what() << "]";
    }
    report(id, name, o);
}

// 1 -----------------------------------------------------------------------
void exp_recovery(Outcome& o) {
    const auto t0 = Clock::now();
    double worst_r0 = 0.0, worst_d = 0.0;
    for (double r0 : {1.2, 1.5, 2.0, 2.6})
        for (double d : {0.0, 0.01, 0.05}) {
            const auto curve = synth::gen_exp_curve({r0, d}, {1, 45}).curve;
            const auto fit = fitting::fit_exp(curve);
            worst_r0 = std::max(worst_r0, rel(fit.exp_params().r0, r0));
            // d = 0 has no relative scale; compare absolutely there
            worst_d = std::max(worst_d, d > 0 ? rel(fit.exp_params().d, d) : std::abs(fit.exp_params().d));
        }
    const double secs = seconds_since(t0);
    o.detail << " worst r0 rel err " << worst_r0 << ", worst d err " << worst_d << ", " << secs << " s";
    o.require(worst_r0 <= 1e-6, "r0 within 1e-6");
    o.require(worst_d <= 1e-6, "d within 1e-6");
    o.require(secs < 5.0, "runtime < 5 s");
}

// 2 -----------------------------------------------------------------------
void sir_recovery(Outcome& o) {
    const auto t0 = Clock::now();
    double worst = 0.0;
    for (double ratio : {1.5, 2.0, 3.0, 5.0}) {
        const epi::SirParams truth{0.25 * ratio, 0.25, 1000.0, 1.0};
        const auto fit = fitting::fit_sir(synth::gen_sir_curve(truth, {1, 45}).curve);
        worst = std::max(worst, rel(fit.r0(), ratio));
    }
    const auto wild = fitting::fit_sir(synth::gen_sir_curve({6.0, 0.2, 1e4, 1.0}, {1, 30}).curve);
    const bool warned = wild.r0() > fitting::kUnrealisticR0 && !wild.warnings.empty();
    const double secs = seconds_since(t0);
    o.detail << " worst ratio rel err " << worst << ", R0 " << wild.r0() << " flagged " << (warned ? "yes" : "no")
             << ", " << secs << " s";
    o.require(worst <= 0.05, "ratio within 5%");
    o.require(warned, "warning for R0 > 20");
    o.require(secs < 60.0, "runtime < 60 s");
}

// 3 -----------------------------------------------------------------------
void bootstrap_coverage(Outcome& o) {
    const epi::ExpParams truth{1.5, 0.004};
    const std::uint64_t master = 20200214;
    const int trials = 200, B = 1000;
    fitting::BootstrapOptions opt;
    opt.threads = 0;  // all cores; results do not depend on it
    int covered = 0;
    double width = 0.0;
    for (int t = 0; t < trials; ++t) {
        const auto curve_seed = derive_seed(master, 2 * static_cast<std::uint64_t>(t));
        const auto boot_seed = derive_seed(master, 2 * static_cast<std::uint64_t>(t) + 1);
        const auto curve = synth::gen_exp_curve(truth, {1, 45}, {0.02, curve_seed}).curve;
        const auto b = fitting::bootstrap_r0(curve, fitting::Model::exp, B, boot_seed, opt);
        if (b.interval.lower <= truth.r0 && truth.r0 <= b.interval.upper) ++covered;
        width += b.interval.upper - b.interval.lower;
    }
    const double coverage = static_cast<double>(covered) / trials;
    const auto exact = fitting::bootstrap_r0(synth::gen_exp_curve(truth, {1, 45}).curve, fitting::Model::exp, B, master, opt);
    const double point_width = exact.interval.upper - exact.interval.lower;
    o.detail << " coverage " << covered << "/" << trials << " (mean width " << width / trials
             << "), noiseless width " << point_width;
    o.require(coverage >= 0.8, "coverage >= 80%");
    o.require(point_width <= 1e-6 && std::abs(exact.interval.point - truth.r0) <= 1e-6, "noiseless point width");
}

// 4 -----------------------------------------------------------------------
void sir_integrator(Outcome& o) {
    std::vector<double> grid;
    for (int t = 0; t <= 60; ++t) grid.push_back(t);

    double worst_conservation = 0.0;
    Rng rng(404);
    std::vector<epi::SirParams> cases = {{0.5, 0.25, 1000.0, 1.0}, {0.0, 0.3, 1000.0, 5.0}, {3.0, 0.1, 1e6, 1.0}};
    for (int i = 0; i < 100; ++i) {
        epi::SirParams p{rng.uniform(0, 4), rng.uniform(0.05, 2), rng.uniform(10, 1e7), 0};
        p.initial_infected = p.population * rng.uniform(1e-7, 0.5);
        cases.push_back(p);
    }
    for (const auto& p : cases) {
        const auto tr = epi::sir_integrate(p, grid);
        for (std::size_t k = 0; k < grid.size(); ++k)
            worst_conservation =
                std::max(worst_conservation, std::abs(tr.s[k] + tr.i[k] + tr.r[k] - p.population) / p.population);
    }

    const epi::SirParams decay{0.0, 0.3, 1000.0, 5.0};
    const auto dt = epi::sir_integrate(decay, grid, 1e-3);
    double worst_decay = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k)
        worst_decay = std::max(worst_decay, rel(dt.i[k], 5.0 * std::exp(-0.3 * grid[k])));

    const epi::SirParams ref{0.5, 0.25, 1000.0, 1.0};
    const auto a = epi::sir_integrate(ref, grid, 0.05);
    const auto b = epi::sir_integrate(ref, grid, 0.025);
    double worst_halving = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        worst_halving = std::max(worst_halving, rel(a.s[k], b.s[k]));
        worst_halving = std::max(worst_halving, rel(a.i[k], b.i[k]));
        if (b.r[k] > 0) worst_halving = std::max(worst_halving, rel(a.r[k], b.r[k]));
    }
    o.detail << " conservation " << worst_conservation << "*N, decay rel err " << worst_decay << ", step halving "
             << worst_halving;
    o.require(worst_conservation <= 1e-9, "conservation");
    o.require(worst_decay <= 1e-6, "beta = 0 decay");
    o.require(worst_halving <= 1e-6, "step halving");
}

// 5 -----------------------------------------------------------------------
void amplification_checks(Outcome& o) {
    const double twitter = *reliability::relative_amplification(15.1, 15.6);

    synth::LabeledPostsSpec spec;
    spec.n_questionable = 2;
    spec.n_reliable = 4;
    spec.questionable = {synth::ReactionLaw::constant, 5};
    spec.reliable = {synth::ReactionLaw::constant, 2};
    const auto fx = synth::gen_labeled_posts(spec, 1);
    const auto labeled = reliability::classify_posts(fx.corpus, fx.sources);
    const auto amp = reliability::amplification(labeled);

    auto swapped = labeled;
    for (auto& p : swapped)
        if (p.label == reliability::PostLabel::questionable)
            p.label = reliability::PostLabel::reliable;
        else if (p.label == reliability::PostLabel::reliable)
            p.label = reliability::PostLabel::questionable;
    const auto sw = reliability::amplification(swapped);
    const double swap_err = std::abs(*sw.alpha * *amp.alpha - 1.0);

    o.detail << " twitter alpha " << twitter << ", fixture alpha " << (amp.alpha ? *amp.alpha : NAN)
             << ", swap |alpha*alpha'-1| " << swap_err;
    o.require(std::abs(twitter - 0.97) <= 0.005, "twitter anchor");
    o.require(amp.alpha && *amp.alpha == 2.5, "fixture alpha exactly 2.5");
    o.require(swap_err <= 1e-12, "class swap");
}

// 6 -----------------------------------------------------------------------
void regression_checks(Outcome& o) {
    const std::vector<double> x{0, 1, 2}, y{0, 1, 1};
    const auto r = reliability::linear_regression(x, y);
    const double hand = std::max({std::abs(r.slope - 0.5), std::abs(r.intercept - 1.0 / 6.0), std::abs(r.r_squared - 0.75)});

    Rng rng(6);
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
        const std::size_t n = 2 + rng.below(300);
        std::vector<double> xs(n), ys(n);
        const double slope = rng.uniform(-10, 10), icpt = rng.uniform(-1e3, 1e3), scale = rng.uniform(1, 1e4);
        for (std::size_t i = 0; i < n; ++i) {
            xs[i] = rng.uniform(0, scale);
            ys[i] = icpt + slope * xs[i] + rng.normal(0, scale);
        }
        // two-pass reference
        const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
        const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
        double sxx = 0, sxy = 0, syy = 0;
        for (std::size_t i = 0; i < n; ++i) {
            sxx += (xs[i] - mx) * (xs[i] - mx);
            sxy += (xs[i] - mx) * (ys[i] - my);
            syy += (ys[i] - my) * (ys[i] - my);
        }
        const double b1 = sxy / sxx, b0 = my - b1 * mx, r2 = sxy * sxy / (sxx * syy);
        const auto got = reliability::linear_regression(xs, ys);
        worst = std::max({worst, std::abs(got.slope - b1) / std::max(1.0, std::abs(b1)),
                          std::abs(got.intercept - b0) / std::max(1.0, std::abs(b0)), std::abs(got.r_squared - r2)});
    }
    o.detail << " hand example max err " << hand << ", oracle max err " << worst;
    o.require(hand <= 1e-12, "hand example");
    o.require(worst <= 1e-10, "two-pass oracle");
}

// 7 -----------------------------------------------------------------------
void matching_checks(Outcome& o) {
    reliability::SourceList sources;
    sources.add("fakenews.example", reliability::SourceLabel::questionable);
    sources.add("gazette.example", reliability::SourceLabel::reliable);
    sources.add("broadcaster.example", reliability::SourceLabel::reliable);

    PlatformCorpus c;
    auto add = [&](std::vector<std::string> urls) {
        Post p;
        p.id = std::to_string(c.posts.size());
        p.author_id = "a" + p.id;
        p.urls = std::move(urls);
        c.posts.push_back(std::move(p));
    };
    add({"https://www.fakenews.example/x"});                             // questionable
    add({"http://gazette.example/a"});                                     // reliable
    add({"https://blog.example.org/", "https://tv.broadcaster.example"});  // reliable via 2nd URL
    add({"gazette.example/c"});                                            // reliable
    add({"https://unknown.example/1"});
    add({"https://unknown.example/2"});
    add({"not a url"});
    add({"https://youtube.com/watch?v=1"});
    add({"https://twitter.com/x"});
    add({"https://elsewhere.example.net"});
    add({});
    add({});

    const auto st = reliability::match_stats(reliability::classify_posts(c, sources));
    o.detail << " url_posts " << st.url_posts << ", matched " << st.matched_fraction.value_or(NAN) << ", questionable "
             << st.questionable_share.value_or(NAN) << ", reliable " << st.reliable_share.value_or(NAN);
    o.require(st.url_posts == 10, "url posts");
    o.require(st.matched_fraction == 0.4, "matched fraction");
    o.require(st.questionable_share == 0.25, "questionable share");
    o.require(st.reliable_share == 0.75, "reliable share");
    o.require(st.questionable_share && st.reliable_share && *st.questionable_share + *st.reliable_share == 1.0,
              "shares sum to 1");
}

// 8 -----------------------------------------------------------------------
std::string pseudo_word(std::size_t i) {
    std::string w = "q";
    do {
        w += static_cast<char>('a' + i % 26);
        i /= 26;
    } while (i > 0);
    return w + "z";
}

void topics_checks(Outcome& o) {
    const auto t0 = Clock::now();

    // gradient vs central differences, V = 5
    const std::vector<std::vector<int>> contents = {{0, 1, 2, 3, 4, 1}, {2, 2, 0}, {4, 3}};
    auto emb = topics::init_embedding(5, 4, 3);
    Rng rng(12);
    for (auto& x : emb.u.data) x = rng.uniform(-1, 1);
    for (auto& x : emb.v.data) x = rng.uniform(-1, 1);
    topics::Vectors gu(5, 4), gv(5, 4);
    topics::skipgram_gradient(contents, 2, emb, gu, gv);
    double grad_err = 0.0;
    const double h = 1e-5;
    for (auto* m : {&emb.u, &emb.v}) {
        const auto& g = m == &emb.u ? gu : gv;
        for (std::size_t k = 0; k < m->data.size(); ++k) {
            const double keep = m->data[k];
            m->data[k] = keep + h;
            const double up = topics::skipgram_objective(contents, 2, emb);
            m->data[k] = keep - h;
            const double down = topics::skipgram_objective(contents, 2, emb);
            m->data[k] = keep;
            const double fd = (up - down) / (2 * h);
            grad_err = std::max(grad_err, std::abs(fd - g.data[k]) / std::max(1.0, std::abs(fd)));
        }
    }
    double softmax_err = 0.0;
    for (std::size_t j = 0; j < 5; ++j) {
        const auto p = topics::softmax_row(emb, j);
        softmax_err = std::max(softmax_err, std::abs(std::accumulate(p.begin(), p.end(), 0.0) - 1.0));
    }

    // exhaustive medoid search on every size V <= 10, k <= 3
    int pam_total = 0, pam_ok = 0;
    for (std::size_t n = 3; n <= 10; ++n)
        for (std::size_t k = 2; k <= std::min<std::size_t>(3, n); ++k)
            for (int rep = 0; rep < 40; ++rep) {
                topics::Vectors v(n, 4);
                for (auto& x : v.data) x = rng.normal();
                const auto d = topics::cosine_distances(v);
                double best = INFINITY;
                std::vector<std::size_t> idx(k);
                std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t pos, std::size_t start) {
                    if (pos == k) {
                        double c = 0;
                        for (std::size_t i = 0; i < n; ++i) {
                            double m = INFINITY;
                            for (auto j : idx) m = std::min(m, d(i, j));
                            c += m;
                        }
                        best = std::min(best, c);
                        return;
                    }
                    for (std::size_t i = start; i < n; ++i) {
                        idx[pos] = i;
                        rec(pos + 1, i + 1);
                    }
                };
                rec(0, 0);
                const auto model = topics::pam_cluster(d, k, {20, static_cast<std::uint64_t>(rep)});
                ++pam_total;
                if (std::abs(model.cost - best) <= 1e-12 * std::max(1.0, best)) ++pam_ok;
            }

    // three clouds
    const auto cv = synth::gen_clustered_vectors(3, 20, 8, synth::kModerateSeparation, 2020);
    const auto cd = topics::cosine_distances(cv.vectors);
    const auto sweep = topics::silhouette_sweep(cd, 2, 10);
    const double ari = topics::adjusted_rand_index(topics::pam_cluster(cd, 3).assignment, cv.labels);

    // 50/50 boundary
    topics::Vocabulary vocab;
    vocab.words = {"alpha", "beta"};
    vocab.counts = {5, 5};
    vocab.ids = {{"alpha", 0}, {"beta", 1}};
    topics::ClusterModel two;
    two.k = 2;
    two.medoids = {0, 1};
    two.assignment = {0, 1};
    const std::vector<std::string> half = {"alpha", "beta"};
    const auto theta = topics::topic_distribution(half, vocab, two);

    // desk-scale pipeline: V = 500 words in 10 topics, dim 16, window 3
    std::vector<std::string> texts, ids;
    Rng doc_rng(77);
    for (int doc = 0; doc < 3000; ++doc) {
        const std::size_t topic = doc_rng.below(10);
        std::string text;
        for (int w = 0; w < 12; ++w) text += pseudo_word(topic * 50 + doc_rng.below(50)) + " ";
        texts.push_back(text);
        ids.push_back("c" + std::to_string(doc));
    }
    topics::PipelineOptions po;
    po.skipgram.dim = 16;
    po.skipgram.window = 3;
    po.seed = 5;
    const auto pipe = topics::run_pipeline(texts, ids, po);
    const double secs = seconds_since(t0);

    o.detail << " gradient err " << grad_err << ", softmax err " << softmax_err << ", PAM optimal " << pam_ok << "/"
             << pam_total << ", 3-cloud best k " << sweep.best_k << " ARI " << ari << ", pipeline V "
             << pipe.corpus.vocabulary.size() << " best k " << pipe.sweep.best_k << ", " << secs << " s";
    o.require(grad_err <= 1e-5, "gradient");
    o.require(softmax_err <= 1e-6, "softmax");
    o.require(pam_ok == pam_total, "PAM optimal");
    o.require(sweep.best_k == 3, "silhouette argmax 3");
    o.require(ari >= 0.9, "ARI >= 0.9");
    o.require(!theta.dominant.has_value() && theta.theta[0] == 0.5, "max = 0.5 has no dominant topic");
    o.require(pipe.corpus.vocabulary.size() <= 500, "V <= 500");
    o.require(secs < 120.0, "runtime < 120 s");
}

// 9 -----------------------------------------------------------------------
std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void determinism(Outcome& o) {
    const auto root = fs::temp_directory_path() / "infodemic_acceptance_report";
    fs::remove_all(root);
    fs::create_directories(root);
    synth::PlatformCorpusSpec spec;
    const auto reddit = synth::gen_platform_corpus(spec, 1);
    spec.platform = Platform::youtube;
    spec.growth = {1.3, 0.003};
    const auto youtube = synth::gen_platform_corpus(spec, 2);
    for (const auto& [name, fx] : {std::pair{"reddit.jsonl", &reddit}, std::pair{"youtube.jsonl", &youtube}}) {
        std::ofstream out(root / name);
        for (const auto& p : fx->corpus.posts) out << ingest::to_jsonl(p) << "\n";
    }
    std::ofstream(root / "sources.csv") << "domain,label\ndubious.example,questionable\ntrusted.example,reliable\n";

    auto config = [&](const std::string& out, unsigned threads) {
        return report::parse_config("output_dir = " + out +
                                        "\nwindow_start = 2020-01-01\nwindow_end = 2020-02-14\n"
                                        "platforms = reddit, youtube\ncorpus.reddit = reddit.jsonl\n"
                                        "corpus.youtube = youtube.jsonl\nsources = sources.csv\n"
                                        "stages = fit, reliability, topics\nmodels = exp, sir\n"
                                        "bootstrap_replicates = 100\nbootstrap_seed = 9\n"
                                        "topics.seed = 4\ntopics.k_max = 10\ntopics.stability_reps = 5\n"
                                        "threads = " +
                                        std::to_string(threads) + "\n",
                                    root);
    };
    report::run_report(config("a", 1));
    report::run_report(config("b", 4));
    report::run_report(config("c", 1));

    int files = 0, identical = 0;
    for (const auto& entry : fs::recursive_directory_iterator(root / "a")) {
        if (!entry.is_regular_file() || entry.path().extension() != ".csv") continue;
        const auto relp = fs::relative(entry.path(), root / "a");
        const auto text = slurp(entry.path());
        ++files;
        if (text == slurp(root / "b" / relp) && text == slurp(root / "c" / relp)) ++identical;
    }
    fs::remove_all(root);
    o.detail << " " << identical << "/" << files << " CSVs identical across reruns and thread counts 1/4";
    o.require(files > 0 && identical == files, "byte-identical CSVs");
}

}  // namespace

int main() {
    run(1, "EXP fixed-point recovery", exp_recovery);
    run(2, "SIR ratio recovery and R0 > 20 warning", sir_recovery);
    run(3, "bootstrap coverage", bootstrap_coverage);
    run(4, "SIR integrator accuracy", sir_integrator);
    run(5, "amplification arithmetic", amplification_checks);
    run(6, "regression", regression_checks);
    run(7, "matching stats", matching_checks);
    run(8, "topics", topics_checks);
    run(9, "report determinism", determinism);
    std::printf("%d of 9 criteria failed\n", failures);
    return failures;
}
