// Command-line entry point: ingest, fit, bootstrap, reliability, topics,
// synth and report subcommands.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "infodemic/csv.hpp"
#include "infodemic/fitting.hpp"
#include "infodemic/ingest.hpp"
#include "infodemic/reliability.hpp"
#include "infodemic/report.hpp"
#include "infodemic/synth.hpp"
#include "infodemic/topics.hpp"

namespace fs = std::filesystem;
using namespace infodemic;

namespace {

DayRange parse_window(const std::string& from, const std::string& to) {
    const auto a = ingest::parse_date(from);
    const auto b = ingest::parse_date(to);
    if (!a || !b) throw std::invalid_argument("dates must be YYYY-MM-DD");
    return {ingest::day_of(*a), ingest::day_of(*b)};
}

Platform platform_of_first_record(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_object() && j.contains("platform") && j["platform"].is_string())
            return platform_from_string(j["platform"].get<std::string>());
    }
    throw std::runtime_error(path.string() + ": cannot infer platform; pass --platform");
}

// Loads a corpus over an explicit window, or over the span of its own posts.
PlatformCorpus load_any(const fs::path& path, const std::string& platform_name, const std::string& from,
                        const std::string& to) {
    const Platform platform = platform_name.empty() ? platform_of_first_record(path) : platform_from_string(platform_name);
    const bool explicit_window = !from.empty() && !to.empty();
    const DayRange window = explicit_window ? parse_window(from, to) : DayRange{-1000000, 1000000};
    auto loaded = ingest::load_corpus(path, platform, window);
    std::cerr << "read " << loaded.report.lines << " lines, rejected " << loaded.report.rejected << ", outside window "
              << loaded.report.out_of_window << "\n";
    if (!explicit_window && !loaded.corpus.posts.empty()) {
        const auto [lo, hi] = std::minmax_element(loaded.corpus.posts.begin(), loaded.corpus.posts.end(),
                                                  [](const Post& a, const Post& b) { return a.day < b.day; });
        loaded.corpus.window = {lo->day, hi->day};
    }
    return std::move(loaded.corpus);
}

void write_or_print(const std::string& out, const std::string& text) {
    if (out.empty() || out == "-")
        std::cout << text;
    else
        csv::write_file_atomic(out, text);
}

nlohmann::json read_params(const std::string& arg) {
    if (arg.empty()) return nlohmann::json::object();
    const std::string text = arg.front() == '@' ? csv::read_text(arg.substr(1)) : arg;
    auto j = nlohmann::json::parse(text);
    if (!j.is_object()) throw std::invalid_argument("--params must be a JSON object");
    return j;
}

template <class T>
T param(const nlohmann::json& j, const char* key, T fallback) {
    return j.contains(key) ? j.at(key).get<T>() : fallback;
}

std::string curve_csv(const synth::GeneratedCurve& g) { return ingest::curve_to_csv(g.curve); }

std::string source_list_csv(const reliability::SourceList& sources) {
    std::string out = "domain,label\n";
    for (const auto& [domain, label] : sources.entries()) out += domain + "," + std::string(to_string(label)) + "\n";
    return out;
}

std::string corpus_jsonl(const PlatformCorpus& corpus) {
    std::string out;
    for (const auto& p : corpus.posts) out += ingest::to_jsonl(p) + "\n";
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Infodemic analysis: growth-curve fitting, source reliability and topic extraction"};
    app.require_subcommand(1);

    // ingest
    auto* ingest_cmd = app.add_subcommand("ingest", "Load a JSONL export and write its curves");
    std::string in_path, in_platform, in_from, in_to, in_keywords, in_out;
    ingest_cmd->add_option("--input", in_path, "JSONL export, one post per line")->required()->check(CLI::ExistingFile);
    ingest_cmd->add_option("--platform", in_platform, "gab|reddit|youtube|instagram|twitter|other")->required();
    ingest_cmd->add_option("--from", in_from, "First day of the window (YYYY-MM-DD)")->required();
    ingest_cmd->add_option("--to", in_to, "Last day of the window (YYYY-MM-DD)")->required();
    ingest_cmd->add_option("--keywords", in_keywords, "Keyword file, one per line")->check(CLI::ExistingFile);
    ingest_cmd->add_option("--out", in_out, "Output directory")->required();

    // fit and bootstrap share curve options
    std::string fit_curve, fit_model = "exp", fit_out, fit_method = "bc";
    int fit_boot = 0, boot_replicates = 1000;
    std::uint64_t fit_seed = 0;
    Day fit_t0 = 0;
    bool fit_daily = false;
    unsigned fit_threads = 1;
    auto add_curve_options = [&](CLI::App* cmd) {
        cmd->add_option("--curve", fit_curve, "CSV with header day,value")->required()->check(CLI::ExistingFile);
        cmd->add_option("--model", fit_model, "exp or sir")->check(CLI::IsMember({"exp", "sir"}));
        cmd->add_option("--t0", fit_t0, "EXP time origin: t = day - t0 (default 0)");
        cmd->add_flag("--daily", fit_daily, "Fit daily increments of the curve instead of the cumulative values");
        cmd->add_option("--threads", fit_threads, "Bootstrap worker threads (0 = all cores)");
        cmd->add_option("--out", fit_out, "Output JSON file (stdout when omitted)");
    };
    auto* fit_cmd = app.add_subcommand("fit", "Least-squares fit of an EXP or SIR model");
    add_curve_options(fit_cmd);
    fit_cmd->add_option("--bootstrap", fit_boot, "Bootstrap replicates for an R0 interval (0 = none, else >= 100)");
    auto* fit_seed_opt = fit_cmd->add_option("--seed", fit_seed, "Bootstrap seed");

    auto* boot_cmd = app.add_subcommand("bootstrap", "Bootstrap interval for R0");
    add_curve_options(boot_cmd);
    boot_cmd->add_option("--replicates", boot_replicates, "Replicates (>= 100)")->capture_default_str();
    boot_cmd->add_option("--seed", fit_seed, "Bootstrap seed")->required();
    boot_cmd->add_option("--method", fit_method, "bc (bias-corrected percentile) or percentile")
        ->check(CLI::IsMember({"bc", "percentile"}));

    // reliability
    auto* rel_cmd = app.add_subcommand("reliability", "Source matching, amplification and regressions");
    std::string rel_corpus, rel_sources, rel_short, rel_platform, rel_from, rel_to, rel_out;
    rel_cmd->add_option("--corpus", rel_corpus, "JSONL corpus")->required()->check(CLI::ExistingFile);
    rel_cmd->add_option("--sources", rel_sources, "CSV domain,label")->required()->check(CLI::ExistingFile);
    rel_cmd->add_option("--shorteners", rel_short, "CSV short_url,expanded_url")->check(CLI::ExistingFile);
    rel_cmd->add_option("--platform", rel_platform, "Platform name (default: from the first record)");
    rel_cmd->add_option("--from", rel_from, "Window start (default: first post day)");
    rel_cmd->add_option("--to", rel_to, "Window end (default: last post day)");
    rel_cmd->add_option("--out", rel_out, "Output directory")->required();

    // topics
    auto* top_cmd = app.add_subcommand("topics", "Skip-gram embedding, PAM clustering and topic distributions");
    std::string top_corpus, top_platform, top_out;
    topics::PipelineOptions top;
    top_cmd->add_option("--corpus", top_corpus, "JSONL corpus")->required()->check(CLI::ExistingFile);
    top_cmd->add_option("--platform", top_platform, "Platform name (default: from the first record)");
    top_cmd->add_option("--dim", top.skipgram.dim, "Embedding dimension")->default_val(200);
    top_cmd->add_option("--window", top.skipgram.window, "Context window")->default_val(6);
    top_cmd->add_option("--epochs", top.skipgram.epochs, "Training epochs")->default_val(5);
    top_cmd->add_option("--rate", top.skipgram.rate, "Learning rate")->default_val(0.025);
    top_cmd->add_option("--kmin", top.k_min, "Smallest k in the silhouette sweep")->default_val(2);
    top_cmd->add_option("--kmax", top.k_max, "Largest k in the silhouette sweep")->default_val(40);
    top_cmd->add_option("--reps", top.stability_reps, "Stability subsamples")->default_val(20);
    top_cmd->add_option("--restarts", top.pam_restarts, "Random PAM restarts per clustering")->default_val(3);
    top_cmd->add_option("--threads", top.threads, "Worker threads (0 = all cores)")->default_val(1);
    top_cmd->add_option("--seed", top.seed, "Seed for training, clustering and subsampling")->required();
    top_cmd->add_option("--out", top_out, "Output directory")->required();

    // synth
    auto* syn_cmd = app.add_subcommand("synth", "Generate synthetic data with known answers");
    std::string syn_kind, syn_params, syn_out, syn_sources;
    std::uint64_t syn_seed = 0;
    syn_cmd->add_option("--kind", syn_kind, "exp_curve|sir_curve|clustered_vectors|labeled_posts|platform_corpus")
        ->required()
        ->check(CLI::IsMember({"exp_curve", "sir_curve", "clustered_vectors", "labeled_posts", "platform_corpus"}));
    syn_cmd->add_option("--params", syn_params, "JSON object, or @file");
    syn_cmd->add_option("--seed", syn_seed, "Generator seed")->required();
    syn_cmd->add_option("--out", syn_out, "Output CSV/JSONL (stdout when omitted)");
    syn_cmd->add_option("--sources-out", syn_sources, "Also write the fixture source list (post generators)");

    // report
    auto* rep_cmd = app.add_subcommand("report", "Run the configured pipeline and write report tables");
    std::string rep_config;
    rep_cmd->add_option("--config", rep_config, "key = value run configuration")->required()->check(CLI::ExistingFile);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (*ingest_cmd) {
            const Platform platform = platform_from_string(in_platform);
            auto loaded = ingest::load_corpus(in_path, platform, parse_window(in_from, in_to));
            PlatformCorpus corpus = std::move(loaded.corpus);
            if (!in_keywords.empty()) corpus = ingest::filter_keywords(corpus, ingest::read_keywords(in_keywords));
            const fs::path out(in_out);
            csv::write_file_atomic(out / "corpus.jsonl", corpus_jsonl(corpus));
            csv::write_file_atomic(out / "posts.csv", ingest::curve_to_csv(ingest::cumulative_posts(corpus)));
            csv::write_file_atomic(out / "interactions.csv", ingest::curve_to_csv(ingest::cumulative_interactions(corpus)));
            csv::write_file_atomic(out / "activity.csv", ingest::histogram_to_csv(ingest::activity_histogram(corpus)));
            if (!corpus.posts.empty())
                csv::write_file_atomic(out / "authors.csv", ingest::curve_to_csv(ingest::cumulative_new_authors(corpus)));
            std::cout << "lines " << loaded.report.lines << " rejected " << loaded.report.rejected << " out_of_window "
                      << loaded.report.out_of_window << " kept " << corpus.posts.size() << "\n";
            if (corpus.posts.empty()) std::cerr << "no posts kept; authors.csv not written\n";
        } else if (*fit_cmd || *boot_cmd) {
            EpiCurve curve = ingest::curve_from_csv(fit_curve);
            if (fit_daily) curve = to_daily(curve);
            const auto model = fitting::model_from_string(fit_model);
            fitting::FitOptions fopts;
            fopts.time_origin = fit_t0;
            if (*fit_cmd && fit_boot == 0) {
                const auto result = fitting::fit(curve, model, fopts);
                for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
                write_or_print(fit_out, fitting::fit_to_json(result));
            } else {
                if (*fit_cmd && fit_seed_opt->count() == 0) throw std::invalid_argument("--bootstrap requires --seed");
                fitting::BootstrapOptions bopts;
                bopts.fit = fopts;
                bopts.threads = fit_threads;
                bopts.method = fit_method == "percentile" ? fitting::IntervalMethod::percentile
                                                          : fitting::IntervalMethod::bias_corrected;
                const auto boot = fitting::bootstrap_r0(curve, model, *fit_cmd ? fit_boot : boot_replicates, fit_seed, bopts);
                for (const auto& w : boot.base.warnings) std::cerr << "warning: " << w << "\n";
                write_or_print(fit_out, fitting::fit_to_json(boot.base, &boot.interval));
            }
        } else if (*rel_cmd) {
            const PlatformCorpus corpus = load_any(rel_corpus, rel_platform, rel_from, rel_to);
            const auto sources = reliability::SourceList::from_csv(rel_sources);
            std::optional<reliability::ShortenerMap> shorteners;
            if (!rel_short.empty()) shorteners = reliability::shortener_map_from_csv(rel_short);
            const auto labeled = reliability::classify_posts(corpus, sources, shorteners ? &*shorteners : nullptr);
            const std::vector<report::PlatformReliability> rows{
                report::analyze_reliability(corpus, sources, shorteners ? &*shorteners : nullptr)};
            const fs::path out(rel_out);
            std::string labels = "post_id,label,matched_domain,interactions\n";
            for (const auto& lp : labeled)
                labels += csv::join({lp.post_id, std::string(to_string(lp.label)), lp.matched_domain.value_or(""),
                                     std::to_string(lp.interactions)}) +
                          "\n";
            csv::write_file_atomic(out / "labels.csv", labels);
            csv::write_file_atomic(out / "matching.csv", report::matching_csv(rows));
            csv::write_file_atomic(out / "amplification.csv", report::amplification_csv(rows));
            csv::write_file_atomic(out / "regressions.csv", report::regressions_csv(rows));
            csv::write_file_atomic(out / "crosslinks.csv", report::crosslinks_csv(rows));
        } else if (*top_cmd) {
            const PlatformCorpus corpus = load_any(top_corpus, top_platform, "", "");
            std::vector<std::string> texts, ids;
            for (const auto& p : corpus.posts) {
                texts.push_back(p.text);
                ids.push_back(p.id);
            }
            const auto result = topics::run_pipeline(texts, ids, top);
            topics::write_outputs(result, top_out);
            std::cout << "vocabulary " << result.corpus.vocabulary.size() << " contents " << result.corpus.contents.size()
                      << " best_k " << result.sweep.best_k << "\n";
        } else if (*syn_cmd) {
            const auto p = read_params(syn_params);
            const auto kind = synth::kind_from_string(syn_kind);
            const DayRange days{param<Day>(p, "first", 1), param<Day>(p, "last", 45)};
            synth::CurveNoise noise{param(p, "sigma", 0.0), syn_seed, param(p, "round", false)};
            switch (kind) {
                case synth::Kind::exp_curve: {
                    const epi::ExpParams ep{param(p, "r0", 1.6), param(p, "d", 0.02)};
                    write_or_print(syn_out, curve_csv(synth::gen_exp_curve(ep, days, noise, param<Day>(p, "time_origin", 0))));
                    break;
                }
                case synth::Kind::sir_curve: {
                    const epi::SirParams sp{param(p, "beta", 0.5), param(p, "gamma", 0.25), param(p, "population", 1000.0),
                                            param(p, "initial_infected", 1.0)};
                    write_or_print(syn_out,
                                   curve_csv(synth::gen_sir_curve(sp, days, noise, param(p, "step", epi::kDefaultSirStep))));
                    break;
                }
                case synth::Kind::clustered_vectors: {
                    const auto cv = synth::gen_clustered_vectors(
                        param<std::size_t>(p, "clusters", 3), param<std::size_t>(p, "points", 20),
                        param<std::size_t>(p, "dim", 8), param(p, "separation", synth::kModerateSeparation), syn_seed);
                    std::string text = "label";
                    for (std::size_t d = 0; d < cv.vectors.dim; ++d) text += ",x" + std::to_string(d);
                    text += "\n";
                    for (std::size_t i = 0; i < cv.vectors.rows; ++i) {
                        text += std::to_string(cv.labels[i]);
                        for (double x : cv.vectors.row(i)) text += "," + csv::format_double(x);
                        text += "\n";
                    }
                    write_or_print(syn_out, text);
                    break;
                }
                case synth::Kind::labeled_posts: {
                    synth::LabeledPostsSpec spec;
                    spec.n_questionable = param<std::size_t>(p, "n_questionable", 2);
                    spec.n_reliable = param<std::size_t>(p, "n_reliable", 4);
                    const auto law = param<std::string>(p, "law", "constant") == "poisson" ? synth::ReactionLaw::poisson
                                                                                          : synth::ReactionLaw::constant;
                    spec.questionable = {law, param(p, "questionable_mean", 5.0)};
                    spec.reliable = {law, param(p, "reliable_mean", 2.0)};
                    spec.platform = platform_from_string(param<std::string>(p, "platform", "twitter"));
                    spec.days = {param<Day>(p, "first", 1), param<Day>(p, "last", 30)};
                    const auto fx = synth::gen_labeled_posts(spec, syn_seed);
                    write_or_print(syn_out, corpus_jsonl(fx.corpus));
                    if (!syn_sources.empty()) csv::write_file_atomic(syn_sources, source_list_csv(fx.sources));
                    break;
                }
                case synth::Kind::platform_corpus: {
                    synth::PlatformCorpusSpec spec;
                    spec.platform = platform_from_string(param<std::string>(p, "platform", "reddit"));
                    spec.window = days;
                    spec.growth = {param(p, "r0", spec.growth.r0), param(p, "d", spec.growth.d)};
                    spec.reliable_per_questionable = param(p, "reliable_per_questionable", spec.reliable_per_questionable);
                    spec.questionable_reactions = param(p, "questionable_reactions", spec.questionable_reactions);
                    spec.reliable_reactions = param(p, "reliable_reactions", spec.reliable_reactions);
                    const auto fx = synth::gen_platform_corpus(spec, syn_seed);
                    write_or_print(syn_out, corpus_jsonl(fx.corpus));
                    if (!syn_sources.empty()) csv::write_file_atomic(syn_sources, source_list_csv(fx.sources));
                    break;
                }
            }
        } else if (*rep_cmd) {
            const auto files = report::run_report(report::load_config(rep_config));
            for (const auto& f : files.outputs) std::cout << (files.directory / f).string() << "\n";
        }
    } catch (const report::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
