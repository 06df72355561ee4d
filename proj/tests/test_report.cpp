#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "infodemic/csv.hpp"
#include "infodemic/ingest.hpp"
#include "infodemic/report.hpp"
#include "infodemic/synth.hpp"

using namespace infodemic;
using namespace infodemic::report;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
    fs::create_directories(p.parent_path());
    std::ofstream(p, std::ios::binary) << text;
}

// header -> value for the first row whose leading columns match `keys`.
std::map<std::string, std::string> csv_row(const std::string& text, const std::vector<std::string>& keys) {
    std::stringstream in(text);
    std::string line;
    std::getline(in, line);
    auto split = [](const std::string& s) { return csv::split_line(s); };
    const auto header = split(line);
    while (std::getline(in, line)) {
        const auto cells = split(line);
        bool match = true;
        for (std::size_t i = 0; i < keys.size(); ++i) match = match && cells.at(i) == keys[i];
        if (!match) continue;
        std::map<std::string, std::string> row;
        for (std::size_t i = 0; i < header.size(); ++i) row[header[i]] = cells.at(i);
        return row;
    }
    throw std::runtime_error("row not found");
}

struct Workspace {
    fs::path root;
    synth::PlatformCorpusFixture reddit;
    synth::PlatformCorpusFixture gab;

    explicit Workspace(const std::string& name) : root(fs::temp_directory_path() / name) {
        fs::remove_all(root);
        synth::PlatformCorpusSpec spec;
        reddit = synth::gen_platform_corpus(spec, 11);
        spec.platform = Platform::gab;
        spec.growth = {1.3, 0.003};
        spec.reliable_per_questionable = 3;
        spec.questionable_reactions = 4;
        spec.reliable_reactions = 8;
        gab = synth::gen_platform_corpus(spec, 12);
        write_corpus("reddit.jsonl", reddit.corpus);
        write_corpus("gab.jsonl", gab.corpus);
        spit(root / "sources.csv", "domain,label\ndubious.example,questionable\ntrusted.example,reliable\n");
    }
    ~Workspace() { fs::remove_all(root); }

    void write_corpus(const std::string& name, const PlatformCorpus& c) const {
        std::string text;
        for (const auto& p : c.posts) text += ingest::to_jsonl(p) + "\n";
        spit(root / name, text);
    }

    std::string config(const std::string& out, const std::string& extra) const {
        return "output_dir = " + out +
               "\nwindow_start = 2020-01-01\nwindow_end = 2020-02-14\n"
               "platforms = reddit, gab\ncorpus.reddit = reddit.jsonl\ncorpus.gab = gab.jsonl\n"
               "sources = sources.csv\n" +
               extra;
    }
};

}  // namespace

TEST_CASE("config parsing") {
    const auto c = parse_config(
        "# comment\noutput_dir = out\nwindow_start = 2020-01-01\nwindow_end = 2020-02-14 # inline\n"
        "platforms = gab, reddit\ncorpus.gab = g.jsonl\nstages = fit, topics\nmodels = sir\n"
        "bootstrap_replicates = 250\nbootstrap_seed = 9\ntopics.seed = 4\ntopics.k_max = 12\nthreads = 3\n",
        "/base");
    CHECK(c.output_dir == fs::path("/base/out"));
    CHECK(c.window.first == 1);
    CHECK(c.window.last == 45);
    CHECK(c.platforms == std::vector<Platform>{Platform::gab, Platform::reddit});
    CHECK(c.corpora.at(Platform::gab) == fs::path("/base/g.jsonl"));
    CHECK(c.has_stage(Stage::topics));
    CHECK_FALSE(c.has_stage(Stage::reliability));
    CHECK(c.models == std::vector<fitting::Model>{fitting::Model::sir});
    CHECK(c.bootstrap_replicates == 250);
    CHECK(*c.bootstrap_seed == 9);
    CHECK(c.topics.seed == 4);
    CHECK(c.topics_seed_set);
    CHECK(c.topics.k_max == 12);
    CHECK(c.threads == 3);

    CHECK_THROWS_AS(parse_config("output_dir = a\noutput_dir = b\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("colour = blue\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("bootstrap_seed = seven\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("just text\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("stages = fit, plots\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("window_start = 2020-01-01\nwindow_end = Feb 14\n"), ConfigError);
}

TEST_CASE("validation happens before any compute") {
    Workspace ws("infodemic_report_validate");
    auto attempt = [&](const std::string& extra, const std::string& needle) {
        const auto cfg = parse_config(ws.config("out", extra), ws.root);
        bool threw = false;
        try {
            run_report(cfg);
        } catch (const ConfigError& e) {
            threw = true;
            CHECK_MESSAGE(std::string(e.what()).find(needle) != std::string::npos, e.what());
        }
        CHECK(threw);
        CHECK_FALSE(fs::exists(ws.root / "out"));
    };

    SUBCASE("missing source list") {
        fs::remove(ws.root / "sources.csv");
        attempt("stages = reliability\n", "source list");
    }
    SUBCASE("bootstrap seed required") { attempt("stages = fit\n", "bootstrap_seed"); }
    SUBCASE("topics seed required") { attempt("stages = topics\n", "topics.seed"); }
    SUBCASE("too few replicates") { attempt("stages = fit\nbootstrap_seed = 1\nbootstrap_replicates = 20\n", "at least 100"); }
    SUBCASE("missing corpus file") {
        fs::remove(ws.root / "gab.jsonl");
        attempt("stages = reliability\n", "corpus for gab");
    }
}

TEST_CASE("sha256 of a known string") {
    const auto p = fs::temp_directory_path() / "infodemic_sha_test.txt";
    spit(p, "abc");
    CHECK(sha256_file(p) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    fs::remove(p);
}

TEST_CASE("synthetic run reproduces the generator's answers") {
    Workspace ws("infodemic_report_truth");
    const auto cfg = parse_config(ws.config("out", "stages = fit, reliability\nmodels = exp\nbootstrap_replicates = 100\n"
                                                   "bootstrap_seed = 21\nthreads = 2\n"),
                                  ws.root);
    const auto files = run_report(cfg);
    const auto out = ws.root / "out";
    for (const auto& f : files.outputs) CHECK_MESSAGE(fs::exists(out / f), f);
    for (const auto& entry : fs::directory_iterator(out)) CHECK(entry.path().extension() != ".partial");

    CHECK(slurp(out / "authors_reddit.csv") == ingest::curve_to_csv(ws.reddit.authors));

    const auto r0 = slurp(out / "r0_intervals.csv");
    const auto rr = csv_row(r0, {"reddit", "R0_EXP"});
    CHECK(std::stod(rr.at("point")) == doctest::Approx(1.25).epsilon(0.01));
    CHECK(rr.at("status") == "supercritical");
    CHECK(rr.at("interval").front() == '[');
    const auto gr = csv_row(r0, {"gab", "R0_EXP"});
    CHECK(std::stod(gr.at("point")) == doctest::Approx(1.3).epsilon(0.01));

    const auto amp = slurp(out / "amplification.csv");
    CHECK(std::stod(csv_row(amp, {"reddit"}).at("alpha")) == doctest::Approx(ws.reddit.expected_alpha));
    CHECK(std::stod(csv_row(amp, {"gab"}).at("alpha")) == doctest::Approx(ws.gab.expected_alpha));

    const auto reg = slurp(out / "regressions.csv");
    const auto rp = csv_row(reg, {"reddit", "posts"});
    CHECK(std::stod(rp.at("rho")) == doctest::Approx(ws.reddit.expected_rho_posts));
    CHECK(std::stod(rp.at("r_squared")) == doctest::Approx(1.0));
    CHECK(std::stod(csv_row(reg, {"gab", "posts"}).at("rho")) == doctest::Approx(ws.gab.expected_rho_posts));
    CHECK(std::stod(csv_row(reg, {"gab", "users"}).at("rho")) == doctest::Approx(1.0));

    const auto match = slurp(out / "matching.csv");
    const auto mr = csv_row(match, {"reddit"});
    CHECK(std::stod(mr.at("matched_fraction")) == doctest::Approx(ws.reddit.expected_matched_fraction));
    CHECK(std::stod(mr.at("questionable_share")) == doctest::Approx(ws.reddit.expected_questionable_share));

    const auto cross = slurp(out / "crosslinks.csv");
    CHECK(cross.rfind("platform,total_urls,gab,reddit,youtube,instagram,twitter,facebook\n", 0) == 0);

    const auto manifest = nlohmann::json::parse(slurp(out / "manifest.json"));
    CHECK(manifest["status"] == "complete");
    CHECK(manifest["seeds"]["bootstrap_seed"] == 21);
    CHECK(manifest["inputs"].size() == 3);
    CHECK(manifest["inputs"][0]["sha256"] == sha256_file(ws.root / "reddit.jsonl"));
    for (const auto& name : manifest["outputs"]) CHECK(fs::exists(out / name.get<std::string>()));
}

TEST_CASE("reruns are byte-identical across thread counts") {
    Workspace ws("infodemic_report_rerun");
    const std::string extra =
        "stages = fit, reliability, topics\nmodels = exp\nbootstrap_replicates = 100\nbootstrap_seed = 3\n"
        "topics.seed = 8\ntopics.k_max = 8\ntopics.stability_reps = 4\ntopics.epochs = 2\n";
    run_report(parse_config(ws.config("one", extra + "threads = 1\n"), ws.root));
    run_report(parse_config(ws.config("four", extra + "threads = 4\n"), ws.root));
    run_report(parse_config(ws.config("again", extra + "threads = 1\n"), ws.root));

    std::size_t compared = 0;
    for (const auto& entry : fs::recursive_directory_iterator(ws.root / "one")) {
        if (!entry.is_regular_file() || entry.path().extension() != ".csv") continue;
        const auto rel = fs::relative(entry.path(), ws.root / "one");
        const auto a = slurp(entry.path());
        CHECK_MESSAGE(a == slurp(ws.root / "four" / rel), rel.string());
        CHECK_MESSAGE(a == slurp(ws.root / "again" / rel), rel.string());
        ++compared;
    }
    CHECK(compared == 2 + 1 + 4 + 2 * 5);
}

TEST_CASE("stage failure keeps partial outputs") {
    Workspace ws("infodemic_report_fail");
    spit(ws.root / "gab.jsonl", "garbage\nmore garbage\n{\"id\":1}\n");
    const auto cfg = parse_config(ws.config("out", "stages = reliability\n"), ws.root);
    CHECK_THROWS_WITH_AS(run_report(cfg), doctest::Contains("gab"), std::runtime_error);
    const auto out = ws.root / "out";
    CHECK(fs::exists(out / "amplification.csv.partial"));
    CHECK(fs::exists(out / "manifest.json.partial"));
    CHECK_FALSE(fs::exists(out / "amplification.csv"));
    CHECK_FALSE(fs::exists(out / "manifest.json"));
    const auto manifest = nlohmann::json::parse(slurp(out / "manifest.json.partial"));
    CHECK(manifest["status"] == "failed");
}

TEST_CASE("csv writers mark undefined values") {
    PlatformReliability row;
    row.platform = "instagram";
    row.match.url_posts = 0;
    row.regressions[reliability::SeriesQuantity::posts] = std::nullopt;
    const auto m = matching_csv({row});
    CHECK(m.find("instagram,0,0,NA,0,0,NA,NA") != std::string::npos);
    CHECK(amplification_csv({row}).find("NA") != std::string::npos);
    CHECK(regressions_csv({row}).find("instagram,posts,NA,NA,NA") != std::string::npos);
}
