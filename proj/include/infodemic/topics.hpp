#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "infodemic/types.hpp"

namespace infodemic::topics {

/// Bundled English stop-word list (lowercase).
const std::vector<std::string>& stopwords();
bool is_stopword(std::string_view word);

struct CleanOptions {
    std::size_t min_token_length = 3;
    std::size_t min_word_count = 5;
    std::size_t min_content_tokens = 3;
};

struct Vocabulary {
    /// Word ids follow alphabetical order.
    std::vector<std::string> words;
    std::vector<std::size_t> counts;
    std::map<std::string, int, std::less<>> ids;

    [[nodiscard]] std::size_t size() const { return words.size(); }
    /// -1 when the word is not in the vocabulary.
    [[nodiscard]] int id(std::string_view word) const;
};

struct CleanCorpus {
    std::vector<std::vector<std::string>> contents;
    /// Index of each surviving content in the input sequence.
    std::vector<std::size_t> source_index;
    Vocabulary vocabulary;

    [[nodiscard]] std::vector<std::vector<int>> encoded() const;
};

/// Per-text token rules only: markup, URLs, emails, mentions, hashtags,
/// digits and punctuation removed; lowercase; stop-words and short tokens
/// dropped. No corpus-level frequency filtering.
std::vector<std::string> tokenize(std::string_view text, const CleanOptions& options = {});

/// tokenize() on every text, then drops rare words and short contents,
/// repeating until neither rule removes anything.
CleanCorpus clean(std::span<const std::string> texts, const CleanOptions& options = {});

/// Row-major matrix of per-word vectors.
struct Vectors {
    std::size_t rows = 0;
    std::size_t dim = 0;
    std::vector<double> data;

    Vectors() = default;
    Vectors(std::size_t r, std::size_t d) : rows(r), dim(d), data(r * d, 0.0) {}

    [[nodiscard]] std::span<double> row(std::size_t i) { return {data.data() + i * dim, dim}; }
    [[nodiscard]] std::span<const double> row(std::size_t i) const { return {data.data() + i * dim, dim}; }
};

struct SkipGramOptions {
    std::size_t dim = 200;
    std::size_t window = 6;
    int epochs = 5;
    double rate = 0.025;
    std::uint64_t seed = 1;
    /// One averaged gradient step per epoch instead of one step per center word.
    bool full_batch = false;
};

struct EmbeddingMatrix {
    /// u: vectors of predicted words; v: vectors of the conditioning word.
    /// p(i | j) = exp(u_i . v_j) / sum_l exp(u_l . v_j).
    Vectors u;
    Vectors v;
    std::size_t window = 0;
    int epochs = 0;
    double rate = 0.0;
    std::uint64_t seed = 0;
    /// Negative mean log-likelihood after each epoch.
    std::vector<double> epoch_loss;

    [[nodiscard]] std::size_t vocab_size() const { return u.rows; }
    [[nodiscard]] std::size_t dim() const { return u.dim; }
};

/// Random initialization used by train_skipgram.
EmbeddingMatrix init_embedding(std::size_t vocab_size, std::size_t dim, std::uint64_t seed);

/// p(. | center) over the whole vocabulary.
std::vector<double> softmax_row(const EmbeddingMatrix& emb, std::size_t center);

/// Mean over tokens of the summed window log-probabilities. Windows do not
/// cross content boundaries.
double skipgram_objective(const std::vector<std::vector<int>>& contents, std::size_t window,
                          const EmbeddingMatrix& emb);

/// Gradient of skipgram_objective with respect to u and v (same layout).
void skipgram_gradient(const std::vector<std::vector<int>>& contents, std::size_t window,
                       const EmbeddingMatrix& emb, Vectors& grad_u, Vectors& grad_v);

/// Gradient ascent with the exact softmax. Throws DataError on an empty
/// corpus and std::invalid_argument when V < 2 or dim < 2.
EmbeddingMatrix train_skipgram(const std::vector<std::vector<int>>& contents, std::size_t vocab_size,
                               const SkipGramOptions& options);
EmbeddingMatrix train_skipgram(const CleanCorpus& corpus, const SkipGramOptions& options);

/// Symmetric matrix with zero diagonal.
struct DistanceMatrix {
    std::size_t n = 0;
    std::vector<double> d;

    DistanceMatrix() = default;
    explicit DistanceMatrix(std::size_t size) : n(size), d(size * size, 0.0) {}

    [[nodiscard]] double operator()(std::size_t i, std::size_t j) const { return d[i * n + j]; }
    double& at(std::size_t i, std::size_t j) { return d[i * n + j]; }

    [[nodiscard]] DistanceMatrix subset(std::span<const std::size_t> items) const;
};

/// 1 - cos(a, b), clamped to [0, 2]. A zero vector is at distance 1 from
/// every other point.
DistanceMatrix cosine_distances(const Vectors& vectors, unsigned threads = 1);

struct ClusterModel {
    std::size_t k = 0;
    /// Medoid point ids in BUILD/SWAP order.
    std::vector<std::size_t> medoids;
    /// Point id -> index into `medoids`.
    std::vector<int> assignment;
    double cost = 0.0;
    double build_cost = 0.0;
    /// Total cost after BUILD and after every accepted swap.
    std::vector<double> cost_history;
};

struct PamOptions {
    /// Extra SWAP descents from random medoid sets drawn with
    /// Rng(derive_seed(seed, r)); the lowest-cost local optimum is kept.
    /// 0 gives plain BUILD + SWAP.
    int restarts = 20;
    std::uint64_t seed = 0;
};

/// k-medoids: BUILD, then best-improvement SWAP until no swap lowers the
/// total cost, repeated from `restarts` random starts. Ties go to the
/// lowest point id. Throws std::invalid_argument unless 2 <= k <= n.
ClusterModel pam_cluster(const DistanceMatrix& dist, std::size_t k, const PamOptions& options = {});

/// Assignment to the nearest of the given medoids and the resulting cost.
ClusterModel assign_to_medoids(const DistanceMatrix& dist, std::vector<std::size_t> medoids);

/// Mean silhouette width; singleton clusters contribute 0.
double silhouette_width(const DistanceMatrix& dist, std::span<const int> assignment);

struct SilhouetteSweep {
    std::vector<std::size_t> k;
    std::vector<double> width;
    std::size_t best_k = 0;
};

/// Throws DataError("zero-variance embedding") when every distance is zero.
SilhouetteSweep silhouette_sweep(const DistanceMatrix& dist, std::size_t k_min, std::size_t k_max,
                                 const PamOptions& pam = {}, unsigned threads = 1);

struct StabilityResult {
    std::vector<double> cluster_mean;  // indexed like the full-data clustering
    double overall_mean = 0.0;
    int reps = 0;
};

/// Jaccard similarity between each full-data cluster and its greedily
/// matched cluster in one subsample drawn with Rng(rep_seed).
std::vector<double> jaccard_replicate(const DistanceMatrix& dist, const ClusterModel& full, double fraction,
                                      std::uint64_t rep_seed, const PamOptions& pam = {});

/// Repetition r uses derive_seed(seed, r).
StabilityResult jaccard_stability(const DistanceMatrix& dist, std::size_t k, double fraction, int reps,
                                  std::uint64_t seed, const PamOptions& pam = {}, unsigned threads = 1);

struct TopicDistribution {
    std::vector<double> theta;
    /// Present iff max theta > 0.5.
    std::optional<std::size_t> dominant;
};

/// Share of the content's in-vocabulary tokens (with multiplicity) in each
/// cluster. Throws DataError("untopicable content") when none is known.
TopicDistribution topic_distribution(std::span<const std::string> tokens, const Vocabulary& vocabulary,
                                     const ClusterModel& model);

/// Adjusted Rand index of two labelings of the same points.
double adjusted_rand_index(std::span<const int> a, std::span<const int> b);

struct PipelineOptions {
    CleanOptions clean;
    SkipGramOptions skipgram;
    std::size_t k_min = 2;
    std::size_t k_max = 40;
    double stability_fraction = 0.9;
    int stability_reps = 20;
    int pam_restarts = 3;
    std::uint64_t seed = 1;
    unsigned threads = 1;
};

struct PipelineResult {
    CleanCorpus corpus;
    std::vector<std::string> content_ids;  // aligned with corpus.contents
    EmbeddingMatrix embedding;
    SilhouetteSweep sweep;
    ClusterModel model;
    StabilityResult stability;
    std::vector<TopicDistribution> topics;  // aligned with corpus.contents
};

/// Clean, embed, sweep k, cluster at the best k, assess stability and
/// compute topic distributions. k_max is capped at V - 1.
PipelineResult run_pipeline(std::span<const std::string> texts, std::span<const std::string> ids,
                            const PipelineOptions& options);

/// vocab.csv, clusters.csv, silhouette.csv, stability.csv, topics.csv.
void write_outputs(const PipelineResult& result, const std::filesystem::path& dir);

}  // namespace infodemic::topics
