#include "infodemic/topics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "infodemic/csv.hpp"
#include "infodemic/parallel.hpp"
#include "infodemic/rng.hpp"

namespace infodemic::topics {

int Vocabulary::id(std::string_view word) const {
    const auto it = ids.find(word);
    return it == ids.end() ? -1 : it->second;
}

std::vector<std::vector<int>> CleanCorpus::encoded() const {
    std::vector<std::vector<int>> out;
    out.reserve(contents.size());
    for (const auto& c : contents) {
        std::vector<int> ids;
        ids.reserve(c.size());
        for (const auto& w : c) ids.push_back(vocabulary.id(w));
        out.push_back(std::move(ids));
    }
    return out;
}

namespace {

bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

// Tags such as <br/> or </a> and entities such as &amp; or &#39; become spaces.
std::string strip_markup(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (c == '<' && i + 1 < text.size() &&
            (std::isalpha(static_cast<unsigned char>(text[i + 1])) || text[i + 1] == '/' || text[i + 1] == '!')) {
            if (const auto close = text.find('>', i); close != std::string_view::npos) {
                out += ' ';
                i = close;
                continue;
            }
        }
        if (c == '&') {
            std::size_t j = i + 1;
            if (j < text.size() && text[j] == '#') ++j;
            const std::size_t body = j;
            while (j < text.size() && j - body < 10 && is_alnum(text[j])) ++j;
            if (j > body && j < text.size() && text[j] == ';') {
                out += ' ';
                i = j;
                continue;
            }
        }
        out += c;
    }
    return out;
}

bool is_email(std::string_view chunk) {
    const auto at = chunk.find('@');
    if (at == std::string_view::npos || at == 0 || !is_alnum(chunk[at - 1])) return false;
    const auto dot = chunk.find('.', at);
    return dot != std::string_view::npos && dot > at + 1 && dot + 1 < chunk.size() && is_alnum(chunk[dot + 1]);
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text, const CleanOptions& options) {
    std::vector<std::string> tokens;
    const std::string stripped = strip_markup(text);
    std::istringstream chunks(stripped);
    std::string chunk;
    while (chunks >> chunk) {
        std::transform(chunk.begin(), chunk.end(), chunk.begin(), [](unsigned char c) { return std::tolower(c); });
        if (chunk.find("://") != std::string::npos || chunk.starts_with("www.") || is_email(chunk)) continue;

        std::string letters;
        letters.reserve(chunk.size());
        for (std::size_t i = 0; i < chunk.size(); ++i) {
            const char c = chunk[i];
            if (c == '@' || c == '#') {
                while (i + 1 < chunk.size() && (is_alnum(chunk[i + 1]) || chunk[i + 1] == '_')) ++i;
                letters += ' ';
            } else {
                letters += (c >= 'a' && c <= 'z') ? c : ' ';
            }
        }
        std::istringstream words(letters);
        std::string w;
        while (words >> w)
            if (w.size() >= options.min_token_length && !is_stopword(w)) tokens.push_back(std::move(w));
    }
    return tokens;
}

CleanCorpus clean(std::span<const std::string> texts, const CleanOptions& options) {
    std::vector<std::vector<std::string>> contents;
    contents.reserve(texts.size());
    for (const auto& t : texts) contents.push_back(tokenize(t, options));
    std::vector<bool> alive(contents.size(), true);

    std::map<std::string, std::size_t, std::less<>> counts;
    for (;;) {
        counts.clear();
        for (std::size_t c = 0; c < contents.size(); ++c)
            if (alive[c])
                for (const auto& w : contents[c]) ++counts[w];
        bool changed = false;
        for (std::size_t c = 0; c < contents.size(); ++c) {
            if (!alive[c]) continue;
            auto& tokens = contents[c];
            const auto before = tokens.size();
            std::erase_if(tokens, [&](const std::string& w) { return counts.find(w)->second < options.min_word_count; });
            if (tokens.size() != before) changed = true;
            if (tokens.size() < options.min_content_tokens) {
                alive[c] = false;
                changed = true;
            }
        }
        if (!changed) break;
    }

    CleanCorpus out;
    for (std::size_t c = 0; c < contents.size(); ++c) {
        if (!alive[c]) continue;
        out.contents.push_back(std::move(contents[c]));
        out.source_index.push_back(c);
    }
    for (const auto& [word, count] : counts) {
        out.vocabulary.ids.emplace(word, static_cast<int>(out.vocabulary.words.size()));
        out.vocabulary.words.push_back(word);
        out.vocabulary.counts.push_back(count);
    }
    return out;
}

EmbeddingMatrix init_embedding(std::size_t vocab_size, std::size_t dim, std::uint64_t seed) {
    EmbeddingMatrix emb;
    emb.u = Vectors(vocab_size, dim);
    emb.v = Vectors(vocab_size, dim);
    emb.seed = seed;
    Rng rng(seed);
    const double scale = 1.0 / static_cast<double>(dim);
    for (auto& x : emb.u.data) x = (rng.uniform() - 0.5) * scale;
    for (auto& x : emb.v.data) x = (rng.uniform() - 0.5) * scale;
    return emb;
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// Scores u_l . v_c for every l, turned in place into probabilities.
// Returns log of the partition function.
double softmax_into(const EmbeddingMatrix& emb, std::size_t center, std::vector<double>& p) {
    const auto vc = emb.v.row(center);
    const std::size_t V = emb.u.rows;
    p.resize(V);
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l < V; ++l) {
        p[l] = dot(emb.u.row(l), vc);
        top = std::max(top, p[l]);
    }
    double z = 0.0;
    for (auto& x : p) z += (x = std::exp(x - top));
    for (auto& x : p) x /= z;
    return top + std::log(z);
}

std::size_t token_count(const std::vector<std::vector<int>>& contents) {
    std::size_t t = 0;
    for (const auto& c : contents) t += c.size();
    return t;
}

template <class Visit>
void for_each_window(const std::vector<int>& content, std::size_t window, Visit&& visit) {
    const std::size_t L = content.size();
    for (std::size_t t = 0; t < L; ++t) {
        const std::size_t lo = t >= window ? t - window : 0;
        const std::size_t hi = std::min(L - 1, t + window);
        visit(t, lo, hi);
    }
}

void check_ids(const std::vector<std::vector<int>>& contents, std::size_t vocab_size) {
    for (const auto& c : contents)
        for (int id : c)
            if (id < 0 || static_cast<std::size_t>(id) >= vocab_size)
                throw std::invalid_argument("token id outside the vocabulary");
}

// Adds the gradient contribution of one center position, scaled by `scale`.
// `p` must hold softmax_row(center).
void accumulate_position(const EmbeddingMatrix& emb, const std::vector<int>& content, std::size_t t, std::size_t lo,
                         std::size_t hi, const std::vector<double>& p, double scale, Vectors& grad_u,
                         std::span<double> grad_vc, std::vector<double>& context_count) {
    const std::size_t V = emb.u.rows;
    const std::size_t dim = emb.u.dim;
    const auto vc = emb.v.row(static_cast<std::size_t>(content[t]));
    std::fill(context_count.begin(), context_count.end(), 0.0);
    double m = 0.0;
    for (std::size_t j = lo; j <= hi; ++j) {
        if (j == t) continue;
        context_count[static_cast<std::size_t>(content[j])] += 1.0;
        m += 1.0;
    }
    for (std::size_t l = 0; l < V; ++l) {
        const double w = context_count[l] - m * p[l];
        const auto ul = emb.u.row(l);
        auto gu = grad_u.row(l);
        for (std::size_t d = 0; d < dim; ++d) {
            grad_vc[d] += scale * w * ul[d];
            gu[d] += scale * w * vc[d];
        }
    }
}

}  // namespace

std::vector<double> softmax_row(const EmbeddingMatrix& emb, std::size_t center) {
    std::vector<double> p;
    softmax_into(emb, center, p);
    return p;
}

double skipgram_objective(const std::vector<std::vector<int>>& contents, std::size_t window,
                          const EmbeddingMatrix& emb) {
    check_ids(contents, emb.u.rows);
    const std::size_t T = token_count(contents);
    if (T == 0) throw DataError("empty corpus");
    std::vector<double> p;
    double total = 0.0;
    for (const auto& content : contents) {
        for_each_window(content, window, [&](std::size_t t, std::size_t lo, std::size_t hi) {
            const auto c = static_cast<std::size_t>(content[t]);
            const double log_z = softmax_into(emb, c, p);
            const auto vc = emb.v.row(c);
            for (std::size_t j = lo; j <= hi; ++j)
                if (j != t) total += dot(emb.u.row(static_cast<std::size_t>(content[j])), vc) - log_z;
        });
    }
    return total / static_cast<double>(T);
}

void skipgram_gradient(const std::vector<std::vector<int>>& contents, std::size_t window,
                       const EmbeddingMatrix& emb, Vectors& grad_u, Vectors& grad_v) {
    check_ids(contents, emb.u.rows);
    const std::size_t T = token_count(contents);
    if (T == 0) throw DataError("empty corpus");
    grad_u = Vectors(emb.u.rows, emb.u.dim);
    grad_v = Vectors(emb.v.rows, emb.v.dim);
    const double scale = 1.0 / static_cast<double>(T);
    std::vector<double> p;
    std::vector<double> context_count(emb.u.rows);
    for (const auto& content : contents) {
        for_each_window(content, window, [&](std::size_t t, std::size_t lo, std::size_t hi) {
            const auto c = static_cast<std::size_t>(content[t]);
            softmax_into(emb, c, p);
            accumulate_position(emb, content, t, lo, hi, p, scale, grad_u, grad_v.row(c), context_count);
        });
    }
}

EmbeddingMatrix train_skipgram(const std::vector<std::vector<int>>& contents, std::size_t vocab_size,
                               const SkipGramOptions& options) {
    if (vocab_size < 2) throw std::invalid_argument("skip-gram needs at least two vocabulary words");
    if (options.dim < 2) throw std::invalid_argument("skip-gram needs dim >= 2");
    if (options.window < 1) throw std::invalid_argument("skip-gram needs window >= 1");
    if (options.epochs < 1) throw std::invalid_argument("skip-gram needs at least one epoch");
    if (token_count(contents) == 0) throw DataError("empty corpus");
    check_ids(contents, vocab_size);

    EmbeddingMatrix emb = init_embedding(vocab_size, options.dim, options.seed);
    emb.window = options.window;
    emb.epochs = options.epochs;
    emb.rate = options.rate;

    Vectors grad_u(vocab_size, options.dim);
    Vectors grad_v(vocab_size, options.dim);
    std::vector<double> p;
    std::vector<double> context_count(vocab_size);
    std::vector<double> grad_vc(options.dim);
    for (int epoch = 0; epoch < options.epochs; ++epoch) {
        if (options.full_batch) {
            skipgram_gradient(contents, options.window, emb, grad_u, grad_v);
            for (std::size_t i = 0; i < emb.u.data.size(); ++i) emb.u.data[i] += options.rate * grad_u.data[i];
            for (std::size_t i = 0; i < emb.v.data.size(); ++i) emb.v.data[i] += options.rate * grad_v.data[i];
        } else {
            for (const auto& content : contents) {
                for_each_window(content, options.window, [&](std::size_t t, std::size_t lo, std::size_t hi) {
                    const auto c = static_cast<std::size_t>(content[t]);
                    softmax_into(emb, c, p);
                    std::fill(grad_u.data.begin(), grad_u.data.end(), 0.0);
                    std::fill(grad_vc.begin(), grad_vc.end(), 0.0);
                    accumulate_position(emb, content, t, lo, hi, p, 1.0, grad_u, grad_vc, context_count);
                    for (std::size_t i = 0; i < emb.u.data.size(); ++i) emb.u.data[i] += options.rate * grad_u.data[i];
                    auto vc = emb.v.row(c);
                    for (std::size_t d = 0; d < options.dim; ++d) vc[d] += options.rate * grad_vc[d];
                });
            }
        }
        const double objective = skipgram_objective(contents, options.window, emb);
        if (!std::isfinite(objective)) throw DataError("skip-gram training diverged; lower the rate");
        emb.epoch_loss.push_back(-objective);
    }
    return emb;
}

EmbeddingMatrix train_skipgram(const CleanCorpus& corpus, const SkipGramOptions& options) {
    return train_skipgram(corpus.encoded(), corpus.vocabulary.size(), options);
}

DistanceMatrix DistanceMatrix::subset(std::span<const std::size_t> items) const {
    DistanceMatrix out(items.size());
    for (std::size_t a = 0; a < items.size(); ++a)
        for (std::size_t b = 0; b < items.size(); ++b) out.at(a, b) = (*this)(items[a], items[b]);
    return out;
}

DistanceMatrix cosine_distances(const Vectors& vectors, unsigned threads) {
    const std::size_t n = vectors.rows;
    // Squared norms so that identical rows give exactly 0: sqrt(x * x) == x.
    std::vector<double> sq(n);
    for (std::size_t i = 0; i < n; ++i) sq[i] = dot(vectors.row(i), vectors.row(i));
    DistanceMatrix dist(n);
    parallel_for(n, threads, [&](std::size_t i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            if (sq[i] == 0.0 || sq[j] == 0.0) {
                dist.at(i, j) = 1.0;
                continue;
            }
            const double cosine = dot(vectors.row(i), vectors.row(j)) / std::sqrt(sq[i] * sq[j]);
            dist.at(i, j) = std::clamp(1.0 - cosine, 0.0, 2.0);
        }
    });
    return dist;
}

namespace {

struct Nearest {
    std::vector<std::size_t> first;  // index into medoids
    std::vector<double> d1;
    std::vector<double> d2;
    double cost = 0.0;
};

Nearest nearest_medoids(const DistanceMatrix& dist, const std::vector<std::size_t>& medoids) {
    Nearest nn;
    const std::size_t n = dist.n;
    nn.first.assign(n, 0);
    nn.d1.assign(n, std::numeric_limits<double>::infinity());
    nn.d2.assign(n, std::numeric_limits<double>::infinity());
    for (std::size_t o = 0; o < n; ++o) {
        for (std::size_t i = 0; i < medoids.size(); ++i) {
            const double d = dist(o, medoids[i]);
            if (d < nn.d1[o]) {
                nn.d2[o] = nn.d1[o];
                nn.d1[o] = d;
                nn.first[o] = i;
            } else if (d < nn.d2[o]) {
                nn.d2[o] = d;
            }
        }
        nn.cost += nn.d1[o];
    }
    return nn;
}

}  // namespace

ClusterModel assign_to_medoids(const DistanceMatrix& dist, std::vector<std::size_t> medoids) {
    ClusterModel model;
    model.k = medoids.size();
    const Nearest nn = nearest_medoids(dist, medoids);
    model.medoids = std::move(medoids);
    model.assignment.resize(dist.n);
    for (std::size_t o = 0; o < dist.n; ++o) model.assignment[o] = static_cast<int>(nn.first[o]);
    model.cost = nn.cost;
    model.build_cost = nn.cost;
    model.cost_history = {nn.cost};
    return model;
}

namespace {

std::vector<std::size_t> build_medoids(const DistanceMatrix& dist, std::size_t k) {
    const std::size_t n = dist.n;
    std::vector<std::size_t> medoids;
    std::vector<bool> is_medoid(n, false);
    std::size_t first = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += dist(i, j);
        if (s < best) {
            best = s;
            first = j;
        }
    }
    medoids.push_back(first);
    is_medoid[first] = true;
    std::vector<double> nearest(n);
    for (std::size_t i = 0; i < n; ++i) nearest[i] = dist(i, first);
    while (medoids.size() < k) {
        std::size_t pick = n;
        double best_gain = -1.0;
        for (std::size_t h = 0; h < n; ++h) {
            if (is_medoid[h]) continue;
            double gain = 0.0;
            for (std::size_t i = 0; i < n; ++i) gain += std::max(nearest[i] - dist(i, h), 0.0);
            if (gain > best_gain) {
                best_gain = gain;
                pick = h;
            }
        }
        medoids.push_back(pick);
        is_medoid[pick] = true;
        for (std::size_t i = 0; i < n; ++i) nearest[i] = std::min(nearest[i], dist(i, pick));
    }
    return medoids;
}

// Best-improvement swaps until none lowers the cost. The change for every
// (medoid i, candidate h) pair comes from one pass over the points using
// nearest and second-nearest distances. Returns the cost history.
std::vector<double> swap_phase(const DistanceMatrix& dist, std::vector<std::size_t>& medoids) {
    const std::size_t n = dist.n;
    const std::size_t k = medoids.size();
    std::vector<bool> is_medoid(n, false);
    for (auto m : medoids) is_medoid[m] = true;
    Nearest nn = nearest_medoids(dist, medoids);
    std::vector<double> history{nn.cost};
    std::vector<double> correction(k);
    for (;;) {
        double best_delta = 0.0;
        std::size_t swap_out = k, swap_in = n;
        const double tolerance = 1e-12 * std::max(1.0, nn.cost);
        for (std::size_t h = 0; h < n; ++h) {
            if (is_medoid[h]) continue;
            double shared = 0.0;
            std::fill(correction.begin(), correction.end(), 0.0);
            for (std::size_t o = 0; o < n; ++o) {
                const double dh = dist(o, h);
                const double keep = std::min(dh - nn.d1[o], 0.0);
                shared += keep;
                correction[nn.first[o]] += std::min(dh, nn.d2[o]) - nn.d1[o] - keep;
            }
            for (std::size_t i = 0; i < k; ++i) {
                const double delta = shared + correction[i];
                if (delta < best_delta - tolerance) {
                    best_delta = delta;
                    swap_out = i;
                    swap_in = h;
                }
            }
        }
        if (swap_in == n) break;
        is_medoid[medoids[swap_out]] = false;
        is_medoid[swap_in] = true;
        medoids[swap_out] = swap_in;
        nn = nearest_medoids(dist, medoids);
        history.push_back(nn.cost);
    }
    return history;
}

}  // namespace

ClusterModel pam_cluster(const DistanceMatrix& dist, std::size_t k, const PamOptions& options) {
    const std::size_t n = dist.n;
    if (k < 2 || k > n) throw std::invalid_argument("k must satisfy 2 <= k <= number of points");

    std::vector<std::size_t> medoids = build_medoids(dist, k);
    std::vector<double> history = swap_phase(dist, medoids);
    const double build_cost = history.front();

    for (int r = 0; r < options.restarts && k < n; ++r) {
        Rng rng(derive_seed(options.seed, static_cast<std::uint64_t>(r)));
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        for (std::size_t i = 0; i < k; ++i) std::swap(order[i], order[i + rng.below(n - i)]);
        std::vector<std::size_t> trial(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
        std::vector<double> trial_history = swap_phase(dist, trial);
        if (trial_history.back() < history.back() - 1e-12 * std::max(1.0, history.back())) {
            medoids = std::move(trial);
            history = std::move(trial_history);
        }
    }

    ClusterModel model = assign_to_medoids(dist, std::move(medoids));
    model.build_cost = build_cost;
    model.cost_history = std::move(history);
    return model;
}

double silhouette_width(const DistanceMatrix& dist, std::span<const int> assignment) {
    const std::size_t n = dist.n;
    if (assignment.size() != n) throw std::invalid_argument("assignment size differs from point count");
    if (n == 0) throw std::invalid_argument("silhouette of an empty set");
    const int clusters = *std::max_element(assignment.begin(), assignment.end()) + 1;
    std::vector<std::size_t> size(static_cast<std::size_t>(clusters), 0);
    for (int a : assignment) ++size[static_cast<std::size_t>(a)];

    std::vector<double> sum(static_cast<std::size_t>(clusters));
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto own = static_cast<std::size_t>(assignment[i]);
        if (size[own] <= 1) continue;
        std::fill(sum.begin(), sum.end(), 0.0);
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) sum[static_cast<std::size_t>(assignment[j])] += dist(i, j);
        const double a = sum[own] / static_cast<double>(size[own] - 1);
        double b = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < sum.size(); ++c)
            if (c != own && size[c] > 0) b = std::min(b, sum[c] / static_cast<double>(size[c]));
        if (!std::isfinite(b)) continue;
        const double denom = std::max(a, b);
        if (denom > 0.0) total += (b - a) / denom;
    }
    return total / static_cast<double>(n);
}

SilhouetteSweep silhouette_sweep(const DistanceMatrix& dist, std::size_t k_min, std::size_t k_max,
                                 const PamOptions& pam, unsigned threads) {
    if (k_min < 2 || k_max < k_min || k_max + 1 > dist.n)
        throw std::invalid_argument("k range must lie within [2, n - 1]");
    if (std::all_of(dist.d.begin(), dist.d.end(), [](double x) { return x == 0.0; }))
        throw DataError("zero-variance embedding");
    SilhouetteSweep sweep;
    const std::size_t count = k_max - k_min + 1;
    sweep.k.resize(count);
    sweep.width.resize(count);
    parallel_for(count, threads, [&](std::size_t i) {
        sweep.k[i] = k_min + i;
        const ClusterModel m = pam_cluster(dist, sweep.k[i], pam);
        sweep.width[i] = silhouette_width(dist, m.assignment);
    });
    std::size_t best = 0;
    for (std::size_t i = 1; i < count; ++i)
        if (sweep.width[i] > sweep.width[best]) best = i;
    sweep.best_k = sweep.k[best];
    return sweep;
}

std::vector<double> jaccard_replicate(const DistanceMatrix& dist, const ClusterModel& full, double fraction,
                                      std::uint64_t rep_seed, const PamOptions& pam) {
    const std::size_t n = dist.n;
    const std::size_t k = full.k;
    const auto target = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
    const std::size_t m = std::clamp<std::size_t>(target, k, n);

    Rng rng(rep_seed);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = 0; i < m; ++i) std::swap(order[i], order[i + rng.below(n - i)]);
    std::vector<std::size_t> sample(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(m));
    std::sort(sample.begin(), sample.end());

    const ClusterModel sub = pam_cluster(dist.subset(sample), k, pam);
    // inter[c][s]: sampled words in full cluster c and subsample cluster s.
    std::vector<std::vector<double>> inter(k, std::vector<double>(k, 0.0));
    std::vector<double> full_size(k, 0.0), sub_size(k, 0.0);
    for (std::size_t a = 0; a < m; ++a) {
        const auto c = static_cast<std::size_t>(full.assignment[sample[a]]);
        const auto s = static_cast<std::size_t>(sub.assignment[a]);
        inter[c][s] += 1.0;
        full_size[c] += 1.0;
        sub_size[s] += 1.0;
    }
    std::vector<std::vector<double>> jac(k, std::vector<double>(k, 0.0));
    for (std::size_t c = 0; c < k; ++c)
        for (std::size_t s = 0; s < k; ++s) {
            const double uni = full_size[c] + sub_size[s] - inter[c][s];
            jac[c][s] = uni > 0.0 ? inter[c][s] / uni : 0.0;
        }

    std::vector<double> matched(k, 0.0);
    std::vector<bool> row_used(k, false), col_used(k, false);
    for (std::size_t step = 0; step < k; ++step) {
        std::size_t bc = k, bs = k;
        double best = -1.0;
        for (std::size_t c = 0; c < k; ++c) {
            if (row_used[c]) continue;
            for (std::size_t s = 0; s < k; ++s)
                if (!col_used[s] && jac[c][s] > best) {
                    best = jac[c][s];
                    bc = c;
                    bs = s;
                }
        }
        row_used[bc] = col_used[bs] = true;
        matched[bc] = best;
    }
    return matched;
}

StabilityResult jaccard_stability(const DistanceMatrix& dist, std::size_t k, double fraction, int reps,
                                  std::uint64_t seed, const PamOptions& pam, unsigned threads) {
    if (!(fraction > 0.0 && fraction < 1.0)) throw std::invalid_argument("subsample fraction must be in (0, 1)");
    if (reps < 1) throw std::invalid_argument("stability needs at least one repetition");
    const ClusterModel full = pam_cluster(dist, k, pam);
    std::vector<std::vector<double>> per_rep(static_cast<std::size_t>(reps));
    parallel_for(per_rep.size(), threads, [&](std::size_t r) {
        per_rep[r] = jaccard_replicate(dist, full, fraction, derive_seed(seed, r), pam);
    });
    StabilityResult out;
    out.reps = reps;
    out.cluster_mean.assign(k, 0.0);
    double total = 0.0;
    for (const auto& rep : per_rep)
        for (std::size_t c = 0; c < k; ++c) {
            out.cluster_mean[c] += rep[c];
            total += rep[c];
        }
    for (auto& x : out.cluster_mean) x /= static_cast<double>(reps);
    out.overall_mean = total / static_cast<double>(reps * static_cast<int>(k));
    return out;
}

TopicDistribution topic_distribution(std::span<const std::string> tokens, const Vocabulary& vocabulary,
                                     const ClusterModel& model) {
    TopicDistribution out;
    out.theta.assign(model.k, 0.0);
    double known = 0.0;
    for (const auto& t : tokens) {
        const int id = vocabulary.id(t);
        if (id < 0) continue;
        if (static_cast<std::size_t>(id) >= model.assignment.size())
            throw std::invalid_argument("vocabulary does not match the cluster model");
        out.theta[static_cast<std::size_t>(model.assignment[static_cast<std::size_t>(id)])] += 1.0;
        known += 1.0;
    }
    if (known == 0.0) throw DataError("untopicable content");
    for (auto& x : out.theta) x /= known;
    const auto top = std::max_element(out.theta.begin(), out.theta.end());
    if (*top > 0.5) out.dominant = static_cast<std::size_t>(top - out.theta.begin());
    return out;
}

double adjusted_rand_index(std::span<const int> a, std::span<const int> b) {
    if (a.size() != b.size()) throw std::invalid_argument("labelings differ in length");
    const std::size_t n = a.size();
    if (n < 2) return 1.0;
    std::map<std::pair<int, int>, double> table;
    std::map<int, double> rows, cols;
    for (std::size_t i = 0; i < n; ++i) {
        table[{a[i], b[i]}] += 1.0;
        rows[a[i]] += 1.0;
        cols[b[i]] += 1.0;
    }
    auto pairs = [](double x) { return x * (x - 1.0) / 2.0; };
    double index = 0.0, sum_rows = 0.0, sum_cols = 0.0;
    for (const auto& [key, count] : table) index += pairs(count);
    for (const auto& [key, count] : rows) sum_rows += pairs(count);
    for (const auto& [key, count] : cols) sum_cols += pairs(count);
    const double expected = sum_rows * sum_cols / pairs(static_cast<double>(n));
    const double maximum = 0.5 * (sum_rows + sum_cols);
    if (maximum == expected) return 1.0;
    return (index - expected) / (maximum - expected);
}

PipelineResult run_pipeline(std::span<const std::string> texts, std::span<const std::string> ids,
                            const PipelineOptions& options) {
    if (texts.size() != ids.size()) throw std::invalid_argument("texts and ids differ in length");
    PipelineResult out;
    out.corpus = clean(texts, options.clean);
    const std::size_t V = out.corpus.vocabulary.size();
    if (V < 3) throw DataError("vocabulary too small after cleaning");
    for (std::size_t idx : out.corpus.source_index) out.content_ids.push_back(ids[idx]);

    SkipGramOptions sg = options.skipgram;
    sg.seed = derive_seed(options.seed, 0);
    out.embedding = train_skipgram(out.corpus, sg);

    const DistanceMatrix dist = cosine_distances(out.embedding.u, options.threads);
    const std::size_t k_max = std::min(options.k_max, V - 1);
    const std::size_t k_min = std::min(std::max<std::size_t>(options.k_min, 2), k_max);
    const PamOptions pam{options.pam_restarts, derive_seed(options.seed, 2)};
    out.sweep = silhouette_sweep(dist, k_min, k_max, pam, options.threads);
    out.model = pam_cluster(dist, out.sweep.best_k, pam);
    out.stability = jaccard_stability(dist, out.sweep.best_k, options.stability_fraction, options.stability_reps,
                                      derive_seed(options.seed, 1), pam, options.threads);
    out.topics.reserve(out.corpus.contents.size());
    for (const auto& content : out.corpus.contents)
        out.topics.push_back(topic_distribution(content, out.corpus.vocabulary, out.model));
    return out;
}

void write_outputs(const PipelineResult& result, const std::filesystem::path& dir) {
    using csv::format_double;
    const auto& vocab = result.corpus.vocabulary;

    std::string text = "id,word,count\n";
    for (std::size_t i = 0; i < vocab.size(); ++i)
        text += std::to_string(i) + "," + vocab.words[i] + "," + std::to_string(vocab.counts[i]) + "\n";
    csv::write_file_atomic(dir / "vocab.csv", text);

    text = "word,cluster\n";
    for (std::size_t i = 0; i < vocab.size(); ++i)
        text += vocab.words[i] + "," + std::to_string(result.model.assignment[i]) + "\n";
    csv::write_file_atomic(dir / "clusters.csv", text);

    text = "k,width\n";
    for (std::size_t i = 0; i < result.sweep.k.size(); ++i)
        text += std::to_string(result.sweep.k[i]) + "," + format_double(result.sweep.width[i]) + "\n";
    csv::write_file_atomic(dir / "silhouette.csv", text);

    text = "cluster,medoid,jaccard\n";
    for (std::size_t c = 0; c < result.stability.cluster_mean.size(); ++c)
        text += std::to_string(c) + "," + vocab.words[result.model.medoids[c]] + "," +
                format_double(result.stability.cluster_mean[c]) + "\n";
    text += "all,," + format_double(result.stability.overall_mean) + "\n";
    csv::write_file_atomic(dir / "stability.csv", text);

    text = "content_id";
    for (std::size_t c = 0; c < result.model.k; ++c) text += ",theta_" + std::to_string(c);
    text += ",dominant\n";
    for (std::size_t i = 0; i < result.topics.size(); ++i) {
        text += csv::quote(result.content_ids[i]);
        for (double x : result.topics[i].theta) text += "," + format_double(x);
        text += "," + (result.topics[i].dominant ? std::to_string(*result.topics[i].dominant) : std::string("NA"));
        text += "\n";
    }
    csv::write_file_atomic(dir / "topics.csv", text);
}

}  // namespace infodemic::topics
