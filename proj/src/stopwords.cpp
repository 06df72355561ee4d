#include <algorithm>
#include <string>
#include <vector>

#include "infodemic/topics.hpp"

namespace infodemic::topics {

// English list, version 1. Sorted so lookups can binary search.
const std::vector<std::string>& stopwords() {
    static const std::vector<std::string> words = [] {
        std::vector<std::string> w{
            "a",          "about",     "above",    "after",     "again",    "against",  "ain",      "all",
            "also",       "am",        "an",       "and",       "any",      "are",      "aren",     "aren't",
            "as",         "at",        "be",       "because",   "been",     "before",   "being",    "below",
            "between",    "both",      "but",      "by",        "can",      "cannot",   "could",    "couldn",
            "couldn't",   "d",         "did",      "didn",      "didn't",   "do",       "does",     "doesn",
            "doesn't",    "doing",     "don",      "don't",     "down",     "during",   "each",     "either",
            "else",       "ever",      "every",    "few",       "for",      "from",     "further",  "get",
            "gets",       "got",       "had",      "hadn",      "hadn't",   "has",      "hasn",     "hasn't",
            "have",       "haven",     "haven't",  "having",    "he",       "her",      "here",     "hers",
            "herself",    "him",       "himself",  "his",       "how",      "however",  "i",        "if",
            "in",         "into",      "is",       "isn",       "isn't",    "it",       "it's",     "its",
            "itself",     "just",      "let",      "ll",        "m",        "ma",       "may",      "me",
            "might",      "mightn",    "mightn't", "more",      "most",     "much",     "must",     "mustn",
            "mustn't",    "my",        "myself",   "needn",     "needn't",  "neither",  "no",       "nor",
            "not",        "now",       "o",        "of",        "off",      "often",    "on",       "once",
            "only",       "or",        "other",    "others",    "ought",    "our",      "ours",     "ourselves",
            "out",        "over",      "own",      "quite",     "rather",   "re",       "s",        "same",
            "shall",      "shan",      "shan't",   "she",       "she's",    "should",   "should've", "shouldn",
            "shouldn't",  "since",     "so",       "some",      "such",     "t",        "than",     "that",
            "that'll",    "the",       "their",    "theirs",    "them",     "themselves", "then",   "there",
            "these",      "they",      "this",     "those",     "though",   "through",  "thus",     "to",
            "too",        "under",     "until",    "up",        "upon",     "us",       "ve",       "very",
            "was",        "wasn",      "wasn't",   "we",        "were",     "weren",    "weren't",  "what",
            "when",       "where",     "whether",  "which",     "while",    "who",      "whom",     "whose",
            "why",        "will",      "with",     "within",    "without",  "won",      "won't",    "would",
            "wouldn",     "wouldn't",  "y",        "yet",       "you",      "you'd",    "you'll",   "you're",
            "you've",     "your",      "yours",    "yourself",  "yourselves",
        };
        std::sort(w.begin(), w.end());
        w.erase(std::unique(w.begin(), w.end()), w.end());
        return w;
    }();
    return words;
}

bool is_stopword(std::string_view word) {
    const auto& w = stopwords();
    return std::binary_search(w.begin(), w.end(), word, std::less<>{});
}

}  // namespace infodemic::topics
