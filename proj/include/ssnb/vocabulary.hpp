#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "ssnb/corpus.hpp"

namespace ssnb {

// All distinct words of the working data, in the order the paper's
// procedure adds them to the dictionary: shuffled labeled-train+test words,
// then shuffled novel unlabeled words, then the fallback list verbatim.
struct OrderedWordPool {
    std::vector<std::string> words;
    size_t labeled_end = 0;    // end of the labeled(+test) segment
    size_t unlabeled_end = 0;  // end of the unlabeled segment

    size_t size() const { return words.size(); }
};

// A truncation of a pool to its first V words, indexed 0..V-1.
struct Vocabulary {
    std::vector<std::string> words;
    std::unordered_map<std::string, uint32_t> index;

    uint32_t size() const { return static_cast<uint32_t>(words.size()); }
    static Vocabulary from_words(std::vector<std::string> words);
};

OrderedWordPool build_word_pool(const LabeledCorpus& labeled_train, const LabeledCorpus& test,
                                const UnlabeledCorpus& unlabeled,
                                const std::vector<std::string>& fallback_wordlist, uint64_t seed);

Vocabulary truncate(const OrderedWordPool& pool, uint32_t vocab_size);

// Sparse bag-of-words counts, sorted by vocabulary index.
struct TermCounts {
    std::vector<std::pair<uint32_t, uint32_t>> entries;

    uint32_t total() const {
        uint32_t n = 0;
        for (auto [w, c] : entries) n += c;
        return n;
    }
};

TermCounts vectorize(const Sentence& sentence, const Vocabulary& vocab);

// Dense variant of the same counts; entry w = occurrences of vocab word w.
std::vector<uint32_t> vectorize_dense(const Sentence& sentence, const Vocabulary& vocab);

struct VectorizedLabeled {
    std::vector<TermCounts> docs;
    std::vector<int> labels;
    std::vector<std::string> class_names;
    uint32_t vocab_size = 0;

    size_t size() const { return docs.size(); }
    int num_classes() const { return static_cast<int>(class_names.size()); }
};

struct VectorizedUnlabeled {
    std::vector<TermCounts> docs;
    uint32_t vocab_size = 0;

    size_t size() const { return docs.size(); }
};

VectorizedLabeled vectorize_corpus(const LabeledCorpus& corpus, const Vocabulary& vocab);
VectorizedUnlabeled vectorize_corpus(const UnlabeledCorpus& corpus, const Vocabulary& vocab);

// One word per line, UTF-8; blank lines skipped.
std::vector<std::string> load_wordlist(const std::filesystem::path& path);

// Deterministic pseudo-word list ("qaaa", "qaab", ...) for tests and synthetic
// pools that need novel dictionary words beyond the observed data.
std::vector<std::string> synthetic_wordlist(size_t count, const std::string& prefix = "q");

}  // namespace ssnb
