#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ssnb {

// One classification unit: a sentence as a token sequence. Tokens are
// lowercase ASCII-letter runs (see tokenize). label is set only for
// sentences living in a labeled pool.
struct Sentence {
    std::string id;
    std::vector<std::string> tokens;
    std::optional<int> label;
};

struct LabeledCorpus {
    std::vector<Sentence> sentences;
    std::vector<std::string> class_names;

    size_t size() const { return sentences.size(); }
    int num_classes() const { return static_cast<int>(class_names.size()); }
};

struct UnlabeledCorpus {
    std::vector<Sentence> sentences;

    size_t size() const { return sentences.size(); }
};

// Maximal runs of ASCII letters, lowercased; digits, punctuation and any
// other byte separate tokens and are dropped.
std::vector<std::string> tokenize(std::string_view text);

// JSONL readers. Labeled files start with a {"classes": [...]} header line;
// every following line is {"id", "text", "label"}. Unlabeled files have no
// header and no label fields. Errors carry the offending line number.
LabeledCorpus load_labeled_corpus(const std::filesystem::path& path);
UnlabeledCorpus load_unlabeled_corpus(const std::filesystem::path& path);

void save_labeled_corpus(const LabeledCorpus& corpus, const std::filesystem::path& path);
void save_unlabeled_corpus(const UnlabeledCorpus& corpus, const std::filesystem::path& path);

// Seed-deterministic disjoint partition; |test| = round(test_fraction * n).
// Sentence order within each side follows the input corpus.
std::pair<LabeledCorpus, LabeledCorpus> split(const LabeledCorpus& corpus, double test_fraction,
                                              uint64_t seed);

// Concatenation keeping the left corpus's class set; used by the harness to
// accumulate labeled blocks. Class sets must match.
LabeledCorpus concat(const LabeledCorpus& a, const LabeledCorpus& b);

}  // namespace ssnb
