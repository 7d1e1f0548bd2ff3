#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ssnb/vocabulary.hpp"

namespace ssnb {

// Multinomial naive Bayes parameters, natural-log space throughout.
// exp(log_priors) sums to 1; each exp row of log_word_probs sums to 1.
struct NBModel {
    std::vector<std::string> class_names;
    std::vector<double> log_priors;      // C
    std::vector<double> log_word_probs;  // C x V, row-major
    double smoothing_alpha = 1.0;
    uint32_t vocab_size = 0;

    int num_classes() const { return static_cast<int>(class_names.size()); }
    double log_word_prob(int c, uint32_t w) const {
        return log_word_probs[static_cast<size_t>(c) * vocab_size + w];
    }
};

// Class/word occurrence mass: hard counts from labeled data, optionally
// plus responsibility-weighted expected counts from unlabeled data.
struct SoftClassWordCounts {
    std::vector<std::string> class_names;
    uint32_t vocab_size = 0;
    std::vector<double> word_counts;  // C x V, row-major
    std::vector<double> doc_mass;     // C

    int num_classes() const { return static_cast<int>(class_names.size()); }
    double& word_count(int c, uint32_t w) {
        return word_counts[static_cast<size_t>(c) * vocab_size + w];
    }
    double word_count(int c, uint32_t w) const {
        return word_counts[static_cast<size_t>(c) * vocab_size + w];
    }
};

// Hard counts of a labeled corpus: doc_mass[c] = document count,
// word_count(c,w) = token tally.
SoftClassWordCounts class_word_counts(const VectorizedLabeled& corpus);

// Smoothed estimates from (possibly soft) counts:
//   pi_c   = (D_c + alpha) / (D + alpha C)
//   phi_cw = (N_cw + alpha) / (N_c + alpha V)
NBModel estimate_from_counts(const SoftClassWordCounts& counts, double alpha);

NBModel train_supervised(const VectorizedLabeled& corpus, double alpha);

// Per-class log P(x, c) = log pi_c + sum_w x_w log phi_cw.
std::vector<double> log_joint(const NBModel& model, const TermCounts& counts);
std::vector<double> log_joint(const NBModel& model, std::span<const uint32_t> dense_counts);

// Argmax of log_joint; ties break toward the lowest class index.
int predict(const NBModel& model, const TermCounts& counts);

// Fraction of test sentences predicted correctly.
double evaluate(const NBModel& model, const VectorizedLabeled& test);

// JSON round trip; probabilities are stored in linear space at full
// precision. Needs vocabulary words so a loaded model can score raw text.
void save_model(const NBModel& model, const Vocabulary& vocab, const std::filesystem::path& path);
std::pair<NBModel, Vocabulary> load_model(const std::filesystem::path& path);

}  // namespace ssnb
