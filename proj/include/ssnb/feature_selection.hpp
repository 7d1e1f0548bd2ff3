#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "ssnb/em.hpp"

namespace ssnb {

// Expected class/word counts from labeled data plus lambda-weighted
// responsibilities over unlabeled data:
//   counts[c][w] = N_cw + lambda * sum_j r_jc * x_jw
//   doc_mass[c]  = D_c  + lambda * sum_j r_jc
// With one-hot responsibilities this is exactly hard counting on the
// pseudo-labeled corpus. The same accumulation backs the EM M-step.
SoftClassWordCounts expected_counts(const VectorizedLabeled& labeled,
                                    const VectorizedUnlabeled& unlabeled,
                                    const Responsibilities& resp, double lambda);

// Information gain of each word's occurrence indicator, in nats:
//   IG(w) = H(class) - H(class | token == w)
// with P(class) taken from doc_mass and P(token == w | class) from the soft
// token counts. Non-negative, bounded by log C.
std::vector<double> information_gain(const SoftClassWordCounts& counts);

// The V highest-scoring pool words; ties keep pool order. The result is
// indexed by descending score.
Vocabulary select_features(std::span<const double> scores, const OrderedWordPool& pool,
                           uint32_t vocab_size);

// CSV export: "word,score,rank" in rank order.
void write_scores_csv(std::span<const double> scores, const OrderedWordPool& pool,
                      const std::filesystem::path& path);

}  // namespace ssnb
