#include "ssnb/feature_selection.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "ssnb/errors.hpp"
#include "ssnb/numeric.hpp"

namespace ssnb {

SoftClassWordCounts expected_counts(const VectorizedLabeled& labeled,
                                    const VectorizedUnlabeled& unlabeled,
                                    const Responsibilities& resp, double lambda) {
    if (lambda < 0.0) throw validation_error("lambda must be non-negative");
    if (unlabeled.size() > 0 && labeled.vocab_size != unlabeled.vocab_size) {
        throw validation_error("labeled and unlabeled vocabulary sizes differ");
    }
    if (resp.num_docs != unlabeled.size()) {
        throw validation_error("responsibility rows do not match the unlabeled corpus");
    }

    SoftClassWordCounts counts = class_word_counts(labeled);
    if (lambda == 0.0 || unlabeled.size() == 0) return counts;

    if (resp.num_classes != counts.num_classes()) {
        throw validation_error("responsibility columns do not match the class count");
    }
    const int C = counts.num_classes();
    for (size_t j = 0; j < unlabeled.size(); ++j) {
        for (int c = 0; c < C; ++c) {
            const double weight = lambda * resp.at(j, c);
            counts.doc_mass[static_cast<size_t>(c)] += weight;
            for (auto [w, n] : unlabeled.docs[j].entries) {
                counts.word_count(c, w) += weight * static_cast<double>(n);
            }
        }
    }
    return counts;
}

namespace {

inline double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

}  // namespace

std::vector<double> information_gain(const SoftClassWordCounts& counts) {
    const int C = counts.num_classes();
    const uint32_t V = counts.vocab_size;

    double total_mass = 0.0;
    for (double m : counts.doc_mass) total_mass += m;
    if (total_mass <= 0.0) throw validation_error("information gain needs positive class mass");

    std::vector<double> class_prob(static_cast<size_t>(C));
    std::vector<double> token_mass(static_cast<size_t>(C), 0.0);
    for (int c = 0; c < C; ++c) {
        class_prob[static_cast<size_t>(c)] = counts.doc_mass[static_cast<size_t>(c)] / total_mass;
        for (uint32_t w = 0; w < V; ++w) token_mass[static_cast<size_t>(c)] += counts.word_count(c, w);
    }

    std::vector<double> scores(V, 0.0);
    std::vector<double> joint_occ(static_cast<size_t>(C));
    for (uint32_t w = 0; w < V; ++w) {
        // C x 2 table: J(c, occurs) = P(c) * P(token == w | c).
        double p_occ = 0.0;
        for (int c = 0; c < C; ++c) {
            const double rate = token_mass[static_cast<size_t>(c)] > 0.0
                                    ? counts.word_count(c, w) / token_mass[static_cast<size_t>(c)]
                                    : 0.0;
            joint_occ[static_cast<size_t>(c)] = class_prob[static_cast<size_t>(c)] * rate;
            p_occ += joint_occ[static_cast<size_t>(c)];
        }
        // MI = sum_cells J log(J / (row * col)), written via entropies.
        double mi = 0.0;
        for (int c = 0; c < C; ++c) {
            const double pc = class_prob[static_cast<size_t>(c)];
            const double j1 = joint_occ[static_cast<size_t>(c)];
            const double j0 = pc - j1;
            mi += xlogx(j1) + xlogx(j0) - xlogx(pc);
        }
        mi -= xlogx(p_occ) + xlogx(1.0 - p_occ);
        scores[w] = mi > 0.0 ? mi : 0.0;
    }
    return scores;
}

namespace {

std::vector<size_t> rank_order(std::span<const double> scores) {
    std::vector<size_t> order(scores.size());
    std::iota(order.begin(), order.end(), size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return scores[a] > scores[b]; });
    return order;
}

}  // namespace

Vocabulary select_features(std::span<const double> scores, const OrderedWordPool& pool,
                           uint32_t vocab_size) {
    if (scores.size() != pool.size()) {
        throw validation_error("score vector length does not match the word pool");
    }
    if (vocab_size > pool.size()) {
        throw validation_error("requested vocabulary size " + std::to_string(vocab_size) +
                               " exceeds the word pool (" + std::to_string(pool.size()) + ")");
    }
    const std::vector<size_t> order = rank_order(scores);
    std::vector<std::string> words;
    words.reserve(vocab_size);
    for (uint32_t i = 0; i < vocab_size; ++i) words.push_back(pool.words[order[i]]);
    return Vocabulary::from_words(std::move(words));
}

void write_scores_csv(std::span<const double> scores, const OrderedWordPool& pool,
                      const std::filesystem::path& path) {
    if (scores.size() != pool.size()) {
        throw validation_error("score vector length does not match the word pool");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write scores file: " + path.string());
    out << "word,score,rank\n";
    const std::vector<size_t> order = rank_order(scores);
    for (size_t rank = 0; rank < order.size(); ++rank) {
        out << pool.words[order[rank]] << "," << format_double(scores[order[rank]]) << ","
            << (rank + 1) << "\n";
    }
    if (!out) throw io_error("write failed: " + path.string());
}

}  // namespace ssnb
