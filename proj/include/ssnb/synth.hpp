#pragma once

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ssnb/corpus.hpp"

namespace ssnb {

// Mixture-model corpus generator. Two knobs deliberately break the naive
// Bayes assumptions: subclusters_per_class > 1 gives each class several
// word distributions (mixture components != classes), and
// length_class_coupling > 0 ties document length to the class.
struct GeneratorConfig {
    std::vector<double> class_proportions;  // simplex of length C
    std::vector<std::string> class_names;   // optional; defaults per C
    int words_per_class = 50;
    int shared_noise_words = 50;
    double word_concentration = 1.0;  // symmetric Dirichlet skew of word dists
    double mean_length = 12.0;
    double length_class_coupling = 0.0;  // mean length factor 1 + coupling * c
    int subclusters_per_class = 1;
    int n_labeled = 0;
    int n_unlabeled = 0;
    int n_test = 0;
    uint64_t seed = 0;

    int num_classes() const { return static_cast<int>(class_proportions.size()); }
    void validate() const;

    static GeneratorConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

// The generating distributions, kept for oracle evaluation.
struct TrueModel {
    std::vector<std::string> class_names;
    std::vector<std::string> vocabulary;  // global word order
    std::vector<double> class_priors;     // C
    int subclusters = 1;
    std::vector<double> word_probs;  // (C * subclusters) x W, row-major
    double mean_length = 0.0;
    double length_class_coupling = 0.0;

    int num_classes() const { return static_cast<int>(class_names.size()); }
    size_t num_words() const { return vocabulary.size(); }
    std::span<const double> component(int c, int s) const {
        return {word_probs.data() +
                    (static_cast<size_t>(c) * static_cast<size_t>(subclusters) +
                     static_cast<size_t>(s)) *
                        num_words(),
                num_words()};
    }
};

struct SynthData {
    LabeledCorpus labeled;
    UnlabeledCorpus unlabeled;
    LabeledCorpus test;
    TrueModel truth;
};

// Seed-deterministic draw of the three pools from one mixture process.
SynthData generate(const GeneratorConfig& config);

// Accuracy of the exact posterior classifier under the generating process,
// sub-clusters marginalized and the (truncated Poisson) length term
// included. Errors if a test token is outside the model vocabulary.
double bayes_optimal_accuracy(const TrueModel& truth, const LabeledCorpus& test);

// Largest-remainder apportionment of n into parts proportional to weights;
// ties go to the lowest index.
std::vector<int> apportion(int n, std::span<const double> weights);

// Table 1 of the source corpus study: per-company labeled pool sizes and
// class mixes (5245 sentences total) plus the 5342-sentence unlabeled pool,
// ordered so unlabeled prefixes of 1485 and 2999 reproduce the study's
// increments.
struct Table1Row {
    const char* code;
    const char* company;
    const char* industry;
    int labeled;
    double positive, negative, neutral;  // class percentages
    int unlabeled;
};
std::span<const Table1Row> table1_rows();

struct Table1Pools {
    std::vector<std::pair<std::string, LabeledCorpus>> labeled_pools;  // (code, pool)
    UnlabeledCorpus unlabeled;
    TrueModel truth;
};

// Synthesizes the Table 1 pools from one shared word process; sizes and
// per-pool class counts are exact (largest-remainder), not sampled.
Table1Pools generate_table1(const GeneratorConfig& knobs);

}  // namespace ssnb
