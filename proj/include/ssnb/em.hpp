#pragma once

#include <filesystem>
#include <utility>
#include <vector>

#include "ssnb/classifier.hpp"

namespace ssnb {

// Class posteriors of the unlabeled documents (the hidden labels).
// Each row sums to 1.
struct Responsibilities {
    size_t num_docs = 0;
    int num_classes = 0;
    std::vector<double> data;  // num_docs x num_classes, row-major

    double at(size_t doc, int c) const {
        return data[doc * static_cast<size_t>(num_classes) + static_cast<size_t>(c)];
    }
    std::span<const double> row(size_t doc) const {
        return {data.data() + doc * static_cast<size_t>(num_classes),
                static_cast<size_t>(num_classes)};
    }
};

struct EMConfig {
    double alpha = 1.0;          // Laplace smoothing
    double lambda = 1.0;         // weight of the unlabeled log-likelihood term
    int max_iterations = 100;
    double rel_tolerance = 1e-6;

    void validate() const;
};

// Weighted log-likelihood after initialization and after every M-step.
struct EMTrace {
    std::vector<std::pair<int, double>> log_likelihoods;  // (iteration, value)
    bool converged = false;
    int iterations = 0;
};

// L = sum_i log P(x_i, y_i) + lambda * sum_j log sum_c P(x_j, c).
double log_likelihood(const NBModel& model, const VectorizedLabeled& labeled,
                      const VectorizedUnlabeled& unlabeled, double lambda);

// r_jc = P(x_j, c) / sum_c' P(x_j, c'), normalized in log space.
// workers > 1 fans rows out across threads; the result is byte-identical
// for any worker count.
Responsibilities e_step(const NBModel& model, const VectorizedUnlabeled& unlabeled,
                        int workers = 1);

// Closed-form M-step over hard labeled counts plus lambda-weighted soft
// unlabeled counts, smoothed exactly like train_supervised.
NBModel m_step(const VectorizedLabeled& labeled, const VectorizedUnlabeled& unlabeled,
               const Responsibilities& resp, const EMConfig& config);

// Initializes from the supervised model, then alternates E and M steps until
// |dL| / (|L| + 1e-12) < rel_tolerance or max_iterations.
std::pair<NBModel, EMTrace> train_em(const VectorizedLabeled& labeled,
                                     const VectorizedUnlabeled& unlabeled, const EMConfig& config,
                                     int workers = 1);

// CSV export: "iteration,log_likelihood".
void write_trace_csv(const EMTrace& trace, const std::filesystem::path& path);

}  // namespace ssnb
