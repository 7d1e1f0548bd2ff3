#include "ssnb/em.hpp"

#include <cmath>
#include <fstream>
#include <thread>

#include "ssnb/errors.hpp"
#include "ssnb/feature_selection.hpp"
#include "ssnb/numeric.hpp"

namespace ssnb {

void EMConfig::validate() const {
    if (alpha <= 0.0) throw validation_error("EM alpha must be positive");
    if (lambda < 0.0) throw validation_error("EM lambda must be non-negative");
    if (max_iterations < 1) throw validation_error("EM max_iterations must be positive");
    if (rel_tolerance <= 0.0) throw validation_error("EM rel_tolerance must be positive");
}

double log_likelihood(const NBModel& model, const VectorizedLabeled& labeled,
                      const VectorizedUnlabeled& unlabeled, double lambda) {
    if (labeled.vocab_size != model.vocab_size ||
        (unlabeled.size() > 0 && unlabeled.vocab_size != model.vocab_size)) {
        throw validation_error("corpus vocabulary size does not match the model");
    }
    KahanSum sum;
    for (size_t i = 0; i < labeled.size(); ++i) {
        const auto scores = log_joint(model, labeled.docs[i]);
        sum.add(scores[static_cast<size_t>(labeled.labels[i])]);
    }
    if (lambda != 0.0) {
        KahanSum marginal;
        for (const TermCounts& doc : unlabeled.docs) {
            marginal.add(log_sum_exp(log_joint(model, doc)));
        }
        sum.add(lambda * marginal.value());
    }
    return sum.value();
}

namespace {

void e_step_rows(const NBModel& model, const VectorizedUnlabeled& unlabeled, size_t begin,
                 size_t end, Responsibilities& resp) {
    const int C = model.num_classes();
    for (size_t j = begin; j < end; ++j) {
        std::vector<double> scores = log_joint(model, unlabeled.docs[j]);
        const double norm = log_sum_exp(scores);
        double* row = resp.data.data() + j * static_cast<size_t>(C);
        double row_sum = 0.0;
        for (int c = 0; c < C; ++c) {
            row[c] = std::exp(scores[static_cast<size_t>(c)] - norm);
            row_sum += row[c];
        }
        for (int c = 0; c < C; ++c) row[c] /= row_sum;
    }
}

}  // namespace

Responsibilities e_step(const NBModel& model, const VectorizedUnlabeled& unlabeled, int workers) {
    if (unlabeled.size() > 0 && unlabeled.vocab_size != model.vocab_size) {
        throw validation_error("unlabeled vocabulary size does not match the model");
    }
    Responsibilities resp;
    resp.num_docs = unlabeled.size();
    resp.num_classes = model.num_classes();
    resp.data.resize(resp.num_docs * static_cast<size_t>(resp.num_classes));

    const size_t n = resp.num_docs;
    if (workers <= 1 || n < 256) {
        e_step_rows(model, unlabeled, 0, n, resp);
        return resp;
    }
    // Rows are independent and land in preassigned slots, so the split is
    // free of reductions and worker count never changes the bytes.
    const size_t chunks = std::min<size_t>(static_cast<size_t>(workers), n);
    std::vector<std::thread> threads;
    threads.reserve(chunks);
    const size_t step = (n + chunks - 1) / chunks;
    for (size_t t = 0; t < chunks; ++t) {
        const size_t begin = t * step;
        const size_t end = std::min(n, begin + step);
        if (begin >= end) break;
        threads.emplace_back(
            [&, begin, end] { e_step_rows(model, unlabeled, begin, end, resp); });
    }
    for (auto& th : threads) th.join();
    return resp;
}

NBModel m_step(const VectorizedLabeled& labeled, const VectorizedUnlabeled& unlabeled,
               const Responsibilities& resp, const EMConfig& config) {
    config.validate();
    return estimate_from_counts(expected_counts(labeled, unlabeled, resp, config.lambda),
                                config.alpha);
}

std::pair<NBModel, EMTrace> train_em(const VectorizedLabeled& labeled,
                                     const VectorizedUnlabeled& unlabeled, const EMConfig& config,
                                     int workers) {
    config.validate();
    if (labeled.size() == 0) throw validation_error("EM needs a non-empty labeled corpus");

    NBModel model = train_supervised(labeled, config.alpha);
    EMTrace trace;
    double current = log_likelihood(model, labeled, unlabeled, config.lambda);
    trace.log_likelihoods.emplace_back(0, current);
    if (unlabeled.size() == 0) {
        trace.converged = true;
        return {std::move(model), std::move(trace)};
    }

    for (int iter = 1; iter <= config.max_iterations; ++iter) {
        Responsibilities resp = e_step(model, unlabeled, workers);
        model = m_step(labeled, unlabeled, resp, config);
        const double next = log_likelihood(model, labeled, unlabeled, config.lambda);
        trace.log_likelihoods.emplace_back(iter, next);
        trace.iterations = iter;
        if (std::abs(next - current) / (std::abs(next) + 1e-12) < config.rel_tolerance) {
            trace.converged = true;
            current = next;
            break;
        }
        current = next;
    }
    return {std::move(model), std::move(trace)};
}

void write_trace_csv(const EMTrace& trace, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write trace file: " + path.string());
    out << "iteration,log_likelihood\n";
    for (const auto& [iter, value] : trace.log_likelihoods) {
        out << iter << "," << format_double(value) << "\n";
    }
    if (!out) throw io_error("write failed: " + path.string());
}

}  // namespace ssnb
