#include "ssnb/classifier.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "ssnb/errors.hpp"
#include "ssnb/numeric.hpp"

namespace ssnb {

using nlohmann::json;

SoftClassWordCounts class_word_counts(const VectorizedLabeled& corpus) {
    SoftClassWordCounts counts;
    counts.class_names = corpus.class_names;
    counts.vocab_size = corpus.vocab_size;
    counts.word_counts.assign(static_cast<size_t>(corpus.num_classes()) * corpus.vocab_size, 0.0);
    counts.doc_mass.assign(static_cast<size_t>(corpus.num_classes()), 0.0);
    for (size_t i = 0; i < corpus.size(); ++i) {
        const int c = corpus.labels[i];
        counts.doc_mass[static_cast<size_t>(c)] += 1.0;
        for (auto [w, n] : corpus.docs[i].entries) {
            counts.word_count(c, w) += static_cast<double>(n);
        }
    }
    return counts;
}

NBModel estimate_from_counts(const SoftClassWordCounts& counts, double alpha) {
    if (alpha <= 0.0) throw validation_error("smoothing alpha must be positive");
    const int C = counts.num_classes();
    if (C == 0) throw validation_error("cannot estimate a model with no classes");
    const uint32_t V = counts.vocab_size;

    NBModel model;
    model.class_names = counts.class_names;
    model.smoothing_alpha = alpha;
    model.vocab_size = V;
    model.log_priors.resize(static_cast<size_t>(C));
    model.log_word_probs.resize(static_cast<size_t>(C) * V);

    double total_mass = 0.0;
    for (double m : counts.doc_mass) total_mass += m;
    const double prior_denom = total_mass + alpha * static_cast<double>(C);
    for (int c = 0; c < C; ++c) {
        model.log_priors[static_cast<size_t>(c)] =
            std::log((counts.doc_mass[static_cast<size_t>(c)] + alpha) / prior_denom);
    }

    for (int c = 0; c < C; ++c) {
        double row_total = 0.0;
        for (uint32_t w = 0; w < V; ++w) row_total += counts.word_count(c, w);
        const double denom = row_total + alpha * static_cast<double>(V);
        for (uint32_t w = 0; w < V; ++w) {
            model.log_word_probs[static_cast<size_t>(c) * V + w] =
                std::log((counts.word_count(c, w) + alpha) / denom);
        }
    }
    return model;
}

NBModel train_supervised(const VectorizedLabeled& corpus, double alpha) {
    if (corpus.size() == 0) throw validation_error("cannot train on an empty corpus");
    return estimate_from_counts(class_word_counts(corpus), alpha);
}

std::vector<double> log_joint(const NBModel& model, const TermCounts& counts) {
    const int C = model.num_classes();
    std::vector<double> scores(model.log_priors.begin(), model.log_priors.end());
    for (auto [w, n] : counts.entries) {
        if (w >= model.vocab_size) {
            throw validation_error("count vector index " + std::to_string(w) +
                                   " is out of range for vocabulary size " +
                                   std::to_string(model.vocab_size));
        }
        for (int c = 0; c < C; ++c) {
            scores[static_cast<size_t>(c)] += static_cast<double>(n) * model.log_word_prob(c, w);
        }
    }
    return scores;
}

std::vector<double> log_joint(const NBModel& model, std::span<const uint32_t> dense_counts) {
    if (dense_counts.size() != model.vocab_size) {
        throw validation_error("count vector length " + std::to_string(dense_counts.size()) +
                               " does not match vocabulary size " +
                               std::to_string(model.vocab_size));
    }
    TermCounts counts;
    for (uint32_t w = 0; w < dense_counts.size(); ++w) {
        if (dense_counts[w] > 0) counts.entries.emplace_back(w, dense_counts[w]);
    }
    return log_joint(model, counts);
}

int predict(const NBModel& model, const TermCounts& counts) {
    const std::vector<double> scores = log_joint(model, counts);
    int best = 0;
    for (int c = 1; c < model.num_classes(); ++c) {
        if (scores[static_cast<size_t>(c)] > scores[static_cast<size_t>(best)]) best = c;
    }
    return best;
}

double evaluate(const NBModel& model, const VectorizedLabeled& test) {
    if (test.size() == 0) throw validation_error("cannot evaluate on an empty test set");
    if (test.vocab_size != model.vocab_size) {
        throw validation_error("test vocabulary size does not match the model");
    }
    size_t correct = 0;
    for (size_t i = 0; i < test.size(); ++i) {
        if (predict(model, test.docs[i]) == test.labels[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(test.size());
}

void save_model(const NBModel& model, const Vocabulary& vocab, const std::filesystem::path& path) {
    if (vocab.size() != model.vocab_size) {
        throw validation_error("vocabulary size does not match the model");
    }
    json j;
    j["format"] = "ssnb-model";
    j["classes"] = model.class_names;
    j["alpha"] = model.smoothing_alpha;
    j["vocab_size"] = model.vocab_size;
    j["vocabulary"] = vocab.words;
    std::vector<double> priors(model.log_priors.size());
    for (size_t c = 0; c < priors.size(); ++c) priors[c] = std::exp(model.log_priors[c]);
    j["priors"] = priors;
    std::vector<std::vector<double>> rows(static_cast<size_t>(model.num_classes()));
    for (int c = 0; c < model.num_classes(); ++c) {
        auto& row = rows[static_cast<size_t>(c)];
        row.resize(model.vocab_size);
        for (uint32_t w = 0; w < model.vocab_size; ++w) row[w] = std::exp(model.log_word_prob(c, w));
    }
    j["word_probs"] = rows;

    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write model file: " + path.string());
    out << j.dump(2) << "\n";
    if (!out) throw io_error("write failed: " + path.string());
}

std::pair<NBModel, Vocabulary> load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open model file: " + path.string());
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw validation_error("malformed model file: " + path.string());
    }
    for (const char* key : {"classes", "alpha", "vocab_size", "vocabulary", "priors", "word_probs"}) {
        if (!j.contains(key)) {
            throw validation_error(path.string() + ": model file is missing \"" + key + "\"");
        }
    }

    NBModel model;
    model.class_names = j.at("classes").get<std::vector<std::string>>();
    model.smoothing_alpha = j.at("alpha").get<double>();
    model.vocab_size = j.at("vocab_size").get<uint32_t>();
    const auto priors = j.at("priors").get<std::vector<double>>();
    const auto rows = j.at("word_probs").get<std::vector<std::vector<double>>>();
    const size_t C = model.class_names.size();
    if (priors.size() != C || rows.size() != C) {
        throw validation_error(path.string() + ": class count mismatch between fields");
    }
    model.log_priors.resize(C);
    for (size_t c = 0; c < C; ++c) model.log_priors[c] = std::log(priors[c]);
    model.log_word_probs.resize(C * model.vocab_size);
    for (size_t c = 0; c < C; ++c) {
        if (rows[c].size() != model.vocab_size) {
            throw validation_error(path.string() + ": word_probs row length mismatch");
        }
        for (uint32_t w = 0; w < model.vocab_size; ++w) {
            model.log_word_probs[c * model.vocab_size + w] = std::log(rows[c][w]);
        }
    }

    auto words = j.at("vocabulary").get<std::vector<std::string>>();
    if (words.size() != model.vocab_size) {
        throw validation_error(path.string() + ": vocabulary length does not match vocab_size");
    }
    return {std::move(model), Vocabulary::from_words(std::move(words))};
}

}  // namespace ssnb
