#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <span>

#include "ssnb/classifier.hpp"
#include "ssnb/corpus.hpp"
#include "ssnb/em.hpp"
#include "ssnb/errors.hpp"
#include "ssnb/feature_selection.hpp"
#include "ssnb/harness.hpp"
#include "ssnb/synth.hpp"
#include "ssnb/vocabulary.hpp"

#ifndef SSNB_VERSION
#define SSNB_VERSION "0.0.0"
#endif

namespace py = pybind11;
using namespace ssnb;

PYBIND11_MODULE(_ssnb, m) {
    m.doc() = "semi-supervised multinomial naive Bayes text classification laboratory";
    m.attr("__version__") = SSNB_VERSION;

    py::register_exception<io_error>(m, "IoError", PyExc_IOError);
    py::register_exception<validation_error>(m, "ValidationError", PyExc_ValueError);

    // corpus
    py::class_<Sentence>(m, "Sentence")
        .def(py::init<>())
        .def_readwrite("id", &Sentence::id)
        .def_readwrite("tokens", &Sentence::tokens)
        .def_readwrite("label", &Sentence::label);
    py::class_<LabeledCorpus>(m, "LabeledCorpus")
        .def(py::init<>())
        .def_readwrite("sentences", &LabeledCorpus::sentences)
        .def_readwrite("class_names", &LabeledCorpus::class_names)
        .def("__len__", &LabeledCorpus::size)
        .def("num_classes", &LabeledCorpus::num_classes);
    py::class_<UnlabeledCorpus>(m, "UnlabeledCorpus")
        .def(py::init<>())
        .def_readwrite("sentences", &UnlabeledCorpus::sentences)
        .def("__len__", &UnlabeledCorpus::size);
    m.def("tokenize", [](const std::string& text) { return tokenize(text); });
    m.def("load_labeled_corpus", &load_labeled_corpus);
    m.def("load_unlabeled_corpus", &load_unlabeled_corpus);
    m.def("save_labeled_corpus", &save_labeled_corpus);
    m.def("save_unlabeled_corpus", &save_unlabeled_corpus);
    m.def("split", &split, py::arg("corpus"), py::arg("test_fraction"), py::arg("seed"));
    m.def("concat", &concat);

    // vocabulary
    py::class_<OrderedWordPool>(m, "OrderedWordPool")
        .def_readonly("words", &OrderedWordPool::words)
        .def_readonly("labeled_end", &OrderedWordPool::labeled_end)
        .def_readonly("unlabeled_end", &OrderedWordPool::unlabeled_end)
        .def("__len__", &OrderedWordPool::size);
    py::class_<Vocabulary>(m, "Vocabulary")
        .def_readonly("words", &Vocabulary::words)
        .def("__len__", &Vocabulary::size)
        .def_static("from_words", &Vocabulary::from_words);
    m.def("build_word_pool", &build_word_pool, py::arg("labeled_train"), py::arg("test"),
          py::arg("unlabeled"), py::arg("fallback_wordlist"), py::arg("seed"));
    m.def("truncate", &ssnb::truncate, py::arg("pool"), py::arg("vocab_size"));
    py::class_<TermCounts>(m, "TermCounts")
        .def_readonly("entries", &TermCounts::entries)
        .def("total", &TermCounts::total);
    py::class_<VectorizedLabeled>(m, "VectorizedLabeled")
        .def_readonly("docs", &VectorizedLabeled::docs)
        .def_readonly("labels", &VectorizedLabeled::labels)
        .def_readonly("class_names", &VectorizedLabeled::class_names)
        .def_readonly("vocab_size", &VectorizedLabeled::vocab_size)
        .def("__len__", &VectorizedLabeled::size);
    py::class_<VectorizedUnlabeled>(m, "VectorizedUnlabeled")
        .def_readonly("docs", &VectorizedUnlabeled::docs)
        .def_readonly("vocab_size", &VectorizedUnlabeled::vocab_size)
        .def("__len__", &VectorizedUnlabeled::size);
    m.def("vectorize", &vectorize);
    m.def("vectorize_corpus",
          py::overload_cast<const LabeledCorpus&, const Vocabulary&>(&vectorize_corpus));
    m.def("vectorize_corpus",
          py::overload_cast<const UnlabeledCorpus&, const Vocabulary&>(&vectorize_corpus));
    m.def("load_wordlist", &load_wordlist);
    m.def("synthetic_wordlist", &synthetic_wordlist, py::arg("count"), py::arg("prefix") = "q");

    // classifier
    py::class_<NBModel>(m, "NBModel")
        .def_readonly("class_names", &NBModel::class_names)
        .def_readonly("log_priors", &NBModel::log_priors)
        .def_readonly("log_word_probs", &NBModel::log_word_probs)
        .def_readonly("smoothing_alpha", &NBModel::smoothing_alpha)
        .def_readonly("vocab_size", &NBModel::vocab_size)
        .def("num_classes", &NBModel::num_classes)
        .def("log_word_prob", &NBModel::log_word_prob);
    py::class_<SoftClassWordCounts>(m, "SoftClassWordCounts")
        .def_readonly("class_names", &SoftClassWordCounts::class_names)
        .def_readonly("vocab_size", &SoftClassWordCounts::vocab_size)
        .def_readonly("word_counts", &SoftClassWordCounts::word_counts)
        .def_readonly("doc_mass", &SoftClassWordCounts::doc_mass)
        .def("num_classes", &SoftClassWordCounts::num_classes);
    m.def("class_word_counts", &class_word_counts);
    m.def("estimate_from_counts", &estimate_from_counts, py::arg("counts"), py::arg("alpha"));
    m.def("train_supervised", &train_supervised, py::arg("corpus"), py::arg("alpha") = 1.0);
    m.def("log_joint",
          py::overload_cast<const NBModel&, const TermCounts&>(&log_joint));
    m.def("predict", &predict);
    m.def("evaluate", &evaluate);
    m.def("save_model", &save_model);
    m.def("load_model", &load_model);

    // em
    py::class_<Responsibilities>(m, "Responsibilities")
        .def_readonly("num_docs", &Responsibilities::num_docs)
        .def_readonly("num_classes", &Responsibilities::num_classes)
        .def_readonly("data", &Responsibilities::data)
        .def("at", &Responsibilities::at);
    py::class_<EMConfig>(m, "EMConfig")
        .def(py::init<>())
        .def_readwrite("alpha", &EMConfig::alpha)
        .def_readwrite("lambda_", &EMConfig::lambda)
        .def_readwrite("max_iterations", &EMConfig::max_iterations)
        .def_readwrite("rel_tolerance", &EMConfig::rel_tolerance)
        .def("validate", &EMConfig::validate);
    py::class_<EMTrace>(m, "EMTrace")
        .def_readonly("log_likelihoods", &EMTrace::log_likelihoods)
        .def_readonly("converged", &EMTrace::converged)
        .def_readonly("iterations", &EMTrace::iterations);
    m.def("log_likelihood", &log_likelihood, py::arg("model"), py::arg("labeled"),
          py::arg("unlabeled"), py::arg("lambda"));
    m.def("e_step", &e_step, py::arg("model"), py::arg("unlabeled"), py::arg("workers") = 1);
    m.def("m_step", &m_step);
    m.def("train_em", &train_em, py::arg("labeled"), py::arg("unlabeled"), py::arg("config"),
          py::arg("workers") = 1);
    m.def("write_trace_csv", &write_trace_csv);

    // feature selection
    m.def("expected_counts", &expected_counts, py::arg("labeled"), py::arg("unlabeled"),
          py::arg("resp"), py::arg("lambda"));
    m.def("information_gain", &information_gain);
    m.def("select_features",
          [](const std::vector<double>& scores, const OrderedWordPool& pool, uint32_t vocab_size) {
              return select_features(std::span<const double>(scores), pool, vocab_size);
          });
    m.def("write_scores_csv",
          [](const std::vector<double>& scores, const OrderedWordPool& pool,
             const std::filesystem::path& path) {
              write_scores_csv(std::span<const double>(scores), pool, path);
          });

    // synth
    py::class_<GeneratorConfig>(m, "GeneratorConfig")
        .def(py::init<>())
        .def_readwrite("class_proportions", &GeneratorConfig::class_proportions)
        .def_readwrite("class_names", &GeneratorConfig::class_names)
        .def_readwrite("words_per_class", &GeneratorConfig::words_per_class)
        .def_readwrite("shared_noise_words", &GeneratorConfig::shared_noise_words)
        .def_readwrite("word_concentration", &GeneratorConfig::word_concentration)
        .def_readwrite("mean_length", &GeneratorConfig::mean_length)
        .def_readwrite("length_class_coupling", &GeneratorConfig::length_class_coupling)
        .def_readwrite("subclusters_per_class", &GeneratorConfig::subclusters_per_class)
        .def_readwrite("n_labeled", &GeneratorConfig::n_labeled)
        .def_readwrite("n_unlabeled", &GeneratorConfig::n_unlabeled)
        .def_readwrite("n_test", &GeneratorConfig::n_test)
        .def_readwrite("seed", &GeneratorConfig::seed)
        .def("validate", &GeneratorConfig::validate);
    py::class_<TrueModel>(m, "TrueModel")
        .def_readonly("class_names", &TrueModel::class_names)
        .def_readonly("vocabulary", &TrueModel::vocabulary)
        .def_readonly("class_priors", &TrueModel::class_priors)
        .def_readonly("subclusters", &TrueModel::subclusters)
        .def_readonly("word_probs", &TrueModel::word_probs)
        .def_readonly("mean_length", &TrueModel::mean_length)
        .def_readonly("length_class_coupling", &TrueModel::length_class_coupling);
    py::class_<SynthData>(m, "SynthData")
        .def_readonly("labeled", &SynthData::labeled)
        .def_readonly("unlabeled", &SynthData::unlabeled)
        .def_readonly("test", &SynthData::test)
        .def_readonly("truth", &SynthData::truth);
    m.def("generate", &generate);
    m.def("bayes_optimal_accuracy", &bayes_optimal_accuracy);
    m.def("apportion", [](int n, const std::vector<double>& weights) {
        return apportion(n, std::span<const double>(weights));
    });
    py::class_<Table1Pools>(m, "Table1Pools")
        .def_readonly("labeled_pools", &Table1Pools::labeled_pools)
        .def_readonly("unlabeled", &Table1Pools::unlabeled)
        .def_readonly("truth", &Table1Pools::truth);
    m.def("generate_table1", &generate_table1);

    // harness
    py::enum_<Method>(m, "Method")
        .value("supervised", Method::supervised)
        .value("em", Method::em);
    py::class_<GridConfig>(m, "GridConfig")
        .def(py::init<>())
        .def_readwrite("unlabeled_steps", &GridConfig::unlabeled_steps)
        .def_readwrite("vocab_sizes", &GridConfig::vocab_sizes)
        .def_readwrite("seeds", &GridConfig::seeds)
        .def_readwrite("em", &GridConfig::em)
        .def_readwrite("methods", &GridConfig::methods)
        .def_readwrite("include_test_words", &GridConfig::include_test_words)
        .def("validate", &GridConfig::validate);
    py::class_<GridData>(m, "GridData")
        .def(py::init<>())
        .def_readwrite("labeled_blocks", &GridData::labeled_blocks)
        .def_readwrite("unlabeled_pool", &GridData::unlabeled_pool)
        .def_readwrite("test", &GridData::test)
        .def_readwrite("fallback_words", &GridData::fallback_words);
    py::class_<SurfaceRecord>(m, "SurfaceRecord")
        .def_readonly("labeled_block", &SurfaceRecord::labeled_block)
        .def_readonly("labeled_size", &SurfaceRecord::labeled_size)
        .def_readonly("unlabeled_size", &SurfaceRecord::unlabeled_size)
        .def_readonly("vocab_size", &SurfaceRecord::vocab_size)
        .def_readonly("seed", &SurfaceRecord::seed)
        .def_readonly("method", &SurfaceRecord::method)
        .def_readonly("accuracy", &SurfaceRecord::accuracy)
        .def_readonly("log_likelihood", &SurfaceRecord::log_likelihood)
        .def_readonly("em_iterations", &SurfaceRecord::em_iterations);
    py::class_<AccuracySurface>(m, "AccuracySurface")
        .def(py::init<>())
        .def_readwrite("records", &AccuracySurface::records)
        .def("__len__", &AccuracySurface::size);
    py::class_<VocabInterval>(m, "VocabInterval")
        .def_readonly("low", &VocabInterval::low)
        .def_readonly("high", &VocabInterval::high);
    py::class_<CurveShape>(m, "CurveShape")
        .def_readonly("peak_vocab", &CurveShape::peak_vocab)
        .def_readonly("rises_then_falls", &CurveShape::rises_then_falls);
    m.def("default_unlabeled_steps", &default_unlabeled_steps);
    m.def("run_grid", &run_grid, py::arg("data"), py::arg("config"), py::arg("workers") = 1);
    m.def("helpful_interval", &helpful_interval);
    m.def("degradation_interval", &degradation_interval, py::arg("surface"),
          py::arg("labeled_block"), py::arg("delta") = 0.0);
    m.def("curve_shape", &curve_shape);
    m.def("emit_csv", &emit_csv);
    m.def("parse_surface_csv", &parse_surface_csv);
    m.def("emit_svg", &emit_svg);
}
