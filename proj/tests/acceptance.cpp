// End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
// the process exits non-zero if any fail.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "ssnb/classifier.hpp"
#include "ssnb/em.hpp"
#include "ssnb/errors.hpp"
#include "ssnb/harness.hpp"
#include "ssnb/numeric.hpp"
#include "ssnb/rng.hpp"
#include "ssnb/synth.hpp"
#include "test_util.hpp"

using namespace ssnb;
using nlohmann::json;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v) { return format_double(v); }

// ---- criterion 1: responsibilities against exhaustive enumeration ----

Outcome check_e_step_enumeration() {
    Rng rng(9001);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const int C = 2;
        const uint32_t V = 1 + static_cast<uint32_t>(rng.below(3));
        NBModel model;
        model.vocab_size = V;
        model.class_names = {"a", "b"};
        double prior_mass = 0.0;
        std::vector<double> priors;
        for (int c = 0; c < C; ++c) {
            priors.push_back(0.05 + rng.real01());
            prior_mass += priors.back();
        }
        for (int c = 0; c < C; ++c) model.log_priors.push_back(std::log(priors[c] / prior_mass));
        for (int c = 0; c < C; ++c) {
            std::vector<double> row;
            double mass = 0.0;
            for (uint32_t w = 0; w < V; ++w) {
                row.push_back(0.05 + rng.real01());
                mass += row.back();
            }
            for (double p : row) model.log_word_probs.push_back(std::log(p / mass));
        }

        VectorizedUnlabeled unl;
        unl.vocab_size = V;
        const size_t docs = 1 + rng.below(3);
        for (size_t j = 0; j < docs; ++j) {
            TermCounts doc;
            for (uint32_t w = 0; w < V; ++w) {
                uint32_t n = static_cast<uint32_t>(rng.below(4));
                if (n > 0) doc.entries.emplace_back(w, n);
            }
            unl.docs.push_back(std::move(doc));
        }

        auto resp = e_step(model, unl);
        for (size_t j = 0; j < docs; ++j) {
            double joint[2];
            double total = 0.0;
            for (int c = 0; c < C; ++c) {
                double p = std::exp(model.log_priors[c]);
                for (auto [w, n] : unl.docs[j].entries) {
                    for (uint32_t k = 0; k < n; ++k) p *= std::exp(model.log_word_prob(c, w));
                }
                joint[c] = p;
                total += p;
            }
            for (int c = 0; c < C; ++c) {
                worst = std::max(worst, std::abs(resp.at(j, c) - joint[c] / total));
            }
        }
    }
    return {worst <= 1e-12, "max posterior error " + fmt(worst)};
}

// ---- criterion 2: trace monotonicity over seeded corpora ----

Outcome check_trace_monotonicity() {
    double worst_delta = 0.0;
    int not_converged = 0;
    for (uint64_t seed = 1; seed <= 50; ++seed) {
        GeneratorConfig cfg;
        cfg.class_proportions = {0.25, 0.35, 0.40};
        cfg.words_per_class = 30;
        cfg.shared_noise_words = 20;
        cfg.word_concentration = 0.5;
        cfg.mean_length = 10.0;
        cfg.n_labeled = 200;
        cfg.n_unlabeled = 500;
        cfg.n_test = 1;
        cfg.seed = seed;
        auto data = generate(cfg);
        auto vocab = Vocabulary::from_words(data.truth.vocabulary);
        auto labeled = vectorize_corpus(data.labeled, vocab);
        auto unl = vectorize_corpus(data.unlabeled, vocab);

        EMConfig em;
        auto [model, trace] = train_em(labeled, unl, em);
        if (!trace.converged) ++not_converged;
        for (size_t i = 1; i < trace.log_likelihoods.size(); ++i) {
            double delta = trace.log_likelihoods[i].second - trace.log_likelihoods[i - 1].second;
            worst_delta = std::min(worst_delta, delta);
        }
    }
    bool pass = worst_delta >= -1e-9;
    return {pass, "worst step delta " + fmt(worst_delta) + ", unconverged runs " +
                      std::to_string(not_converged) + "/50"};
}

// ---- criterion 3: bit-exact degenerate reductions ----

Outcome check_degenerate_reductions() {
    GeneratorConfig cfg;
    cfg.class_proportions = {0.3, 0.3, 0.4};
    cfg.words_per_class = 25;
    cfg.shared_noise_words = 15;
    cfg.n_labeled = 150;
    cfg.n_unlabeled = 100;
    cfg.n_test = 1;
    cfg.seed = 303;
    auto data = generate(cfg);
    auto vocab = Vocabulary::from_words(data.truth.vocabulary);
    auto labeled = vectorize_corpus(data.labeled, vocab);
    auto unl = vectorize_corpus(data.unlabeled, vocab);

    EMConfig em;
    auto supervised = train_supervised(labeled, em.alpha);

    auto [no_unlabeled, trace1] = train_em(labeled, VectorizedUnlabeled{}, em);
    bool exact1 = no_unlabeled.log_priors == supervised.log_priors &&
                  no_unlabeled.log_word_probs == supervised.log_word_probs;

    EMConfig zero = em;
    zero.lambda = 0.0;
    auto [lambda_zero, trace2] = train_em(labeled, unl, zero);
    bool exact2 = lambda_zero.log_priors == supervised.log_priors &&
                  lambda_zero.log_word_probs == supervised.log_word_probs;

    std::string detail = std::string("empty unlabeled ") + (exact1 ? "exact" : "DIFFERS") +
                         ", lambda 0 " + (exact2 ? "exact" : "DIFFERS");
    return {exact1 && exact2, detail};
}

// ---- criteria 4 and 9 share one grid ----

AccuracySurface run_gain_grid() {
    AccuracySurface combined;
    for (uint64_t s = 0; s < 10; ++s) {
        GeneratorConfig cfg;
        cfg.class_proportions = {0.22, 0.19, 0.59};
        // a wide informative vocabulary that 100 labeled sentences cannot cover
        cfg.words_per_class = 200;
        cfg.shared_noise_words = 50;
        cfg.word_concentration = 1.0;
        cfg.mean_length = 6.0;
        cfg.n_labeled = 100;
        cfg.n_unlabeled = 2000;
        cfg.n_test = 1000;
        cfg.seed = 400 + s;
        auto data = generate(cfg);

        GridData grid;
        grid.labeled_blocks = {data.labeled};
        grid.unlabeled_pool = data.unlabeled;
        grid.test = data.test;
        grid.fallback_words = data.truth.vocabulary;

        GridConfig config;
        config.unlabeled_steps = {0, 500, 2000};
        config.vocab_sizes = {static_cast<uint32_t>(data.truth.vocabulary.size())};
        config.seeds = {s};
        auto surface = run_grid(grid, config);
        combined.records.insert(combined.records.end(), surface.records.begin(),
                                surface.records.end());
    }
    return combined;
}

std::map<int, double> em_medians_by_step(const AccuracySurface& surface) {
    std::map<int, std::vector<double>> by_step;
    for (const auto& r : surface.records) {
        if (r.method == Method::em) by_step[r.unlabeled_size].push_back(r.accuracy);
    }
    std::map<int, double> medians;
    for (auto& [step, accs] : by_step) medians[step] = median(accs);
    return medians;
}

Outcome check_unlabeled_gain(const AccuracySurface& surface) {
    auto medians = em_medians_by_step(surface);
    double m0 = medians.at(0), m500 = medians.at(500), m2000 = medians.at(2000);
    bool monotone = m0 <= m500 && m500 <= m2000;
    double gain = m2000 - m0;
    bool pass = monotone && gain >= 0.01;
    return {pass, "median accuracy " + fmt(m0) + " -> " + fmt(m500) + " -> " + fmt(m2000) +
                      ", gain " + fmt(gain)};
}

// ---- criterion 5: subcluster mismatch makes EM hurt somewhere ----

Outcome check_subcluster_degradation() {
    const std::vector<uint32_t> vocabs = {21, 43, 87, 175};
    AccuracySurface combined;
    for (uint64_t s = 0; s < 10; ++s) {
        GeneratorConfig cfg;
        cfg.class_proportions = {0.22, 0.19, 0.59};
        // peaked bimodal classes so the single-component class model is wrong
        cfg.words_per_class = 25;
        cfg.shared_noise_words = 100;
        cfg.word_concentration = 0.4;
        cfg.mean_length = 10.0;
        cfg.subclusters_per_class = 2;
        cfg.n_labeled = 100;
        cfg.n_unlabeled = 2000;
        cfg.n_test = 1000;
        cfg.seed = 500 + s;
        auto data = generate(cfg);

        GridData grid;
        grid.labeled_blocks = {data.labeled};
        grid.unlabeled_pool = data.unlabeled;
        grid.test = data.test;
        grid.fallback_words = data.truth.vocabulary;

        GridConfig config;
        config.unlabeled_steps = {0, 2000};
        config.vocab_sizes = vocabs;
        config.seeds = {s};
        auto surface = run_grid(grid, config);
        combined.records.insert(combined.records.end(), surface.records.begin(),
                                surface.records.end());
    }

    // per-V seed medians of EM at the full pool and of the supervised baseline
    std::map<uint32_t, std::vector<double>> em_acc, sup_acc;
    for (const auto& r : combined.records) {
        if (r.method == Method::em && r.unlabeled_size == 2000)
            em_acc[r.vocab_size].push_back(r.accuracy);
        if (r.method == Method::supervised && r.unlabeled_size == 0)
            sup_acc[r.vocab_size].push_back(r.accuracy);
    }
    double best_deficit = -2.0;
    uint32_t best_v = 0;
    for (uint32_t v : vocabs) {
        double deficit = median(sup_acc.at(v)) - median(em_acc.at(v));
        if (deficit > best_deficit) {
            best_deficit = deficit;
            best_v = v;
        }
    }
    bool pass = best_deficit >= 0.02;
    return {pass, "largest median deficit " + fmt(best_deficit) + " at V=" +
                      std::to_string(best_v)};
}

// ---- criterion 6: the vocabulary sweep rises then falls ----

Outcome check_rise_then_fall() {
    const std::vector<uint32_t> vocabs = {10, 40, 180, 700, 2500, 5180};
    AccuracySurface combined;
    for (uint64_t s = 0; s < 10; ++s) {
        GeneratorConfig cfg;
        cfg.class_proportions = {0.22, 0.19, 0.59};
        // weak word signal drowned in shared noise: growing the dictionary past
        // the 180 words that actually occur dilutes the smoothing denominator
        // until every sentence drifts toward the majority class
        cfg.words_per_class = 15;
        cfg.shared_noise_words = 135;
        cfg.word_concentration = 2.0;
        cfg.mean_length = 12.0;
        cfg.n_labeled = 150;
        cfg.n_unlabeled = 500;
        cfg.n_test = 800;
        cfg.seed = 600 + s;
        auto data = generate(cfg);

        GridData grid;
        grid.labeled_blocks = {data.labeled};
        grid.unlabeled_pool = data.unlabeled;
        grid.test = data.test;
        grid.fallback_words = data.truth.vocabulary;  // the 180 words that occur
        auto noise = synthetic_wordlist(5000, "zz");  // then noise-only padding
        grid.fallback_words.insert(grid.fallback_words.end(), noise.begin(), noise.end());

        GridConfig config;
        config.unlabeled_steps = {0, 250, 500};
        config.vocab_sizes = vocabs;
        config.seeds = {s};
        auto surface = run_grid(grid, config);
        combined.records.insert(combined.records.end(), surface.records.begin(),
                                surface.records.end());
    }

    auto supervised = curve_shape(combined, 0, 0, Method::supervised);
    auto em_250 = curve_shape(combined, 0, 250, Method::em);
    auto em_500 = curve_shape(combined, 0, 500, Method::em);
    bool pass =
        supervised.rises_then_falls && em_250.rises_then_falls && em_500.rises_then_falls;
    return {pass, "peaks at V=" + std::to_string(supervised.peak_vocab) + " (supervised), V=" +
                      std::to_string(em_250.peak_vocab) + " (em@250), V=" +
                      std::to_string(em_500.peak_vocab) + " (em@500)" +
                      (pass ? "" : "; some series is not rise-then-fall")};
}

// ---- criterion 7: bundled study constants ----

Outcome check_study_constants() {
    if (default_unlabeled_steps() != std::vector<int>{0, 1485, 2999, 5342}) {
        return {false, "default unlabeled steps are wrong"};
    }
    GeneratorConfig knobs;
    knobs.class_proportions = {0.3, 0.3, 0.4};
    knobs.words_per_class = 12;
    knobs.shared_noise_words = 8;
    knobs.mean_length = 8.0;
    knobs.seed = 1;
    auto pools = generate_table1(knobs);
    size_t labeled_total = 0;
    for (const auto& [code, pool] : pools.labeled_pools) labeled_total += pool.size();
    if (labeled_total != 5245) {
        return {false, "labeled pool total " + std::to_string(labeled_total) + " != 5245"};
    }
    if (pools.unlabeled.size() != 5342) {
        return {false, "unlabeled pool total " + std::to_string(pools.unlabeled.size()) +
                           " != 5342"};
    }
    auto code_of = [&](size_t i) {
        const std::string& id = pools.unlabeled.sentences[i].id;
        return id.substr(0, id.find('-'));
    };
    std::set<std::string> group1, group2;
    for (size_t i = 0; i < 1485; ++i) group1.insert(code_of(i));
    for (size_t i = 1485; i < 2999; ++i) group2.insert(code_of(i));
    if (group1 != std::set<std::string>{"Co", "De", "Ae"}) {
        return {false, "first unlabeled increment is not Co/De/Ae"};
    }
    if (group2 != std::set<std::string>{"Fd", "Ax", "Ms"}) {
        return {false, "second unlabeled increment is not Fd/Ax/Ms"};
    }
    return {true, "5245 labeled, 5342 unlabeled, increments 1485/2999/5342"};
}

// ---- criterion 8: the CLI feature-selection comparison ----

Outcome check_selection_cli() {
    const char* bin = std::getenv("SSNB_CLI_BIN");
    if (bin == nullptr) return {false, "SSNB_CLI_BIN is not set"};

    testutil::TempDir tmp;
    GeneratorConfig cfg;
    cfg.class_proportions = {0.22, 0.19, 0.59};
    cfg.words_per_class = 25;
    cfg.shared_noise_words = 100;
    cfg.word_concentration = 0.4;
    cfg.mean_length = 10.0;
    cfg.subclusters_per_class = 2;
    cfg.n_labeled = 120;
    cfg.n_unlabeled = 400;
    cfg.n_test = 300;
    cfg.seed = 808;
    auto data = generate(cfg);
    save_labeled_corpus(data.labeled, tmp.file("labeled.jsonl"));
    save_unlabeled_corpus(data.unlabeled, tmp.file("unlabeled.jsonl"));
    save_labeled_corpus(data.test, tmp.file("test.jsonl"));

    std::string cmd = std::string("\"") + bin + "\" select-features --labeled " +
                      tmp.file("labeled.jsonl").string() + " --unlabeled " +
                      tmp.file("unlabeled.jsonl").string() + " --test " +
                      tmp.file("test.jsonl").string() + " --pool-fraction 0.5 --seed 4 --out " +
                      tmp.file("report.json").string() + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (pipe == nullptr) return {false, "failed to launch the CLI"};
    std::string output;
    char buf[4096];
    size_t n;
    while ((n = fread(buf, 1, sizeof(buf), pipe)) > 0) output.append(buf, n);
    int status = pclose(pipe);
    int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    if (code != 0) return {false, "CLI exited " + std::to_string(code) + ": " + output};

    json report;
    try {
        report = json::parse(testutil::read_file(tmp.file("report.json")));
        double a = report.at("labeled_only").at("accuracy").get<double>();
        double b = report.at("pseudo_label").at("accuracy").get<double>();
        std::string direction = report.at("direction").get<std::string>();
        return {true, "labeled-only " + fmt(a) + ", pseudo-label " + fmt(b) + "; " + direction};
    } catch (const std::exception& e) {
        return {false, std::string("report unreadable: ") + e.what()};
    }
}

// ---- criterion 9: byte-identical grid reruns ----

Outcome check_grid_reproducibility(const AccuracySurface& first) {
    testutil::TempDir tmp;
    emit_csv(first, tmp.file("first.csv"));
    auto second = run_gain_grid();
    emit_csv(second, tmp.file("second.csv"));
    bool same = testutil::read_file(tmp.file("first.csv")) ==
                testutil::read_file(tmp.file("second.csv"));
    return {same, same ? std::to_string(first.size()) + " records, identical bytes"
                       : "CSV bytes differ between runs"};
}

}  // namespace

int main() {
    using clock = std::chrono::steady_clock;

    AccuracySurface gain_surface;  // shared between criteria 4 and 9

    struct Criterion {
        int id;
        const char* name;
        double time_limit;  // seconds; 0 means unchecked
        std::function<Outcome()> fn;
    };
    const std::vector<Criterion> criteria = {
        {1, "responsibilities match exhaustive enumeration", 1.0, check_e_step_enumeration},
        {2, "EM trace never decreases", 30.0, check_trace_monotonicity},
        {3, "degenerate EM reduces to supervised bit for bit", 0.0, check_degenerate_reductions},
        {4, "unlabeled data helps a well-specified task", 120.0,
         [&] {
             gain_surface = run_gain_grid();
             return check_unlabeled_gain(gain_surface);
         }},
        {5, "unlabeled data hurts under subcluster mismatch", 180.0,
         check_subcluster_degradation},
        {6, "accuracy rises then falls across the vocabulary sweep", 0.0, check_rise_then_fall},
        {7, "bundled study constants are reproduced", 0.0, check_study_constants},
        {8, "feature-selection comparison runs end to end", 0.0, check_selection_cli},
        {9, "grid reruns are byte-identical", 0.0,
         [&] { return check_grid_reproducibility(gain_surface); }},
    };

    bool all_pass = true;
    for (const auto& criterion : criteria) {
        auto start = clock::now();
        Outcome outcome;
        try {
            outcome = criterion.fn();
        } catch (const std::exception& e) {
            outcome = {false, std::string("exception: ") + e.what()};
        }
        double seconds = std::chrono::duration<double>(clock::now() - start).count();
        bool in_time = criterion.time_limit == 0.0 || seconds < criterion.time_limit;
        bool pass = outcome.pass && in_time;
        all_pass = all_pass && pass;
        std::printf("criterion %d (%s): %s (%s, %.2fs%s)\n", criterion.id, criterion.name,
                    pass ? "PASS" : "FAIL", outcome.detail.c_str(), seconds,
                    in_time ? "" : ", over the time limit");
        std::fflush(stdout);
    }
    return all_pass ? 0 : 1;
}
