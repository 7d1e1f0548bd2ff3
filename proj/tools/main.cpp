#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

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

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ssnb;

namespace {

int default_workers() {
    unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : static_cast<int>(n);
}

// SSNB_TIMESTAMP pins the manifest timestamp for byte-stable test fixtures.
std::string now_iso8601() {
    if (const char* pinned = std::getenv("SSNB_TIMESTAMP")) return pinned;
    std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string fnv1a64_hex(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot read input for digest: " + path.string());
    uint64_t h = 1469598103934665603ull;
    char buf[65536];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ull;
        }
        if (!in) break;
    }
    char hex[17];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
    return hex;
}

json make_manifest(const std::string& command, const std::vector<uint64_t>& seeds, json config,
                   const std::vector<std::string>& input_paths) {
    json m;
    m["tool"] = "ssnb";
    m["version"] = SSNB_VERSION;
    m["command"] = command;
    m["timestamp"] = now_iso8601();
    m["seeds"] = seeds;
    m["config"] = std::move(config);
    json inputs = json::array();
    for (const std::string& p : input_paths) {
        inputs.push_back({{"path", p}, {"fnv1a64", fnv1a64_hex(p)}});
    }
    m["inputs"] = inputs;
    return m;
}

void write_json_file(const fs::path& path, const json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write: " + path.string());
    out << j.dump(2) << '\n';
    out.flush();
    if (!out) throw io_error("failed writing: " + path.string());
}

json load_json_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open: " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw validation_error(path.string() + " is not valid JSON: " + e.what());
    }
}

struct TrainOptions {
    std::string labeled, unlabeled, fallback, out = "model.json", trace;
    double alpha = 1.0, lambda = 1.0, rel_tolerance = 1e-6;
    int max_iterations = 100, workers = default_workers();
    uint32_t vocab_size = 0;  // 0 = whole pool
    uint64_t seed = 0;
};

int run_train(const TrainOptions& o) {
    LabeledCorpus labeled = load_labeled_corpus(o.labeled);
    UnlabeledCorpus unlabeled;
    if (!o.unlabeled.empty()) unlabeled = load_unlabeled_corpus(o.unlabeled);
    std::vector<std::string> fallback;
    if (!o.fallback.empty()) fallback = load_wordlist(o.fallback);

    LabeledCorpus no_test;
    no_test.class_names = labeled.class_names;
    OrderedWordPool pool = build_word_pool(labeled, no_test, unlabeled, fallback, o.seed);
    uint32_t vocab_size = o.vocab_size == 0 ? static_cast<uint32_t>(pool.size()) : o.vocab_size;
    Vocabulary vocab = truncate(pool, vocab_size);

    VectorizedLabeled train = vectorize_corpus(labeled, vocab);
    VectorizedUnlabeled unl = vectorize_corpus(unlabeled, vocab);
    EMConfig em{o.alpha, o.lambda, o.max_iterations, o.rel_tolerance};
    em.validate();

    auto [model, trace] = train_em(train, unl, em, o.workers);
    save_model(model, vocab, o.out);
    fs::path trace_path = o.trace.empty() ? fs::path(o.out + ".trace.csv") : fs::path(o.trace);
    write_trace_csv(trace, trace_path);

    json config = {{"alpha", em.alpha},
                   {"lambda", em.lambda},
                   {"max_iterations", em.max_iterations},
                   {"rel_tolerance", em.rel_tolerance},
                   {"vocab_size", vocab_size},
                   {"pool_size", pool.size()},
                   {"workers", o.workers}};
    std::vector<std::string> inputs = {o.labeled};
    if (!o.unlabeled.empty()) inputs.push_back(o.unlabeled);
    if (!o.fallback.empty()) inputs.push_back(o.fallback);
    write_json_file(o.out + ".manifest.json", make_manifest("train", {o.seed}, config, inputs));

    std::cerr << "wrote " << o.out << " and " << trace_path.string() << " (" << trace.iterations
              << " iterations, " << (trace.converged ? "converged" : "not converged") << ")\n";
    return 0;
}

struct PredictOptions {
    std::string model, input, out;
};

int run_predict(const PredictOptions& o) {
    auto [model, vocab] = load_model(o.model);
    UnlabeledCorpus input = load_unlabeled_corpus(o.input);

    std::string lines;
    for (const Sentence& sent : input.sentences) {
        TermCounts counts = vectorize(sent, vocab);
        int c = predict(model, counts);
        json row = {{"id", sent.id}, {"label", model.class_names[static_cast<size_t>(c)]}};
        lines += row.dump();
        lines += '\n';
    }
    if (o.out.empty()) {
        std::cout << lines;
    } else {
        std::ofstream out(o.out, std::ios::binary);
        if (!out) throw io_error("cannot write: " + o.out);
        out << lines;
        out.flush();
        if (!out) throw io_error("failed writing: " + o.out);
        write_json_file(o.out + ".manifest.json",
                        make_manifest("predict", {}, json::object(), {o.model, o.input}));
    }
    std::cerr << "predicted " << input.size() << " sentences\n";
    return 0;
}

struct GenerateOptions {
    std::string config, preset, out = ".";
    uint64_t seed = 0;
    bool seed_given = false;
};

int run_generate(const GenerateOptions& o) {
    if (o.config.empty() == o.preset.empty()) {
        throw validation_error("generate needs exactly one of --config or --preset");
    }
    fs::create_directories(o.out);
    fs::path dir(o.out);

    if (!o.preset.empty()) {
        if (o.preset != "table1") throw validation_error("unknown preset: " + o.preset);
        GeneratorConfig knobs;
        knobs.seed = o.seed;
        Table1Pools pools = generate_table1(knobs);

        size_t total_labeled = 0;
        json pool_table = json::object();
        for (const auto& [code, pool] : pools.labeled_pools) {
            save_labeled_corpus(pool, dir / ("labeled_" + code + ".jsonl"));
            total_labeled += pool.size();
            pool_table[code] = {{"labeled", pool.size()}};
        }
        for (const Table1Row& row : table1_rows()) {
            pool_table[row.code]["company"] = row.company;
            pool_table[row.code]["industry"] = row.industry;
            pool_table[row.code]["unlabeled"] = row.unlabeled;
        }
        save_unlabeled_corpus(pools.unlabeled, dir / "unlabeled.jsonl");

        json config = {{"preset", "table1"},
                       {"pools", pool_table},
                       {"total_labeled", total_labeled},
                       {"total_unlabeled", pools.unlabeled.size()}};
        write_json_file(dir / "manifest.json",
                        make_manifest("generate", {knobs.seed}, config, {}));
        std::cerr << "wrote " << pools.labeled_pools.size() << " labeled pools ("
                  << total_labeled << " sentences) and " << pools.unlabeled.size()
                  << " unlabeled sentences to " << o.out << "\n";
        return 0;
    }

    GeneratorConfig config = GeneratorConfig::from_json(load_json_file(o.config));
    if (o.seed_given) config.seed = o.seed;
    SynthData data = generate(config);
    save_labeled_corpus(data.labeled, dir / "labeled.jsonl");
    save_unlabeled_corpus(data.unlabeled, dir / "unlabeled.jsonl");
    if (data.test.size() > 0) save_labeled_corpus(data.test, dir / "test.jsonl");
    write_json_file(dir / "manifest.json",
                    make_manifest("generate", {config.seed}, config.to_json(), {o.config}));
    std::cerr << "wrote " << data.labeled.size() << " labeled, " << data.unlabeled.size()
              << " unlabeled, " << data.test.size() << " test sentences to " << o.out << "\n";
    return 0;
}

struct GridOptions {
    std::string config, out = "results";
    int workers = default_workers();
};

int run_grid(const GridOptions& o) {
    GridSpec spec = load_grid_spec(o.config);
    AccuracySurface surface = ssnb::run_grid(spec.data, spec.config, o.workers);

    fs::create_directories(o.out);
    fs::path dir(o.out);
    emit_csv(surface, dir / "surface.csv");
    for (size_t b = 0; b < spec.data.labeled_blocks.size(); ++b) {
        emit_svg(surface, static_cast<int>(b), dir / ("block_" + std::to_string(b) + ".svg"));
    }

    std::vector<std::string> inputs = {o.config};
    for (const char* key : {"labeled_blocks", "unlabeled", "test", "fallback_wordlist"}) {
        if (!spec.resolved.contains(key)) continue;
        const json& v = spec.resolved.at(key);
        if (v.is_array()) {
            for (const auto& p : v) inputs.push_back(p.get<std::string>());
        } else if (v.is_string()) {
            inputs.push_back(v.get<std::string>());
        }
    }
    write_json_file(dir / "manifest.json",
                    make_manifest("grid", spec.config.seeds, spec.resolved, inputs));
    size_t skipped = static_cast<size_t>(
        std::count_if(surface.records.begin(), surface.records.end(),
                      [](const SurfaceRecord& r) { return std::isnan(r.accuracy); }));
    std::cerr << "wrote " << surface.size() << " records to " << (dir / "surface.csv").string()
              << " with " << spec.data.labeled_blocks.size() << " block chart(s)\n";
    if (skipped > 0) {
        std::cerr << skipped << " cell(s) are nan: vocabulary size exceeds the word pool; "
                     "add a fallback wordlist or lower vocab_sizes\n";
    }
    return 0;
}

struct AnalyzeOptions {
    std::string csv, out;
    int block = 0;
    double delta = 0.0;
};

int run_analyze(const AnalyzeOptions& o) {
    AccuracySurface surface = parse_surface_csv(o.csv);

    json report;
    report["labeled_block"] = o.block;
    report["delta"] = o.delta;
    auto interval_json = [](const std::optional<VocabInterval>& iv) {
        return iv ? json{{"low", iv->low}, {"high", iv->high}} : json(nullptr);
    };
    report["helpful_interval"] = interval_json(helpful_interval(surface, o.block));
    report["degradation_interval"] =
        interval_json(degradation_interval(surface, o.block, o.delta));

    std::set<std::pair<int, int>> series;  // (unlabeled step, method as int)
    for (const SurfaceRecord& r : surface.records) {
        if (r.labeled_block == o.block) {
            series.insert({r.unlabeled_size, static_cast<int>(r.method)});
        }
    }
    json curves = json::array();
    for (auto [step, method_int] : series) {
        Method method = static_cast<Method>(method_int);
        try {
            CurveShape shape = curve_shape(surface, o.block, step, method);
            curves.push_back({{"unlabeled_size", step},
                              {"method", method_name(method)},
                              {"peak_vocab", shape.peak_vocab},
                              {"rises_then_falls", shape.rises_then_falls}});
        } catch (const validation_error&) {
            // series with fewer than 3 usable vocabulary sizes have no shape
        }
    }
    report["curves"] = curves;

    if (o.out.empty()) {
        std::cout << report.dump(2) << '\n';
    } else {
        write_json_file(o.out, report);
        write_json_file(o.out + ".manifest.json",
                        make_manifest("analyze", {},
                                      {{"block", o.block}, {"delta", o.delta}}, {o.csv}));
    }
    return 0;
}

struct SelectFeaturesOptions {
    std::string labeled, unlabeled, test, fallback, out, scores_dir;
    double pool_fraction = 0.5, alpha = 1.0, lambda = 1.0, rel_tolerance = 1e-6;
    int max_iterations = 100, workers = default_workers();
    uint32_t vocab_size = 0;  // 0 = pool_fraction of the pool
    uint64_t seed = 0;
    bool harden = false;
};

int run_select_features(const SelectFeaturesOptions& o) {
    LabeledCorpus labeled = load_labeled_corpus(o.labeled);
    UnlabeledCorpus unlabeled = load_unlabeled_corpus(o.unlabeled);
    LabeledCorpus test = load_labeled_corpus(o.test);
    std::vector<std::string> fallback;
    if (!o.fallback.empty()) fallback = load_wordlist(o.fallback);

    OrderedWordPool pool = build_word_pool(labeled, test, unlabeled, fallback, o.seed);
    uint32_t vocab_size = o.vocab_size;
    if (vocab_size == 0) {
        if (o.pool_fraction <= 0.0 || o.pool_fraction > 1.0) {
            throw validation_error("pool_fraction must be in (0, 1]");
        }
        vocab_size = static_cast<uint32_t>(
            std::llround(o.pool_fraction * static_cast<double>(pool.size())));
        if (vocab_size == 0) vocab_size = 1;
    }

    Vocabulary full = truncate(pool, static_cast<uint32_t>(pool.size()));
    VectorizedLabeled train_full = vectorize_corpus(labeled, full);
    VectorizedUnlabeled unl_full = vectorize_corpus(unlabeled, full);
    EMConfig em{o.alpha, o.lambda, o.max_iterations, o.rel_tolerance};
    em.validate();

    // Arm one scores words on labeled counts alone; arm two adds the
    // unlabeled data through the supervised model's responsibilities.
    std::vector<double> labeled_scores = information_gain(class_word_counts(train_full));
    NBModel initial = train_supervised(train_full, em.alpha);
    Responsibilities resp = e_step(initial, unl_full, o.workers);
    if (o.harden) {
        for (size_t j = 0; j < resp.num_docs; ++j) {
            int best = 0;
            for (int c = 1; c < resp.num_classes; ++c) {
                if (resp.at(j, c) > resp.at(j, best)) best = c;
            }
            for (int c = 0; c < resp.num_classes; ++c) {
                resp.data[j * static_cast<size_t>(resp.num_classes) + static_cast<size_t>(c)] =
                    c == best ? 1.0 : 0.0;
            }
        }
    }
    SoftClassWordCounts soft = expected_counts(train_full, unl_full, resp, em.lambda);
    std::vector<double> pseudo_scores = information_gain(soft);

    if (!o.scores_dir.empty()) {
        fs::create_directories(o.scores_dir);
        write_scores_csv(labeled_scores, pool, fs::path(o.scores_dir) / "labeled_only_scores.csv");
        write_scores_csv(pseudo_scores, pool, fs::path(o.scores_dir) / "pseudo_label_scores.csv");
    }

    auto evaluate_arm = [&](std::span<const double> scores) {
        Vocabulary vocab = select_features(scores, pool, vocab_size);
        VectorizedLabeled tr = vectorize_corpus(labeled, vocab);
        VectorizedUnlabeled un = vectorize_corpus(unlabeled, vocab);
        VectorizedLabeled te = vectorize_corpus(test, vocab);
        auto [model, trace] = train_em(tr, un, em, o.workers);
        return json{{"accuracy", evaluate(model, te)},
                    {"log_likelihood", trace.log_likelihoods.back().second},
                    {"em_iterations", trace.iterations}};
    };
    json labeled_arm = evaluate_arm(labeled_scores);
    json pseudo_arm = evaluate_arm(pseudo_scores);

    double diff = pseudo_arm["accuracy"].get<double>() - labeled_arm["accuracy"].get<double>();
    json report = {{"pool_size", pool.size()},
                   {"vocab_size", vocab_size},
                   {"pseudo_labels", o.harden ? "hard" : "soft"},
                   {"em", {{"alpha", em.alpha},
                           {"lambda", em.lambda},
                           {"max_iterations", em.max_iterations},
                           {"rel_tolerance", em.rel_tolerance}}},
                   {"labeled_only", labeled_arm},
                   {"pseudo_label", pseudo_arm},
                   {"accuracy_difference", diff},
                   {"direction", diff >= 0.0 ? "pseudo_label >= labeled_only"
                                             : "pseudo_label < labeled_only"}};

    if (o.out.empty()) {
        std::cout << report.dump(2) << '\n';
    } else {
        write_json_file(o.out, report);
        std::vector<std::string> inputs = {o.labeled, o.unlabeled, o.test};
        if (!o.fallback.empty()) inputs.push_back(o.fallback);
        json config = report.at("em");
        config["harden"] = o.harden;
        write_json_file(o.out + ".manifest.json",
                        make_manifest("select-features", {o.seed}, config, inputs));
    }
    return 0;
}

void add_em_flags(CLI::App* cmd, double& alpha, double& lambda, int& max_iterations,
                  double& rel_tolerance) {
    cmd->add_option("--alpha", alpha, "Laplace smoothing strength")->capture_default_str();
    cmd->add_option("--lambda", lambda, "weight of the unlabeled likelihood term")
        ->capture_default_str();
    cmd->add_option("--max-iterations", max_iterations, "EM iteration cap")
        ->capture_default_str();
    cmd->add_option("--rel-tolerance", rel_tolerance, "relative log-likelihood stop threshold")
        ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"semi-supervised multinomial naive Bayes text classification lab"};
    app.set_version_flag("--version", SSNB_VERSION);
    app.require_subcommand(1);

    TrainOptions train_opts;
    CLI::App* train_cmd = app.add_subcommand("train", "train a model, optionally with EM");
    train_cmd->add_option("--labeled", train_opts.labeled, "labeled corpus (JSONL)")->required();
    train_cmd->add_option("--unlabeled", train_opts.unlabeled, "unlabeled corpus (JSONL)");
    train_cmd->add_option("--out", train_opts.out, "model output path")->capture_default_str();
    train_cmd->add_option("--trace", train_opts.trace, "trace CSV path (default <out>.trace.csv)");
    add_em_flags(train_cmd, train_opts.alpha, train_opts.lambda, train_opts.max_iterations,
                 train_opts.rel_tolerance);
    train_cmd->add_option("--vocab-size", train_opts.vocab_size, "vocabulary size (0 = full pool)")
        ->capture_default_str();
    train_cmd->add_option("--fallback-wordlist", train_opts.fallback,
                          "extra dictionary words, one per line");
    train_cmd->add_option("--seed", train_opts.seed, "pool shuffle seed")
        ->envname("SSNB_SEED")
        ->capture_default_str();
    train_cmd->add_option("--workers", train_opts.workers, "worker threads")
        ->capture_default_str();

    PredictOptions predict_opts;
    CLI::App* predict_cmd = app.add_subcommand("predict", "label sentences with a saved model");
    predict_cmd->add_option("--model", predict_opts.model, "model file from train")->required();
    predict_cmd->add_option("--input", predict_opts.input, "sentences to label (unlabeled JSONL)")
        ->required();
    predict_cmd->add_option("--out", predict_opts.out, "output JSONL (default stdout)");

    GenerateOptions generate_opts;
    CLI::App* generate_cmd = app.add_subcommand("generate", "draw synthetic corpora");
    generate_cmd->add_option("--config", generate_opts.config, "generator config JSON");
    generate_cmd->add_option("--preset", generate_opts.preset, "named preset (table1)");
    generate_cmd->add_option("--out", generate_opts.out, "output directory")
        ->capture_default_str();
    CLI::Option* gen_seed = generate_cmd->add_option("--seed", generate_opts.seed,
                                                     "generator seed (overrides config)")
                                ->envname("SSNB_SEED");

    GridOptions grid_opts;
    CLI::App* grid_cmd = app.add_subcommand("grid", "run an experiment grid");
    grid_cmd->add_option("--config", grid_opts.config, "grid config JSON")->required();
    grid_cmd->add_option("--out", grid_opts.out, "output directory")->capture_default_str();
    grid_cmd->add_option("--workers", grid_opts.workers, "worker threads")->capture_default_str();

    AnalyzeOptions analyze_opts;
    CLI::App* analyze_cmd = app.add_subcommand("analyze", "intervals and curve shapes from a CSV");
    analyze_cmd->add_option("--csv", analyze_opts.csv, "surface CSV from grid")->required();
    analyze_cmd->add_option("--block", analyze_opts.block, "labeled block index")
        ->capture_default_str();
    analyze_cmd->add_option("--delta", analyze_opts.delta, "degradation threshold")
        ->capture_default_str();
    analyze_cmd->add_option("--out", analyze_opts.out, "report JSON path (default stdout)");

    SelectFeaturesOptions select_opts;
    CLI::App* select_cmd =
        app.add_subcommand("select-features", "compare labeled-only and pseudo-label selection");
    select_cmd->add_option("--labeled", select_opts.labeled, "labeled corpus")->required();
    select_cmd->add_option("--unlabeled", select_opts.unlabeled, "unlabeled corpus")->required();
    select_cmd->add_option("--test", select_opts.test, "test corpus")->required();
    select_cmd->add_option("--fallback-wordlist", select_opts.fallback,
                           "extra dictionary words, one per line");
    select_cmd->add_option("--vocab-size", select_opts.vocab_size,
                           "selected vocabulary size (0 = pool fraction)")
        ->capture_default_str();
    select_cmd->add_option("--pool-fraction", select_opts.pool_fraction,
                           "fraction of the pool to keep when --vocab-size is 0")
        ->capture_default_str();
    add_em_flags(select_cmd, select_opts.alpha, select_opts.lambda, select_opts.max_iterations,
                 select_opts.rel_tolerance);
    select_cmd->add_flag("--harden", select_opts.harden,
                         "argmax the responsibilities into hard pseudo labels");
    select_cmd->add_option("--seed", select_opts.seed, "pool shuffle seed")
        ->envname("SSNB_SEED")
        ->capture_default_str();
    select_cmd->add_option("--workers", select_opts.workers, "worker threads")
        ->capture_default_str();
    select_cmd->add_option("--out", select_opts.out, "report JSON path (default stdout)");
    select_cmd->add_option("--scores-dir", select_opts.scores_dir,
                           "directory for the two score rankings");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }

    try {
        generate_opts.seed_given = gen_seed->count() > 0 || std::getenv("SSNB_SEED") != nullptr;
        if (train_cmd->parsed()) return run_train(train_opts);
        if (predict_cmd->parsed()) return run_predict(predict_opts);
        if (generate_cmd->parsed()) return run_generate(generate_opts);
        if (grid_cmd->parsed()) return run_grid(grid_opts);
        if (analyze_cmd->parsed()) return run_analyze(analyze_opts);
        if (select_cmd->parsed()) return run_select_features(select_opts);
        std::cerr << "error: no subcommand\n";
        return 2;
    } catch (const io_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const validation_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 3;
    }
}
