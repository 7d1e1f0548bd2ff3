#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "ssnb/classifier.hpp"
#include "ssnb/corpus.hpp"
#include "ssnb/harness.hpp"
#include "test_util.hpp"

using namespace ssnb;
using testutil::TempDir;
using nlohmann::json;

namespace {

struct CmdResult {
    int exit_code = -1;
    std::string output;  // stdout and stderr interleaved
};

// Runs the tool under test through the shell; SSNB_CLI_BIN is set by ctest.
CmdResult run_cli(const std::string& args, const std::string& env_prefix = "") {
    const char* bin = std::getenv("SSNB_CLI_BIN");
    REQUIRE_MESSAGE(bin != nullptr, "SSNB_CLI_BIN must point at the ssnb binary");
    std::string cmd = env_prefix + "\"" + bin + "\" " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    CmdResult result;
    char buf[4096];
    size_t n;
    while ((n = fread(buf, 1, sizeof(buf), pipe)) > 0) result.output.append(buf, n);
    int status = pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

void write_training_files(const TempDir& tmp) {
    auto labeled = testutil::make_labeled(
        {"positive", "negative"},
        {{"profit rose strongly", 0}, {"gain gain profit", 0}, {"loss widened", 1},
         {"heavy loss loss", 1}, {"profit gain", 0}, {"loss deepened again", 1}});
    auto unlabeled = testutil::make_unlabeled({"profit gain rose", "loss loss", "gain profit"});
    save_labeled_corpus(labeled, tmp.file("labeled.jsonl"));
    save_unlabeled_corpus(unlabeled, tmp.file("unlabeled.jsonl"));
}

}  // namespace

TEST_CASE("cli: version and help exit cleanly") {
    CHECK(run_cli("--version").exit_code == 0);
    auto help = run_cli("--help");
    CHECK(help.exit_code == 0);
    CHECK(help.output.find("train") != std::string::npos);
    CHECK(run_cli("conjure").exit_code == 2);  // unknown subcommand
    CHECK(run_cli("train").exit_code == 2);    // missing required flag
}

TEST_CASE("cli: train writes a model, a trace and a manifest") {
    TempDir tmp;
    write_training_files(tmp);
    auto out = tmp.file("model.json").string();
    auto result = run_cli("train --labeled " + tmp.file("labeled.jsonl").string() +
                          " --unlabeled " + tmp.file("unlabeled.jsonl").string() + " --out " +
                          out + " --seed 3");
    CHECK(result.exit_code == 0);

    auto [model, vocab] = load_model(out);
    CHECK(model.num_classes() == 2);
    CHECK(vocab.size() == model.vocab_size);

    auto trace = testutil::read_file(tmp.file("model.json.trace.csv"));
    CHECK(trace.rfind("iteration,log_likelihood\n", 0) == 0);

    auto manifest = json::parse(testutil::read_file(tmp.file("model.json.manifest.json")));
    CHECK(manifest.at("tool") == "ssnb");
    CHECK(manifest.at("command") == "train");
    REQUIRE(manifest.at("inputs").is_array());
    CHECK(manifest.at("inputs").at(0).contains("fnv1a64"));
}

TEST_CASE("cli: train with missing input exits 1 naming the file") {
    TempDir tmp;
    auto result = run_cli("train --labeled " + tmp.file("absent.jsonl").string());
    CHECK(result.exit_code == 1);
    CHECK(result.output.find("absent.jsonl") != std::string::npos);
}

TEST_CASE("cli: lambda zero with unlabeled data trains the supervised model") {
    TempDir tmp;
    write_training_files(tmp);
    // the unlabeled corpus adds no novel words, so both runs share a pool
    auto a = run_cli("train --labeled " + tmp.file("labeled.jsonl").string() + " --unlabeled " +
                     tmp.file("unlabeled.jsonl").string() + " --lambda 0 --seed 11 --out " +
                     tmp.file("a.json").string());
    auto b = run_cli("train --labeled " + tmp.file("labeled.jsonl").string() +
                     " --seed 11 --out " + tmp.file("b.json").string());
    CHECK(a.exit_code == 0);
    CHECK(b.exit_code == 0);
    CHECK(testutil::read_file(tmp.file("a.json")) == testutil::read_file(tmp.file("b.json")));
}

TEST_CASE("cli: predict labels every input sentence") {
    TempDir tmp;
    write_training_files(tmp);
    auto model_path = tmp.file("model.json").string();
    REQUIRE(run_cli("train --labeled " + tmp.file("labeled.jsonl").string() + " --out " +
                    model_path + " --seed 1")
                .exit_code == 0);

    auto probe = testutil::make_unlabeled({"profit profit", "loss", "gain rose"});
    save_unlabeled_corpus(probe, tmp.file("probe.jsonl"));
    auto result = run_cli("predict --model " + model_path + " --input " +
                          tmp.file("probe.jsonl").string());
    CHECK(result.exit_code == 0);

    std::vector<json> lines;
    size_t pos = 0;
    while (pos < result.output.size()) {
        size_t end = result.output.find('\n', pos);
        if (end == std::string::npos) break;
        std::string line = result.output.substr(pos, end - pos);
        pos = end + 1;
        if (!line.empty() && line.front() == '{') lines.push_back(json::parse(line));
    }
    REQUIRE(lines.size() == 3);
    CHECK(lines[0].at("id") == "u0");
    for (const auto& line : lines) {
        std::string label = line.at("label");
        CHECK((label == "positive" || label == "negative"));
    }
    CHECK(lines[0].at("label") == "positive");
    CHECK(lines[1].at("label") == "negative");
}

TEST_CASE("cli: generate is seed-deterministic and validates its config") {
    TempDir tmp;
    json config = {
        {"class_proportions", {0.4, 0.6}}, {"words_per_class", 8}, {"shared_noise_words", 4},
        {"n_labeled", 20},                 {"n_unlabeled", 10},    {"n_test", 10},
        {"seed", 5},
    };
    testutil::write_file(tmp.file("gen.json"), config.dump());

    auto dir1 = tmp.file("out1").string();
    auto dir2 = tmp.file("out2").string();
    CHECK(run_cli("generate --config " + tmp.file("gen.json").string() + " --out " + dir1)
              .exit_code == 0);
    CHECK(run_cli("generate --config " + tmp.file("gen.json").string() + " --out " + dir2)
              .exit_code == 0);
    auto labeled1 = testutil::read_file(tmp.file("out1/labeled.jsonl"));
    CHECK(labeled1 == testutil::read_file(tmp.file("out2/labeled.jsonl")));
    CHECK(load_labeled_corpus(tmp.file("out1/labeled.jsonl")).size() == 20);
    CHECK(load_unlabeled_corpus(tmp.file("out1/unlabeled.jsonl")).size() == 10);
    CHECK(load_labeled_corpus(tmp.file("out1/test.jsonl")).size() == 10);
    CHECK(json::parse(testutil::read_file(tmp.file("out1/manifest.json"))).at("command") ==
          "generate");

    // the SSNB_SEED environment variable stands in for --seed
    auto dir3 = tmp.file("out3").string();
    auto dir4 = tmp.file("out4").string();
    CHECK(run_cli("generate --config " + tmp.file("gen.json").string() + " --out " + dir3 +
                  " --seed 9")
              .exit_code == 0);
    CHECK(run_cli("generate --config " + tmp.file("gen.json").string() + " --out " + dir4,
                  "SSNB_SEED=9 ")
              .exit_code == 0);
    CHECK(testutil::read_file(tmp.file("out3/labeled.jsonl")) ==
          testutil::read_file(tmp.file("out4/labeled.jsonl")));
    CHECK(labeled1 != testutil::read_file(tmp.file("out3/labeled.jsonl")));

    json broken = config;
    broken["class_proportions"] = {0.5, 0.4};
    testutil::write_file(tmp.file("broken.json"), broken.dump());
    auto result = run_cli("generate --config " + tmp.file("broken.json").string() + " --out " +
                          tmp.file("nope").string());
    CHECK(result.exit_code == 2);
    CHECK(result.output.find("sum to 1") != std::string::npos);
}

TEST_CASE("cli: the table1 preset writes ten labeled pools and the unlabeled pool") {
    TempDir tmp;
    auto dir = tmp.file("corpus").string();
    auto result = run_cli("generate --preset table1 --out " + dir + " --seed 2");
    CHECK(result.exit_code == 0);

    size_t total = 0;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        auto name = entry.path().filename().string();
        if (name.rfind("labeled_", 0) == 0) {
            total += load_labeled_corpus(entry.path()).size();
        }
    }
    CHECK(total == 5245);
    CHECK(load_unlabeled_corpus(tmp.file("corpus/unlabeled.jsonl")).size() == 5342);
    CHECK(load_labeled_corpus(tmp.file("corpus/labeled_Ms.jsonl")).size() == 383);

    auto manifest = json::parse(testutil::read_file(tmp.file("corpus/manifest.json")));
    const auto& pools = manifest.at("config").at("pools");
    CHECK(pools.size() == 10);
    CHECK(pools.at("Ms").at("labeled").get<size_t>() == 383);
    CHECK(pools.at("Ms").contains("company"));
    CHECK(pools.at("Ms").at("unlabeled").get<size_t>() > 0);
    CHECK(manifest.at("config").at("total_labeled").get<size_t>() == total);
}

TEST_CASE("cli: grid writes a surface, charts and a manifest; reruns are byte-identical") {
    TempDir tmp;
    json config = {
        {"generate",
         {{"class_proportions", {0.5, 0.5}},
          {"words_per_class", 10},
          {"shared_noise_words", 5},
          {"mean_length", 8.0},
          {"n_labeled", 40},
          {"n_unlabeled", 30},
          {"n_test", 20},
          {"seed", 7}}},
        {"unlabeled_steps", {0, 30}},
        {"vocab_sizes", {10, 25}},
        {"seeds", {0, 1}},
        {"synthetic_fallback", 30},
    };
    testutil::write_file(tmp.file("grid.json"), config.dump());

    auto dir1 = tmp.file("r1").string();
    auto result = run_cli("grid --config " + tmp.file("grid.json").string() + " --out " + dir1);
    CHECK(result.exit_code == 0);

    auto surface = parse_surface_csv(tmp.file("r1/surface.csv"));
    CHECK(surface.size() == 1u * 2u * 2u * 2u * 2u);
    CHECK(std::filesystem::exists(tmp.file("r1/block_0.svg")));
    auto manifest = json::parse(testutil::read_file(tmp.file("r1/manifest.json")));
    CHECK(manifest.at("command") == "grid");
    CHECK(manifest.at("config").at("vocab_sizes") == json::array({10, 25}));

    auto dir2 = tmp.file("r2").string();
    CHECK(run_cli("grid --config " + tmp.file("grid.json").string() + " --out " + dir2 +
                  " --workers 3")
              .exit_code == 0);
    CHECK(testutil::read_file(tmp.file("r1/surface.csv")) ==
          testutil::read_file(tmp.file("r2/surface.csv")));
}

TEST_CASE("cli: analyze reports intervals and curves as JSON") {
    TempDir tmp;
    AccuracySurface surface;
    for (uint32_t v : {10u, 20u, 30u}) {
        SurfaceRecord sup;
        sup.labeled_block = 0;
        sup.labeled_size = 50;
        sup.unlabeled_size = 0;
        sup.vocab_size = v;
        sup.method = Method::supervised;
        sup.accuracy = 0.5;
        sup.log_likelihood = -10;
        surface.records.push_back(sup);
        SurfaceRecord em = sup;
        em.unlabeled_size = 100;
        em.method = Method::em;
        em.accuracy = v == 20 ? 0.75 : 0.6;
        em.em_iterations = 4;
        surface.records.push_back(em);
    }
    emit_csv(surface, tmp.file("surface.csv"));

    auto result = run_cli("analyze --csv " + tmp.file("surface.csv").string());
    CHECK(result.exit_code == 0);
    auto report = json::parse(result.output);
    CHECK(report.at("labeled_block") == 0);
    REQUIRE(report.at("helpful_interval").is_object());
    CHECK(report.at("helpful_interval").at("low") == 10);
    CHECK(report.at("helpful_interval").at("high") == 30);
    CHECK(report.at("degradation_interval").is_null());
    REQUIRE(report.at("curves").is_array());
    CHECK(report.at("curves").size() == 2);  // supervised at 0, em at 100

    bool saw_hump = false;
    for (const auto& curve : report.at("curves")) {
        if (curve.at("method") == "em") {
            CHECK(curve.at("peak_vocab") == 20);
            CHECK(curve.at("rises_then_falls") == true);
            saw_hump = true;
        }
    }
    CHECK(saw_hump);

    testutil::write_file(tmp.file("bad.csv"), "labeled_block,foo\n");
    auto bad = run_cli("analyze --csv " + tmp.file("bad.csv").string());
    CHECK(bad.exit_code == 2);
    CHECK(bad.output.find("labeled_size") != std::string::npos);
}

TEST_CASE("cli: select-features compares the two scoring arms") {
    TempDir tmp;
    json config = {
        {"class_proportions", {0.5, 0.5}}, {"words_per_class", 10}, {"shared_noise_words", 6},
        {"subclusters_per_class", 2},      {"n_labeled", 50},       {"n_unlabeled", 60},
        {"n_test", 40},                    {"seed", 13},
    };
    testutil::write_file(tmp.file("gen.json"), config.dump());
    REQUIRE(run_cli("generate --config " + tmp.file("gen.json").string() + " --out " +
                    tmp.file("data").string())
                .exit_code == 0);

    auto result = run_cli("select-features --labeled " + tmp.file("data/labeled.jsonl").string() +
                          " --unlabeled " + tmp.file("data/unlabeled.jsonl").string() +
                          " --test " + tmp.file("data/test.jsonl").string() +
                          " --pool-fraction 0.5 --seed 3 --out " + tmp.file("report.json").string() +
                          " --scores-dir " + tmp.file("scores").string());
    CHECK(result.exit_code == 0);

    auto report = json::parse(testutil::read_file(tmp.file("report.json")));
    CHECK(report.at("vocab_size").get<int>() > 0);
    CHECK(report.at("pool_size").get<int>() >= report.at("vocab_size").get<int>());
    for (const char* arm : {"labeled_only", "pseudo_label"}) {
        CHECK(report.at(arm).at("accuracy").get<double>() >= 0.0);
        CHECK(report.at(arm).at("accuracy").get<double>() <= 1.0);
    }
    double diff = report.at("accuracy_difference").get<double>();
    CHECK(diff == doctest::Approx(report.at("pseudo_label").at("accuracy").get<double>() -
                                  report.at("labeled_only").at("accuracy").get<double>()));
    std::string direction = report.at("direction");
    CHECK((direction == "pseudo_label >= labeled_only" || direction == "pseudo_label < labeled_only"));

    CHECK(testutil::read_file(tmp.file("scores/labeled_only_scores.csv"))
              .rfind("word,score,rank\n", 0) == 0);
    CHECK(testutil::read_file(tmp.file("scores/pseudo_label_scores.csv"))
              .rfind("word,score,rank\n", 0) == 0);
    CHECK(report.at("pseudo_labels") == "soft");

    auto hardened = run_cli("select-features --labeled " + tmp.file("data/labeled.jsonl").string() +
                            " --unlabeled " + tmp.file("data/unlabeled.jsonl").string() +
                            " --test " + tmp.file("data/test.jsonl").string() +
                            " --pool-fraction 0.5 --seed 3 --harden --out " +
                            tmp.file("hard.json").string());
    CHECK(hardened.exit_code == 0);
    auto hard_report = json::parse(testutil::read_file(tmp.file("hard.json")));
    CHECK(hard_report.at("pseudo_labels") == "hard");
    // the labeled-only arm ignores responsibilities entirely
    CHECK(hard_report.at("labeled_only") == report.at("labeled_only"));
}
