#include "ssnb/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <unordered_map>
#include <utility>

#include "ssnb/errors.hpp"
#include "ssnb/numeric.hpp"
#include "ssnb/rng.hpp"
#include "ssnb/vocabulary.hpp"

namespace ssnb {

namespace {

std::string padded(const std::string& prefix, int index, int width) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%0*d", width, index);
    return prefix + buf;
}

std::vector<std::string> default_class_names(int num_classes) {
    if (num_classes == 3) return {"positive", "negative", "neutral"};
    std::vector<std::string> names;
    names.reserve(static_cast<size_t>(num_classes));
    for (int c = 0; c < num_classes; ++c) {
        names.push_back(std::string("class") + static_cast<char>('a' + c));
    }
    return names;
}

// Support-local CDF of one mixture component plus the mapping back to
// global vocabulary indices. The support is the class's own word block
// followed by the shared noise block.
struct ComponentTable {
    std::vector<double> cdf;
    std::vector<uint32_t> global_index;
};

struct Process {
    TrueModel truth;
    std::vector<ComponentTable> tables;  // C * S, c-major
    std::vector<double> prior_cdf;
};

size_t sample_cdf(const std::vector<double>& cdf, Rng& rng) {
    double r = rng.real01();
    auto it = std::upper_bound(cdf.begin(), cdf.end(), r);
    size_t k = static_cast<size_t>(it - cdf.begin());
    if (k >= cdf.size()) k = cdf.size() - 1;  // guards r landing past cdf.back()
    return k;
}

Process build_process(const GeneratorConfig& config, const std::vector<std::string>& class_names,
                      Rng& rng) {
    const int C = config.num_classes();
    const int S = config.subclusters_per_class;
    const size_t wpc = static_cast<size_t>(config.words_per_class);
    const size_t noise = static_cast<size_t>(config.shared_noise_words);
    const size_t W = wpc * static_cast<size_t>(C) + noise;

    Process p;
    p.truth.class_names = class_names;
    p.truth.class_priors = config.class_proportions;
    p.truth.subclusters = S;
    p.truth.mean_length = config.mean_length;
    p.truth.length_class_coupling = config.length_class_coupling;

    p.truth.vocabulary.reserve(W);
    for (int c = 0; c < C; ++c) {
        auto block = synthetic_wordlist(wpc, std::string("w") + static_cast<char>('a' + c));
        p.truth.vocabulary.insert(p.truth.vocabulary.end(), block.begin(), block.end());
    }
    if (noise > 0) {
        auto block = synthetic_wordlist(noise, "xs");
        p.truth.vocabulary.insert(p.truth.vocabulary.end(), block.begin(), block.end());
    }

    p.truth.word_probs.assign(static_cast<size_t>(C) * static_cast<size_t>(S) * W, 0.0);
    p.tables.resize(static_cast<size_t>(C) * static_cast<size_t>(S));
    const size_t support = wpc + noise;
    for (int c = 0; c < C; ++c) {
        for (int s = 0; s < S; ++s) {
            std::vector<double> dist = rng.dirichlet(support, config.word_concentration);
            ComponentTable& table = p.tables[static_cast<size_t>(c) * S + s];
            table.cdf.resize(support);
            table.global_index.resize(support);
            double* row = p.truth.word_probs.data() +
                          (static_cast<size_t>(c) * S + static_cast<size_t>(s)) * W;
            double acc = 0.0;
            for (size_t k = 0; k < support; ++k) {
                uint32_t g = static_cast<uint32_t>(k < wpc ? static_cast<size_t>(c) * wpc + k
                                                           : static_cast<size_t>(C) * wpc + (k - wpc));
                row[g] = dist[k];
                acc += dist[k];
                table.cdf[k] = acc;
                table.global_index[k] = g;
            }
        }
    }

    p.prior_cdf.resize(static_cast<size_t>(C));
    double acc = 0.0;
    for (int c = 0; c < C; ++c) {
        acc += config.class_proportions[static_cast<size_t>(c)];
        p.prior_cdf[static_cast<size_t>(c)] = acc;
    }
    return p;
}

Sentence draw_sentence(const Process& p, const GeneratorConfig& config, int c, std::string id,
                       bool keep_label, Rng& rng) {
    const int S = config.subclusters_per_class;
    int s = S == 1 ? 0 : static_cast<int>(rng.below(static_cast<uint64_t>(S)));
    double mu = config.mean_length * (1.0 + config.length_class_coupling * c);
    int len = std::max(1, rng.poisson(mu));

    Sentence sent;
    sent.id = std::move(id);
    sent.tokens.reserve(static_cast<size_t>(len));
    const ComponentTable& table = p.tables[static_cast<size_t>(c) * S + static_cast<size_t>(s)];
    for (int t = 0; t < len; ++t) {
        size_t k = sample_cdf(table.cdf, rng);
        sent.tokens.push_back(p.truth.vocabulary[table.global_index[k]]);
    }
    if (keep_label) sent.label = c;
    return sent;
}

int draw_class(const Process& p, Rng& rng) {
    return static_cast<int>(sample_cdf(p.prior_cdf, rng));
}

// log P(length = n) under a Poisson(mu) with all mass of {0, 1} folded into
// length 1, matching the max(1, poisson) draw.
double log_length_pmf(int n, double mu) {
    if (n == 1) return -mu + std::log1p(mu);
    return n * std::log(mu) - mu - std::lgamma(static_cast<double>(n) + 1.0);
}

}  // namespace

void GeneratorConfig::validate() const {
    const size_t C = class_proportions.size();
    if (C < 2 || C > 26) {
        throw validation_error("class_proportions must list between 2 and 26 classes");
    }
    double sum = 0.0;
    for (double p : class_proportions) {
        if (!(p > 0.0)) throw validation_error("class_proportions entries must be positive");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw validation_error("class_proportions must sum to 1 within 1e-9");
    }
    if (!class_names.empty()) {
        if (class_names.size() != C) {
            throw validation_error("class_names must match class_proportions in length");
        }
        for (const auto& name : class_names) {
            if (name.empty()) throw validation_error("class_names entries must be non-empty");
        }
        auto sorted = class_names;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
            throw validation_error("class_names entries must be distinct");
        }
    }
    if (words_per_class < 1) throw validation_error("words_per_class must be at least 1");
    if (shared_noise_words < 0) throw validation_error("shared_noise_words must be non-negative");
    if (!(word_concentration > 0.0)) throw validation_error("word_concentration must be positive");
    if (!(mean_length > 0.0)) throw validation_error("mean_length must be positive");
    if (length_class_coupling < 0.0) {
        throw validation_error("length_class_coupling must be non-negative");
    }
    if (subclusters_per_class < 1) {
        throw validation_error("subclusters_per_class must be at least 1");
    }
    if (n_labeled < 0 || n_unlabeled < 0 || n_test < 0) {
        throw validation_error("pool sizes must be non-negative");
    }
}

GeneratorConfig GeneratorConfig::from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw validation_error("generator config must be a JSON object");
    static const char* known[] = {"class_proportions", "class_names",    "words_per_class",
        "shared_noise_words",    "word_concentration", "mean_length",
        "length_class_coupling", "subclusters_per_class", "n_labeled",
        "n_unlabeled",           "n_test",             "seed"};
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::find_if(std::begin(known), std::end(known),
                         [&](const char* k) { return it.key() == k; }) == std::end(known)) {
            throw validation_error("unknown generator config key: " + it.key());
        }
    }
    GeneratorConfig config;
    try {
        if (!j.contains("class_proportions")) {
            throw validation_error("generator config requires class_proportions");
        }
        config.class_proportions = j.at("class_proportions").get<std::vector<double>>();
        if (j.contains("class_names")) {
            config.class_names = j.at("class_names").get<std::vector<std::string>>();
        }
        config.words_per_class = j.value("words_per_class", config.words_per_class);
        config.shared_noise_words = j.value("shared_noise_words", config.shared_noise_words);
        config.word_concentration = j.value("word_concentration", config.word_concentration);
        config.mean_length = j.value("mean_length", config.mean_length);
        config.length_class_coupling =
            j.value("length_class_coupling", config.length_class_coupling);
        config.subclusters_per_class =
            j.value("subclusters_per_class", config.subclusters_per_class);
        config.n_labeled = j.value("n_labeled", config.n_labeled);
        config.n_unlabeled = j.value("n_unlabeled", config.n_unlabeled);
        config.n_test = j.value("n_test", config.n_test);
        config.seed = j.value("seed", config.seed);
    } catch (const nlohmann::json::exception& e) {
        throw validation_error(std::string("malformed generator config: ") + e.what());
    }
    config.validate();
    return config;
}

nlohmann::json GeneratorConfig::to_json() const {
    nlohmann::json j;
    j["class_proportions"] = class_proportions;
    if (!class_names.empty()) j["class_names"] = class_names;
    j["words_per_class"] = words_per_class;
    j["shared_noise_words"] = shared_noise_words;
    j["word_concentration"] = word_concentration;
    j["mean_length"] = mean_length;
    j["length_class_coupling"] = length_class_coupling;
    j["subclusters_per_class"] = subclusters_per_class;
    j["n_labeled"] = n_labeled;
    j["n_unlabeled"] = n_unlabeled;
    j["n_test"] = n_test;
    j["seed"] = seed;
    return j;
}

SynthData generate(const GeneratorConfig& config) {
    config.validate();
    std::vector<std::string> names =
        config.class_names.empty() ? default_class_names(config.num_classes()) : config.class_names;

    Rng rng(mix_seed(config.seed));
    Process p = build_process(config, names, rng);

    SynthData data;
    data.labeled.class_names = names;
    data.test.class_names = names;
    data.labeled.sentences.reserve(static_cast<size_t>(config.n_labeled));
    for (int i = 0; i < config.n_labeled; ++i) {
        int c = draw_class(p, rng);
        data.labeled.sentences.push_back(
            draw_sentence(p, config, c, padded("train-", i + 1, 6), true, rng));
    }
    data.unlabeled.sentences.reserve(static_cast<size_t>(config.n_unlabeled));
    for (int i = 0; i < config.n_unlabeled; ++i) {
        int c = draw_class(p, rng);
        data.unlabeled.sentences.push_back(
            draw_sentence(p, config, c, padded("unl-", i + 1, 6), false, rng));
    }
    data.test.sentences.reserve(static_cast<size_t>(config.n_test));
    for (int i = 0; i < config.n_test; ++i) {
        int c = draw_class(p, rng);
        data.test.sentences.push_back(
            draw_sentence(p, config, c, padded("test-", i + 1, 6), true, rng));
    }
    data.truth = std::move(p.truth);
    return data;
}

double bayes_optimal_accuracy(const TrueModel& truth, const LabeledCorpus& test) {
    if (test.size() == 0) {
        throw validation_error("bayes_optimal_accuracy requires a non-empty test set");
    }
    if (test.class_names != truth.class_names) {
        throw validation_error("test corpus and generating model disagree on classes");
    }
    const int C = truth.num_classes();
    const int S = truth.subclusters;
    const size_t W = truth.num_words();

    std::unordered_map<std::string, uint32_t> index;
    index.reserve(W * 2);
    for (uint32_t w = 0; w < W; ++w) index.emplace(truth.vocabulary[w], w);

    size_t correct = 0;
    std::vector<std::pair<uint32_t, uint32_t>> counts;
    std::vector<double> finite;
    for (const Sentence& sent : test.sentences) {
        if (!sent.label) throw validation_error("test sentence lacks a label: " + sent.id);
        counts.clear();
        for (const std::string& tok : sent.tokens) {
            auto it = index.find(tok);
            if (it == index.end()) {
                throw validation_error("token outside the generating vocabulary: " + tok);
            }
            counts.emplace_back(it->second, 1);
        }
        std::sort(counts.begin(), counts.end());
        size_t out = 0;
        for (size_t i = 0; i < counts.size();) {
            size_t j = i;
            uint32_t n = 0;
            while (j < counts.size() && counts[j].first == counts[i].first) n += counts[j++].second;
            counts[out++] = {counts[i].first, n};
            i = j;
        }
        counts.resize(out);
        const int len = static_cast<int>(sent.tokens.size());

        int best = 0;
        double best_score = -std::numeric_limits<double>::infinity();
        for (int c = 0; c < C; ++c) {
            double mu = truth.mean_length * (1.0 + truth.length_class_coupling * c);
            double base = std::log(truth.class_priors[static_cast<size_t>(c)]) +
                          log_length_pmf(len, mu);
            finite.clear();
            for (int s = 0; s < S; ++s) {
                std::span<const double> row = truth.component(c, s);
                double lp = -std::log(static_cast<double>(S));
                bool dead = false;
                for (auto [w, n] : counts) {
                    double pw = row[w];
                    if (pw <= 0.0) {
                        dead = true;
                        break;
                    }
                    lp += n * std::log(pw);
                }
                if (!dead) finite.push_back(lp);
            }
            if (finite.empty()) continue;
            double score = base + log_sum_exp(finite);
            if (score > best_score) {
                best_score = score;
                best = c;
            }
        }
        if (best == *sent.label) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(test.size());
}

std::vector<int> apportion(int n, std::span<const double> weights) {
    if (n < 0) throw validation_error("apportion requires a non-negative total");
    if (weights.empty()) throw validation_error("apportion requires at least one weight");
    double total = 0.0;
    for (double w : weights) {
        if (w < 0.0 || !std::isfinite(w)) {
            throw validation_error("apportion weights must be finite and non-negative");
        }
        total += w;
    }
    if (!(total > 0.0)) throw validation_error("apportion weights must not all be zero");

    const size_t k = weights.size();
    std::vector<int> parts(k, 0);
    std::vector<double> fracs(k, 0.0);
    int assigned = 0;
    for (size_t i = 0; i < k; ++i) {
        double share = weights[i] / total * n;
        parts[i] = static_cast<int>(std::floor(share));
        fracs[i] = share - parts[i];
        assigned += parts[i];
    }
    std::vector<size_t> order(k);
    std::iota(order.begin(), order.end(), size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return fracs[a] > fracs[b]; });
    for (size_t i = 0; assigned < n; ++i) {
        parts[order[i % k]] += 1;
        ++assigned;
    }
    return parts;
}

std::span<const Table1Row> table1_rows() {
    // Per-company unlabeled counts are the largest-remainder apportionment of
    // the three pool increments (1485, then 1514, then 2343 more) across each
    // increment's companies, weighted by labeled pool size.
    static const Table1Row rows[] = {
        {"Ac", "Accenture", "Consulting", 356, 0.39, 0.21, 0.40, 377},
        {"Ae", "AECOM", "Engineering", 396, 0.20, 0.17, 0.63, 449},
        {"Ax", "AXA", "Insurance", 695, 0.31, 0.18, 0.51, 610},
        {"Cs", "Cisco", "Telecom", 583, 0.37, 0.26, 0.37, 618},
        {"Co", "Coach", "Luxury Goods", 328, 0.33, 0.08, 0.59, 371},
        {"De", "Dell", "Manufacturing", 587, 0.27, 0.08, 0.65, 665},
        {"Fd", "Ford", "Automobile", 646, 0.34, 0.15, 0.51, 567},
        {"Ms", "Microsoft", "Software", 383, 0.22, 0.19, 0.59, 337},
        {"Mon", "Monsanto", "Agriculture", 459, 0.35, 0.10, 0.55, 487},
        {"Mor", "Morgan Stanley", "Banking", 812, 0.17, 0.14, 0.69, 861},
    };
    return rows;
}

Table1Pools generate_table1(const GeneratorConfig& knobs) {
    GeneratorConfig config = knobs;
    config.class_proportions = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};  // replaced per pool below
    config.class_names.clear();
    config.validate();
    const std::vector<std::string> names = default_class_names(3);

    Rng rng(mix_seed(config.seed, 0x7ab1e));
    Process p = build_process(config, names, rng);

    auto row_by_code = [](const std::string& code) -> const Table1Row& {
        for (const Table1Row& row : table1_rows()) {
            if (code == row.code) return row;
        }
        throw validation_error("unknown company code: " + code);
    };

    Table1Pools pools;
    for (const Table1Row& row : table1_rows()) {
        const double mix[3] = {row.positive, row.negative, row.neutral};
        std::vector<int> by_class = apportion(row.labeled, mix);
        LabeledCorpus pool;
        pool.class_names = names;
        pool.sentences.reserve(static_cast<size_t>(row.labeled));
        int serial = 0;
        for (int c = 0; c < 3; ++c) {
            for (int i = 0; i < by_class[static_cast<size_t>(c)]; ++i) {
                pool.sentences.push_back(draw_sentence(
                    p, config, c, padded(std::string(row.code) + "-l-", ++serial, 4), true, rng));
            }
        }
        pools.labeled_pools.emplace_back(row.code, std::move(pool));
    }

    // Unlabeled sentences in increment order, so that a prefix of 1485 covers
    // the first pool addition and 2999 the second.
    static const char* increment_order[] = {"Co", "De", "Ae", "Fd", "Ax", "Ms",
                                            "Ac", "Cs", "Mon", "Mor"};
    for (const char* code : increment_order) {
        const Table1Row& row = row_by_code(code);
        const double mix[3] = {row.positive, row.negative, row.neutral};
        std::vector<double> cdf = {mix[0], mix[0] + mix[1], mix[0] + mix[1] + mix[2]};
        for (int i = 0; i < row.unlabeled; ++i) {
            int c = static_cast<int>(sample_cdf(cdf, rng));
            pools.unlabeled.sentences.push_back(draw_sentence(
                p, config, c, padded(std::string(row.code) + "-u-", i + 1, 4), false, rng));
        }
    }
    pools.truth = std::move(p.truth);
    return pools;
}

}  // namespace ssnb
