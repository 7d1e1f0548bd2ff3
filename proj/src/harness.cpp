#include "ssnb/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "ssnb/classifier.hpp"
#include "ssnb/errors.hpp"
#include "ssnb/numeric.hpp"
#include "ssnb/rng.hpp"

namespace ssnb {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    size_t start = 0;
    while (true) {
        size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

template <typename T>
T parse_number(const std::string& field, size_t line_no, const char* column) {
    T value{};
    const char* first = field.data();
    const char* last = field.data() + field.size();
    std::from_chars_result res;
    if constexpr (std::is_floating_point_v<T>) {
        res = std::from_chars(first, last, value, std::chars_format::general);
    } else {
        res = std::from_chars(first, last, value);
    }
    if (res.ec != std::errc{} || res.ptr != last) {
        throw validation_error("csv line " + std::to_string(line_no) + ": bad " + column +
                               " value: " + field);
    }
    return value;
}

// Seed-median accuracies of one labeled block, keyed by (method, step, V).
// Any NaN among the seeds makes the aggregate NaN.
struct BlockMedians {
    std::vector<uint32_t> vocabs;  // ascending
    std::vector<int> steps;        // ascending, including 0 when present
    std::map<std::tuple<Method, int, uint32_t>, double> median_accuracy;

    bool has(Method m, int step, uint32_t v) const {
        return median_accuracy.count({m, step, v}) > 0;
    }
    double at(Method m, int step, uint32_t v) const {
        auto it = median_accuracy.find({m, step, v});
        return it == median_accuracy.end() ? kNaN : it->second;
    }
};

BlockMedians collect_block_medians(const AccuracySurface& surface, int labeled_block) {
    std::map<std::tuple<Method, int, uint32_t>, std::vector<double>> cells;
    std::set<uint32_t> vocabs;
    std::set<int> steps;
    for (const SurfaceRecord& r : surface.records) {
        if (r.labeled_block != labeled_block) continue;
        cells[{r.method, r.unlabeled_size, r.vocab_size}].push_back(r.accuracy);
        vocabs.insert(r.vocab_size);
        steps.insert(r.unlabeled_size);
    }
    if (cells.empty()) {
        throw validation_error("no records for labeled block " + std::to_string(labeled_block));
    }
    BlockMedians out;
    out.vocabs.assign(vocabs.begin(), vocabs.end());
    out.steps.assign(steps.begin(), steps.end());
    for (auto& [key, values] : cells) {
        bool any_nan = std::any_of(values.begin(), values.end(),
                                   [](double a) { return std::isnan(a); });
        out.median_accuracy[key] = any_nan ? kNaN : median(values);
    }
    return out;
}

// em(step, V) minus the step-0 supervised baseline, for every V and every
// step with unlabeled data. NaN marks unusable cells.
struct DiffGrid {
    std::vector<uint32_t> vocabs;
    std::vector<int> steps;             // > 0 only
    std::vector<double> diffs;          // vocabs.size() x steps.size()

    double diff(size_t v, size_t s) const { return diffs[v * steps.size() + s]; }
};

DiffGrid em_vs_baseline(const AccuracySurface& surface, int labeled_block) {
    BlockMedians medians = collect_block_medians(surface, labeled_block);
    DiffGrid grid;
    grid.vocabs = medians.vocabs;
    for (int step : medians.steps) {
        if (step > 0) grid.steps.push_back(step);
    }
    bool have_baseline = false;
    for (uint32_t v : grid.vocabs) {
        if (medians.has(Method::supervised, 0, v)) have_baseline = true;
    }
    if (!have_baseline) {
        throw validation_error("interval analysis requires supervised records at unlabeled step 0");
    }
    grid.diffs.assign(grid.vocabs.size() * grid.steps.size(), kNaN);
    for (size_t vi = 0; vi < grid.vocabs.size(); ++vi) {
        double baseline = medians.at(Method::supervised, 0, grid.vocabs[vi]);
        for (size_t si = 0; si < grid.steps.size(); ++si) {
            double em = medians.at(Method::em, grid.steps[si], grid.vocabs[vi]);
            grid.diffs[vi * grid.steps.size() + si] = em - baseline;
        }
    }
    return grid;
}

// Longest run of V indices whose cells all satisfy `good`; ties leftmost.
std::optional<VocabInterval> longest_run(const DiffGrid& grid,
                                         const std::function<bool(double)>& good) {
    if (grid.steps.empty()) return std::nullopt;
    size_t best_start = 0, best_len = 0;
    size_t run_start = 0, run_len = 0;
    for (size_t vi = 0; vi < grid.vocabs.size(); ++vi) {
        bool ok = true;
        for (size_t si = 0; si < grid.steps.size(); ++si) {
            double d = grid.diff(vi, si);
            if (std::isnan(d) || !good(d)) {
                ok = false;
                break;
            }
        }
        if (ok) {
            if (run_len == 0) run_start = vi;
            ++run_len;
            if (run_len > best_len) {
                best_len = run_len;
                best_start = run_start;
            }
        } else {
            run_len = 0;
        }
    }
    if (best_len == 0) return std::nullopt;
    return VocabInterval{grid.vocabs[best_start], grid.vocabs[best_start + best_len - 1]};
}

double round2(double x) { return std::round(x * 100.0) / 100.0; }

std::string coord(double x) { return format_double(round2(x)); }

}  // namespace

const char* method_name(Method method) {
    return method == Method::supervised ? "supervised" : "em";
}

Method method_from_name(const std::string& name) {
    if (name == "supervised") return Method::supervised;
    if (name == "em") return Method::em;
    throw validation_error("unknown method: " + name);
}

std::vector<int> default_unlabeled_steps() { return {0, 1485, 2999, 5342}; }

void GridConfig::validate() const {
    if (unlabeled_steps.empty()) throw validation_error("unlabeled_steps must not be empty");
    if (unlabeled_steps.front() != 0) throw validation_error("unlabeled_steps must start at 0");
    for (size_t i = 1; i < unlabeled_steps.size(); ++i) {
        if (unlabeled_steps[i] < unlabeled_steps[i - 1]) {
            throw validation_error("unlabeled_steps must be non-decreasing");
        }
    }
    if (vocab_sizes.empty()) throw validation_error("vocab_sizes must not be empty");
    for (size_t i = 0; i < vocab_sizes.size(); ++i) {
        if (vocab_sizes[i] < 1) throw validation_error("vocab_sizes entries must be positive");
        if (i > 0 && vocab_sizes[i] <= vocab_sizes[i - 1]) {
            throw validation_error("vocab_sizes must be strictly ascending");
        }
    }
    if (seeds.empty()) throw validation_error("seeds must not be empty");
    if (methods.empty()) throw validation_error("methods must not be empty");
    for (size_t i = 0; i < methods.size(); ++i) {
        for (size_t j = i + 1; j < methods.size(); ++j) {
            if (methods[i] == methods[j]) throw validation_error("duplicate method in grid config");
        }
    }
    em.validate();
}

AccuracySurface run_grid(const GridData& data, const GridConfig& config, int workers) {
    config.validate();
    if (data.labeled_blocks.empty()) {
        throw validation_error("grid needs at least one labeled block");
    }
    for (size_t b = 0; b < data.labeled_blocks.size(); ++b) {
        if (data.labeled_blocks[b].size() == 0) {
            throw validation_error("labeled block " + std::to_string(b) + " is empty");
        }
    }
    if (data.test.size() == 0) throw validation_error("grid needs a non-empty test corpus");
    if (data.test.class_names != data.labeled_blocks.front().class_names) {
        throw validation_error("test corpus classes differ from the labeled blocks");
    }
    int max_step = *std::max_element(config.unlabeled_steps.begin(), config.unlabeled_steps.end());
    if (static_cast<size_t>(max_step) > data.unlabeled_pool.size()) {
        throw validation_error("unlabeled step " + std::to_string(max_step) +
                               " exceeds the pool size " + std::to_string(data.unlabeled_pool.size()));
    }
    if (workers < 1) workers = 1;

    std::vector<LabeledCorpus> cumulative;
    cumulative.reserve(data.labeled_blocks.size());
    cumulative.push_back(data.labeled_blocks.front());
    for (size_t b = 1; b < data.labeled_blocks.size(); ++b) {
        cumulative.push_back(concat(cumulative.back(), data.labeled_blocks[b]));
    }

    const size_t B = cumulative.size();
    const size_t S = config.unlabeled_steps.size();
    const size_t V = config.vocab_sizes.size();
    const size_t D = config.seeds.size();
    const size_t M = config.methods.size();

    AccuracySurface surface;
    surface.records.resize(B * S * V * D * M);
    auto slot = [&](size_t b, size_t s, size_t v, size_t d, size_t m) {
        return (((b * S + s) * V + v) * D + d) * M + m;
    };

    struct Triple {
        size_t b, s, d;
    };
    std::vector<Triple> triples;
    triples.reserve(B * S * D);
    for (size_t b = 0; b < B; ++b) {
        for (size_t s = 0; s < S; ++s) {
            for (size_t d = 0; d < D; ++d) triples.push_back({b, s, d});
        }
    }

    auto run_triple = [&](const Triple& t) {
        const LabeledCorpus& labeled = cumulative[t.b];
        const int step = config.unlabeled_steps[t.s];
        const uint64_t seed = config.seeds[t.d];

        UnlabeledCorpus prefix;
        prefix.sentences.assign(data.unlabeled_pool.sentences.begin(),
                                data.unlabeled_pool.sentences.begin() + step);
        LabeledCorpus blind_test;
        blind_test.class_names = data.test.class_names;
        OrderedWordPool pool = build_word_pool(
            labeled, config.include_test_words ? data.test : blind_test, prefix,
            data.fallback_words, mix_seed(seed, t.b, static_cast<uint64_t>(step)));

        for (size_t v = 0; v < V; ++v) {
            const uint32_t vocab_size = config.vocab_sizes[v];
            SurfaceRecord base;
            base.labeled_block = static_cast<int>(t.b);
            base.labeled_size = static_cast<int>(labeled.size());
            base.unlabeled_size = step;
            base.vocab_size = vocab_size;
            base.seed = seed;

            if (vocab_size > pool.size()) {
                for (size_t m = 0; m < M; ++m) {
                    SurfaceRecord rec = base;
                    rec.method = config.methods[m];
                    rec.accuracy = kNaN;
                    rec.log_likelihood = kNaN;
                    rec.em_iterations = 0;
                    surface.records[slot(t.b, t.s, v, t.d, m)] = rec;
                }
                continue;
            }

            Vocabulary vocab = truncate(pool, vocab_size);
            VectorizedLabeled train = vectorize_corpus(labeled, vocab);
            VectorizedUnlabeled unl = vectorize_corpus(prefix, vocab);
            VectorizedLabeled test = vectorize_corpus(data.test, vocab);

            for (size_t m = 0; m < M; ++m) {
                SurfaceRecord rec = base;
                rec.method = config.methods[m];
                if (rec.method == Method::supervised) {
                    NBModel model = train_supervised(train, config.em.alpha);
                    rec.accuracy = evaluate(model, test);
                    rec.log_likelihood = log_likelihood(model, train, unl, config.em.lambda);
                    rec.em_iterations = 0;
                } else {
                    auto [model, trace] = train_em(train, unl, config.em);
                    rec.accuracy = evaluate(model, test);
                    rec.log_likelihood = trace.log_likelihoods.back().second;
                    rec.em_iterations = trace.iterations;
                }
                surface.records[slot(t.b, t.s, v, t.d, m)] = rec;
            }
        }
    };

    if (workers == 1 || triples.size() <= 1) {
        for (const Triple& t : triples) run_triple(t);
    } else {
        std::atomic<size_t> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        auto worker = [&] {
            while (true) {
                size_t i = next.fetch_add(1);
                if (i >= triples.size()) return;
                try {
                    run_triple(triples[i]);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    return;
                }
            }
        };
        size_t n_threads = std::min<size_t>(static_cast<size_t>(workers), triples.size());
        std::vector<std::thread> pool_threads;
        pool_threads.reserve(n_threads);
        for (size_t i = 0; i < n_threads; ++i) pool_threads.emplace_back(worker);
        for (auto& th : pool_threads) th.join();
        if (failure) std::rethrow_exception(failure);
    }
    return surface;
}

std::optional<VocabInterval> helpful_interval(const AccuracySurface& surface, int labeled_block) {
    DiffGrid grid = em_vs_baseline(surface, labeled_block);
    return longest_run(grid, [](double d) { return d >= 0.0; });
}

std::optional<VocabInterval> degradation_interval(const AccuracySurface& surface,
                                                  int labeled_block, double delta) {
    if (delta < 0.0) throw validation_error("delta must be non-negative");
    DiffGrid grid = em_vs_baseline(surface, labeled_block);
    return longest_run(grid, [delta](double d) { return d <= -delta; });
}

CurveShape curve_shape(const AccuracySurface& surface, int labeled_block, int unlabeled_size,
                       Method method) {
    BlockMedians medians = collect_block_medians(surface, labeled_block);
    if (medians.vocabs.size() < 3) {
        throw validation_error("curve_shape requires at least 3 vocabulary sizes");
    }
    std::vector<std::pair<uint32_t, double>> points;
    for (uint32_t v : medians.vocabs) {
        if (!medians.has(method, unlabeled_size, v)) continue;
        double acc = medians.at(method, unlabeled_size, v);
        if (!std::isnan(acc)) points.emplace_back(v, acc);
    }
    if (points.size() < 3) {
        throw validation_error("curve_shape requires at least 3 usable vocabulary sizes for " +
                               std::string(method_name(method)) + " at unlabeled step " +
                               std::to_string(unlabeled_size));
    }
    size_t peak = 0;
    for (size_t i = 1; i < points.size(); ++i) {
        if (points[i].second > points[peak].second) peak = i;
    }
    CurveShape shape;
    shape.peak_vocab = points[peak].first;
    shape.rises_then_falls = points.front().second < points[peak].second &&
                             points.back().second < points[peak].second;
    return shape;
}

void emit_csv(const AccuracySurface& surface, const std::filesystem::path& path) {
    if (surface.records.empty()) {
        throw validation_error("cannot emit an empty accuracy surface");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write csv: " + path.string());
    out << kSurfaceCsvHeader << '\n';
    for (const SurfaceRecord& r : surface.records) {
        out << r.labeled_block << ',' << r.labeled_size << ',' << r.unlabeled_size << ','
            << r.vocab_size << ',' << r.seed << ',' << method_name(r.method) << ','
            << format_double(r.accuracy) << ',' << format_double(r.log_likelihood) << ','
            << r.em_iterations << '\n';
    }
    out.flush();
    if (!out) throw io_error("failed writing csv: " + path.string());
}

AccuracySurface parse_surface_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open csv: " + path.string());

    std::string line;
    if (!std::getline(in, line)) throw validation_error("csv is empty: " + path.string());
    if (!line.empty() && line.back() == '\r') line.pop_back();

    const std::vector<std::string> expected = split_fields(kSurfaceCsvHeader);
    std::vector<std::string> header = split_fields(line);
    for (const std::string& column : expected) {
        if (std::find(header.begin(), header.end(), column) == header.end()) {
            throw validation_error("csv missing column: " + column);
        }
    }
    if (header != expected) {
        throw validation_error(std::string("csv columns must be exactly: ") + kSurfaceCsvHeader);
    }

    AccuracySurface surface;
    size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields = split_fields(line);
        if (fields.size() != expected.size()) {
            throw validation_error("csv line " + std::to_string(line_no) + ": expected " +
                                   std::to_string(expected.size()) + " fields, got " +
                                   std::to_string(fields.size()));
        }
        SurfaceRecord r;
        r.labeled_block = parse_number<int>(fields[0], line_no, "labeled_block");
        r.labeled_size = parse_number<int>(fields[1], line_no, "labeled_size");
        r.unlabeled_size = parse_number<int>(fields[2], line_no, "unlabeled_size");
        r.vocab_size = parse_number<uint32_t>(fields[3], line_no, "vocab_size");
        r.seed = parse_number<uint64_t>(fields[4], line_no, "seed");
        r.method = method_from_name(fields[5]);
        r.accuracy = parse_number<double>(fields[6], line_no, "accuracy");
        r.log_likelihood = parse_number<double>(fields[7], line_no, "log_likelihood");
        r.em_iterations = parse_number<int>(fields[8], line_no, "em_iterations");
        if (!std::isnan(r.accuracy) && (r.accuracy < 0.0 || r.accuracy > 1.0)) {
            throw validation_error("csv line " + std::to_string(line_no) +
                                   ": accuracy outside [0,1]");
        }
        surface.records.push_back(std::move(r));
    }
    return surface;
}

void emit_svg(const AccuracySurface& surface, int labeled_block,
              const std::filesystem::path& path) {
    BlockMedians medians = collect_block_medians(surface, labeled_block);

    // One series per unlabeled step: the step-0 line is the labeled-only
    // (supervised) curve, the others are the EM curves.
    struct Series {
        std::string label;
        std::vector<std::pair<uint32_t, double>> points;
    };
    std::vector<Series> series;
    for (int step : medians.steps) {
        Method preferred = step == 0 ? Method::supervised : Method::em;
        Method fallback = step == 0 ? Method::em : Method::supervised;
        Method use = preferred;
        bool any = false;
        for (uint32_t v : medians.vocabs) {
            if (medians.has(preferred, step, v)) {
                any = true;
                break;
            }
        }
        if (!any) {
            use = fallback;
            for (uint32_t v : medians.vocabs) {
                if (medians.has(fallback, step, v)) {
                    any = true;
                    break;
                }
            }
            if (!any) continue;
        }
        Series s;
        s.label = "unlabeled=" + std::to_string(step) + " (" + method_name(use) + ")";
        for (uint32_t v : medians.vocabs) {
            if (!medians.has(use, step, v)) continue;
            double acc = medians.at(use, step, v);
            if (!std::isnan(acc)) s.points.emplace_back(v, acc);
        }
        if (!s.points.empty()) series.push_back(std::move(s));
    }
    if (series.empty()) {
        throw validation_error("no drawable series for labeled block " +
                               std::to_string(labeled_block));
    }

    const double width = 760, height = 480;
    const double left = 70, right = 730, top = 30, bottom = 420;
    const double vmin = medians.vocabs.front();
    const double vmax = medians.vocabs.back();
    auto x_of = [&](double v) {
        if (vmax == vmin) return (left + right) / 2.0;
        return left + (v - vmin) / (vmax - vmin) * (right - left);
    };
    auto y_of = [&](double acc) { return bottom - acc * (bottom - top); };

    static const char* palette[] = {"#1b6ca8", "#c43d3d", "#2e8540",
                                    "#8a5bb8", "#c77f2e", "#4a4a4a"};
    const size_t palette_size = sizeof(palette) / sizeof(palette[0]);

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + coord(width) +
           "\" height=\"" + coord(height) + "\" viewBox=\"0 0 " + coord(width) + " " +
           coord(height) + "\">\n";
    svg += "<rect x=\"0\" y=\"0\" width=\"" + coord(width) + "\" height=\"" + coord(height) +
           "\" fill=\"white\"/>\n";
    svg += "<text x=\"" + coord((left + right) / 2) + "\" y=\"18\" text-anchor=\"middle\" " +
           "font-family=\"sans-serif\" font-size=\"14\">labeled block " +
           std::to_string(labeled_block) + "</text>\n";

    // Dotted vertical lines at the helpful-interval bounds, when the surface
    // supports the analysis and an interval exists.
    std::optional<VocabInterval> helpful;
    try {
        helpful = helpful_interval(surface, labeled_block);
    } catch (const validation_error&) {
        helpful = std::nullopt;
    }
    if (helpful) {
        for (uint32_t bound : {helpful->low, helpful->high}) {
            svg += "<line x1=\"" + coord(x_of(bound)) + "\" y1=\"" + coord(top) + "\" x2=\"" +
                   coord(x_of(bound)) + "\" y2=\"" + coord(bottom) +
                   "\" stroke=\"#333333\" stroke-width=\"1\" stroke-dasharray=\"4 3\"/>\n";
        }
    }

    // Axes.
    svg += "<line x1=\"" + coord(left) + "\" y1=\"" + coord(bottom) + "\" x2=\"" + coord(right) +
           "\" y2=\"" + coord(bottom) + "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    svg += "<line x1=\"" + coord(left) + "\" y1=\"" + coord(top) + "\" x2=\"" + coord(left) +
           "\" y2=\"" + coord(bottom) + "\" stroke=\"black\" stroke-width=\"1\"/>\n";

    // Y ticks every 0.2.
    for (int i = 0; i <= 5; ++i) {
        double acc = i / 5.0;
        double y = y_of(acc);
        svg += "<line x1=\"" + coord(left - 4) + "\" y1=\"" + coord(y) + "\" x2=\"" + coord(left) +
               "\" y2=\"" + coord(y) + "\" stroke=\"black\" stroke-width=\"1\"/>\n";
        svg += "<text x=\"" + coord(left - 8) + "\" y=\"" + coord(y + 4) +
               "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" +
               format_double(acc) + "</text>\n";
    }
    // X ticks on up to six of the grid's V values.
    std::vector<uint32_t> ticks;
    const size_t nv = medians.vocabs.size();
    if (nv <= 6) {
        ticks = medians.vocabs;
    } else {
        for (int i = 0; i <= 5; ++i) {
            ticks.push_back(medians.vocabs[i * (nv - 1) / 5]);
        }
        ticks.erase(std::unique(ticks.begin(), ticks.end()), ticks.end());
    }
    for (uint32_t v : ticks) {
        double x = x_of(v);
        svg += "<line x1=\"" + coord(x) + "\" y1=\"" + coord(bottom) + "\" x2=\"" + coord(x) +
               "\" y2=\"" + coord(bottom + 4) + "\" stroke=\"black\" stroke-width=\"1\"/>\n";
        svg += "<text x=\"" + coord(x) + "\" y=\"" + coord(bottom + 18) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" +
               std::to_string(v) + "</text>\n";
    }
    svg += "<text x=\"" + coord((left + right) / 2) + "\" y=\"" + coord(height - 12) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">vocabulary "
           "size</text>\n";
    svg += "<text x=\"18\" y=\"" + coord((top + bottom) / 2) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
           "transform=\"rotate(-90 18 " +
           coord((top + bottom) / 2) + ")\">accuracy</text>\n";

    for (size_t i = 0; i < series.size(); ++i) {
        const char* color = palette[i % palette_size];
        std::string points;
        for (auto [v, acc] : series[i].points) {
            if (!points.empty()) points += ' ';
            points += coord(x_of(v)) + "," + coord(y_of(acc));
        }
        svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
               "\" stroke-width=\"1.5\" points=\"" + points + "\"/>\n";
    }

    // Legend, top right.
    double legend_x = right - 190;
    double legend_y = top + 10;
    for (size_t i = 0; i < series.size(); ++i) {
        const char* color = palette[i % palette_size];
        double y = legend_y + 16.0 * static_cast<double>(i);
        svg += "<line x1=\"" + coord(legend_x) + "\" y1=\"" + coord(y - 4) + "\" x2=\"" +
               coord(legend_x + 18) + "\" y2=\"" + coord(y - 4) + "\" stroke=\"" +
               std::string(color) + "\" stroke-width=\"2\"/>\n";
        svg += "<text x=\"" + coord(legend_x + 24) + "\" y=\"" + coord(y) +
               "\" font-family=\"sans-serif\" font-size=\"11\">" + series[i].label + "</text>\n";
    }
    svg += "</svg>\n";

    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write svg: " + path.string());
    out << svg;
    out.flush();
    if (!out) throw io_error("failed writing svg: " + path.string());
}

namespace {

EMConfig em_config_from_json(const nlohmann::json& j) {
    static const char* known[] = {"alpha", "lambda", "max_iterations", "rel_tolerance"};
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::find_if(std::begin(known), std::end(known),
                         [&](const char* k) { return it.key() == k; }) == std::end(known)) {
            throw validation_error("unknown em config key: " + it.key());
        }
    }
    EMConfig config;
    config.alpha = j.value("alpha", config.alpha);
    config.lambda = j.value("lambda", config.lambda);
    config.max_iterations = j.value("max_iterations", config.max_iterations);
    config.rel_tolerance = j.value("rel_tolerance", config.rel_tolerance);
    config.validate();
    return config;
}

nlohmann::json em_config_to_json(const EMConfig& config) {
    return {{"alpha", config.alpha},
            {"lambda", config.lambda},
            {"max_iterations", config.max_iterations},
            {"rel_tolerance", config.rel_tolerance}};
}

}  // namespace

GridSpec grid_spec_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw validation_error("grid config must be a JSON object");
    static const char* known[] = {"labeled_blocks", "unlabeled",      "test",
                                  "generate",       "fallback_wordlist", "synthetic_fallback",
                                  "unlabeled_steps", "vocab_sizes",   "seeds",
                                  "em",             "methods",        "include_test_words"};
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::find_if(std::begin(known), std::end(known),
                         [&](const char* k) { return it.key() == k; }) == std::end(known)) {
            throw validation_error("unknown grid config key: " + it.key());
        }
    }

    const bool file_mode =
        j.contains("labeled_blocks") || j.contains("unlabeled") || j.contains("test");
    const bool generate_mode = j.contains("generate");
    if (file_mode == generate_mode) {
        throw validation_error(
            "grid config needs either corpus files (labeled_blocks/unlabeled/test) or a "
            "generate block, not both");
    }

    GridSpec spec;
    try {
        if (file_mode) {
            if (!j.contains("labeled_blocks") || !j.contains("unlabeled") || !j.contains("test")) {
                throw validation_error(
                    "grid config with corpus files needs labeled_blocks, unlabeled and test");
            }
            auto block_paths = j.at("labeled_blocks").get<std::vector<std::string>>();
            if (block_paths.empty()) {
                throw validation_error("labeled_blocks must list at least one file");
            }
            for (const std::string& p : block_paths) {
                spec.data.labeled_blocks.push_back(load_labeled_corpus(p));
            }
            spec.data.unlabeled_pool = load_unlabeled_corpus(j.at("unlabeled").get<std::string>());
            spec.data.test = load_labeled_corpus(j.at("test").get<std::string>());
            spec.resolved["labeled_blocks"] = block_paths;
            spec.resolved["unlabeled"] = j.at("unlabeled");
            spec.resolved["test"] = j.at("test");
        } else {
            nlohmann::json gen = j.at("generate");
            std::vector<int> block_sizes;
            if (gen.contains("labeled_block_sizes")) {
                block_sizes = gen.at("labeled_block_sizes").get<std::vector<int>>();
                gen.erase("labeled_block_sizes");
            }
            GeneratorConfig generator = GeneratorConfig::from_json(gen);
            if (generator.n_test < 1) {
                throw validation_error("generate block needs n_test >= 1");
            }
            SynthData synth = generate(generator);
            if (block_sizes.empty()) block_sizes = {generator.n_labeled};
            int total = 0;
            for (int s : block_sizes) {
                if (s < 1) throw validation_error("labeled_block_sizes entries must be positive");
                total += s;
            }
            if (total != generator.n_labeled) {
                throw validation_error("labeled_block_sizes must sum to n_labeled");
            }
            size_t offset = 0;
            for (int s : block_sizes) {
                LabeledCorpus block;
                block.class_names = synth.labeled.class_names;
                block.sentences.assign(synth.labeled.sentences.begin() + offset,
                                       synth.labeled.sentences.begin() + offset + s);
                offset += static_cast<size_t>(s);
                spec.data.labeled_blocks.push_back(std::move(block));
            }
            spec.data.unlabeled_pool = std::move(synth.unlabeled);
            spec.data.test = std::move(synth.test);
            nlohmann::json resolved_gen = generator.to_json();
            resolved_gen["labeled_block_sizes"] = block_sizes;
            spec.resolved["generate"] = resolved_gen;
        }

        if (j.contains("fallback_wordlist")) {
            std::string path = j.at("fallback_wordlist").get<std::string>();
            spec.data.fallback_words = load_wordlist(path);
            spec.resolved["fallback_wordlist"] = path;
        }
        if (j.contains("synthetic_fallback")) {
            int n = j.at("synthetic_fallback").get<int>();
            if (n < 0) throw validation_error("synthetic_fallback must be non-negative");
            auto extra = synthetic_wordlist(static_cast<size_t>(n), "zf");
            spec.data.fallback_words.insert(spec.data.fallback_words.end(), extra.begin(),
                                            extra.end());
            spec.resolved["synthetic_fallback"] = n;
        }

        spec.config.unlabeled_steps = j.contains("unlabeled_steps")
                                          ? j.at("unlabeled_steps").get<std::vector<int>>()
                                          : default_unlabeled_steps();
        spec.config.vocab_sizes = j.at("vocab_sizes").get<std::vector<uint32_t>>();
        spec.config.seeds = j.contains("seeds") ? j.at("seeds").get<std::vector<uint64_t>>()
                                                : std::vector<uint64_t>{0};
        spec.config.em = j.contains("em") ? em_config_from_json(j.at("em")) : EMConfig{};
        if (j.contains("include_test_words")) {
            spec.config.include_test_words = j.at("include_test_words").get<bool>();
        }
        if (j.contains("methods")) {
            spec.config.methods.clear();
            for (const auto& name : j.at("methods").get<std::vector<std::string>>()) {
                spec.config.methods.push_back(method_from_name(name));
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw validation_error(std::string("malformed grid config: ") + e.what());
    }
    spec.config.validate();

    spec.resolved["unlabeled_steps"] = spec.config.unlabeled_steps;
    spec.resolved["vocab_sizes"] = spec.config.vocab_sizes;
    spec.resolved["seeds"] = spec.config.seeds;
    spec.resolved["em"] = em_config_to_json(spec.config.em);
    spec.resolved["include_test_words"] = spec.config.include_test_words;
    std::vector<std::string> method_names;
    for (Method m : spec.config.methods) method_names.emplace_back(method_name(m));
    spec.resolved["methods"] = method_names;
    return spec;
}

GridSpec load_grid_spec(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open grid config: " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw validation_error("grid config " + path.string() + " is not valid JSON: " + e.what());
    }
    return grid_spec_from_json(j);
}

}  // namespace ssnb
