#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ssnb/corpus.hpp"
#include "ssnb/em.hpp"
#include "ssnb/synth.hpp"
#include "ssnb/vocabulary.hpp"

namespace ssnb {

enum class Method { supervised, em };

const char* method_name(Method method);
Method method_from_name(const std::string& name);

// Numeric settings of one experiment grid. Labeled blocks are cumulative:
// block b trains on the concatenation of blocks 0..b.
struct GridConfig {
    std::vector<int> unlabeled_steps;    // cumulative prefix sizes, 0 first
    std::vector<uint32_t> vocab_sizes;   // strictly ascending
    std::vector<uint64_t> seeds;
    EMConfig em;
    std::vector<Method> methods = {Method::supervised, Method::em};
    // Test-set words join the word pool by default, mirroring the
    // transductive dictionary procedure; turn off to keep the pool blind
    // to the test set.
    bool include_test_words = true;

    void validate() const;
};

// [0, 1485, 2999, 5342]: no unlabeled data, then the three pool additions
// of the source study.
std::vector<int> default_unlabeled_steps();

// The corpora a grid runs over. The test set is fixed across the whole grid.
struct GridData {
    std::vector<LabeledCorpus> labeled_blocks;
    UnlabeledCorpus unlabeled_pool;
    LabeledCorpus test;
    std::vector<std::string> fallback_words;
};

struct SurfaceRecord {
    int labeled_block = 0;
    int labeled_size = 0;
    int unlabeled_size = 0;
    uint32_t vocab_size = 0;
    uint64_t seed = 0;
    Method method = Method::supervised;
    double accuracy = 0.0;        // NaN when the cell failed (V beyond pool)
    double log_likelihood = 0.0;  // weighted, at the trained model
    int em_iterations = 0;

    friend bool operator==(const SurfaceRecord&, const SurfaceRecord&) = default;
};

struct AccuracySurface {
    std::vector<SurfaceRecord> records;

    size_t size() const { return records.size(); }
};

// Runs every (block, step, V, seed, method) cell: rebuild the word pool for
// the block's labeled data plus the step's unlabeled prefix, truncate at V,
// vectorize, train, evaluate on the fixed test set. Cells where V exceeds
// the pool are recorded with NaN accuracy. Records come out sorted by
// (block, step, V, seed, method) regardless of worker count.
AccuracySurface run_grid(const GridData& data, const GridConfig& config, int workers = 1);

// Inclusive vocabulary-size bounds of a contiguous run of grid V values.
struct VocabInterval {
    uint32_t low = 0;
    uint32_t high = 0;

    friend bool operator==(const VocabInterval&, const VocabInterval&) = default;
};

// Longest contiguous run of V values where the seed-median EM accuracy at
// every unlabeled step stays at or above the step-0 supervised baseline;
// ties go to the leftmost run. Seed aggregation is the median throughout.
std::optional<VocabInterval> helpful_interval(const AccuracySurface& surface, int labeled_block);

// Mirror image: every unlabeled step's EM accuracy at or below the step-0
// supervised baseline minus delta.
std::optional<VocabInterval> degradation_interval(const AccuracySurface& surface,
                                                  int labeled_block, double delta = 0.0);

struct CurveShape {
    uint32_t peak_vocab = 0;
    bool rises_then_falls = false;
};

// Shape of the accuracy-vs-V curve of one (block, unlabeled step, method)
// series, seed-median. Peak ties go to the smallest V; rises_then_falls
// means both endpoints sit strictly below the peak.
CurveShape curve_shape(const AccuracySurface& surface, int labeled_block, int unlabeled_size,
                       Method method);

inline constexpr const char* kSurfaceCsvHeader =
    "labeled_block,labeled_size,unlabeled_size,vocab_size,seed,method,accuracy,"
    "log_likelihood,em_iterations";

void emit_csv(const AccuracySurface& surface, const std::filesystem::path& path);
AccuracySurface parse_surface_csv(const std::filesystem::path& path);

// One SVG 1.1 line chart for one labeled block: accuracy vs V, one polyline
// per unlabeled step (step 0 drawn from the supervised series), legend, and
// dotted vertical lines at the helpful-interval bounds when one exists.
void emit_svg(const AccuracySurface& surface, int labeled_block,
              const std::filesystem::path& path);

// A grid spec file resolved into runnable form. The JSON either references
// corpus files (labeled_blocks / unlabeled / test) or carries an inline
// "generate" block; `resolved` echoes the spec with all defaults filled in.
struct GridSpec {
    GridData data;
    GridConfig config;
    nlohmann::json resolved;
};

GridSpec load_grid_spec(const std::filesystem::path& path);
GridSpec grid_spec_from_json(const nlohmann::json& j);

}  // namespace ssnb
