#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "semeq/config.hpp"
#include "semeq/dataset.hpp"
#include "semeq/embedding.hpp"
#include "semeq/metrics.hpp"
#include "semeq/mlp.hpp"

namespace semeq {

struct ModelVariant {
    std::string name;
    // empty path = the no-embedding one-hot baseline
    std::filesystem::path embedding_path;
    bool is_baseline() const { return embedding_path.empty(); }
};

struct ExperimentConfig {
    std::filesystem::path dataset_path;
    Config file_config; // schema, english tag, fold word lists
    std::vector<ModelVariant> embedding_models;
    bool include_baseline = true;
    TrainConfig train;
    std::uint64_t master_seed = 1;
};

struct FoldOutcome {
    double mae_norm = 0.0; // per-band MAE on the [0,1] scale
    double mae_db = 0.0;   // same, in dB (x8)
    double mae_sum = 0.0;  // per-example summed normalized MAE (x40)
    std::size_t n_train = 0;
    std::size_t n_test = 0;
    std::size_t oov_train_skipped = 0;
    std::size_t oov_test_skipped = 0;
};

struct ModelResult {
    std::string name;
    bool is_baseline = false;
    std::array<FoldOutcome, 4> folds;
    double mean_norm = 0.0, std_norm = 0.0;
    double mean_db = 0.0, std_db = 0.0;
    double mean_sum = 0.0, std_sum = 0.0;
    std::array<MlpModel, 4> trained;
    std::array<std::vector<double>, 4> loss_traces;
};

struct CvRun {
    std::vector<EqExample> english; // language-filtered dataset
    std::size_t total_examples = 0;
    std::size_t unique_words = 0;
    FoldPlan plan;
    std::vector<ModelResult> models; // embedding models first, baseline last
    std::map<std::string, EmbeddingTable> tables; // keyed by variant name
    std::vector<std::string> warnings;
    std::uint64_t master_seed = 0;
};

// Trains every variant on every fold and aggregates the per-fold test
// errors (mean and sample standard deviation across the 4 folds).
// Deterministic for a fixed master seed: per-(model, fold) seeds are
// derived by fixed offsets.
CvRun run_cv(const ExperimentConfig& cfg);

struct PcmStats {
    double mean = 0.0;
    double stddev = 0.0;
    std::size_t count = 0;
};

struct PcmComparison {
    PcmStats human;
    std::vector<std::pair<std::string, PcmStats>> models;
    std::size_t qualifying_words = 0; // (fold, word) pairs that passed the filter
};

// For every test word occurring at least twice in the full English
// dataset: ground truth is the mean of the word's curves; the human score
// is the PCM distance from the ground truth to the word's
// highest-consistency curve, and each model is scored by the distance of
// its prediction. The ground-truth curve is always the PCM reference.
PcmComparison run_pcm_comparison(const CvRun& run);

// Writes one delimited file per word: 40 rows of band center, the human
// label (highest-consistency curve) and each model's predicted gains.
// Each word must be in some fold's test word list.
void export_word_plots(const CvRun& run, const std::vector<std::string>& words,
                       const std::filesystem::path& out_dir);

// Deterministic machine-readable summary of a run (sorted keys, exact
// round-trip doubles).
std::string summary_json(const CvRun& run, const PcmComparison* pcm);
std::string results_tsv(const CvRun& run);
std::string pcm_tsv(const PcmComparison& pcm);

} // namespace semeq
