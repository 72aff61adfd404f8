#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "semeq/config.hpp"

namespace semeq {

inline constexpr std::size_t kNumBands = 40;
inline constexpr double kMinGainDb = -4.0;
inline constexpr double kMaxGainDb = 4.0;

// 40 gains in dB anchored at 40 strictly increasing band-center frequencies.
struct EqCurve {
    std::array<double, kNumBands> gains_db{};
    std::array<double, kNumBands> band_centers_hz{};
};

// Default band grid: 40 log-spaced centers from 20 Hz to 20 kHz.
std::array<double, kNumBands> default_band_centers();

struct EqExample {
    std::string descriptor;
    std::string language;
    std::string audio_id;
    double consistency = 0.0; // in [0, 1]
    EqCurve curve;
};

// 40 values in [0, 1]; the network's target/output domain.
struct NormalizedTarget {
    std::array<double, kNumBands> values{};
};

// gain -> (gain + 4) / 8, so -4 dB maps to 0 and +4 dB to 1.
NormalizedTarget normalize_curve(const EqCurve& curve);

// Exact inverse: value * 8 - 4. Components outside [0,1] are a domain error.
std::array<double, kNumBands> denormalize(const NormalizedTarget& target);

// Column mapping and parse options for a delimited dataset export.
struct DatasetSchema {
    std::string descriptor_col = "descriptor";
    std::string language_col = "language";
    std::string audio_id_col = "audio_id";
    std::string consistency_col = "consistency";
    // Gain columns are either <gain_prefix>00..<gain_prefix>39 or an
    // explicit 40-name list.
    std::string gain_prefix = "band_";
    std::vector<std::string> gain_cols;
    // "db" or "normalized"; normalized inputs are mapped back to dB.
    std::string gain_units = "db";
    std::array<double, kNumBands> band_centers_hz = default_band_centers();

    static DatasetSchema from_config(const Config& cfg);
};

// Loads a comma-separated file with a header row. Rows with unparseable
// numeric fields are rejected (recorded in *warnings with their row
// number); gains outside [-4, +4] are clamped with a warning.
std::vector<EqExample> load_dataset(const std::filesystem::path& path,
                                    const DatasetSchema& schema,
                                    std::vector<std::string>* warnings = nullptr);

// Keeps rows whose language tag matches (case-insensitive); order preserved.
std::vector<EqExample> filter_english(const std::vector<EqExample>& examples,
                                      const std::string& english_tag = "english");

// Four train/test partitions over descriptor words.
struct Fold {
    std::vector<std::string> test_words; // lowercased, file order of config
    std::set<std::string> hq_words;
    std::set<std::string> hr_words;
    std::vector<std::size_t> train_indices; // into the example list
    std::vector<std::size_t> test_indices;  // consistency > 0.7 only
};

struct FoldPlan {
    std::array<Fold, 4> folds;
    std::set<std::string> all_hq_words;
    std::set<std::string> all_hr_words;
    // FNV hash of each fold's sorted test indices; consumers re-derive and
    // compare to detect accidental drift.
    std::array<std::uint64_t, 4> test_set_hashes{};
};

inline constexpr double kConsistencyThreshold = 0.7; // strict: > 0.7

// Builds the four folds. For each fold: test examples are those whose
// descriptor is in the fold's word list and whose consistency is strictly
// greater than 0.7; training examples are every example whose descriptor is
// not in the list (no consistency filter). Each fold's list must contain
// exactly 9 words from hq_words and 22 from hr_words, and every hq/hr word
// must be tested by at least one fold.
FoldPlan build_folds(const std::vector<EqExample>& examples,
                     const std::vector<std::string>& hq_words,
                     const std::vector<std::string>& hr_words,
                     const std::array<std::vector<std::string>, 4>& fold_words);

// Reads hq_words, hr_words and fold1.words..fold4.words from a config.
struct FoldWordLists {
    std::vector<std::string> hq_words;
    std::vector<std::string> hr_words;
    std::array<std::vector<std::string>, 4> fold_words;
};
FoldWordLists fold_words_from_config(const Config& cfg);

std::uint64_t hash_index_set(std::vector<std::size_t> indices);

// Curve of the example with the highest consistency; ties keep the earliest.
EqCurve select_human_label(std::span<const EqExample> examples_for_word);

// Component-wise mean curve; requires at least two examples.
EqCurve mean_human_label(std::span<const EqExample> examples_for_word);

} // namespace semeq
