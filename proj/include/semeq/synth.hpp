#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "semeq/dataset.hpp"

namespace semeq {

// Generator for a dataset with planted structure: words are grouped into
// concept clusters that share a prototype EQ curve, and the accompanying
// embedding table places each cluster's words close together. A model fed
// those embeddings can therefore generalize to held-out words while a
// one-hot model cannot, which is what the pipeline tests need.
struct SynthSpec {
    std::uint64_t seed = 7;
    std::size_t clusters = 8;
    std::size_t train_only_words_per_cluster = 5;
    std::size_t examples_per_word = 4;
    // Smooth per-example deviation; its amplitude shrinks as the example's
    // consistency grows, so high-consistency labels sit near the word's
    // true curve.
    double example_noise_db = 0.5;
    double word_bias_db = 0.5; // smooth per-word deviation amplitude
    std::size_t embedding_dim = 300;
    // Within-cluster spread as a vector norm relative to the unit cluster
    // center; 0.35 keeps same-cluster cosines near 0.9.
    double embedding_noise = 0.35;
    double non_english_fraction = 0.08;
    // When set, these words become the test folds (each gets examples with
    // consistency above the test threshold); otherwise fold lists are
    // generated alongside the data.
    std::optional<FoldWordLists> planted_folds;
    std::array<double, kNumBands> band_centers_hz = default_band_centers();
};

struct SynthOutput {
    std::vector<EqExample> examples;
    std::vector<std::pair<std::string, std::vector<double>>> embeddings;
    FoldWordLists fold_words;
    std::map<std::string, std::size_t> word_cluster;
    std::vector<EqCurve> prototypes;
};

SynthOutput generate_synthetic(const SynthSpec& spec);

// Writes dataset.csv, embeddings.txt and synth.cfg (column map, english
// tag and fold word lists) into the directory.
struct SynthPaths {
    std::filesystem::path dataset;
    std::filesystem::path embeddings;
    std::filesystem::path config;
};
SynthPaths write_synthetic_files(const SynthOutput& out,
                                 const std::filesystem::path& dir);

} // namespace semeq
