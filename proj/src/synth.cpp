#include "semeq/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "semeq/errors.hpp"
#include "semeq/rng.hpp"
#include "semeq/util.hpp"

namespace semeq {

namespace {

// smooth bump in log-frequency, used for prototypes and word deviations
void add_bump(std::array<double, kNumBands>& gains,
              const std::array<double, kNumBands>& centers_hz, double center_lf,
              double width_lf, double amp_db) {
    for (std::size_t b = 0; b < kNumBands; ++b) {
        double lf = std::log10(centers_hz[b]);
        double z = (lf - center_lf) / width_lf;
        gains[b] += amp_db * std::exp(-0.5 * z * z);
    }
}

std::string synth_word(std::size_t fold, std::size_t i, const char* kind) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%s-f%zu-%02zu", kind, fold + 1, i);
    return buf;
}

} // namespace

SynthOutput generate_synthetic(const SynthSpec& spec) {
    if (spec.clusters == 0) throw ArgumentError("synth: clusters must be positive");
    if (spec.examples_per_word < 2) {
        throw ArgumentError("synth: need at least 2 examples per word");
    }
    Rng rng(spec.seed);
    SynthOutput out;

    // fold word lists: planted or generated
    if (spec.planted_folds) {
        out.fold_words = *spec.planted_folds;
    } else {
        for (std::size_t f = 0; f < 4; ++f) {
            for (std::size_t i = 0; i < 9; ++i) {
                std::string w = synth_word(f, i, "hq");
                out.fold_words.hq_words.push_back(w);
                out.fold_words.fold_words[f].push_back(w);
            }
            for (std::size_t i = 0; i < 22; ++i) {
                std::string w = synth_word(f, i, "hr");
                out.fold_words.hr_words.push_back(w);
                out.fold_words.fold_words[f].push_back(w);
            }
        }
    }

    // cluster prototypes: one dominant bump per cluster spread across the
    // spectrum, a secondary bump, and a cluster-phased ripple. The ripple
    // keeps every prototype's arc length well above a flat line's, so a
    // structureless prediction cannot slide into a good partial match.
    const double lf_lo = std::log10(spec.band_centers_hz.front());
    const double lf_hi = std::log10(spec.band_centers_hz.back());
    for (std::size_t k = 0; k < spec.clusters; ++k) {
        EqCurve proto;
        proto.band_centers_hz = spec.band_centers_hz;
        std::array<double, kNumBands> g{};
        double main_center =
            lf_lo + (lf_hi - lf_lo) * (static_cast<double>(k) + 0.5) /
                        static_cast<double>(spec.clusters);
        double main_amp = (k % 2 == 0 ? 1.0 : -1.0) * rng.uniform(2.6, 3.4);
        add_bump(g, spec.band_centers_hz, main_center,
                 rng.uniform(0.35, 0.55), main_amp);
        add_bump(g, spec.band_centers_hz, rng.uniform(lf_lo, lf_hi),
                 rng.uniform(0.3, 0.6), rng.uniform(-1.2, 1.2));
        const double ripple_amp = rng.uniform(0.5, 0.9);
        const double ripple_cycles = 2.0 + 0.5 * static_cast<double>(k % 3);
        const double ripple_phase =
            6.283185307179586 * static_cast<double>(k) /
                static_cast<double>(spec.clusters) +
            rng.uniform(0.0, 0.4);
        for (std::size_t b = 0; b < kNumBands; ++b) {
            double t = (std::log10(spec.band_centers_hz[b]) - lf_lo) / (lf_hi - lf_lo);
            g[b] += ripple_amp *
                    std::sin(6.283185307179586 * ripple_cycles * t + ripple_phase);
            proto.gains_db[b] = std::clamp(g[b], kMinGainDb, kMaxGainDb);
        }
        out.prototypes.push_back(proto);
    }

    // full word list: every fold word plus train-only filler per cluster
    std::vector<std::string> all_words;
    std::set<std::string> seen;
    for (std::size_t f = 0; f < 4; ++f) {
        for (const auto& raw : out.fold_words.fold_words[f]) {
            std::string w = to_lower_ascii(raw);
            if (seen.insert(w).second) all_words.push_back(w);
        }
    }
    const std::size_t n_test_words = all_words.size();
    for (std::size_t k = 0; k < spec.clusters; ++k) {
        for (std::size_t i = 0; i < spec.train_only_words_per_cluster; ++i) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "filler-c%zu-%02zu", k, i);
            all_words.emplace_back(buf);
        }
    }

    // deterministic round-robin cluster assignment
    for (std::size_t i = 0; i < all_words.size(); ++i) {
        out.word_cluster[all_words[i]] = i % spec.clusters;
    }

    // per-word smooth bias curve (unlearnable for held-out words)
    std::map<std::string, std::array<double, kNumBands>> word_bias;
    for (const auto& w : all_words) {
        std::array<double, kNumBands> bias{};
        add_bump(bias, spec.band_centers_hz, rng.uniform(lf_lo, lf_hi),
                 rng.uniform(0.3, 0.7), rng.normal(0.0, spec.word_bias_db));
        word_bias[w] = bias;
    }

    // embeddings: random unit cluster centers, words scattered around them
    std::vector<std::vector<double>> cluster_center(spec.clusters);
    for (auto& center : cluster_center) {
        center.resize(spec.embedding_dim);
        double norm2 = 0.0;
        for (double& v : center) {
            v = rng.normal();
            norm2 += v * v;
        }
        double inv = 1.0 / std::sqrt(norm2);
        for (double& v : center) v *= inv;
    }
    const double component_noise =
        spec.embedding_noise / std::sqrt(static_cast<double>(spec.embedding_dim));
    for (const auto& w : all_words) {
        const auto& center = cluster_center[out.word_cluster[w]];
        std::vector<double> vec(spec.embedding_dim);
        double norm2 = 0.0;
        for (std::size_t d = 0; d < spec.embedding_dim; ++d) {
            vec[d] = center[d] + component_noise * rng.normal();
            norm2 += vec[d] * vec[d];
        }
        double inv = 1.0 / std::sqrt(norm2);
        for (double& v : vec) v *= inv;
        out.embeddings.emplace_back(w, std::move(vec));
    }

    // examples
    static const char* kAudioIds[3] = {"audio-1", "audio-2", "audio-3"};
    for (std::size_t wi = 0; wi < all_words.size(); ++wi) {
        const std::string& w = all_words[wi];
        const bool is_test_word = wi < n_test_words;
        const EqCurve& proto = out.prototypes[out.word_cluster[w]];
        const auto& bias = word_bias[w];
        for (std::size_t e = 0; e < spec.examples_per_word; ++e) {
            EqExample ex;
            ex.descriptor = w;
            ex.language = "english";
            ex.audio_id = kAudioIds[rng.below(3)];
            // test words need examples that clear the consistency filter;
            // everything gets a mix so the filter has something to drop
            if (is_test_word && e == 0) {
                ex.consistency = rng.uniform(0.88, 0.98);
            } else if (is_test_word && e == 1) {
                ex.consistency = rng.uniform(0.72, 0.95);
            } else {
                ex.consistency = rng.uniform(0.30, 0.98);
            }
            // a low-consistency participant deviates more from the word's
            // curve; the deviation itself is smooth in frequency
            const double noise_amp =
                spec.example_noise_db * (0.1 + (1.0 - ex.consistency));
            std::array<double, kNumBands> deviation{};
            add_bump(deviation, spec.band_centers_hz, rng.uniform(lf_lo, lf_hi),
                     rng.uniform(0.25, 0.6), rng.normal(0.0, noise_amp));
            ex.curve.band_centers_hz = spec.band_centers_hz;
            for (std::size_t b = 0; b < kNumBands; ++b) {
                double g = proto.gains_db[b] + bias[b] + deviation[b] +
                           rng.normal(0.0, 0.04);
                ex.curve.gains_db[b] = std::clamp(g, kMinGainDb, kMaxGainDb);
            }
            out.examples.push_back(std::move(ex));
        }
    }

    // sprinkle non-English rows so the language filter has work to do
    const std::size_t n_foreign = static_cast<std::size_t>(
        spec.non_english_fraction * static_cast<double>(out.examples.size()));
    static const char* kLangs[3] = {"spanish", "german", "french"};
    for (std::size_t i = 0; i < n_foreign; ++i) {
        EqExample ex;
        char buf[32];
        std::snprintf(buf, sizeof(buf), "ajeno-%02zu", i);
        ex.descriptor = buf;
        ex.language = kLangs[rng.below(3)];
        ex.audio_id = kAudioIds[rng.below(3)];
        ex.consistency = rng.uniform(0.2, 0.95);
        ex.curve.band_centers_hz = spec.band_centers_hz;
        for (std::size_t b = 0; b < kNumBands; ++b) {
            ex.curve.gains_db[b] =
                std::clamp(rng.normal(0.0, 1.0), kMinGainDb, kMaxGainDb);
        }
        out.examples.push_back(std::move(ex));
    }
    return out;
}

namespace {

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ", ";
        out += items[i];
    }
    return out;
}

} // namespace

SynthPaths write_synthetic_files(const SynthOutput& out,
                                 const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    SynthPaths paths;
    paths.dataset = dir / "dataset.csv";
    paths.embeddings = dir / "embeddings.txt";
    paths.config = dir / "synth.cfg";

    {
        std::ostringstream csv;
        csv << "descriptor,language,audio_id,consistency";
        for (std::size_t b = 0; b < kNumBands; ++b) {
            char buf[16];
            std::snprintf(buf, sizeof(buf), ",band_%02zu", b);
            csv << buf;
        }
        csv << "\n";
        for (const auto& ex : out.examples) {
            csv << ex.descriptor << ',' << ex.language << ',' << ex.audio_id
                << ',' << format_double(ex.consistency);
            for (std::size_t b = 0; b < kNumBands; ++b) {
                csv << ',' << format_double(ex.curve.gains_db[b]);
            }
            csv << "\n";
        }
        atomic_write_file(paths.dataset, csv.str());
    }

    {
        std::ostringstream emb;
        for (const auto& [word, vec] : out.embeddings) {
            emb << word;
            for (double v : vec) emb << ' ' << format_double(v);
            emb << "\n";
        }
        atomic_write_file(paths.embeddings, emb.str());
    }

    {
        std::ostringstream cfg;
        cfg << "# generated dataset description\n";
        cfg << "col.descriptor = descriptor\n";
        cfg << "col.language = language\n";
        cfg << "col.audio_id = audio_id\n";
        cfg << "col.consistency = consistency\n";
        cfg << "col.gain_prefix = band_\n";
        cfg << "gains.units = db\n";
        cfg << "english.tag = english\n";
        cfg << "hq_words = " << join(out.fold_words.hq_words) << "\n";
        cfg << "hr_words = " << join(out.fold_words.hr_words) << "\n";
        for (std::size_t f = 0; f < 4; ++f) {
            cfg << "fold" << (f + 1)
                << ".words = " << join(out.fold_words.fold_words[f]) << "\n";
        }
        atomic_write_file(paths.config, cfg.str());
    }
    return paths;
}

} // namespace semeq
