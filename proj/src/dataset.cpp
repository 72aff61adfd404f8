#include "semeq/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <unordered_map>
#include <unordered_set>

#include "semeq/errors.hpp"
#include "semeq/util.hpp"

namespace semeq {

std::array<double, kNumBands> default_band_centers() {
    std::array<double, kNumBands> centers{};
    for (std::size_t i = 0; i < kNumBands; ++i) {
        double t = static_cast<double>(i) / static_cast<double>(kNumBands - 1);
        centers[i] = 20.0 * std::pow(10.0, 3.0 * t); // 20 Hz .. 20 kHz
    }
    return centers;
}

NormalizedTarget normalize_curve(const EqCurve& curve) {
    NormalizedTarget t;
    for (std::size_t i = 0; i < kNumBands; ++i) {
        t.values[i] = (curve.gains_db[i] + 4.0) / 8.0;
    }
    return t;
}

std::array<double, kNumBands> denormalize(const NormalizedTarget& target) {
    std::array<double, kNumBands> gains{};
    for (std::size_t i = 0; i < kNumBands; ++i) {
        double v = target.values[i];
        if (!(v >= 0.0 && v <= 1.0)) {
            throw DomainError("denormalize: component " + std::to_string(i) +
                              " outside [0,1]: " + format_double(v));
        }
        gains[i] = v * 8.0 - 4.0;
    }
    return gains;
}

DatasetSchema DatasetSchema::from_config(const Config& cfg) {
    DatasetSchema s;
    s.descriptor_col = cfg.get_string("col.descriptor", s.descriptor_col);
    s.language_col = cfg.get_string("col.language", s.language_col);
    s.audio_id_col = cfg.get_string("col.audio_id", s.audio_id_col);
    s.consistency_col = cfg.get_string("col.consistency", s.consistency_col);
    s.gain_prefix = cfg.get_string("col.gain_prefix", s.gain_prefix);
    s.gain_cols = cfg.get_list("col.gains");
    s.gain_units = to_lower_ascii(cfg.get_string("gains.units", s.gain_units));
    if (s.gain_units != "db" && s.gain_units != "normalized") {
        throw SchemaError("gains.units must be 'db' or 'normalized'");
    }
    auto centers = cfg.get_double_list("bands.centers_hz");
    if (!centers.empty()) {
        if (centers.size() != kNumBands) {
            throw SchemaError("bands.centers_hz must list exactly 40 values");
        }
        for (std::size_t i = 0; i < kNumBands; ++i) {
            if (centers[i] <= 0.0 ||
                (i > 0 && centers[i] <= centers[i - 1])) {
                throw SchemaError("bands.centers_hz must be strictly increasing and positive");
            }
            s.band_centers_hz[i] = centers[i];
        }
    }
    return s;
}

namespace {

std::vector<std::string> gain_column_names(const DatasetSchema& schema) {
    if (!schema.gain_cols.empty()) {
        if (schema.gain_cols.size() != kNumBands) {
            throw SchemaError("col.gains maps " +
                              std::to_string(schema.gain_cols.size()) +
                              " columns; exactly 40 are required");
        }
        return schema.gain_cols;
    }
    std::vector<std::string> names;
    names.reserve(kNumBands);
    for (std::size_t i = 0; i < kNumBands; ++i) {
        char buf[8];
        std::snprintf(buf, sizeof(buf), "%02zu", i);
        names.push_back(schema.gain_prefix + buf);
    }
    return names;
}

// Plain comma split with optional surrounding double quotes per field.
std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> fields = split(line, ',');
    for (auto& f : fields) {
        f = trim(f);
        if (f.size() >= 2 && f.front() == '"' && f.back() == '"') {
            f = f.substr(1, f.size() - 2);
        }
    }
    return fields;
}

} // namespace

std::vector<EqExample> load_dataset(const std::filesystem::path& path,
                                    const DatasetSchema& schema,
                                    std::vector<std::string>* warnings) {
    std::string text = read_text_file(path);
    std::vector<std::string> lines = split(text, '\n');
    while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
    if (lines.empty()) throw SchemaError("dataset file is empty: " + path.string());

    for (auto& l : lines) {
        if (!l.empty() && l.back() == '\r') l.pop_back();
    }

    std::vector<std::string> header = split_csv_row(lines[0]);
    std::unordered_map<std::string, std::size_t> col_index;
    for (std::size_t i = 0; i < header.size(); ++i) col_index[header[i]] = i;

    auto require_col = [&](const std::string& name) -> std::size_t {
        auto it = col_index.find(name);
        if (it == col_index.end()) {
            throw SchemaError("dataset is missing mapped column '" + name + "'");
        }
        return it->second;
    };

    const std::size_t desc_i = require_col(schema.descriptor_col);
    const std::size_t lang_i = require_col(schema.language_col);
    const std::size_t audio_i = require_col(schema.audio_id_col);
    const std::size_t cons_i = require_col(schema.consistency_col);
    std::array<std::size_t, kNumBands> gain_i{};
    {
        std::vector<std::string> names = gain_column_names(schema);
        for (std::size_t b = 0; b < kNumBands; ++b) gain_i[b] = require_col(names[b]);
    }

    auto warn = [&](const std::string& msg) {
        if (warnings) warnings->push_back(msg);
    };

    std::vector<EqExample> examples;
    for (std::size_t row = 1; row < lines.size(); ++row) {
        if (trim(lines[row]).empty()) continue;
        std::vector<std::string> fields = split_csv_row(lines[row]);
        if (fields.size() != header.size()) {
            warn("row " + std::to_string(row + 1) + ": rejected, has " +
                 std::to_string(fields.size()) + " fields, expected " +
                 std::to_string(header.size()));
            continue;
        }

        EqExample ex;
        ex.descriptor = to_lower_ascii(trim(fields[desc_i]));
        ex.language = trim(fields[lang_i]);
        ex.audio_id = trim(fields[audio_i]);
        if (ex.descriptor.empty()) {
            warn("row " + std::to_string(row + 1) + ": rejected, empty descriptor");
            continue;
        }

        double cons = 0.0;
        if (!parse_double(fields[cons_i], cons) || !std::isfinite(cons)) {
            warn("row " + std::to_string(row + 1) + ": rejected, unparseable consistency");
            continue;
        }
        ex.consistency = std::clamp(cons, 0.0, 1.0);

        bool ok = true;
        ex.curve.band_centers_hz = schema.band_centers_hz;
        for (std::size_t b = 0; b < kNumBands; ++b) {
            double g = 0.0;
            if (!parse_double(fields[gain_i[b]], g) || !std::isfinite(g)) {
                warn("row " + std::to_string(row + 1) + ": rejected, unparseable gain in band " +
                     std::to_string(b));
                ok = false;
                break;
            }
            if (schema.gain_units == "normalized") g = g * 8.0 - 4.0;
            if (g < kMinGainDb || g > kMaxGainDb) {
                warn("row " + std::to_string(row + 1) + ": gain " + format_double(g) +
                     " clamped to [-4, 4] in band " + std::to_string(b));
                g = std::clamp(g, kMinGainDb, kMaxGainDb);
            }
            ex.curve.gains_db[b] = g;
        }
        if (!ok) continue;
        examples.push_back(std::move(ex));
    }
    return examples;
}

std::vector<EqExample> filter_english(const std::vector<EqExample>& examples,
                                      const std::string& english_tag) {
    std::string tag = to_lower_ascii(english_tag);
    std::vector<EqExample> out;
    for (const auto& ex : examples) {
        if (to_lower_ascii(ex.language) == tag) out.push_back(ex);
    }
    return out;
}

std::uint64_t hash_index_set(std::vector<std::size_t> indices) {
    std::sort(indices.begin(), indices.end());
    std::uint64_t h = 1469598103934665603ULL;
    for (std::size_t v : indices) {
        std::uint64_t x = static_cast<std::uint64_t>(v);
        h = fnv1a64(&x, sizeof(x), h);
    }
    return h;
}

FoldPlan build_folds(const std::vector<EqExample>& examples,
                     const std::vector<std::string>& hq_words,
                     const std::vector<std::string>& hr_words,
                     const std::array<std::vector<std::string>, 4>& fold_words) {
    FoldPlan plan;
    for (const auto& w : hq_words) plan.all_hq_words.insert(to_lower_ascii(w));
    for (const auto& w : hr_words) plan.all_hr_words.insert(to_lower_ascii(w));

    std::set<std::string> tested;
    for (std::size_t f = 0; f < 4; ++f) {
        Fold& fold = plan.folds[f];
        std::unordered_set<std::string> in_fold;
        for (const auto& raw : fold_words[f]) {
            std::string w = to_lower_ascii(raw);
            if (!in_fold.insert(w).second) {
                throw ArgumentError("fold " + std::to_string(f + 1) +
                                    " lists word '" + w + "' twice");
            }
            fold.test_words.push_back(w);
            tested.insert(w);
            if (plan.all_hq_words.count(w)) {
                fold.hq_words.insert(w);
            } else if (plan.all_hr_words.count(w)) {
                fold.hr_words.insert(w);
            } else {
                throw ArgumentError("fold " + std::to_string(f + 1) + " word '" + w +
                                    "' is in neither the HQ nor the HR list");
            }
        }
        if (fold.hq_words.size() != 9 || fold.hr_words.size() != 22) {
            throw ArgumentError("fold " + std::to_string(f + 1) + " must contain 9 HQ and 22 HR words, got " +
                                std::to_string(fold.hq_words.size()) + " HQ and " +
                                std::to_string(fold.hr_words.size()) + " HR");
        }

        for (std::size_t i = 0; i < examples.size(); ++i) {
            const EqExample& ex = examples[i];
            if (in_fold.count(ex.descriptor)) {
                if (ex.consistency > kConsistencyThreshold) {
                    fold.test_indices.push_back(i);
                }
            } else {
                fold.train_indices.push_back(i);
            }
        }

        // no descriptor may sit on both sides of the split
        for (std::size_t i : fold.train_indices) {
            if (in_fold.count(examples[i].descriptor)) {
                throw ArgumentError("fold " + std::to_string(f + 1) + ": test word '" +
                                    examples[i].descriptor + "' leaked into the training set");
            }
        }
        plan.test_set_hashes[f] = hash_index_set(fold.test_indices);
    }

    for (const auto& w : plan.all_hq_words) {
        if (!tested.count(w)) {
            throw ArgumentError("HQ word '" + w + "' is not tested by any fold");
        }
    }
    for (const auto& w : plan.all_hr_words) {
        if (!tested.count(w)) {
            throw ArgumentError("HR word '" + w + "' is not tested by any fold");
        }
    }
    return plan;
}

FoldWordLists fold_words_from_config(const Config& cfg) {
    FoldWordLists lists;
    lists.hq_words = cfg.get_list("hq_words");
    lists.hr_words = cfg.get_list("hr_words");
    if (lists.hq_words.empty() || lists.hr_words.empty()) {
        throw SchemaError("config must define hq_words and hr_words");
    }
    for (std::size_t f = 0; f < 4; ++f) {
        std::string key = "fold" + std::to_string(f + 1) + ".words";
        lists.fold_words[f] = cfg.get_list(key);
        if (lists.fold_words[f].empty()) {
            throw SchemaError("config must define " + key);
        }
    }
    return lists;
}

EqCurve select_human_label(std::span<const EqExample> examples_for_word) {
    if (examples_for_word.empty()) {
        throw ArgumentError("select_human_label: no examples given");
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < examples_for_word.size(); ++i) {
        if (examples_for_word[i].consistency > examples_for_word[best].consistency) {
            best = i;
        }
    }
    return examples_for_word[best].curve;
}

EqCurve mean_human_label(std::span<const EqExample> examples_for_word) {
    if (examples_for_word.size() < 2) {
        throw ArgumentError("mean_human_label: needs at least two examples");
    }
    EqCurve mean;
    mean.band_centers_hz = examples_for_word[0].curve.band_centers_hz;
    for (const auto& ex : examples_for_word) {
        for (std::size_t b = 0; b < kNumBands; ++b) {
            mean.gains_db[b] += ex.curve.gains_db[b];
        }
    }
    const double n = static_cast<double>(examples_for_word.size());
    for (std::size_t b = 0; b < kNumBands; ++b) mean.gains_db[b] /= n;
    return mean;
}

} // namespace semeq
