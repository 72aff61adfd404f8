#include "semeq/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "semeq/errors.hpp"
#include "semeq/util.hpp"

namespace semeq {

namespace {

// fixed offsets so every (model, fold) pair trains from its own stream
std::uint64_t derive_seed(std::uint64_t master, std::size_t model_index,
                          std::size_t fold) {
    return master + 10007ULL * static_cast<std::uint64_t>(model_index) +
           101ULL * static_cast<std::uint64_t>(fold);
}

struct MeanStd {
    double mean = 0.0;
    double stddev = 0.0;
};

// mean and sample standard deviation (n-1)
MeanStd mean_std(const std::vector<double>& values) {
    MeanStd ms;
    if (values.empty()) return ms;
    double sum = 0.0;
    for (double v : values) sum += v;
    ms.mean = sum / static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - ms.mean) * (v - ms.mean);
        ms.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return ms;
}

std::vector<std::string> vocabulary_of(const std::vector<EqExample>& examples,
                                       const std::vector<std::size_t>& indices) {
    std::set<std::string> words;
    for (std::size_t i : indices) words.insert(examples[i].descriptor);
    return {words.begin(), words.end()};
}

} // namespace

CvRun run_cv(const ExperimentConfig& cfg) {
    CvRun run;
    run.master_seed = cfg.master_seed;

    DatasetSchema schema = DatasetSchema::from_config(cfg.file_config);
    std::vector<EqExample> all =
        load_dataset(cfg.dataset_path, schema, &run.warnings);
    run.total_examples = all.size();
    const std::string english_tag =
        cfg.file_config.get_string("english.tag", "english");
    run.english = filter_english(all, english_tag);
    if (run.english.empty()) {
        throw ArgumentError("run_cv: no examples left after the language filter");
    }
    {
        std::set<std::string> words;
        for (const auto& ex : run.english) words.insert(ex.descriptor);
        run.unique_words = words.size();
    }

    FoldWordLists lists = fold_words_from_config(cfg.file_config);
    run.plan = build_folds(run.english, lists.hq_words, lists.hr_words,
                           lists.fold_words);

    for (const auto& variant : cfg.embedding_models) {
        if (variant.is_baseline()) {
            throw ArgumentError("embedding model '" + variant.name +
                                "' has no table path");
        }
        run.tables.emplace(variant.name,
                           load_table(variant.embedding_path, {}, &run.warnings));
    }

    std::vector<ModelVariant> variants = cfg.embedding_models;
    if (cfg.include_baseline) {
        variants.push_back(ModelVariant{"no-embedding", {}});
    }
    if (variants.empty()) {
        throw ArgumentError("run_cv: no model variants configured");
    }

    for (std::size_t mi = 0; mi < variants.size(); ++mi) {
        const ModelVariant& variant = variants[mi];
        const EmbeddingTable* table =
            variant.is_baseline() ? nullptr : &run.tables.at(variant.name);

        ModelResult result;
        result.name = variant.name;
        result.is_baseline = variant.is_baseline();

        std::vector<double> fold_norm, fold_db, fold_sum;
        for (std::size_t f = 0; f < 4; ++f) {
            const Fold& fold = run.plan.folds[f];
            if (hash_index_set(fold.test_indices) != run.plan.test_set_hashes[f]) {
                throw StateError("fold " + std::to_string(f + 1) +
                                 " test set drifted from the plan");
            }

            FoldOutcome outcome;
            const std::uint64_t seed = derive_seed(cfg.master_seed, mi, f);

            MlpModel model;
            std::vector<TrainExample> train_set;
            train_set.reserve(fold.train_indices.size());
            if (variant.is_baseline()) {
                model = MlpModel::init_one_hot(
                    vocabulary_of(run.english, fold.train_indices), seed);
                for (std::size_t i : fold.train_indices) {
                    TrainExample ex;
                    ex.input = model.input_for(run.english[i].descriptor, nullptr);
                    ex.target = normalize_curve(run.english[i].curve);
                    train_set.push_back(std::move(ex));
                }
            } else {
                model = MlpModel::init_embedding(table->dimension(), seed);
                // descriptors with no embedding cannot be trained on
                std::unordered_map<std::string, std::optional<EmbeddingVector>> memo;
                for (std::size_t i : fold.train_indices) {
                    const std::string& word = run.english[i].descriptor;
                    auto it = memo.find(word);
                    if (it == memo.end()) {
                        it = memo.emplace(word, embed_descriptor(*table, word)).first;
                    }
                    if (!it->second) {
                        ++outcome.oov_train_skipped;
                        continue;
                    }
                    TrainExample ex;
                    ex.input = *it->second;
                    ex.target = normalize_curve(run.english[i].curve);
                    train_set.push_back(std::move(ex));
                }
            }
            if (train_set.empty()) {
                throw ArgumentError("model '" + variant.name + "' fold " +
                                    std::to_string(f + 1) +
                                    ": no trainable examples");
            }
            outcome.n_train = train_set.size();

            TrainConfig tc = cfg.train;
            tc.seed = seed + 1;
            try {
                result.loss_traces[f] = train(model, train_set, tc).epoch_loss;
            } catch (const Error& e) {
                throw Error("model '" + variant.name + "' fold " +
                            std::to_string(f + 1) + " failed to train: " + e.what());
            }

            double err_sum = 0.0;
            std::size_t n_eval = 0;
            for (std::size_t i : fold.test_indices) {
                const EqExample& ex = run.english[i];
                Prediction pred;
                try {
                    pred = model.predict(ex.descriptor, table);
                } catch (const OovError&) {
                    ++outcome.oov_test_skipped;
                    continue;
                }
                NormalizedTarget target = normalize_curve(ex.curve);
                err_sum += mae_loss(pred.normalized, target.values);
                ++n_eval;
            }
            if (n_eval == 0) {
                throw ArgumentError("model '" + variant.name + "' fold " +
                                    std::to_string(f + 1) +
                                    ": no evaluable test examples");
            }
            outcome.n_test = n_eval;
            outcome.mae_norm = err_sum / static_cast<double>(n_eval);
            outcome.mae_db = outcome.mae_norm * 8.0;
            outcome.mae_sum = outcome.mae_norm * static_cast<double>(kNumBands);

            fold_norm.push_back(outcome.mae_norm);
            fold_db.push_back(outcome.mae_db);
            fold_sum.push_back(outcome.mae_sum);
            result.folds[f] = outcome;
            result.trained[f] = std::move(model);
        }

        MeanStd norm = mean_std(fold_norm);
        MeanStd db = mean_std(fold_db);
        MeanStd sum = mean_std(fold_sum);
        result.mean_norm = norm.mean;
        result.std_norm = norm.stddev;
        result.mean_db = db.mean;
        result.std_db = db.stddev;
        result.mean_sum = sum.mean;
        result.std_sum = sum.stddev;
        run.models.push_back(std::move(result));
    }
    return run;
}

PcmComparison run_pcm_comparison(const CvRun& run) {
    PcmComparison cmp;

    // occurrence counts over the full English dataset
    std::unordered_map<std::string, std::vector<EqExample>> by_word;
    for (const auto& ex : run.english) by_word[ex.descriptor].push_back(ex);

    std::vector<double> human_scores;
    std::vector<std::vector<double>> model_scores(run.models.size());

    for (std::size_t f = 0; f < 4; ++f) {
        const Fold& fold = run.plan.folds[f];
        for (const auto& word : fold.test_words) {
            auto it = by_word.find(word);
            if (it == by_word.end() || it->second.size() < 2) continue;
            const std::vector<EqExample>& word_examples = it->second;

            EqCurve ground_truth = mean_human_label(word_examples);
            Curve2D reference = curve_from_eq(ground_truth);

            EqCurve human = select_human_label(word_examples);
            human_scores.push_back(
                pcm_distance(reference, curve_from_eq(human)));

            for (std::size_t mi = 0; mi < run.models.size(); ++mi) {
                const ModelResult& mr = run.models[mi];
                const EmbeddingTable* table =
                    mr.is_baseline ? nullptr : &run.tables.at(mr.name);
                Prediction pred;
                try {
                    pred = mr.trained[f].predict(word, table);
                } catch (const OovError&) {
                    continue;
                }
                EqCurve curve;
                curve.band_centers_hz = ground_truth.band_centers_hz;
                curve.gains_db = pred.gains_db;
                model_scores[mi].push_back(
                    pcm_distance(reference, curve_from_eq(curve)));
            }
            ++cmp.qualifying_words;
        }
    }

    if (cmp.qualifying_words == 0) {
        throw ArgumentError("run_pcm_comparison: no word occurs at least twice");
    }

    MeanStd human = mean_std(human_scores);
    cmp.human = PcmStats{human.mean, human.stddev, human_scores.size()};
    for (std::size_t mi = 0; mi < run.models.size(); ++mi) {
        MeanStd ms = mean_std(model_scores[mi]);
        cmp.models.emplace_back(
            run.models[mi].name,
            PcmStats{ms.mean, ms.stddev, model_scores[mi].size()});
    }
    return cmp;
}

void export_word_plots(const CvRun& run, const std::vector<std::string>& words,
                       const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);

    std::unordered_map<std::string, std::vector<EqExample>> by_word;
    for (const auto& ex : run.english) by_word[ex.descriptor].push_back(ex);

    for (const auto& raw : words) {
        const std::string word = to_lower_ascii(trim(raw));
        // the earliest fold that tests this word supplies the models
        std::optional<std::size_t> fold_index;
        for (std::size_t f = 0; f < 4 && !fold_index; ++f) {
            const auto& tw = run.plan.folds[f].test_words;
            if (std::find(tw.begin(), tw.end(), word) != tw.end()) fold_index = f;
        }
        if (!fold_index) {
            throw ArgumentError("word '" + word + "' is not in any test fold");
        }
        auto it = by_word.find(word);
        if (it == by_word.end()) {
            throw ArgumentError("word '" + word + "' has no dataset examples");
        }
        EqCurve human = select_human_label(it->second);

        std::vector<Prediction> preds;
        std::vector<std::string> names;
        for (const auto& mr : run.models) {
            const EmbeddingTable* table =
                mr.is_baseline ? nullptr : &run.tables.at(mr.name);
            preds.push_back(mr.trained[*fold_index].predict(word, table));
            names.push_back(mr.name);
        }

        std::ostringstream tsv;
        tsv << "band_center_hz\thuman_db";
        for (const auto& n : names) tsv << '\t' << n << "_db";
        tsv << "\n";
        for (std::size_t b = 0; b < kNumBands; ++b) {
            tsv << format_double(human.band_centers_hz[b]) << '\t'
                << format_double(human.gains_db[b]);
            for (const auto& p : preds) tsv << '\t' << format_double(p.gains_db[b]);
            tsv << "\n";
        }
        atomic_write_file(out_dir / (word + ".tsv"), tsv.str());
    }
}

std::string summary_json(const CvRun& run, const PcmComparison* pcm) {
    nlohmann::json j;
    j["master_seed"] = run.master_seed;
    j["dataset"]["total_examples"] = run.total_examples;
    j["dataset"]["english_examples"] = run.english.size();
    j["dataset"]["unique_english_words"] = run.unique_words;

    nlohmann::json folds = nlohmann::json::array();
    for (std::size_t f = 0; f < 4; ++f) {
        const Fold& fold = run.plan.folds[f];
        nlohmann::json jf;
        jf["index"] = f + 1;
        jf["test_words"] = fold.test_words.size();
        jf["hq_words"] = fold.hq_words.size();
        jf["hr_words"] = fold.hr_words.size();
        jf["train_examples"] = fold.train_indices.size();
        jf["test_examples"] = fold.test_indices.size();
        jf["test_set_hash"] = run.plan.test_set_hashes[f];
        folds.push_back(jf);
    }
    j["folds"] = folds;

    nlohmann::json models = nlohmann::json::array();
    for (const auto& mr : run.models) {
        nlohmann::json jm;
        jm["name"] = mr.name;
        jm["baseline"] = mr.is_baseline;
        nlohmann::json per_fold = nlohmann::json::array();
        for (const auto& fo : mr.folds) {
            nlohmann::json jf;
            jf["mae_norm"] = fo.mae_norm;
            jf["mae_db"] = fo.mae_db;
            jf["mae_sum"] = fo.mae_sum;
            jf["n_train"] = fo.n_train;
            jf["n_test"] = fo.n_test;
            jf["oov_train_skipped"] = fo.oov_train_skipped;
            jf["oov_test_skipped"] = fo.oov_test_skipped;
            per_fold.push_back(jf);
        }
        jm["folds"] = per_fold;
        jm["mean_mae_norm"] = mr.mean_norm;
        jm["std_mae_norm"] = mr.std_norm;
        jm["mean_mae_db"] = mr.mean_db;
        jm["std_mae_db"] = mr.std_db;
        jm["mean_mae_sum"] = mr.mean_sum;
        jm["std_mae_sum"] = mr.std_sum;
        models.push_back(jm);
    }
    j["models"] = models;

    if (pcm) {
        nlohmann::json jp;
        jp["qualifying_words"] = pcm->qualifying_words;
        jp["human"] = {{"mean", pcm->human.mean},
                       {"stddev", pcm->human.stddev},
                       {"count", pcm->human.count}};
        nlohmann::json jm = nlohmann::json::array();
        for (const auto& [name, stats] : pcm->models) {
            jm.push_back({{"name", name},
                          {"mean", stats.mean},
                          {"stddev", stats.stddev},
                          {"count", stats.count}});
        }
        jp["models"] = jm;
        j["pcm"] = jp;
    }

    j["warnings"] = run.warnings.size();
    return j.dump(2) + "\n";
}

std::string results_tsv(const CvRun& run) {
    std::ostringstream out;
    out << "model\tfold\tmae_norm\tmae_db\tmae_sum\tn_train\tn_test\n";
    for (const auto& mr : run.models) {
        for (std::size_t f = 0; f < 4; ++f) {
            const FoldOutcome& fo = mr.folds[f];
            out << mr.name << '\t' << (f + 1) << '\t' << format_double(fo.mae_norm)
                << '\t' << format_double(fo.mae_db) << '\t'
                << format_double(fo.mae_sum) << '\t' << fo.n_train << '\t'
                << fo.n_test << "\n";
        }
        out << mr.name << "\tmean±std\t" << format_double(mr.mean_norm) << "±"
            << format_double(mr.std_norm) << '\t' << format_double(mr.mean_db)
            << "±" << format_double(mr.std_db) << '\t'
            << format_double(mr.mean_sum) << "±" << format_double(mr.std_sum)
            << "\t\t\n";
    }
    return out.str();
}

std::string pcm_tsv(const PcmComparison& pcm) {
    std::ostringstream out;
    out << "model\tpcm_mean\tpcm_std\tcount\n";
    out << "human\t" << format_double(pcm.human.mean) << '\t'
        << format_double(pcm.human.stddev) << '\t' << pcm.human.count << "\n";
    for (const auto& [name, stats] : pcm.models) {
        out << name << '\t' << format_double(stats.mean) << '\t'
            << format_double(stats.stddev) << '\t' << stats.count << "\n";
    }
    return out.str();
}

} // namespace semeq
