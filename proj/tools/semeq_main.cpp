// semeq: learn word -> 40-band EQ mappings from crowd-sourced data,
// evaluate them, and render predicted curves onto audio.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "semeq/dataset.hpp"
#include "semeq/embedding.hpp"
#include "semeq/eq_render.hpp"
#include "semeq/errors.hpp"
#include "semeq/experiment.hpp"
#include "semeq/metrics.hpp"
#include "semeq/mlp.hpp"
#include "semeq/synth.hpp"
#include "semeq/util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

struct CliOptions {
    // shared
    std::string dataset;
    std::string config;
    std::string out;
    std::uint64_t seed = 1;

    // train/evaluate hyperparameters
    double lr = 1e-3;
    std::size_t batch = 32;
    std::size_t epochs = 500;
    double dropout = 0.1;
    long patience = 50;
    std::string optimizer = "adam";

    // train
    std::size_t fold = 1;
    std::string embedding; // path or "none"

    // predict / render
    std::string model;
    std::string word;
    std::string curve_file;
    std::string in_wav;
    std::string out_wav;
    std::size_t taps = semeq::kDefaultNumTaps;
    std::string wav_format = "float32";

    // evaluate
    std::vector<std::string> embeddings; // NAME=PATH
    bool no_baseline = false;

    // plot
    std::string run_dir;
    std::string words_csv;

    // synth-data
    std::string folds_file;
    std::size_t clusters = 8;
    std::size_t examples_per_word = 3;
    std::size_t fillers = 5;
};

semeq::TrainConfig make_train_config(const CliOptions& opt) {
    semeq::TrainConfig tc;
    tc.learning_rate = opt.lr;
    tc.batch_size = opt.batch;
    tc.max_epochs = opt.epochs;
    tc.dropout_rate = opt.dropout;
    tc.seed = opt.seed;
    tc.optimizer = opt.optimizer == "sgd" ? semeq::Optimizer::Sgd
                                          : semeq::Optimizer::Adam;
    if (opt.patience < 0) {
        tc.early_stop_patience = std::nullopt;
    } else {
        tc.early_stop_patience = static_cast<std::size_t>(opt.patience);
    }
    return tc;
}

void add_train_flags(CLI::App* cmd, CliOptions& opt) {
    cmd->add_option("--lr", opt.lr, "learning rate");
    cmd->add_option("--batch", opt.batch, "mini-batch size");
    cmd->add_option("--epochs", opt.epochs, "maximum training epochs");
    cmd->add_option("--dropout", opt.dropout, "hidden dropout rate");
    cmd->add_option("--patience", opt.patience,
                    "early-stop patience in epochs (negative disables)");
    cmd->add_option("--optimizer", opt.optimizer, "adam or sgd")
        ->check(CLI::IsMember({"adam", "sgd"}));
}

json train_config_json(const semeq::TrainConfig& tc) {
    json j;
    j["learning_rate"] = tc.learning_rate;
    j["batch_size"] = tc.batch_size;
    j["max_epochs"] = tc.max_epochs;
    j["dropout_rate"] = tc.dropout_rate;
    j["optimizer"] = tc.optimizer == semeq::Optimizer::Sgd ? "sgd" : "adam";
    if (tc.early_stop_patience) {
        j["early_stop_patience"] = *tc.early_stop_patience;
    } else {
        j["early_stop_patience"] = nullptr;
    }
    return j;
}

void write_manifest(const fs::path& path, json manifest) {
    manifest["version"] = kVersion;
    semeq::atomic_write_file(path, manifest.dump(2) + "\n");
}

std::string loss_trace_tsv(const std::vector<double>& trace) {
    std::ostringstream out;
    out << "epoch\tloss\n";
    for (std::size_t i = 0; i < trace.size(); ++i) {
        out << (i + 1) << '\t' << semeq::format_double(trace[i]) << "\n";
    }
    return out.str();
}

semeq::EqCurve curve_from_file(const fs::path& path) {
    std::string text = semeq::read_text_file(path);
    std::vector<std::pair<double, double>> points;
    std::size_t line_no = 0;
    for (const auto& raw : semeq::split(text, '\n')) {
        ++line_no;
        std::string line = semeq::trim(raw);
        if (line.empty() || line[0] == '#') continue;
        std::vector<std::string> fields = semeq::split_list(line, ' ');
        if (fields.size() == 1) fields = semeq::split_list(line, '\t');
        if (fields.size() != 2) {
            throw semeq::ParseError("curve file line " + std::to_string(line_no) +
                                    ": expected 'frequency_hz gain_db'");
        }
        double f = 0.0, g = 0.0;
        if (!semeq::parse_double(fields[0], f) || !semeq::parse_double(fields[1], g)) {
            throw semeq::ParseError("curve file line " + std::to_string(line_no) +
                                    ": non-numeric field");
        }
        points.emplace_back(f, g);
    }
    if (points.size() != semeq::kNumBands) {
        throw semeq::FormatError("curve file must hold exactly 40 rows, got " +
                                 std::to_string(points.size()));
    }
    semeq::EqCurve curve;
    for (std::size_t i = 0; i < semeq::kNumBands; ++i) {
        if (i > 0 && points[i].first <= points[i - 1].first) {
            throw semeq::FormatError("curve file frequencies must be strictly increasing");
        }
        curve.band_centers_hz[i] = points[i].first;
        curve.gains_db[i] = std::clamp(points[i].second, semeq::kMinGainDb,
                                       semeq::kMaxGainDb);
    }
    return curve;
}

std::array<double, semeq::kNumBands> band_centers_for(const CliOptions& opt) {
    if (!opt.config.empty()) {
        semeq::Config cfg = semeq::Config::load(opt.config);
        return semeq::DatasetSchema::from_config(cfg).band_centers_hz;
    }
    return semeq::default_band_centers();
}

int cmd_prepare(const CliOptions& opt, const std::vector<std::string>& argv) {
    fs::create_directories(opt.out);
    semeq::Config cfg = semeq::Config::load(opt.config);
    semeq::DatasetSchema schema = semeq::DatasetSchema::from_config(cfg);
    std::vector<std::string> warnings;
    std::vector<semeq::EqExample> all =
        semeq::load_dataset(opt.dataset, schema, &warnings);
    std::vector<semeq::EqExample> english =
        semeq::filter_english(all, cfg.get_string("english.tag", "english"));
    if (english.empty()) {
        throw semeq::SchemaError("no examples left after the language filter");
    }
    std::set<std::string> unique_words;
    for (const auto& ex : english) unique_words.insert(ex.descriptor);

    semeq::FoldWordLists lists = semeq::fold_words_from_config(cfg);
    semeq::FoldPlan plan = semeq::build_folds(english, lists.hq_words,
                                              lists.hr_words, lists.fold_words);

    json summary;
    summary["total_examples"] = all.size();
    summary["english_examples"] = english.size();
    summary["unique_english_words"] = unique_words.size();
    summary["distinct_hq_words"] = plan.all_hq_words.size();
    summary["distinct_hr_words"] = plan.all_hr_words.size();
    json folds = json::array();
    for (std::size_t f = 0; f < 4; ++f) {
        const semeq::Fold& fold = plan.folds[f];
        json jf;
        jf["index"] = f + 1;
        jf["test_words"] = fold.test_words.size();
        jf["hq_words"] = fold.hq_words.size();
        jf["hr_words"] = fold.hr_words.size();
        jf["train_examples"] = fold.train_indices.size();
        jf["test_examples"] = fold.test_indices.size();
        jf["test_set_hash"] = plan.test_set_hashes[f];
        folds.push_back(jf);
    }
    summary["folds"] = folds;
    summary["warnings"] = warnings;
    semeq::atomic_write_file(fs::path(opt.out) / "fold_summary.json",
                             summary.dump(2) + "\n");

    std::ostringstream tsv;
    tsv << "fold\tword\tkind\n";
    for (std::size_t f = 0; f < 4; ++f) {
        for (const auto& w : plan.folds[f].test_words) {
            tsv << (f + 1) << '\t' << w << '\t'
                << (plan.folds[f].hq_words.count(w) ? "hq" : "hr") << "\n";
        }
    }
    semeq::atomic_write_file(fs::path(opt.out) / "fold_words.tsv", tsv.str());

    json manifest;
    manifest["command"] = "prepare";
    manifest["argv"] = argv;
    manifest["dataset"] = opt.dataset;
    manifest["config"] = opt.config;
    manifest["outputs"] = {"fold_summary.json", "fold_words.tsv"};
    write_manifest(fs::path(opt.out) / "run_manifest.json", manifest);

    std::cout << "english examples: " << english.size()
              << ", unique words: " << unique_words.size() << "\n";
    for (std::size_t f = 0; f < 4; ++f) {
        std::cout << "fold " << (f + 1) << ": "
                  << plan.folds[f].test_indices.size() << " test examples, "
                  << plan.folds[f].train_indices.size() << " train examples\n";
    }
    return 0;
}

int cmd_synth_data(const CliOptions& opt, const std::vector<std::string>& argv) {
    semeq::SynthSpec spec;
    spec.seed = opt.seed;
    spec.clusters = opt.clusters;
    spec.examples_per_word = opt.examples_per_word;
    spec.train_only_words_per_cluster = opt.fillers;
    if (!opt.folds_file.empty()) {
        semeq::Config fold_cfg = semeq::Config::load(opt.folds_file);
        spec.planted_folds = semeq::fold_words_from_config(fold_cfg);
    }
    semeq::SynthOutput out = semeq::generate_synthetic(spec);
    semeq::SynthPaths paths = semeq::write_synthetic_files(out, opt.out);

    json manifest;
    manifest["command"] = "synth-data";
    manifest["argv"] = argv;
    manifest["seed"] = opt.seed;
    manifest["clusters"] = opt.clusters;
    manifest["examples_per_word"] = opt.examples_per_word;
    manifest["examples"] = out.examples.size();
    manifest["words"] = out.embeddings.size();
    manifest["outputs"] = {paths.dataset.filename().string(),
                           paths.embeddings.filename().string(),
                           paths.config.filename().string()};
    write_manifest(fs::path(opt.out) / "run_manifest.json", manifest);

    std::cout << "wrote " << out.examples.size() << " examples for "
              << out.embeddings.size() << " words to " << opt.out << "\n";
    return 0;
}

int cmd_train(const CliOptions& opt, const std::vector<std::string>& argv) {
    if (opt.fold < 1 || opt.fold > 4) {
        throw semeq::ArgumentError("--fold must be 1..4");
    }
    semeq::Config cfg = semeq::Config::load(opt.config);
    semeq::DatasetSchema schema = semeq::DatasetSchema::from_config(cfg);
    std::vector<std::string> warnings;
    std::vector<semeq::EqExample> english = semeq::filter_english(
        semeq::load_dataset(opt.dataset, schema, &warnings),
        cfg.get_string("english.tag", "english"));
    semeq::FoldWordLists lists = semeq::fold_words_from_config(cfg);
    semeq::FoldPlan plan = semeq::build_folds(english, lists.hq_words,
                                              lists.hr_words, lists.fold_words);
    const semeq::Fold& fold = plan.folds[opt.fold - 1];

    const bool baseline = opt.embedding.empty() || opt.embedding == "none";
    std::optional<semeq::EmbeddingTable> table;
    if (!baseline) {
        table = semeq::load_table(opt.embedding, {}, &warnings);
    }

    semeq::MlpModel model;
    std::vector<semeq::TrainExample> train_set;
    std::size_t skipped = 0;
    if (baseline) {
        std::set<std::string> vocab;
        for (std::size_t i : fold.train_indices) vocab.insert(english[i].descriptor);
        model = semeq::MlpModel::init_one_hot(
            std::vector<std::string>(vocab.begin(), vocab.end()), opt.seed);
        for (std::size_t i : fold.train_indices) {
            train_set.push_back({model.input_for(english[i].descriptor, nullptr),
                                 semeq::normalize_curve(english[i].curve)});
        }
    } else {
        model = semeq::MlpModel::init_embedding(table->dimension(), opt.seed);
        for (std::size_t i : fold.train_indices) {
            auto vec = semeq::embed_descriptor(*table, english[i].descriptor);
            if (!vec) {
                ++skipped;
                continue;
            }
            train_set.push_back({*vec, semeq::normalize_curve(english[i].curve)});
        }
    }
    if (train_set.empty()) {
        throw semeq::ArgumentError("no trainable examples in fold " +
                                   std::to_string(opt.fold));
    }

    semeq::TrainConfig tc = make_train_config(opt);
    tc.seed = opt.seed + 1;
    semeq::TrainResult result = semeq::train(model, train_set, tc);
    model.save(opt.out);
    semeq::atomic_write_file(opt.out + ".loss.tsv",
                             loss_trace_tsv(result.epoch_loss));

    json manifest;
    manifest["command"] = "train";
    manifest["argv"] = argv;
    manifest["dataset"] = opt.dataset;
    manifest["config"] = opt.config;
    manifest["fold"] = opt.fold;
    manifest["embedding"] = baseline ? "none" : opt.embedding;
    manifest["seed"] = opt.seed;
    manifest["train"] = train_config_json(tc);
    manifest["epochs_run"] = result.epochs_run;
    manifest["final_loss"] = result.epoch_loss.back();
    manifest["train_examples"] = train_set.size();
    manifest["oov_skipped"] = skipped;
    manifest["outputs"] = {opt.out, opt.out + ".loss.tsv"};
    write_manifest(opt.out + ".manifest.json", manifest);

    std::cout << "trained fold " << opt.fold << " on " << train_set.size()
              << " examples, " << result.epochs_run
              << " epochs, final loss "
              << semeq::format_double(result.epoch_loss.back()) << "\n";
    return 0;
}

int cmd_predict(const CliOptions& opt, const std::vector<std::string>& argv) {
    semeq::MlpModel model = semeq::MlpModel::load(opt.model);
    std::optional<semeq::EmbeddingTable> table;
    if (model.mode() == semeq::InputMode::Embedding) {
        if (opt.embedding.empty()) {
            throw semeq::ArgumentError(
                "model is in embedding mode; pass --embedding PATH");
        }
        table = semeq::load_table(opt.embedding);
    }
    semeq::Prediction pred =
        model.predict(opt.word, table ? &*table : nullptr);
    std::array<double, semeq::kNumBands> centers = band_centers_for(opt);

    std::ostringstream lines;
    for (std::size_t b = 0; b < semeq::kNumBands; ++b) {
        lines << semeq::format_double(centers[b]) << ' '
              << semeq::format_double(pred.gains_db[b]) << "\n";
    }
    std::cout << lines.str();
    if (!opt.out.empty()) {
        semeq::atomic_write_file(opt.out, lines.str());
        json manifest;
        manifest["command"] = "predict";
        manifest["argv"] = argv;
        manifest["model"] = opt.model;
        manifest["word"] = opt.word;
        manifest["embedding"] = opt.embedding;
        manifest["outputs"] = {opt.out};
        write_manifest(opt.out + ".manifest.json", manifest);
    }
    return 0;
}

int cmd_render(const CliOptions& opt, const std::vector<std::string>& argv) {
    semeq::EqCurve curve;
    if (!opt.curve_file.empty()) {
        curve = curve_from_file(opt.curve_file);
    } else if (!opt.model.empty() && !opt.word.empty()) {
        semeq::MlpModel model = semeq::MlpModel::load(opt.model);
        std::optional<semeq::EmbeddingTable> table;
        if (model.mode() == semeq::InputMode::Embedding) {
            if (opt.embedding.empty()) {
                throw semeq::ArgumentError(
                    "model is in embedding mode; pass --embedding PATH");
            }
            table = semeq::load_table(opt.embedding);
        }
        semeq::Prediction pred =
            model.predict(opt.word, table ? &*table : nullptr);
        curve.band_centers_hz = band_centers_for(opt);
        curve.gains_db = pred.gains_db;
    } else {
        throw semeq::ArgumentError("render needs --curve FILE or --model and --word");
    }

    semeq::AudioBuffer in = semeq::read_wav(opt.in_wav);
    semeq::ApplyReport report;
    std::vector<std::string> warnings;
    semeq::AudioBuffer out =
        semeq::apply_eq(in, curve, opt.taps, &report, &warnings);
    semeq::write_wav(out, opt.out_wav,
                     opt.wav_format == "pcm16" ? semeq::WavFormat::Pcm16
                                               : semeq::WavFormat::Float32);

    json manifest;
    manifest["command"] = "render";
    manifest["argv"] = argv;
    manifest["input"] = opt.in_wav;
    manifest["output"] = opt.out_wav;
    manifest["taps"] = opt.taps;
    manifest["format"] = opt.wav_format;
    manifest["peak"] = report.peak;
    manifest["clipped_samples"] = report.clipped_samples;
    manifest["warnings"] = warnings;
    write_manifest(opt.out_wav + ".manifest.json", manifest);

    if (report.clipped_samples > 0) {
        std::cerr << "warning: " << report.clipped_samples
                  << " samples exceed full scale (peak "
                  << semeq::format_double(report.peak) << ")\n";
    }
    std::cout << "rendered " << out.frame_count() << " frames to "
              << opt.out_wav << "\n";
    return 0;
}

std::vector<semeq::ModelVariant> parse_embedding_specs(
    const std::vector<std::string>& specs) {
    std::vector<semeq::ModelVariant> models;
    for (const auto& spec : specs) {
        auto eq = spec.find('=');
        semeq::ModelVariant v;
        if (eq == std::string::npos) {
            v.embedding_path = spec;
            v.name = fs::path(spec).stem().string();
        } else {
            v.name = spec.substr(0, eq);
            v.embedding_path = spec.substr(eq + 1);
        }
        if (v.name.empty() || v.embedding_path.empty()) {
            throw semeq::ArgumentError("bad --embedding spec: " + spec);
        }
        models.push_back(std::move(v));
    }
    return models;
}

int cmd_evaluate(const CliOptions& opt, const std::vector<std::string>& argv) {
    fs::create_directories(opt.out);

    semeq::ExperimentConfig cfg;
    cfg.dataset_path = opt.dataset;
    cfg.file_config = semeq::Config::load(opt.config);
    cfg.embedding_models = parse_embedding_specs(opt.embeddings);
    cfg.include_baseline = !opt.no_baseline;
    cfg.train = make_train_config(opt);
    cfg.master_seed = opt.seed;

    semeq::CvRun run = semeq::run_cv(cfg);
    semeq::PcmComparison pcm = semeq::run_pcm_comparison(run);

    semeq::atomic_write_file(fs::path(opt.out) / "summary.json",
                             semeq::summary_json(run, &pcm));
    semeq::atomic_write_file(fs::path(opt.out) / "results.tsv",
                             semeq::results_tsv(run));
    semeq::atomic_write_file(fs::path(opt.out) / "pcm.tsv", semeq::pcm_tsv(pcm));

    fs::create_directories(fs::path(opt.out) / "models");
    json model_files = json::array();
    for (const auto& mr : run.models) {
        for (std::size_t f = 0; f < 4; ++f) {
            std::string name = mr.name + "_fold" + std::to_string(f + 1);
            fs::path model_path = fs::path(opt.out) / "models" / (name + ".model");
            mr.trained[f].save(model_path);
            semeq::atomic_write_file(
                fs::path(opt.out) / "models" / (name + ".loss.tsv"),
                loss_trace_tsv(mr.loss_traces[f]));
            model_files.push_back("models/" + name + ".model");
        }
    }

    json manifest;
    manifest["command"] = "evaluate";
    manifest["argv"] = argv;
    manifest["dataset"] = opt.dataset;
    manifest["config"] = opt.config;
    json emb = json::object();
    for (const auto& v : cfg.embedding_models) {
        emb[v.name] = v.embedding_path.string();
    }
    manifest["embeddings"] = emb;
    manifest["include_baseline"] = cfg.include_baseline;
    manifest["master_seed"] = cfg.master_seed;
    manifest["train"] = train_config_json(cfg.train);
    manifest["outputs"] = {"summary.json", "results.tsv", "pcm.tsv"};
    manifest["model_files"] = model_files;
    write_manifest(fs::path(opt.out) / "run_manifest.json", manifest);

    std::cout << semeq::results_tsv(run) << "\n" << semeq::pcm_tsv(pcm);
    return 0;
}

int cmd_plot(const CliOptions& opt) {
    fs::path run_dir(opt.run_dir);
    json manifest = json::parse(
        semeq::read_text_file(run_dir / "run_manifest.json"));
    if (manifest.value("command", "") != "evaluate") {
        throw semeq::FormatError("--run must point at an evaluate output directory");
    }

    semeq::ExperimentConfig cfg;
    cfg.dataset_path = manifest.at("dataset").get<std::string>();
    cfg.file_config = semeq::Config::load(manifest.at("config").get<std::string>());

    semeq::CvRun run;
    run.master_seed = manifest.value("master_seed", 0ULL);
    semeq::DatasetSchema schema = semeq::DatasetSchema::from_config(cfg.file_config);
    run.english = semeq::filter_english(
        semeq::load_dataset(cfg.dataset_path, schema, &run.warnings),
        cfg.file_config.get_string("english.tag", "english"));
    semeq::FoldWordLists lists = semeq::fold_words_from_config(cfg.file_config);
    run.plan = semeq::build_folds(run.english, lists.hq_words, lists.hr_words,
                                  lists.fold_words);

    for (const auto& [name, path] :
         manifest.at("embeddings").items()) {
        run.tables.emplace(name, semeq::load_table(path.get<std::string>(), {},
                                                   &run.warnings));
        semeq::ModelResult mr;
        mr.name = name;
        mr.is_baseline = false;
        for (std::size_t f = 0; f < 4; ++f) {
            mr.trained[f] = semeq::MlpModel::load(
                run_dir / "models" / (name + "_fold" + std::to_string(f + 1) + ".model"));
        }
        run.models.push_back(std::move(mr));
    }
    if (manifest.value("include_baseline", true)) {
        semeq::ModelResult mr;
        mr.name = "no-embedding";
        mr.is_baseline = true;
        for (std::size_t f = 0; f < 4; ++f) {
            mr.trained[f] = semeq::MlpModel::load(
                run_dir / "models" /
                ("no-embedding_fold" + std::to_string(f + 1) + ".model"));
        }
        run.models.push_back(std::move(mr));
    }

    std::vector<std::string> words = semeq::split_list(opt.words_csv);
    if (words.empty()) throw semeq::ArgumentError("--words is empty");
    fs::path out_dir = opt.out.empty() ? run_dir / "plots" : fs::path(opt.out);
    semeq::export_word_plots(run, words, out_dir);
    std::cout << "wrote " << words.size() << " plot files to " << out_dir.string()
              << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"semantic descriptor to 40-band EQ toolkit"};
    app.require_subcommand(1);
    CliOptions opt;

    CLI::App* prepare = app.add_subcommand(
        "prepare", "load a dataset, filter to English, build the four folds");
    prepare->add_option("--dataset", opt.dataset, "delimited dataset export")
        ->required();
    prepare->add_option("--config", opt.config, "config with columns and fold words")
        ->required();
    prepare->add_option("--out", opt.out, "output directory")->required();

    CLI::App* synth = app.add_subcommand(
        "synth-data", "generate a synthetic clustered dataset and embeddings");
    synth->add_option("--out", opt.out, "output directory")->required();
    synth->add_option("--seed", opt.seed, "generator seed");
    synth->add_option("--folds", opt.folds_file,
                      "config whose fold word lists should be planted");
    synth->add_option("--clusters", opt.clusters, "number of concept clusters");
    synth->add_option("--examples-per-word", opt.examples_per_word,
                      "examples generated per word");
    synth->add_option("--fillers", opt.fillers,
                      "extra train-only words per cluster");

    CLI::App* train_cmd = app.add_subcommand("train", "train one fold/model");
    train_cmd->add_option("--dataset", opt.dataset, "dataset export")->required();
    train_cmd->add_option("--config", opt.config, "config file")->required();
    train_cmd->add_option("--fold", opt.fold, "fold to hold out (1-4)")->required();
    train_cmd->add_option("--embedding", opt.embedding,
                          "embedding table path, or 'none' for the one-hot baseline")
        ->required();
    train_cmd->add_option("--seed", opt.seed, "training seed");
    train_cmd->add_option("--out", opt.out, "model file to write")->required();
    add_train_flags(train_cmd, opt);

    CLI::App* predict = app.add_subcommand("predict", "predict a 40-band curve");
    predict->add_option("--model", opt.model, "trained model file")->required();
    predict->add_option("--word", opt.word, "semantic descriptor")->required();
    predict->add_option("--embedding", opt.embedding,
                        "embedding table (embedding-mode models)");
    predict->add_option("--config", opt.config, "config for band centers");
    predict->add_option("--out", opt.out, "also write the curve to a file");

    CLI::App* render = app.add_subcommand("render", "apply an EQ curve to a WAV");
    render->add_option("--in", opt.in_wav, "input WAV")->required();
    render->add_option("--out", opt.out_wav, "output WAV")->required();
    render->add_option("--curve", opt.curve_file, "curve file (frequency gain rows)");
    render->add_option("--model", opt.model, "trained model file");
    render->add_option("--word", opt.word, "descriptor to predict");
    render->add_option("--embedding", opt.embedding, "embedding table");
    render->add_option("--config", opt.config, "config for band centers");
    render->add_option("--taps", opt.taps, "FIR length (odd)");
    render->add_option("--format", opt.wav_format, "pcm16 or float32")
        ->check(CLI::IsMember({"pcm16", "float32"}));

    CLI::App* evaluate = app.add_subcommand(
        "evaluate", "cross-validate all model variants and report errors");
    evaluate->add_option("--dataset", opt.dataset, "dataset export")->required();
    evaluate->add_option("--config", opt.config, "config file")->required();
    evaluate->add_option("--out", opt.out, "output directory")->required();
    evaluate->add_option("--embedding", opt.embeddings,
                         "embedding table as NAME=PATH (repeatable)");
    evaluate->add_flag("--no-baseline", opt.no_baseline,
                       "skip the one-hot baseline");
    evaluate->add_option("--seed", opt.seed, "master seed");
    add_train_flags(evaluate, opt);

    CLI::App* plot = app.add_subcommand(
        "plot", "export per-word curve files from an evaluate run");
    plot->add_option("--run", opt.run_dir, "evaluate output directory")->required();
    plot->add_option("--words", opt.words_csv, "comma-separated words")->required();
    plot->add_option("--out", opt.out, "output directory (default RUN/plots)");

    std::vector<std::string> argv_echo(argv, argv + argc);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (prepare->parsed()) return cmd_prepare(opt, argv_echo);
        if (synth->parsed()) return cmd_synth_data(opt, argv_echo);
        if (train_cmd->parsed()) return cmd_train(opt, argv_echo);
        if (predict->parsed()) return cmd_predict(opt, argv_echo);
        if (render->parsed()) return cmd_render(opt, argv_echo);
        if (evaluate->parsed()) return cmd_evaluate(opt, argv_echo);
        if (plot->parsed()) return cmd_plot(opt);
    } catch (const semeq::DivergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const semeq::NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const semeq::StateError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const semeq::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 1;
}
