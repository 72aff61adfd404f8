#include <doctest.h>

#include <cmath>
#include <sstream>

#include "semeq/config.hpp"
#include "semeq/dataset.hpp"
#include "semeq/errors.hpp"
#include "semeq/rng.hpp"
#include "semeq/util.hpp"
#include "test_helpers.hpp"

using namespace semeq;

namespace {

std::string csv_header() {
    std::ostringstream out;
    out << "descriptor,language,audio_id,consistency";
    for (std::size_t b = 0; b < kNumBands; ++b) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), ",band_%02zu", b);
        out << buf;
    }
    return out.str();
}

std::string csv_row(const std::string& word, const std::string& lang,
                    const std::string& audio, double consistency,
                    const std::array<double, kNumBands>& gains) {
    std::ostringstream out;
    out << word << ',' << lang << ',' << audio << ','
        << format_double(consistency);
    for (double g : gains) out << ',' << format_double(g);
    return out.str();
}

std::array<double, kNumBands> constant_gains(double v) {
    std::array<double, kNumBands> g{};
    g.fill(v);
    return g;
}

EqCurve make_curve(const std::array<double, kNumBands>& gains) {
    EqCurve c;
    c.gains_db = gains;
    c.band_centers_hz = default_band_centers();
    return c;
}

} // namespace

TEST_CASE("load_dataset parses rows verbatim") {
    testhelp::TempDir dir;
    auto path = dir.file("data.csv");
    auto g1 = constant_gains(1.25);
    auto g2 = constant_gains(-0.5);
    g2[7] = 3.75;
    testhelp::write_file(path, csv_header() + "\n" +
                                   csv_row("Warm", "English", "a1", 0.91, g1) + "\n" +
                                   csv_row("muddy", "english", "a2", 0.42, g2) + "\n");
    auto rows = load_dataset(path, DatasetSchema{});
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].descriptor == "warm"); // lowercased
    CHECK(rows[0].language == "English");
    CHECK(rows[0].audio_id == "a1");
    CHECK(rows[0].consistency == 0.91);
    CHECK(rows[0].curve.gains_db == g1);
    CHECK(rows[1].curve.gains_db[7] == 3.75);
}

TEST_CASE("load_dataset clamps out-of-range gains with a warning") {
    testhelp::TempDir dir;
    auto path = dir.file("data.csv");
    auto g = constant_gains(0.0);
    g[3] = 7.3;
    g[4] = -9.0;
    testhelp::write_file(path, csv_header() + "\n" + csv_row("warm", "english", "a1", 0.8, g) + "\n");
    std::vector<std::string> warnings;
    auto rows = load_dataset(path, DatasetSchema{}, &warnings);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].curve.gains_db[3] == 4.0);
    CHECK(rows[0].curve.gains_db[4] == -4.0);
    CHECK(warnings.size() == 2);
    CHECK(warnings[0].find("clamp") != std::string::npos);
}

TEST_CASE("load_dataset rejects unparseable rows with their row number") {
    testhelp::TempDir dir;
    auto path = dir.file("data.csv");
    auto g = constant_gains(0.0);
    std::string bad = csv_row("bad", "english", "a1", 0.8, g);
    bad.replace(bad.rfind(",0") + 1, 1, "x"); // corrupt the last gain
    testhelp::write_file(path, csv_header() + "\n" +
                                   csv_row("ok", "english", "a1", 0.8, g) + "\n" +
                                   bad + "\n");
    std::vector<std::string> warnings;
    auto rows = load_dataset(path, DatasetSchema{}, &warnings);
    CHECK(rows.size() == 1);
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("row 3") != std::string::npos);
}

TEST_CASE("load_dataset schema errors") {
    testhelp::TempDir dir;
    auto path = dir.file("data.csv");
    testhelp::write_file(path, "descriptor,language\nwarm,english\n");
    CHECK_THROWS_AS(load_dataset(path, DatasetSchema{}), SchemaError);

    DatasetSchema short_gains;
    short_gains.gain_cols = {"g1", "g2"};
    CHECK_THROWS_AS(load_dataset(path, short_gains), SchemaError);

    testhelp::write_file(path, "");
    CHECK_THROWS_AS(load_dataset(path, DatasetSchema{}), SchemaError);
}

TEST_CASE("normalized gain units convert back to dB at load") {
    testhelp::TempDir dir;
    auto path = dir.file("data.csv");
    auto g = constant_gains(0.5); // normalized midpoint
    g[0] = 1.0;
    g[1] = 0.0;
    testhelp::write_file(path, csv_header() + "\n" + csv_row("warm", "english", "a1", 0.8, g) + "\n");
    DatasetSchema schema;
    schema.gain_units = "normalized";
    auto rows = load_dataset(path, schema);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].curve.gains_db[0] == 4.0);
    CHECK(rows[0].curve.gains_db[1] == -4.0);
    CHECK(rows[0].curve.gains_db[2] == 0.0);
}

TEST_CASE("filter_english keeps order and matches case-insensitively") {
    std::vector<EqExample> rows(4);
    rows[0].descriptor = "a";
    rows[0].language = "English";
    rows[1].descriptor = "b";
    rows[1].language = "spanish";
    rows[2].descriptor = "c";
    rows[2].language = "ENGLISH";
    rows[3].descriptor = "d";
    rows[3].language = "german";
    auto english = filter_english(rows, "english");
    REQUIRE(english.size() == 2);
    CHECK(english[0].descriptor == "a");
    CHECK(english[1].descriptor == "c");

    CHECK(filter_english({}, "english").empty());
    std::vector<EqExample> none(2);
    none[0].language = "spanish";
    none[1].language = "french";
    CHECK(filter_english(none, "english").empty());
}

TEST_CASE("normalize endpoints are exact") {
    auto curve = make_curve(constant_gains(0.0));
    curve.gains_db[0] = -4.0;
    curve.gains_db[1] = 4.0;
    NormalizedTarget t = normalize_curve(curve);
    CHECK(t.values[0] == 0.0);
    CHECK(t.values[1] == 1.0);
    CHECK(t.values[2] == 0.5);
}

TEST_CASE("denormalize is the exact inverse") {
    NormalizedTarget t;
    t.values.fill(0.5);
    t.values[0] = 1.0;
    t.values[1] = 0.0;
    auto gains = denormalize(t);
    CHECK(gains[0] == 4.0);
    CHECK(gains[1] == -4.0);
    CHECK(gains[2] == 0.0);

    NormalizedTarget bad;
    bad.values.fill(0.5);
    bad.values[5] = 1.2;
    CHECK_THROWS_AS(denormalize(bad), DomainError);
}

TEST_CASE("normalize/denormalize round-trip to 1e-12 on random curves") {
    Rng rng(1234);
    double worst = 0.0;
    for (int it = 0; it < 10000; ++it) {
        NormalizedTarget t;
        for (double& v : t.values) v = rng.uniform();
        auto gains = denormalize(t);
        EqCurve c = make_curve(gains);
        NormalizedTarget back = normalize_curve(c);
        for (std::size_t b = 0; b < kNumBands; ++b) {
            worst = std::max(worst, std::abs(back.values[b] - t.values[b]));
        }
    }
    CHECK(worst <= 1e-12);
}

TEST_CASE("normalization is affine") {
    Rng rng(55);
    for (int it = 0; it < 200; ++it) {
        EqCurve a = make_curve(constant_gains(0.0));
        EqCurve b = a;
        for (std::size_t i = 0; i < kNumBands; ++i) {
            a.gains_db[i] = rng.uniform(-4.0, 4.0);
            b.gains_db[i] = rng.uniform(-4.0, 4.0);
        }
        NormalizedTarget na = normalize_curve(a);
        NormalizedTarget nb = normalize_curve(b);
        for (std::size_t i = 0; i < kNumBands; ++i) {
            CHECK(na.values[i] - nb.values[i] ==
                  doctest::Approx((a.gains_db[i] - b.gains_db[i]) / 8.0)
                      .epsilon(1e-12));
        }
    }
}

TEST_CASE("select_human_label picks max consistency, ties to the first") {
    std::vector<EqExample> rows(3);
    rows[0].consistency = 0.71;
    rows[0].curve = make_curve(constant_gains(1.0));
    rows[1].consistency = 0.93;
    rows[1].curve = make_curve(constant_gains(2.0));
    rows[2].consistency = 0.93;
    rows[2].curve = make_curve(constant_gains(3.0));
    CHECK(select_human_label(rows).gains_db[0] == 2.0);

    std::vector<EqExample> single(rows.begin(), rows.begin() + 1);
    CHECK(select_human_label(single).gains_db[0] == 1.0);

    std::vector<EqExample> tie(2);
    tie[0].consistency = 0.80;
    tie[0].curve = make_curve(constant_gains(-1.0));
    tie[1].consistency = 0.80;
    tie[1].curve = make_curve(constant_gains(-2.0));
    CHECK(select_human_label(tie).gains_db[0] == -1.0);

    CHECK_THROWS_AS(select_human_label({}), ArgumentError);
}

TEST_CASE("mean_human_label") {
    std::vector<EqExample> rows(2);
    rows[0].curve = make_curve(constant_gains(1.5));
    rows[1].curve = make_curve(constant_gains(1.5));
    CHECK(mean_human_label(rows).gains_db == constant_gains(1.5));

    rows[0].curve = make_curve(constant_gains(0.0));
    rows[1].curve = make_curve(constant_gains(2.0));
    CHECK(mean_human_label(rows).gains_db == constant_gains(1.0));

    // independent summation oracle in long double
    Rng rng(77);
    std::vector<EqExample> random_rows(3);
    for (auto& ex : random_rows) {
        ex.curve = make_curve(constant_gains(0.0));
        for (double& g : ex.curve.gains_db) g = rng.uniform(-4.0, 4.0);
    }
    EqCurve mean = mean_human_label(random_rows);
    for (std::size_t b = 0; b < kNumBands; ++b) {
        long double acc = 0.0L;
        for (const auto& ex : random_rows) acc += ex.curve.gains_db[b];
        acc /= 3.0L;
        CHECK(std::abs(mean.gains_db[b] - static_cast<double>(acc)) <= 1e-12);
    }

    std::vector<EqExample> one(1);
    one[0].curve = make_curve(constant_gains(0.0));
    CHECK_THROWS_AS(mean_human_label(one), ArgumentError);
}

namespace {

// miniature fold fixture: 4 folds x (9 hq + 22 hr) generated words
struct FoldFixture {
    std::vector<std::string> hq, hr;
    std::array<std::vector<std::string>, 4> folds;
    std::vector<EqExample> examples;

    FoldFixture() {
        Rng rng(31);
        for (std::size_t f = 0; f < 4; ++f) {
            for (int i = 0; i < 9; ++i) {
                std::string w = "hq" + std::to_string(f) + "_" + std::to_string(i);
                hq.push_back(w);
                folds[f].push_back(w);
            }
            for (int i = 0; i < 22; ++i) {
                std::string w = "hr" + std::to_string(f) + "_" + std::to_string(i);
                hr.push_back(w);
                folds[f].push_back(w);
            }
        }
        // two examples per fold word + shared training-only words
        auto add_example = [&](const std::string& w, double cons) {
            EqExample ex;
            ex.descriptor = w;
            ex.language = "english";
            ex.audio_id = "a1";
            ex.consistency = cons;
            ex.curve = make_curve(constant_gains(0.0));
            for (double& g : ex.curve.gains_db) g = rng.uniform(-4.0, 4.0);
            examples.push_back(std::move(ex));
        };
        for (std::size_t f = 0; f < 4; ++f) {
            for (const auto& w : folds[f]) {
                add_example(w, 0.9);
                add_example(w, 0.5); // below the test threshold
            }
        }
        for (int i = 0; i < 10; ++i) add_example("train_only_" + std::to_string(i), 0.65);
    }
};

} // namespace

TEST_CASE("build_folds enforces the fold protocol") {
    FoldFixture fx;
    FoldPlan plan = build_folds(fx.examples, fx.hq, fx.hr, fx.folds);

    for (std::size_t f = 0; f < 4; ++f) {
        const Fold& fold = plan.folds[f];
        CHECK(fold.hq_words.size() == 9);
        CHECK(fold.hr_words.size() == 22);
        CHECK(fold.test_words.size() == 31);

        std::set<std::string> train_words, test_words;
        for (std::size_t i : fold.train_indices) {
            train_words.insert(fx.examples[i].descriptor);
        }
        for (std::size_t i : fold.test_indices) {
            test_words.insert(fx.examples[i].descriptor);
            CHECK(fx.examples[i].consistency > 0.7);
        }
        for (const auto& w : test_words) CHECK(train_words.count(w) == 0);
        // one qualifying example per fold word in this fixture
        CHECK(fold.test_indices.size() == 31);
    }

    // deterministic
    FoldPlan again = build_folds(fx.examples, fx.hq, fx.hr, fx.folds);
    CHECK(plan.test_set_hashes == again.test_set_hashes);
}

TEST_CASE("build_folds rejects malformed configurations") {
    FoldFixture fx;

    // a fold word missing from both hq and hr lists
    auto folds_bad = fx.folds;
    folds_bad[0][0] = "unlisted";
    CHECK_THROWS_AS(build_folds(fx.examples, fx.hq, fx.hr, folds_bad),
                    ArgumentError);

    // wrong hq count in a fold
    auto folds_short = fx.folds;
    folds_short[1][0] = fx.hr[0]; // replace an hq slot with a fold-1 hr word
    CHECK_THROWS_AS(build_folds(fx.examples, fx.hq, fx.hr, folds_short),
                    ArgumentError);

    // an hq word never tested
    auto hq_extra = fx.hq;
    hq_extra.push_back("never_tested");
    CHECK_THROWS_AS(build_folds(fx.examples, hq_extra, fx.hr, fx.folds),
                    ArgumentError);
}

TEST_CASE("shipped fold config matches the protocol counts") {
    Config cfg = Config::load(std::string(SEMEQ_DATA_DIR) + "/folds.cfg");
    FoldWordLists lists = fold_words_from_config(cfg);
    CHECK(lists.hq_words.size() == 32);
    CHECK(lists.hr_words.size() == 86);
    std::set<std::string> hq(lists.hq_words.begin(), lists.hq_words.end());
    std::set<std::string> hr(lists.hr_words.begin(), lists.hr_words.end());
    CHECK(hq.size() == 32);
    CHECK(hr.size() == 86);
    for (std::size_t f = 0; f < 4; ++f) {
        CHECK(lists.fold_words[f].size() == 31);
        std::size_t hq_count = 0, hr_count = 0;
        for (const auto& w : lists.fold_words[f]) {
            if (hq.count(w)) ++hq_count;
            if (hr.count(w)) ++hr_count;
        }
        CHECK(hq_count == 9);
        CHECK(hr_count == 22);
    }
    // every word is tested at least once
    std::set<std::string> tested;
    for (const auto& fold : lists.fold_words) {
        tested.insert(fold.begin(), fold.end());
    }
    CHECK(tested.size() == 118);
}

TEST_CASE("config parser") {
    Config cfg = Config::parse("# comment\nkey = value\nlist = a, b , c\n"
                               "num = 2.5\nkey = override\n");
    CHECK(cfg.get_string("key", "") == "override");
    CHECK(cfg.get_list("list") == std::vector<std::string>{"a", "b", "c"});
    CHECK(cfg.get_double("num", 0.0) == 2.5);
    CHECK(cfg.get_double("absent", -1.0) == -1.0);
    CHECK_FALSE(cfg.has("absent"));

    CHECK_THROWS_AS(Config::parse("not a pair\n"), ParseError);
    CHECK_THROWS_AS(Config::parse("num = abc\n").get_double("num", 0.0),
                    ParseError);
}

TEST_CASE("default band centers are a 40-point log grid") {
    auto centers = default_band_centers();
    CHECK(centers.front() == doctest::Approx(20.0));
    CHECK(centers.back() == doctest::Approx(20000.0));
    for (std::size_t i = 1; i < kNumBands; ++i) {
        CHECK(centers[i] > centers[i - 1]);
        // constant ratio between neighbors
        CHECK(centers[i] / centers[i - 1] ==
              doctest::Approx(centers[1] / centers[0]).epsilon(1e-9));
    }
}
