#include <doctest.h>

#include <cmath>
#include <cstring>

#include "semeq/dataset.hpp"
#include "semeq/eq_render.hpp"
#include "semeq/errors.hpp"
#include "semeq/rng.hpp"
#include "test_helpers.hpp"

using namespace semeq;

namespace {

constexpr double kTau = 6.28318530717958647692528676655900577;

EqCurve flat_curve(double db) {
    EqCurve c;
    c.band_centers_hz = default_band_centers();
    c.gains_db.fill(db);
    return c;
}

AudioBuffer sine(double freq, unsigned fs, std::size_t frames, double amp) {
    AudioBuffer buf;
    buf.sample_rate = fs;
    buf.channels.resize(1);
    buf.channels[0].resize(frames);
    for (std::size_t i = 0; i < frames; ++i) {
        buf.channels[0][i] = amp * std::sin(kTau * freq * static_cast<double>(i) /
                                            static_cast<double>(fs));
    }
    return buf;
}

// quadrature amplitude estimate over an integer number of periods taken
// from the filter's steady-state region
double sine_amplitude(const std::vector<double>& samples, double freq,
                      unsigned fs, std::size_t guard) {
    const double period = static_cast<double>(fs) / freq;
    const std::size_t avail = samples.size() - 2 * guard;
    const std::size_t periods = static_cast<std::size_t>(
        std::floor(static_cast<double>(avail) / period));
    REQUIRE(periods >= 2);
    const std::size_t n = static_cast<std::size_t>(
        std::floor(static_cast<double>(periods) * period));
    double a = 0.0, b = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double t = static_cast<double>(i + guard);
        double phase = kTau * freq * t / static_cast<double>(fs);
        a += samples[i + guard] * std::cos(phase);
        b += samples[i + guard] * std::sin(phase);
    }
    return 2.0 * std::sqrt(a * a + b * b) / static_cast<double>(n);
}

// measured gain in dB of the EQ chain for a probe sine at freq
double probe_gain_db(const EqCurve& curve, double freq, unsigned fs,
                     std::size_t taps) {
    const std::size_t frames =
        taps + static_cast<std::size_t>(6.0 * fs / std::max(freq, 30.0)) + 4096;
    AudioBuffer in = sine(freq, fs, frames, 0.25);
    AudioBuffer out = apply_eq(in, curve, taps);
    REQUIRE(out.frame_count() == frames);
    double amp = sine_amplitude(out.channels[0], freq, fs, taps);
    return 20.0 * std::log10(amp / 0.25);
}

double rms(const std::vector<double>& v) {
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return std::sqrt(acc / static_cast<double>(v.size()));
}

} // namespace

TEST_CASE("pcm16 write/read scaling and clamping") {
    testhelp::TempDir dir;
    AudioBuffer buf;
    buf.sample_rate = 44100;
    buf.channels = {{0.5, 1.0, -1.0, 2.0, -3.0, 0.25, 0.0}};
    auto path = dir.file("a.wav");
    write_wav(buf, path, WavFormat::Pcm16);
    AudioBuffer back = read_wav(path);
    REQUIRE(back.frame_count() == 7);
    CHECK(back.channels[0][0] == 0.5); // 16384/32768
    CHECK(back.channels[0][1] == doctest::Approx(32767.0 / 32768.0));
    CHECK(back.channels[0][2] == -1.0);
    CHECK(back.channels[0][3] == doctest::Approx(32767.0 / 32768.0)); // clamped
    CHECK(back.channels[0][4] == -1.0);                               // clamped
    CHECK(back.channels[0][5] == 0.25);
    CHECK(back.channels[0][6] == 0.0);
}

TEST_CASE("float32 round trip is bit exact") {
    testhelp::TempDir dir;
    Rng rng(12);
    AudioBuffer buf;
    buf.sample_rate = 48000;
    buf.channels.resize(2);
    for (auto& ch : buf.channels) {
        ch.resize(1000);
        for (double& v : ch) v = rng.uniform(-1.0, 1.0);
    }
    auto path = dir.file("f.wav");
    write_wav(buf, path, WavFormat::Float32);
    AudioBuffer back = read_wav(path);
    REQUIRE(back.channel_count() == 2);
    REQUIRE(back.frame_count() == 1000);
    for (std::size_t c = 0; c < 2; ++c) {
        for (std::size_t i = 0; i < 1000; ++i) {
            CHECK(back.channels[c][i] ==
                  static_cast<double>(static_cast<float>(buf.channels[c][i])));
        }
    }
    // writing the read buffer again reproduces the file byte for byte
    auto path2 = dir.file("f2.wav");
    write_wav(back, path2, WavFormat::Float32);
    CHECK(testhelp::read_file(path) == testhelp::read_file(path2));
}

TEST_CASE("one second of mono audio keeps its sample count") {
    testhelp::TempDir dir;
    AudioBuffer buf = sine(440.0, 44100, 44100, 0.5);
    auto path = dir.file("tone.wav");
    write_wav(buf, path, WavFormat::Pcm16);
    AudioBuffer back = read_wav(path);
    CHECK(back.frame_count() == 44100);
    CHECK(back.sample_rate == 44100);
    CHECK(back.channel_count() == 1);
}

TEST_CASE("wav reader rejects broken files") {
    testhelp::TempDir dir;
    auto path = dir.file("x.wav");

    testhelp::write_file(path, "not a wav at all");
    CHECK_THROWS_AS(read_wav(path), FormatError);

    // valid file truncated mid-data
    AudioBuffer buf = sine(440.0, 44100, 2000, 0.5);
    write_wav(buf, path, WavFormat::Pcm16);
    std::string bytes = testhelp::read_file(path);
    testhelp::write_file(path, bytes.substr(0, bytes.size() / 2));
    CHECK_THROWS_AS(read_wav(path), CorruptError);

    // unsupported bit depth: patch the fmt chunk to claim 24-bit PCM
    write_wav(buf, path, WavFormat::Pcm16);
    bytes = testhelp::read_file(path);
    // fmt chunk: bits-per-sample lives at offset 34 in this fixed layout
    bytes[34] = 24;
    testhelp::write_file(path, bytes);
    CHECK_THROWS_AS(read_wav(path), FormatError);

    CHECK_THROWS_AS(read_wav(dir.file("missing.wav")), IoError);
}

TEST_CASE("design_fir validates arguments") {
    EqCurve curve = flat_curve(0.0);
    CHECK_THROWS_AS(design_fir(curve, 44100, 512), ArgumentError); // even
    CHECK_THROWS_AS(design_fir(curve, 44100, 0), ArgumentError);
    CHECK_THROWS_AS(design_fir(curve, 44100, 41), ArgumentError); // too short
    curve.gains_db[7] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(design_fir(curve, 44100, 513), NumericError);
}

TEST_CASE("fir coefficients are exactly symmetric") {
    Rng rng(3);
    EqCurve curve = flat_curve(0.0);
    for (double& g : curve.gains_db) g = rng.uniform(-4.0, 4.0);
    std::vector<double> fir = design_fir(curve, 44100, 1023);
    REQUIRE(fir.size() == 1023);
    for (std::size_t k = 0; k < fir.size(); ++k) {
        CHECK(fir[k] == fir[fir.size() - 1 - k]);
    }
}

TEST_CASE("flat curve designs an identity filter") {
    EqCurve curve = flat_curve(0.0);
    std::vector<double> fir = design_fir(curve, 44100, 513);
    // frequency response via direct evaluation at each band center
    for (double f : curve.band_centers_hz) {
        double w = kTau * f / 44100.0;
        double re = 0.0, im = 0.0;
        for (std::size_t n = 0; n < fir.size(); ++n) {
            re += fir[n] * std::cos(w * static_cast<double>(n));
            im -= fir[n] * std::sin(w * static_cast<double>(n));
        }
        double mag_db = 20.0 * std::log10(std::hypot(re, im));
        CHECK(std::abs(mag_db) <= 0.1);
    }
}

TEST_CASE("a single boosted band hits its target at the center") {
    EqCurve curve = flat_curve(0.0);
    curve.gains_db[20] = 4.0; // ~1 kHz on the default grid
    std::vector<double> fir = design_fir(curve, 44100, 513);
    double f = curve.band_centers_hz[20];
    double w = kTau * f / 44100.0;
    double re = 0.0, im = 0.0;
    for (std::size_t n = 0; n < fir.size(); ++n) {
        re += fir[n] * std::cos(w * static_cast<double>(n));
        im -= fir[n] * std::sin(w * static_cast<double>(n));
    }
    double mag_db = 20.0 * std::log10(std::hypot(re, im));
    CHECK(std::abs(mag_db - 4.0) <= 0.5);
}

TEST_CASE("band centers at or above Nyquist are dropped with a warning") {
    EqCurve curve = flat_curve(1.0);
    std::vector<std::string> warnings;
    std::vector<double> fir = design_fir(curve, 8000, 1023, &warnings);
    CHECK(fir.size() == 1023);
    CHECK(!warnings.empty()); // default grid tops out at 20 kHz
    // response still matches at a low in-band center
    double f = curve.band_centers_hz[10];
    double w = kTau * f / 8000.0;
    double re = 0.0, im = 0.0;
    for (std::size_t n = 0; n < fir.size(); ++n) {
        re += fir[n] * std::cos(w * static_cast<double>(n));
        im -= fir[n] * std::sin(w * static_cast<double>(n));
    }
    CHECK(std::abs(20.0 * std::log10(std::hypot(re, im)) - 1.0) <= 0.5);
}

TEST_CASE("flat curve passes audio through unchanged") {
    Rng rng(17);
    AudioBuffer in;
    in.sample_rate = 44100;
    in.channels.resize(1);
    in.channels[0].resize(8192);
    for (double& v : in.channels[0]) v = rng.uniform(-0.25, 0.25);

    AudioBuffer out = apply_eq(in, flat_curve(0.0), 2047);
    REQUIRE(out.frame_count() == in.frame_count());
    std::vector<double> diff(in.frame_count());
    for (std::size_t i = 0; i < diff.size(); ++i) {
        diff[i] = out.channels[0][i] - in.channels[0][i];
    }
    CHECK(rms(diff) / rms(in.channels[0]) < 1e-3); // below -60 dB
}

TEST_CASE("uniform +4 dB boost scales a mid-band sine by 1.585") {
    AudioBuffer in = sine(1000.0, 44100, 20000, 0.25);
    AudioBuffer out = apply_eq(in, flat_curve(4.0), 2047);
    // compare steady-state RMS away from the edges
    std::vector<double> in_mid(in.channels[0].begin() + 3000,
                               in.channels[0].end() - 3000);
    std::vector<double> out_mid(out.channels[0].begin() + 3000,
                                out.channels[0].end() - 3000);
    double ratio = rms(out_mid) / rms(in_mid);
    CHECK(ratio == doctest::Approx(std::pow(10.0, 4.0 / 20.0)).epsilon(0.02));
}

TEST_CASE("sine probes at band centers match the curve targets") {
    Rng rng(23);
    EqCurve curve = flat_curve(0.0);
    // smooth random curve, the kind a trained model emits
    for (std::size_t i = 0; i < kNumBands; ++i) {
        double t = static_cast<double>(i) / 39.0;
        curve.gains_db[i] = 3.0 * std::sin(kTau * (1.3 * t + rng.uniform(0.0, 0.05)));
    }
    for (std::size_t idx : {0UL, 5UL, 13UL, 20UL, 27UL, 33UL, 39UL}) {
        double measured =
            probe_gain_db(curve, curve.band_centers_hz[idx], 44100, 2047);
        CHECK(std::abs(measured - curve.gains_db[idx]) <= 0.5);
    }
}

TEST_CASE("apply_eq is linear in the input") {
    Rng rng(29);
    AudioBuffer in;
    in.sample_rate = 44100;
    in.channels.resize(1);
    in.channels[0].resize(4096);
    for (double& v : in.channels[0]) v = rng.uniform(-0.2, 0.2);
    AudioBuffer doubled = in;
    for (double& v : doubled.channels[0]) v *= 2.0;

    EqCurve curve = flat_curve(0.0);
    for (double& g : curve.gains_db) g = rng.uniform(-2.0, 2.0);
    AudioBuffer out1 = apply_eq(in, curve, 511);
    AudioBuffer out2 = apply_eq(doubled, curve, 511);
    for (std::size_t i = 0; i < out1.frame_count(); ++i) {
        CHECK(out2.channels[0][i] == doctest::Approx(2.0 * out1.channels[0][i])
                                         .epsilon(1e-12));
    }
}

TEST_CASE("apply_eq reports clipping") {
    AudioBuffer in = sine(1000.0, 44100, 8192, 0.9);
    ApplyReport report;
    apply_eq(in, flat_curve(4.0), 511, &report);
    CHECK(report.clipped_samples > 0);
    CHECK(report.peak > 1.0);

    CHECK_THROWS_AS(apply_eq(AudioBuffer{}, flat_curve(0.0), 511), ArgumentError);
}

TEST_CASE("stereo channels are processed independently") {
    AudioBuffer in;
    in.sample_rate = 44100;
    in.channels.resize(2);
    in.channels[0] = sine(500.0, 44100, 4096, 0.3).channels[0];
    in.channels[1] = sine(2000.0, 44100, 4096, 0.3).channels[0];
    AudioBuffer out = apply_eq(in, flat_curve(0.0), 511);
    REQUIRE(out.channel_count() == 2);
    for (std::size_t c = 0; c < 2; ++c) {
        std::vector<double> diff(4096);
        for (std::size_t i = 0; i < 4096; ++i) {
            diff[i] = out.channels[c][i] - in.channels[c][i];
        }
        CHECK(rms(diff) < 1e-3);
    }
}
