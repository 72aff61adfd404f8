#include "semeq/eq_render.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "semeq/errors.hpp"
#include "semeq/util.hpp"

namespace semeq {

namespace {

constexpr double kPi = 3.14159265358979323846264338327950288;

struct ChunkHeader {
    char id[4];
    std::uint32_t size;
};

template <typename T>
T read_pod(std::ifstream& in, const std::filesystem::path& path) {
    T v;
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw CorruptError("truncated WAV file: " + path.string());
    return v;
}

} // namespace

AudioBuffer read_wav(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open WAV file: " + path.string());

    char riff[4];
    in.read(riff, 4);
    if (!in || std::memcmp(riff, "RIFF", 4) != 0) {
        throw FormatError("not a RIFF file: " + path.string());
    }
    (void)read_pod<std::uint32_t>(in, path); // overall size, unused
    char wave[4];
    in.read(wave, 4);
    if (!in || std::memcmp(wave, "WAVE", 4) != 0) {
        throw FormatError("not a WAVE file: " + path.string());
    }

    std::uint16_t format_tag = 0, channels = 0, bits_per_sample = 0;
    std::uint32_t sample_rate = 0;
    bool have_fmt = false;
    std::vector<char> data;
    bool have_data = false;

    while (true) {
        char id[4];
        in.read(id, 4);
        if (in.gcount() == 0) break; // clean end of file
        if (in.gcount() != 4) throw CorruptError("truncated chunk header: " + path.string());
        auto size = read_pod<std::uint32_t>(in, path);

        if (std::memcmp(id, "fmt ", 4) == 0) {
            if (size < 16) throw FormatError("fmt chunk too small: " + path.string());
            format_tag = read_pod<std::uint16_t>(in, path);
            channels = read_pod<std::uint16_t>(in, path);
            sample_rate = read_pod<std::uint32_t>(in, path);
            (void)read_pod<std::uint32_t>(in, path); // byte rate
            (void)read_pod<std::uint16_t>(in, path); // block align
            bits_per_sample = read_pod<std::uint16_t>(in, path);
            in.seekg(size - 16, std::ios::cur);
            have_fmt = true;
        } else if (std::memcmp(id, "data", 4) == 0) {
            data.resize(size);
            in.read(data.data(), size);
            if (in.gcount() != static_cast<std::streamsize>(size)) {
                throw CorruptError("truncated data chunk: " + path.string());
            }
            have_data = true;
        } else {
            in.seekg(size, std::ios::cur);
            if (!in) throw CorruptError("truncated chunk: " + path.string());
        }
        if (size % 2 == 1) in.seekg(1, std::ios::cur); // chunks are word aligned
    }

    if (!have_fmt || !have_data) {
        throw CorruptError("WAV missing fmt or data chunk: " + path.string());
    }
    if (channels < 1 || channels > 2) {
        throw FormatError("unsupported channel count " + std::to_string(channels) +
                          ": " + path.string());
    }
    if (sample_rate < 8000) {
        throw FormatError("sample rate below 8000 Hz: " + path.string());
    }

    AudioBuffer buf;
    buf.sample_rate = sample_rate;
    buf.channels.resize(channels);

    if (format_tag == 1 && bits_per_sample == 16) {
        const std::size_t n = data.size() / 2 / channels;
        for (auto& ch : buf.channels) ch.resize(n);
        const auto* samples = reinterpret_cast<const std::int16_t*>(data.data());
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t c = 0; c < channels; ++c) {
                buf.channels[c][i] = samples[i * channels + c] / 32768.0;
            }
        }
    } else if (format_tag == 3 && bits_per_sample == 32) {
        const std::size_t n = data.size() / 4 / channels;
        for (auto& ch : buf.channels) ch.resize(n);
        const auto* samples = reinterpret_cast<const float*>(data.data());
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t c = 0; c < channels; ++c) {
                buf.channels[c][i] = samples[i * channels + c];
            }
        }
    } else {
        throw FormatError("unsupported WAV codec (format " + std::to_string(format_tag) +
                          ", " + std::to_string(bits_per_sample) + " bits): " + path.string());
    }
    return buf;
}

namespace {

void append(std::vector<unsigned char>& out, const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    out.insert(out.end(), b, b + n);
}

template <typename T>
void append_pod(std::vector<unsigned char>& out, T v) {
    append(out, &v, sizeof(T));
}

} // namespace

void write_wav(const AudioBuffer& buffer, const std::filesystem::path& path,
               WavFormat format) {
    if (buffer.channel_count() < 1 || buffer.channel_count() > 2) {
        throw ArgumentError("write_wav: 1 or 2 channels required");
    }
    for (const auto& ch : buffer.channels) {
        if (ch.size() != buffer.frame_count()) {
            throw ArgumentError("write_wav: channel lengths differ");
        }
    }

    const std::uint16_t channels = static_cast<std::uint16_t>(buffer.channel_count());
    const std::uint16_t bits = format == WavFormat::Pcm16 ? 16 : 32;
    const std::uint16_t block_align = static_cast<std::uint16_t>(channels * bits / 8);
    const std::uint32_t n_frames = static_cast<std::uint32_t>(buffer.frame_count());
    const std::uint32_t data_size = n_frames * block_align;
    const bool is_float = format == WavFormat::Float32;

    std::vector<unsigned char> out;
    out.reserve(data_size + 64);
    append(out, "RIFF", 4);
    // fmt(24) [+ fact(12) for float] + data header(8)
    const std::uint32_t riff_size = 4 + 24 + (is_float ? 12 : 0) + 8 + data_size;
    append_pod(out, riff_size);
    append(out, "WAVE", 4);

    append(out, "fmt ", 4);
    append_pod<std::uint32_t>(out, 16);
    append_pod<std::uint16_t>(out, is_float ? 3 : 1);
    append_pod(out, channels);
    append_pod<std::uint32_t>(out, buffer.sample_rate);
    append_pod<std::uint32_t>(out, buffer.sample_rate * block_align);
    append_pod(out, block_align);
    append_pod(out, bits);

    if (is_float) {
        append(out, "fact", 4);
        append_pod<std::uint32_t>(out, 4);
        append_pod<std::uint32_t>(out, n_frames);
    }

    append(out, "data", 4);
    append_pod(out, data_size);

    if (format == WavFormat::Pcm16) {
        for (std::size_t i = 0; i < n_frames; ++i) {
            for (std::size_t c = 0; c < channels; ++c) {
                double v = std::clamp(buffer.channels[c][i], -1.0, 1.0);
                long q = std::lround(v * 32768.0); // rounds half away from zero
                q = std::clamp(q, -32768L, 32767L);
                append_pod<std::int16_t>(out, static_cast<std::int16_t>(q));
            }
        }
    } else {
        for (std::size_t i = 0; i < n_frames; ++i) {
            for (std::size_t c = 0; c < channels; ++c) {
                append_pod<float>(out, static_cast<float>(buffer.channels[c][i]));
            }
        }
    }
    atomic_write_file(path, out);
}

namespace {

// Piecewise-linear dB target over log10 frequency; edge anchor values are
// held flat outside the anchor range so the response at the outermost
// band centers is not dragged toward a transition.
struct TargetResponse {
    std::vector<double> log_f;
    std::vector<double> gain_db;

    double amplitude_at(double freq_hz) const {
        double db;
        if (freq_hz <= 0.0) {
            db = gain_db.front();
        } else {
            double lf = std::log10(freq_hz);
            if (lf <= log_f.front()) {
                db = gain_db.front();
            } else if (lf >= log_f.back()) {
                db = gain_db.back();
            } else {
                auto it = std::upper_bound(log_f.begin(), log_f.end(), lf);
                std::size_t hi = static_cast<std::size_t>(it - log_f.begin());
                std::size_t lo = hi - 1;
                double t = (lf - log_f[lo]) / (log_f[hi] - log_f[lo]);
                db = gain_db[lo] + t * (gain_db[hi] - gain_db[lo]);
            }
        }
        return std::pow(10.0, db / 20.0);
    }
};

// Gaussian elimination with partial pivoting; A is overwritten.
std::vector<double> solve_dense(std::vector<std::vector<double>> A,
                                std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(A[r][col]) > std::abs(A[piv][col])) piv = r;
        }
        std::swap(A[col], A[piv]);
        std::swap(b[col], b[piv]);
        double d = A[col][col];
        if (d == 0.0) throw NumericError("singular system in FIR correction");
        for (std::size_t r = col + 1; r < n; ++r) {
            double f = A[r][col] / d;
            if (f == 0.0) continue;
            for (std::size_t c = col; c < n; ++c) A[r][c] -= f * A[col][c];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double acc = b[i];
        for (std::size_t c = i + 1; c < n; ++c) acc -= A[i][c] * x[c];
        x[i] = acc / A[i][i];
    }
    return x;
}

} // namespace

std::vector<double> design_fir(const EqCurve& curve, unsigned sample_rate,
                               std::size_t num_taps,
                               std::vector<std::string>* warnings) {
    if (num_taps == 0 || num_taps % 2 == 0) {
        throw ArgumentError("design_fir: num_taps must be odd");
    }
    if (sample_rate < 8000) {
        throw ArgumentError("design_fir: sample rate below 8000 Hz");
    }
    const double nyquist = sample_rate / 2.0;

    TargetResponse target;
    for (std::size_t i = 0; i < kNumBands; ++i) {
        double f = curve.band_centers_hz[i];
        if (f >= nyquist) {
            if (warnings) {
                warnings->push_back("band center " + format_double(f) +
                                    " Hz at or above Nyquist, dropped");
            }
            continue;
        }
        if (!std::isfinite(curve.gains_db[i])) {
            throw NumericError("design_fir: non-finite gain");
        }
        target.log_f.push_back(std::log10(f));
        target.gain_db.push_back(curve.gains_db[i]);
    }
    if (target.log_f.empty()) {
        throw ArgumentError("design_fir: no band centers below Nyquist");
    }

    const std::size_t half = (num_taps - 1) / 2; // one-sided coefficient count - 1
    const std::size_t n_coef = half + 1;
    const std::size_t n_anchor = target.log_f.size();
    if (n_coef < n_anchor) {
        throw ArgumentError("design_fir: " + std::to_string(num_taps) +
                            " taps cannot match " + std::to_string(n_anchor) +
                            " band centers");
    }

    // dense grid over [0, pi] for the quadrature
    std::size_t grid = 8192;
    while (grid < 8 * num_taps) grid *= 2;

    // Fourier cosine coefficients of the zero-phase target:
    //   t_k = (1/pi) * Int_0^pi A(w) cos(kw) dw,  A(w) = t_0 + 2 sum t_k cos(kw)
    std::vector<double> coef(n_coef, 0.0);
    const double dw = kPi / static_cast<double>(grid);
    for (std::size_t m = 0; m <= grid; ++m) {
        const double w = dw * static_cast<double>(m);
        const double f = w * sample_rate / (2.0 * kPi);
        const double amp = target.amplitude_at(f);
        const double trap = (m == 0 || m == grid) ? 0.5 : 1.0;
        const double scale = amp * trap * dw / kPi;
        // cos(kw) by recurrence
        const double c1 = std::cos(w);
        double ckm1 = c1, ckm2 = 1.0;
        coef[0] += scale;
        if (n_coef > 1) coef[1] += scale * c1;
        for (std::size_t k = 2; k < n_coef; ++k) {
            double ck = 2.0 * c1 * ckm1 - ckm2;
            coef[k] += scale * ck;
            ckm2 = ckm1;
            ckm1 = ck;
        }
    }

    // symmetric Hann taper
    for (std::size_t k = 0; k < n_coef; ++k) {
        double wnd = 0.5 + 0.5 * std::cos(kPi * static_cast<double>(k) /
                                          static_cast<double>(half + 1));
        coef[k] *= wnd;
    }

    // Exact-interpolation correction: the windowed design smooths the
    // target over the window mainlobe, which at low frequencies spans many
    // band centers. Apply the minimum-norm coefficient update that makes
    // the response exact at every anchor: solve (C C^T) lambda = residual,
    // add C^T lambda, with iterative refinement to tame the near-collinear
    // rows from tightly spaced low-frequency anchors.
    std::vector<std::vector<double>> C(n_anchor, std::vector<double>(n_coef));
    std::vector<double> g_lin(n_anchor);
    for (std::size_t i = 0; i < n_anchor; ++i) {
        const double f = std::pow(10.0, target.log_f[i]);
        const double w = 2.0 * kPi * f / sample_rate;
        g_lin[i] = std::pow(10.0, target.gain_db[i] / 20.0);
        C[i][0] = 1.0;
        const double c1 = std::cos(w);
        double ckm1 = c1, ckm2 = 1.0;
        if (n_coef > 1) C[i][1] = 2.0 * c1;
        for (std::size_t k = 2; k < n_coef; ++k) {
            double ck = 2.0 * c1 * ckm1 - ckm2;
            C[i][k] = 2.0 * ck;
            ckm2 = ckm1;
            ckm1 = ck;
        }
    }

    std::vector<std::vector<double>> gram(n_anchor, std::vector<double>(n_anchor));
    double trace = 0.0;
    for (std::size_t i = 0; i < n_anchor; ++i) {
        for (std::size_t j = i; j < n_anchor; ++j) {
            double dot = 0.0;
            for (std::size_t k = 0; k < n_coef; ++k) dot += C[i][k] * C[j][k];
            gram[i][j] = dot;
            gram[j][i] = dot;
        }
        trace += gram[i][i];
    }
    const double ridge = 1e-12 * trace / static_cast<double>(n_anchor);
    for (std::size_t i = 0; i < n_anchor; ++i) gram[i][i] += ridge;

    double base_l1 = 0.0;
    for (double v : coef) base_l1 += std::abs(v);

    for (int pass = 0; pass < 6; ++pass) {
        std::vector<double> residual(n_anchor);
        double max_res = 0.0;
        for (std::size_t i = 0; i < n_anchor; ++i) {
            double resp = 0.0;
            for (std::size_t k = 0; k < n_coef; ++k) resp += C[i][k] * coef[k];
            residual[i] = g_lin[i] - resp;
            max_res = std::max(max_res, std::abs(residual[i]));
        }
        if (max_res < 1e-11) break;
        std::vector<double> lambda = solve_dense(gram, residual);
        for (std::size_t i = 0; i < n_anchor; ++i) {
            const double li = lambda[i];
            if (li == 0.0) continue;
            for (std::size_t k = 0; k < n_coef; ++k) coef[k] += li * C[i][k];
        }
    }

    if (warnings) {
        double l1 = 0.0;
        for (double v : coef) l1 += std::abs(v);
        if (l1 > 50.0 * std::max(1.0, base_l1)) {
            warnings->push_back(
                "curve demands more frequency resolution than " +
                std::to_string(num_taps) +
                " taps provide; response between band centers may ring");
        }
    }

    std::vector<double> fir(num_taps, 0.0);
    fir[half] = coef[0];
    for (std::size_t k = 1; k < n_coef; ++k) {
        fir[half + k] = coef[k];
        fir[half - k] = coef[k];
    }
    return fir;
}

AudioBuffer convolve_same_length(const AudioBuffer& buffer,
                                 const std::vector<double>& fir) {
    const std::size_t n_taps = fir.size();
    const std::size_t center = (n_taps - 1) / 2;
    AudioBuffer out;
    out.sample_rate = buffer.sample_rate;
    out.channels.resize(buffer.channel_count());
    for (std::size_t c = 0; c < buffer.channel_count(); ++c) {
        const auto& x = buffer.channels[c];
        auto& y = out.channels[c];
        const std::ptrdiff_t len = static_cast<std::ptrdiff_t>(x.size());
        y.assign(x.size(), 0.0);
        for (std::ptrdiff_t i = 0; i < len; ++i) {
            // y[i] = sum_k fir[k] * x[i + center - k], x zero outside
            const std::ptrdiff_t base = i + static_cast<std::ptrdiff_t>(center);
            const std::ptrdiff_t k_lo = std::max<std::ptrdiff_t>(0, base - len + 1);
            const std::ptrdiff_t k_hi =
                std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(n_taps) - 1, base);
            double acc = 0.0;
            for (std::ptrdiff_t k = k_lo; k <= k_hi; ++k) {
                acc += fir[static_cast<std::size_t>(k)] *
                       x[static_cast<std::size_t>(base - k)];
            }
            y[static_cast<std::size_t>(i)] = acc;
        }
    }
    return out;
}

AudioBuffer apply_eq(const AudioBuffer& buffer, const EqCurve& curve,
                     std::size_t num_taps, ApplyReport* report,
                     std::vector<std::string>* warnings) {
    if (buffer.channel_count() == 0 || buffer.frame_count() == 0) {
        throw ArgumentError("apply_eq: empty audio buffer");
    }
    std::vector<double> fir = design_fir(curve, buffer.sample_rate, num_taps, warnings);
    AudioBuffer out = convolve_same_length(buffer, fir);
    if (report) {
        report->clipped_samples = 0;
        report->peak = 0.0;
        for (const auto& ch : out.channels) {
            for (double v : ch) {
                double mag = std::abs(v);
                report->peak = std::max(report->peak, mag);
                if (mag > 1.0) ++report->clipped_samples;
            }
        }
    }
    return out;
}

} // namespace semeq
