#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "semeq/dataset.hpp"

namespace semeq {

struct AudioBuffer {
    std::vector<std::vector<double>> channels; // samples in [-1, 1]
    unsigned sample_rate = 0;

    std::size_t channel_count() const { return channels.size(); }
    std::size_t frame_count() const {
        return channels.empty() ? 0 : channels[0].size();
    }
};

enum class WavFormat { Pcm16, Float32 };

// RIFF/WAVE reader for PCM 16-bit and IEEE float 32-bit, 1-2 channels.
// Integer samples are scaled by 1/32768; unknown chunks are skipped.
AudioBuffer read_wav(const std::filesystem::path& path);

// pcm16 clamps to [-1, 1] and rounds half away from zero.
void write_wav(const AudioBuffer& buffer, const std::filesystem::path& path,
               WavFormat format);

// Linear-phase FIR whose magnitude response matches the curve at every
// band center below Nyquist (centers at or above Nyquist are dropped with
// a warning). The target is built by interpolating the (log-frequency, dB)
// anchors linearly in log-frequency and holding the edge anchor values
// flat outside the anchor range; a windowed frequency-sampling design is
// then corrected by the minimum-norm coefficient update that interpolates
// the anchors exactly. Coefficients are exactly symmetric.
std::vector<double> design_fir(const EqCurve& curve, unsigned sample_rate,
                               std::size_t num_taps,
                               std::vector<std::string>* warnings = nullptr);

struct ApplyReport {
    std::size_t clipped_samples = 0; // output samples beyond [-1, 1]
    double peak = 0.0;
};

// Convolves each channel with the designed filter. The group delay of
// (num_taps-1)/2 samples is compensated so output length equals input
// length. Output is not normalized; clipping is only reported.
AudioBuffer apply_eq(const AudioBuffer& buffer, const EqCurve& curve,
                     std::size_t num_taps, ApplyReport* report = nullptr,
                     std::vector<std::string>* warnings = nullptr);

AudioBuffer convolve_same_length(const AudioBuffer& buffer,
                                 const std::vector<double>& fir);

inline constexpr std::size_t kDefaultNumTaps = 2047;

} // namespace semeq
