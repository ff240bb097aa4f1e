#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace speechalign {

// Mono PCM audio with samples normalized to [-1, 1].
struct AudioBuffer {
    std::vector<float> samples;
    int sample_rate = 0;

    double duration_s() const {
        return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
    }
};

// One fixed-length analysis window.
//
// A frame owns the sample range [first_sample, first_sample + span) of the
// source buffer; consecutive frames partition the buffer. `samples` holds the
// analysis window, floor(window_s * sample_rate) values taken from the start
// of that range (zero-padded for a trailing partial window).
struct Frame {
    std::size_t index = 0;
    double start_s = 0.0;
    std::size_t first_sample = 0;
    std::size_t span = 0;
    int sample_rate = 0;
    std::vector<float> samples;
    double rms_energy = 0.0;
    bool is_speech = false;
};

struct VadConfig {
    double absolute_floor = 1e-4;
    // Adaptive floor = max(absolute_floor, median_factor * median frame RMS).
    double median_factor = 0.5;
    double min_voice_band_fraction = 0.4;
    double band_low_hz = 200.0;
    double band_high_hz = 4000.0;
};

inline constexpr double kDefaultWindowS = 1.0 / 30.0;
inline constexpr int kDefaultSampleRate = 16000;

// Reads a RIFF/WAVE file with 8- or 16-bit integer PCM, downmixes to mono
// and resamples to target_rate by linear interpolation.
AudioBuffer load_audio(const std::filesystem::path& path, int target_rate);

// Same as load_audio on an in-memory file image.
AudioBuffer decode_wav(std::span<const std::uint8_t> bytes, int target_rate,
                       const std::string& source = "<memory>");

AudioBuffer resample_linear(const AudioBuffer& audio, int target_rate);

// Writes 16-bit PCM. `interleaved` holds channels * frames values in [-1, 1].
void write_wav(const std::filesystem::path& path, std::span<const float> interleaved,
               int sample_rate, int channels = 1, int bits_per_sample = 16);

inline void write_wav(const std::filesystem::path& path, const AudioBuffer& audio) {
    write_wav(path, audio.samples, audio.sample_rate);
}

std::vector<Frame> frame_signal(const AudioBuffer& audio, double window_s = kDefaultWindowS);

double frame_rms(std::span<const float> samples);

// The adaptive RMS floor used by filter_speech.
double energy_floor(std::span<const Frame> frames, const VadConfig& config);

// Fraction of spectral energy inside [band_low_hz, band_high_hz).
double voice_band_fraction(const Frame& frame, const VadConfig& config);

// Sets is_speech on every frame. Order and timing are untouched.
std::vector<Frame> filter_speech(std::vector<Frame> frames, const VadConfig& config);

}  // namespace speechalign
