#include "speechalign/audio_ingest.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "speechalign/error.hpp"
#include "speechalign/spectrum.hpp"

namespace speechalign {

namespace {

constexpr std::uint16_t kFormatPcm = 0x0001;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint32_t read_u32(std::span<const std::uint8_t> b, std::size_t at) {
    return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
           (static_cast<std::uint32_t>(b[at + 2]) << 16) |
           (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

std::uint16_t read_u16(std::span<const std::uint8_t> b, std::size_t at) {
    return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

bool tag_is(std::span<const std::uint8_t> b, std::size_t at, const char* tag) {
    return std::memcmp(b.data() + at, tag, 4) == 0;
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_tag(std::vector<std::uint8_t>& out, const char* tag) { out.insert(out.end(), tag, tag + 4); }

// start sample of frame k; the epsilon absorbs rounding in k * rate * window_s
std::size_t frame_start(std::size_t k, double samples_per_window) {
    return static_cast<std::size_t>(std::floor(static_cast<double>(k) * samples_per_window + 1e-6));
}

}  // namespace

AudioBuffer decode_wav(std::span<const std::uint8_t> bytes, int target_rate, const std::string& source) {
    if (bytes.size() < 12 || !tag_is(bytes, 0, "RIFF") || !tag_is(bytes, 8, "WAVE")) {
        throw InputError(source + ": not a RIFF/WAVE file");
    }

    bool have_fmt = false;
    std::uint16_t format = 0;
    std::uint16_t channels = 0;
    std::uint32_t rate = 0;
    std::uint16_t bits = 0;
    std::span<const std::uint8_t> data;
    bool have_data = false;

    std::size_t pos = 12;
    while (pos + 8 <= bytes.size()) {
        const std::uint32_t chunk_size = read_u32(bytes, pos + 4);
        const std::size_t body = pos + 8;
        const std::size_t available = std::min<std::size_t>(chunk_size, bytes.size() - body);
        if (tag_is(bytes, pos, "fmt ")) {
            if (available < 16) throw InputError(source + ": truncated fmt chunk");
            format = read_u16(bytes, body);
            channels = read_u16(bytes, body + 2);
            rate = read_u32(bytes, body + 4);
            bits = read_u16(bytes, body + 14);
            if (format == kFormatExtensible) {
                if (available < 26) throw InputError(source + ": truncated extensible fmt chunk");
                format = read_u16(bytes, body + 24);
            }
            have_fmt = true;
        } else if (tag_is(bytes, pos, "data")) {
            data = bytes.subspan(body, available);
            have_data = true;
        }
        pos = body + chunk_size + (chunk_size & 1u);
    }

    if (!have_fmt) throw InputError(source + ": missing fmt chunk");
    if (!have_data) throw InputError(source + ": missing data chunk");
    if (format != kFormatPcm) {
        throw InputError(source + ": unsupported encoding (format tag " + std::to_string(format) +
                         "), only integer PCM is accepted");
    }
    if (bits != 8 && bits != 16) {
        throw InputError(source + ": unsupported sample width " + std::to_string(bits) + " bits");
    }
    if (channels == 0 || rate == 0) throw InputError(source + ": invalid channel count or rate");

    const std::size_t bytes_per_sample = bits / 8;
    const std::size_t block = bytes_per_sample * channels;
    const std::size_t frames = data.size() / block;
    if (frames == 0) throw InputError(source + ": zero-length audio");

    AudioBuffer mono;
    mono.sample_rate = static_cast<int>(rate);
    mono.samples.resize(frames);
    for (std::size_t i = 0; i < frames; ++i) {
        double sum = 0.0;
        for (std::size_t c = 0; c < channels; ++c) {
            const std::size_t at = i * block + c * bytes_per_sample;
            if (bits == 8) {
                sum += (static_cast<double>(data[at]) - 128.0) / 128.0;
            } else {
                sum += static_cast<double>(static_cast<std::int16_t>(read_u16(data, at))) / 32768.0;
            }
        }
        mono.samples[i] = static_cast<float>(sum / channels);
    }
    return resample_linear(mono, target_rate);
}

AudioBuffer load_audio(const std::filesystem::path& path, int target_rate) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError(path.string() + ": cannot open audio file");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_wav(bytes, target_rate, path.string());
}

AudioBuffer resample_linear(const AudioBuffer& audio, int target_rate) {
    if (target_rate <= 0) throw ConfigError("target sample rate must be positive");
    if (audio.sample_rate == target_rate || audio.samples.empty()) {
        AudioBuffer copy = audio;
        copy.sample_rate = target_rate;
        return copy;
    }
    const auto n_in = static_cast<std::uint64_t>(audio.samples.size());
    const auto src = static_cast<std::uint64_t>(audio.sample_rate);
    const auto dst = static_cast<std::uint64_t>(target_rate);
    const std::uint64_t n_out = n_in * dst / src;

    AudioBuffer out;
    out.sample_rate = target_rate;
    out.samples.resize(n_out);
    for (std::uint64_t k = 0; k < n_out; ++k) {
        const std::uint64_t num = k * src;
        const std::uint64_t i0 = num / dst;
        const double frac = static_cast<double>(num % dst) / static_cast<double>(dst);
        const std::uint64_t i1 = std::min(i0 + 1, n_in - 1);
        out.samples[k] = static_cast<float>(audio.samples[i0] * (1.0 - frac) + audio.samples[i1] * frac);
    }
    return out;
}

void write_wav(const std::filesystem::path& path, std::span<const float> interleaved, int sample_rate,
               int channels, int bits_per_sample) {
    if (bits_per_sample != 8 && bits_per_sample != 16) throw ConfigError("write_wav supports 8 or 16 bits");
    if (channels <= 0 || sample_rate <= 0) throw ConfigError("write_wav: invalid channels or rate");
    const std::uint32_t bytes_per_sample = static_cast<std::uint32_t>(bits_per_sample / 8);
    const auto data_size = static_cast<std::uint32_t>(interleaved.size() * bytes_per_sample);

    std::vector<std::uint8_t> out;
    out.reserve(44 + data_size);
    put_tag(out, "RIFF");
    put_u32(out, 36 + data_size + (data_size & 1u));
    put_tag(out, "WAVE");
    put_tag(out, "fmt ");
    put_u32(out, 16);
    put_u16(out, kFormatPcm);
    put_u16(out, static_cast<std::uint16_t>(channels));
    put_u32(out, static_cast<std::uint32_t>(sample_rate));
    put_u32(out, static_cast<std::uint32_t>(sample_rate) * channels * bytes_per_sample);
    put_u16(out, static_cast<std::uint16_t>(channels * bytes_per_sample));
    put_u16(out, static_cast<std::uint16_t>(bits_per_sample));
    put_tag(out, "data");
    put_u32(out, data_size);
    for (float s : interleaved) {
        const double v = std::clamp(static_cast<double>(s), -1.0, 1.0);
        if (bits_per_sample == 8) {
            out.push_back(static_cast<std::uint8_t>(std::clamp(std::lround(v * 128.0 + 128.0), 0L, 255L)));
        } else {
            const auto q = static_cast<std::int16_t>(std::clamp(std::lround(v * 32768.0), -32768L, 32767L));
            put_u16(out, static_cast<std::uint16_t>(q));
        }
    }
    if (data_size & 1u) out.push_back(0);

    std::ofstream file(path, std::ios::binary);
    if (!file) throw InputError(path.string() + ": cannot open for writing");
    file.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
}

double frame_rms(std::span<const float> samples) {
    if (samples.empty()) return 0.0;
    double sum = 0.0;
    for (float s : samples) sum += static_cast<double>(s) * s;
    return std::sqrt(sum / static_cast<double>(samples.size()));
}

std::vector<Frame> frame_signal(const AudioBuffer& audio, double window_s) {
    if (!(window_s > 0.0)) throw ConfigError("window_s must be positive");
    if (audio.sample_rate <= 0) throw ConfigError("audio sample rate must be positive");

    const double per_window = window_s * audio.sample_rate;
    const auto window_len = static_cast<std::size_t>(std::floor(per_window + 1e-6));
    if (window_len == 0) throw ConfigError("window_s is shorter than one sample");

    const std::size_t n = audio.samples.size();
    std::vector<Frame> frames;
    frames.reserve(static_cast<std::size_t>(static_cast<double>(n) / per_window) + 1);

    auto make_frame = [&](std::size_t k, std::size_t first, std::size_t span) {
        Frame f;
        f.index = k;
        f.start_s = static_cast<double>(k) * window_s;
        f.first_sample = first;
        f.span = span;
        f.sample_rate = audio.sample_rate;
        f.samples.assign(window_len, 0.0f);
        const std::size_t take = std::min(window_len, span);
        std::copy_n(audio.samples.begin() + static_cast<std::ptrdiff_t>(first), take, f.samples.begin());
        f.rms_energy = frame_rms(f.samples);
        return f;
    };

    std::size_t k = 0;
    while (frame_start(k + 1, per_window) <= n) {
        const std::size_t first = frame_start(k, per_window);
        frames.push_back(make_frame(k, first, frame_start(k + 1, per_window) - first));
        ++k;
    }
    const std::size_t first = frame_start(k, per_window);
    const std::size_t rest = n - first;
    if (rest > 0 && static_cast<double>(rest) >= per_window / 2.0) {
        frames.push_back(make_frame(k, first, rest));
    }
    return frames;
}

double energy_floor(std::span<const Frame> frames, const VadConfig& config) {
    if (frames.empty()) return config.absolute_floor;
    std::vector<double> rms;
    rms.reserve(frames.size());
    for (const auto& f : frames) rms.push_back(f.rms_energy);
    std::sort(rms.begin(), rms.end());
    const std::size_t mid = rms.size() / 2;
    const double median = rms.size() % 2 == 1 ? rms[mid] : 0.5 * (rms[mid - 1] + rms[mid]);
    return std::max(config.absolute_floor, config.median_factor * median);
}

double voice_band_fraction(const Frame& frame, const VadConfig& config) {
    const auto spectrum = power_spectrum(frame.samples, frame.sample_rate);
    const double total = spectrum.total();
    if (total <= 0.0) return 0.0;
    return spectrum.band(config.band_low_hz, config.band_high_hz) / total;
}

std::vector<Frame> filter_speech(std::vector<Frame> frames, const VadConfig& config) {
    const double floor = energy_floor(frames, config);
    for (auto& f : frames) {
        f.is_speech = f.rms_energy > 0.0 && f.rms_energy >= floor &&
                      voice_band_fraction(f, config) >= config.min_voice_band_fraction;
    }
    return frames;
}

}  // namespace speechalign
