#include "speechalign/config.hpp"

#include <fstream>
#include <functional>
#include <map>

#include "speechalign/error.hpp"
#include "speechalign/text_io.hpp"

#ifndef SPEECHALIGN_DATA_DIR
#define SPEECHALIGN_DATA_DIR "data"
#endif

namespace speechalign {

namespace {

double as_double(std::string_view key, std::string_view value) {
    try {
        return parse_double(value);
    } catch (const std::invalid_argument&) {
        throw ConfigError(std::string(key) + ": expected a number, got '" + std::string(value) + "'");
    }
}

long long as_integer(std::string_view key, std::string_view value) {
    try {
        return parse_integer(value);
    } catch (const std::invalid_argument&) {
        throw ConfigError(std::string(key) + ": expected an integer, got '" + std::string(value) + "'");
    }
}

std::filesystem::path as_path(std::string_view value, const std::filesystem::path& base_dir) {
    std::filesystem::path p{std::string(value)};
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    return p;
}

void require(bool ok, const std::string& message) {
    if (!ok) throw ConfigError(message);
}

}  // namespace

PipelineConfig PipelineConfig::defaults() {
    PipelineConfig c;
    const std::filesystem::path data{SPEECHALIGN_DATA_DIR};
    c.dictionary = data / "cmudict.dict";
    c.formant_table = data / "formants_en.txt";
    c.vocabulary = data / "vocab_en.tsv";
    c.output_dir = ".";
    return c;
}

void PipelineConfig::set(std::string_view key, std::string_view value, const std::filesystem::path& base_dir) {
    const auto k = std::string(key);
    auto d = [&] { return as_double(key, value); };
    auto i = [&] { return as_integer(key, value); };
    auto p = [&] { return as_path(value, base_dir); };

    static const std::map<std::string, std::function<void(PipelineConfig&, const std::function<double()>&,
                                                          const std::function<long long()>&,
                                                          const std::function<std::filesystem::path()>&,
                                                          std::string_view)>>
        table = {
            {"audio", [](auto& c, auto&, auto&, auto& p, auto) { c.audio = p(); }},
            {"transcript", [](auto& c, auto&, auto&, auto& p, auto) { c.transcript = p(); }},
            {"dictionary", [](auto& c, auto&, auto&, auto& p, auto) { c.dictionary = p(); }},
            {"formant_table", [](auto& c, auto&, auto&, auto& p, auto) { c.formant_table = p(); }},
            {"vocabulary", [](auto& c, auto&, auto&, auto& p, auto) { c.vocabulary = p(); }},
            {"output_dir", [](auto& c, auto&, auto&, auto& p, auto) { c.output_dir = p(); }},
            {"window_s", [](auto& c, auto& d, auto&, auto&, auto) { c.window_s = d(); }},
            {"sample_rate", [](auto& c, auto&, auto& i, auto&, auto) { c.sample_rate = static_cast<int>(i()); }},
            {"vad.absolute_floor", [](auto& c, auto& d, auto&, auto&, auto) { c.vad.absolute_floor = d(); }},
            {"vad.median_factor", [](auto& c, auto& d, auto&, auto&, auto) { c.vad.median_factor = d(); }},
            {"vad.min_voice_band_fraction",
             [](auto& c, auto& d, auto&, auto&, auto) { c.vad.min_voice_band_fraction = d(); }},
            {"vad.band_low_hz", [](auto& c, auto& d, auto&, auto&, auto) { c.vad.band_low_hz = d(); }},
            {"vad.band_high_hz", [](auto& c, auto& d, auto&, auto&, auto) { c.vad.band_high_hz = d(); }},
            {"classifier.weight_f1", [](auto& c, auto& d, auto&, auto&, auto) { c.formant_weights[0] = d(); }},
            {"classifier.weight_f2", [](auto& c, auto& d, auto&, auto&, auto) { c.formant_weights[1] = d(); }},
            {"classifier.weight_f3", [](auto& c, auto& d, auto&, auto&, auto) { c.formant_weights[2] = d(); }},
            {"classifier.distance_threshold",
             [](auto& c, auto& d, auto&, auto&, auto) { c.distance_threshold = d(); }},
            {"classifier.fricative_margin",
             [](auto& c, auto& d, auto&, auto&, auto) { c.classifier.fricative_margin = d(); }},
            {"classifier.model_order",
             [](auto& c, auto&, auto& i, auto&, auto) { c.classifier.formants.model_order = static_cast<int>(i()); }},
            {"classifier.pre_emphasis",
             [](auto& c, auto& d, auto&, auto&, auto) { c.classifier.formants.pre_emphasis = d(); }},
            {"classifier.max_bandwidth_hz",
             [](auto& c, auto& d, auto&, auto&, auto) { c.classifier.formants.max_bandwidth_hz = d(); }},
            {"classifier.min_formant_hz",
             [](auto& c, auto& d, auto&, auto&, auto) { c.classifier.formants.min_formant_hz = d(); }},
            {"align.copy_cost", [](auto& c, auto&, auto& i, auto&, auto) { c.align.copy_cost = static_cast<int>(i()); }},
            {"align.delete_cost",
             [](auto& c, auto&, auto& i, auto&, auto) { c.align.delete_cost = static_cast<int>(i()); }},
            {"align.insert_cost",
             [](auto& c, auto&, auto& i, auto&, auto) { c.align.insert_cost = static_cast<int>(i()); }},
            {"align.replace_cost",
             [](auto& c, auto&, auto& i, auto&, auto) { c.align.replace_cost = static_cast<int>(i()); }},
            {"align.timestamp_mode",
             [](auto& c, auto&, auto&, auto&, std::string_view v) {
                 if (v == "first") {
                     c.align.timestamp_mode = TimestampMode::FirstMatch;
                 } else if (v == "median") {
                     c.align.timestamp_mode = TimestampMode::MedianMatch;
                 } else {
                     throw ConfigError("align.timestamp_mode: expected 'first' or 'median'");
                 }
             }},
            {"corruption.p_word_drop", [](auto& c, auto& d, auto&, auto&, auto) { c.corruption.p_word_drop = d(); }},
            {"corruption.p_word_substitute",
             [](auto& c, auto& d, auto&, auto&, auto) { c.corruption.p_word_substitute = d(); }},
            {"corruption.p_phoneme_noise",
             [](auto& c, auto& d, auto&, auto&, auto) { c.corruption.p_phoneme_noise = d(); }},
            {"corruption.silence_gaps",
             [](auto& c, auto&, auto&, auto&, std::string_view v) { c.corruption.silence_gaps = parse_silence_gaps(v); }},
            {"corruption.gap_interval_s",
             [](auto& c, auto& d, auto&, auto&, auto) { c.corruption.gap_interval_s = d(); }},
            {"corruption.gap_duration_s",
             [](auto& c, auto& d, auto&, auto&, auto) { c.corruption.gap_duration_s = d(); }},
            {"corruption.rng_seed",
             [](auto& c, auto&, auto& i, auto&, auto) {
                 const long long s = i();
                 if (s < 0) throw ConfigError("corruption.rng_seed must be non-negative");
                 c.corruption.rng_seed = static_cast<std::uint64_t>(s);
             }},
            {"synthesis.phonemes_per_s",
             [](auto& c, auto& d, auto&, auto&, auto) { c.synthesis.phonemes_per_s = d(); }},
            {"synthesis.duplication",
             [](auto& c, auto&, auto& i, auto&, auto) { c.synthesis.duplication = static_cast<int>(i()); }},
            {"synthesis.duration_jitter",
             [](auto& c, auto& d, auto&, auto&, auto) { c.synthesis.duration_jitter = d(); }},
            {"synthesis.marker_interval_s",
             [](auto& c, auto& d, auto&, auto&, auto) { c.synthesis.marker_interval_s = d(); }},
        };
    const auto it = table.find(k);
    if (it == table.end()) throw ConfigError("unknown configuration key '" + k + "'");
    it->second(*this, d, i, p, value);
}

void PipelineConfig::validate() const {
    require(window_s > 0.0 && window_s <= 1.0, "window_s must lie in (0, 1]");
    require(sample_rate >= 8000 && sample_rate <= 192000, "sample_rate must lie in [8000, 192000]");
    require(window_s * sample_rate >= 32.0, "window_s * sample_rate must give at least 32 samples");
    require(vad.absolute_floor >= 0.0, "vad.absolute_floor must be non-negative");
    require(vad.median_factor >= 0.0, "vad.median_factor must be non-negative");
    require(vad.min_voice_band_fraction >= 0.0 && vad.min_voice_band_fraction <= 1.0,
            "vad.min_voice_band_fraction must lie in [0, 1]");
    require(vad.band_low_hz >= 0.0 && vad.band_low_hz < vad.band_high_hz, "vad band must satisfy 0 <= low < high");
    for (double w : formant_weights) require(w > 0.0, "classifier weights must be positive");
    require(distance_threshold > 0.0, "classifier.distance_threshold must be positive");
    require(classifier.fricative_margin > 0.0, "classifier.fricative_margin must be positive");
    require(classifier.formants.model_order == 0 ||
                (classifier.formants.model_order >= 8 && classifier.formants.model_order <= 64),
            "classifier.model_order must be 0 (auto) or in [8, 64]");
    require(classifier.formants.pre_emphasis >= 0.0 && classifier.formants.pre_emphasis < 1.0,
            "classifier.pre_emphasis must lie in [0, 1)");
    require(classifier.formants.max_bandwidth_hz > 0.0, "classifier.max_bandwidth_hz must be positive");
    require(classifier.formants.min_formant_hz >= 0.0, "classifier.min_formant_hz must be non-negative");
    corruption.validate();
    synthesis.validate();
}

FormantReferenceTable PipelineConfig::load_formant_table() const {
    auto table = speechalign::load_formant_table(formant_table);
    table.weights = formant_weights;
    table.distance_threshold = distance_threshold;
    table.validate();
    return table;
}

std::vector<SilenceGap> parse_silence_gaps(std::string_view value) {
    std::vector<SilenceGap> gaps;
    if (trim(value).empty()) return gaps;
    for (auto item : split(value, ',')) {
        const auto parts = split(trim(item), ':');
        if (parts.size() != 2) throw ConfigError("silence gap '" + std::string(item) + "' is not start:duration");
        gaps.push_back({as_double("silence gap start", trim(parts[0])), as_double("silence gap duration", trim(parts[1]))});
    }
    return gaps;
}

PipelineConfig parse_config(std::istream& in, const std::string& source, const std::filesystem::path& base_dir) {
    auto config = PipelineConfig::defaults();
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto body = trim(std::string_view(line).substr(0, line.find('#')));
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError(source + ":" + std::to_string(line_no) + ": expected 'key = value'");
        }
        try {
            config.set(trim(body.substr(0, eq)), trim(body.substr(eq + 1)), base_dir);
        } catch (const ConfigError& e) {
            throw ConfigError(source + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    config.validate();
    return config;
}

PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path.string() + ": cannot open configuration file");
    return parse_config(in, path.string(), path.parent_path());
}

}  // namespace speechalign
