#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "speechalign/aligner.hpp"
#include "speechalign/audio_ingest.hpp"
#include "speechalign/eval.hpp"
#include "speechalign/phoneme_audio.hpp"

namespace speechalign {

struct PipelineConfig {
    std::filesystem::path audio;
    std::filesystem::path transcript;
    std::filesystem::path dictionary;
    std::filesystem::path formant_table;
    std::filesystem::path vocabulary;
    std::filesystem::path output_dir;

    double window_s = kDefaultWindowS;
    int sample_rate = kDefaultSampleRate;

    VadConfig vad;
    ClassifierConfig classifier;
    // Override the weights and threshold of the loaded formant table.
    std::array<double, 3> formant_weights{1.0, 0.5, 0.25};
    double distance_threshold = 350.0;

    AlignConfig align;
    CorruptionConfig corruption;
    SynthesisProfile synthesis;

    // Paths of the shipped data directory.
    static PipelineConfig defaults();

    // Applies one `key = value` setting; relative paths resolve against base_dir.
    // Throws ConfigError on unknown keys or unparsable values.
    void set(std::string_view key, std::string_view value, const std::filesystem::path& base_dir = {});

    // Throws ConfigError unless every value satisfies its module's preconditions.
    void validate() const;

    FormantReferenceTable load_formant_table() const;
};

// `key = value` lines; `#` starts a comment. Starts from defaults().
PipelineConfig parse_config(std::istream& in, const std::string& source = "<stream>",
                            const std::filesystem::path& base_dir = {});
PipelineConfig load_config(const std::filesystem::path& path);

// `start:duration` pairs separated by commas.
std::vector<SilenceGap> parse_silence_gaps(std::string_view value);

}  // namespace speechalign
