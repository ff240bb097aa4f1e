#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "speechalign/aligner.hpp"
#include "speechalign/phoneme_text.hpp"

namespace speechalign {

struct GroundTruthMarker {
    double time_s = 0.0;
    std::size_t word_index = 0;

    friend bool operator==(const GroundTruthMarker&, const GroundTruthMarker&) = default;
};

// Throws InputError unless markers strictly increase in time and word index.
void validate_markers(std::span<const GroundTruthMarker> markers);

// True time of every word 0 .. total_words-1: linear in word index between
// consecutive markers, constant before the first and after the last.
std::vector<double> interpolate_truth(std::span<const GroundTruthMarker> markers, std::size_t total_words);

struct ErrorCurve {
    std::vector<double> margins_s;
    std::vector<double> fraction_within;

    double at(double margin_s) const;
};

struct ErrorTracePoint {
    double audio_time_s = 0.0;
    double error_s = 0.0;
};

struct Evaluation {
    ErrorCurve curve;
    std::vector<ErrorTracePoint> trace;
    std::vector<double> errors;  // per aligned word
    double mean_error_s = 0.0;
    double max_error_s = 0.0;
};

// Margins 1, 2, ..., 100 seconds.
std::vector<double> default_margins();

// Per-word |timestamp - truth[word_index]|. Throws InputError if a word index
// has no truth value.
Evaluation error_curve(std::span<const AlignedWord> aligned, std::span<const double> truth,
                       std::span<const double> margins);

// Same, on the timestamps before the monotonic clamp.
Evaluation error_curve_raw(std::span<const AlignedWord> aligned, std::span<const double> truth,
                           std::span<const double> margins);

struct WerResult {
    std::size_t substitutions = 0;
    std::size_t insertions = 0;
    std::size_t deletions = 0;
    std::size_t reference_length = 0;

    std::size_t errors() const { return substitutions + insertions + deletions; }
    // errors / reference_length. An empty reference yields 0 for an empty
    // hypothesis and +infinity otherwise.
    double rate() const;
};

// Unit-cost word-level edit distance.
WerResult word_error_rate(std::span<const std::string> reference, std::span<const std::string> hypothesis);

// Uppercase normalized tokens of a transcript (markers skipped).
std::vector<std::string> words_of(std::string_view text);

struct SilenceGap {
    double start_s = 0.0;
    double duration_s = 0.0;

    friend bool operator==(const SilenceGap&, const SilenceGap&) = default;
};

struct CorruptionConfig {
    double p_word_drop = 0.35;
    double p_word_substitute = 0.35;
    double p_phoneme_noise = 0.1;
    // Explicit gaps; when empty, a gap of gap_duration_s is placed every
    // gap_interval_s of speech (interval 0 disables them).
    std::vector<SilenceGap> silence_gaps;
    double gap_interval_s = 600.0;
    double gap_duration_s = 60.0;
    std::uint64_t rng_seed = 1;

    // Throws ConfigError on out-of-range values.
    void validate() const;
};

// Timeline model of the synthetic speaker.
struct SynthesisProfile {
    // Mean speech-phoneme rate, phonemes per second (after duplication).
    double phonemes_per_s = 10.0;
    // Each reference phoneme is detected this many times in a row.
    int duplication = 2;
    // Relative uniform jitter applied to word and phoneme durations.
    double duration_jitter = 0.25;
    double marker_interval_s = 10.0;

    void validate() const;
};

struct Benchmark {
    std::vector<TimedPhoneme> speech;
    std::string corrupted_transcript;
    std::vector<GroundTruthMarker> truth_markers;
    std::vector<SilenceGap> gaps;           // as placed on the output timeline
    std::vector<double> corrupted_word_times;  // exact start time per corrupted word
    double duration_s = 0.0;
    std::size_t reference_words = 0;
};

// Deterministic under config.rng_seed. `vocabulary` supplies candidate
// substitutes; when empty the dictionary's words are used.
Benchmark synthesize_benchmark(std::string_view reference_text, const CorruptionConfig& config,
                               const PronouncingDictionary& dict, const SubstitutionMap& subs,
                               const SynthesisProfile& profile = {},
                               std::span<const std::string> vocabulary = {});

// Words of a `word<TAB>frequency` list (comments start with '#').
std::vector<std::string> load_vocabulary(const std::filesystem::path& path);

// Sidecar marker file: `time_s<TAB>word_index` per line.
void write_markers(std::ostream& out, std::span<const GroundTruthMarker> markers);
std::vector<GroundTruthMarker> read_markers(std::istream& in, const std::string& source = "<stream>");

// Resolves inline `[t=..]` markers to the index of the following word.
std::vector<GroundTruthMarker> markers_from_transcript(std::string_view text);

void write_curve_csv(std::ostream& out, const ErrorCurve& curve);
void write_trace_csv(std::ostream& out, std::span<const ErrorTracePoint> trace);

std::string render_curve_svg(const ErrorCurve& curve);
std::string render_trace_svg(std::span<const ErrorTracePoint> trace, std::span<const SilenceGap> gaps,
                             double mean_error_s);

}  // namespace speechalign
