#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "speechalign/audio_ingest.hpp"
#include "speechalign/phoneme.hpp"

namespace speechalign {

// Three lowest resonances of the all-pole vocal tract model, in Hz.
struct FormantFrame {
    double f1 = 0.0;
    double f2 = 0.0;
    double f3 = 0.0;
    // 1 - spectral flatness; diagnostic only.
    double voiced_confidence = 0.0;
};

// Expected F1..F3 per monophthong plus the weighted-distance parameters.
struct FormantReferenceTable {
    // Indexed by index_of(label) for the ten monophthongs.
    std::array<std::array<double, 3>, kMonophthongCount> formants{};
    std::array<double, 3> weights{1.0, 0.5, 0.25};
    double distance_threshold = 350.0;

    const std::array<double, 3>& at(PhonemeLabel label) const { return formants.at(index_of(label)); }

    // Throws ConfigError unless weights > 0, threshold > 0 and every entry
    // satisfies 0 < f1 < f2 < f3.
    void validate() const;
};

// Energy in the detection bands, normalized by total frame energy.
struct BandEnergies {
    double low = 0.0;      // 300-2500 Hz
    double sh_band = 0.0;  // 2500-3000 Hz
    double s_band = 0.0;   // 3000-4000 Hz
    double total = 0.0;    // raw full-spectrum energy
};

struct FormantConfig {
    // 0 selects default_model_order(sample_rate).
    int model_order = 0;
    double pre_emphasis = 0.97;
    double max_bandwidth_hz = 600.0;
    double min_formant_hz = 90.0;
};

struct ClassifierConfig {
    double fricative_margin = 1.0;
    FormantConfig formants;
};

struct TimedPhoneme {
    PhonemeLabel label = PhonemeLabel::IY;
    double start_s = 0.0;
    double end_s = 0.0;

    friend bool operator==(const TimedPhoneme&, const TimedPhoneme&) = default;
};

struct MonophthongMatch {
    PhonemeLabel label;
    double distance;
};

struct FrameLabel {
    std::size_t frame_index = 0;
    std::optional<PhonemeLabel> label;
};

// 12 at 16 kHz and 24 at 48 kHz, linear in between.
int default_model_order(int sample_rate);

// Autoregressive (LPC) fit of the pre-emphasized, Hann-tapered frame.
// Returns the three lowest qualifying resonances, or nullopt when fewer than
// three exist or the autocorrelation is singular.
std::optional<FormantFrame> estimate_formants(const Frame& frame, int model_order,
                                              const FormantConfig& config = {});

double formant_distance(const FormantFrame& formants, const std::array<double, 3>& reference,
                        const std::array<double, 3>& weights);

// Nearest monophthong by weighted Euclidean distance; ties go to the label
// listed first. nullopt if the best distance exceeds the table threshold.
std::optional<MonophthongMatch> classify_monophthong(const FormantFrame& formants,
                                                     const FormantReferenceTable& table);

BandEnergies band_energies(const Frame& frame);

std::optional<PhonemeLabel> classify_frame(const Frame& frame, const FormantReferenceTable& table,
                                           const ClassifierConfig& config = {});

// Collapses runs of adjacent frame indices sharing a label into one
// TimedPhoneme. Unlabeled frames and index gaps end a run.
std::vector<TimedPhoneme> merge_phonemes(std::span<const FrameLabel> labels, double window_s);

// Classifies every speech frame (in parallel) and merges the result.
std::vector<FrameLabel> label_frames(std::span<const Frame> frames, const FormantReferenceTable& table,
                                     const ClassifierConfig& config = {});

FormantReferenceTable parse_formant_table(std::istream& in, const std::string& source = "<stream>");
FormantReferenceTable load_formant_table(const std::filesystem::path& path);

// `start_s<TAB>end_s<TAB>SYMBOL`, one phoneme per line.
void write_timed_phonemes(std::ostream& out, std::span<const TimedPhoneme> phonemes);
std::vector<TimedPhoneme> read_timed_phonemes(std::istream& in, const std::string& source = "<stream>");

}  // namespace speechalign
