#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "speechalign/phoneme.hpp"
#include "speechalign/phoneme_audio.hpp"
#include "speechalign/phoneme_text.hpp"

namespace speechalign {

enum class TimestampMode : std::uint8_t {
    FirstMatch,   // start of the speech phoneme matched to the word's first aligned text phoneme
    MedianMatch,  // median start over all of the word's matched speech phonemes
};

// Per-operation costs. Copy and delete consume speech phonemes at -1; insert
// and replace cost +1. The alignment minimizes the total.
struct AlignConfig {
    int copy_cost = -1;
    int delete_cost = -1;
    int insert_cost = 1;
    int replace_cost = 1;
    TimestampMode timestamp_mode = TimestampMode::FirstMatch;
};

enum class EditKind : std::uint8_t { Copy, Delete, Insert, Replace };

std::string_view to_string(EditKind kind);

// Copy/Replace carry both indices, Delete only the speech index, Insert only
// the text index.
struct EditOp {
    EditKind kind = EditKind::Copy;
    std::optional<std::size_t> speech_index;
    std::optional<std::size_t> text_index;

    friend bool operator==(const EditOp&, const EditOp&) = default;
};

struct EditCounts {
    std::size_t copies = 0;
    std::size_t deletions = 0;
    std::size_t insertions = 0;
    std::size_t replacements = 0;

    friend bool operator==(const EditCounts&, const EditCounts&) = default;
};

struct Alignment {
    std::vector<EditOp> ops;
    long long score = 0;
    EditCounts counts;
};

int op_cost(EditKind kind, const AlignConfig& config);

// Full dynamic-programming table with traceback. Among optimal edit scripts
// it returns the one whose op sequence is lexicographically smallest under
// Copy < Replace < Delete < Insert. Meant for small inputs and as the
// reference for align_linear_space.
Alignment align_quadratic(std::span<const PhonemeLabel> speech, std::span<const PhonemeLabel> text,
                          const AlignConfig& config = {});

struct LinearSpaceStats {
    std::size_t peak_work_bytes = 0;  // largest DP working set held at once
    std::size_t max_depth = 0;
};

// Divide-and-conquer alignment in memory linear in the shorter sequence.
// Same optimal score as align_quadratic.
Alignment align_linear_space(std::span<const PhonemeLabel> speech, std::span<const PhonemeLabel> text,
                             const AlignConfig& config = {}, LinearSpaceStats* stats = nullptr);

// Throws InvariantError unless the bookkeeping identities hold, indices
// advance monotonically without gaps, and score equals the summed op costs.
void check_alignment(const Alignment& alignment, std::size_t speech_size, std::size_t text_size,
                     const AlignConfig& config);

struct AlignedWord {
    std::size_t word_index = 0;
    std::string surface;
    double timestamp_s = 0.0;
    double raw_timestamp_s = 0.0;  // before the monotonic clamp
    std::size_t matched_phoneme_count = 0;
    bool interpolated = false;
};

struct WordTiming {
    std::vector<AlignedWord> words;
    std::size_t anchored = 0;
    std::size_t monotonic_clamps = 0;

    double anchored_fraction() const {
        return words.empty() ? 0.0 : static_cast<double>(anchored) / static_cast<double>(words.size());
    }
};

// Maps matched phonemes back to words. Words without a Copy/Replace match
// are interpolated by word index between anchored neighbours and held
// constant beyond the first/last anchor; a final pass makes timestamps
// non-decreasing.
WordTiming assign_word_timestamps(const Alignment& alignment, std::span<const TimedPhoneme> speech_phonemes,
                                  std::span<const WordPhonemes> words,
                                  TimestampMode mode = TimestampMode::FirstMatch);

std::vector<PhonemeLabel> labels_of(std::span<const TimedPhoneme> phonemes);

// `word_index<TAB>timestamp_s<TAB>interpolated(0|1)<TAB>surface`
void write_aligned_words(std::ostream& out, std::span<const AlignedWord> words);
std::vector<AlignedWord> read_aligned_words(std::istream& in, const std::string& source = "<stream>");

}  // namespace speechalign
