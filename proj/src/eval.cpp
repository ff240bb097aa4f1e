#include "speechalign/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "speechalign/error.hpp"
#include "speechalign/text_io.hpp"

namespace speechalign {

void validate_markers(std::span<const GroundTruthMarker> markers) {
    for (std::size_t i = 1; i < markers.size(); ++i) {
        if (!(markers[i].time_s > markers[i - 1].time_s) || markers[i].word_index <= markers[i - 1].word_index) {
            throw InputError("ground-truth markers must strictly increase in time and word index (marker " +
                             std::to_string(i) + ")");
        }
    }
}

std::vector<double> interpolate_truth(std::span<const GroundTruthMarker> markers, std::size_t total_words) {
    if (markers.size() < 2) throw InputError("at least two ground-truth markers are required");
    validate_markers(markers);
    if (markers.back().word_index >= total_words) {
        throw InputError("marker word index " + std::to_string(markers.back().word_index) + " exceeds word count " +
                         std::to_string(total_words));
    }
    std::vector<double> truth(total_words);
    std::size_t seg = 0;
    for (std::size_t w = 0; w < total_words; ++w) {
        if (w <= markers.front().word_index) {
            truth[w] = markers.front().time_s;
            continue;
        }
        if (w >= markers.back().word_index) {
            truth[w] = markers.back().time_s;
            continue;
        }
        while (markers[seg + 1].word_index < w) ++seg;
        const auto& a = markers[seg];
        const auto& b = markers[seg + 1];
        const double frac = static_cast<double>(w - a.word_index) / static_cast<double>(b.word_index - a.word_index);
        truth[w] = a.time_s + frac * (b.time_s - a.time_s);
    }
    return truth;
}

double ErrorCurve::at(double margin_s) const {
    for (std::size_t i = 0; i < margins_s.size(); ++i) {
        if (std::abs(margins_s[i] - margin_s) < 1e-9) return fraction_within[i];
    }
    throw std::out_of_range("margin " + format_fixed(margin_s, 3) + " s is not on the curve");
}

std::vector<double> default_margins() {
    std::vector<double> m;
    for (int s = 1; s <= 100; ++s) m.push_back(s);
    return m;
}

namespace {

Evaluation evaluate(std::span<const AlignedWord> aligned, std::span<const double> truth,
                    std::span<const double> margins, bool raw) {
    Evaluation ev;
    ev.errors.reserve(aligned.size());
    ev.trace.reserve(aligned.size());
    double sum = 0.0;
    for (const auto& w : aligned) {
        if (w.word_index >= truth.size()) {
            throw InputError("aligned word " + std::to_string(w.word_index) + " has no ground-truth time (" +
                             std::to_string(truth.size()) + " words covered)");
        }
        const double t = raw ? w.raw_timestamp_s : w.timestamp_s;
        const double err = std::abs(t - truth[w.word_index]);
        ev.errors.push_back(err);
        ev.trace.push_back({truth[w.word_index], err});
        sum += err;
        ev.max_error_s = std::max(ev.max_error_s, err);
    }
    ev.mean_error_s = aligned.empty() ? 0.0 : sum / static_cast<double>(aligned.size());

    std::vector<double> sorted = ev.errors;
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> sorted_margins(margins.begin(), margins.end());
    std::sort(sorted_margins.begin(), sorted_margins.end());
    ev.curve.margins_s = sorted_margins;
    for (double m : sorted_margins) {
        const auto within = std::upper_bound(sorted.begin(), sorted.end(), m) - sorted.begin();
        ev.curve.fraction_within.push_back(sorted.empty() ? 0.0
                                                          : static_cast<double>(within) / static_cast<double>(sorted.size()));
    }
    return ev;
}

}  // namespace

Evaluation error_curve(std::span<const AlignedWord> aligned, std::span<const double> truth,
                       std::span<const double> margins) {
    return evaluate(aligned, truth, margins, false);
}

Evaluation error_curve_raw(std::span<const AlignedWord> aligned, std::span<const double> truth,
                           std::span<const double> margins) {
    return evaluate(aligned, truth, margins, true);
}

double WerResult::rate() const {
    if (reference_length == 0) return errors() == 0 ? 0.0 : std::numeric_limits<double>::infinity();
    return static_cast<double>(errors()) / static_cast<double>(reference_length);
}

WerResult word_error_rate(std::span<const std::string> reference, std::span<const std::string> hypothesis) {
    const std::size_t n = reference.size();
    const std::size_t m = hypothesis.size();
    // Full table with backtrace; transcripts are at most a few thousand words per side.
    std::vector<std::uint32_t> d((n + 1) * (m + 1));
    auto at = [&](std::size_t i, std::size_t j) -> std::uint32_t& { return d[i * (m + 1) + j]; };
    for (std::size_t i = 0; i <= n; ++i) at(i, 0) = static_cast<std::uint32_t>(i);
    for (std::size_t j = 0; j <= m; ++j) at(0, j) = static_cast<std::uint32_t>(j);
    for (std::size_t i = 1; i <= n; ++i) {
        for (std::size_t j = 1; j <= m; ++j) {
            const std::uint32_t sub = at(i - 1, j - 1) + (reference[i - 1] == hypothesis[j - 1] ? 0u : 1u);
            at(i, j) = std::min({sub, at(i - 1, j) + 1u, at(i, j - 1) + 1u});
        }
    }
    WerResult r;
    r.reference_length = n;
    std::size_t i = n;
    std::size_t j = m;
    while (i > 0 || j > 0) {
        if (i > 0 && j > 0 && at(i, j) == at(i - 1, j - 1) + (reference[i - 1] == hypothesis[j - 1] ? 0u : 1u)) {
            if (reference[i - 1] != hypothesis[j - 1]) ++r.substitutions;
            --i;
            --j;
        } else if (i > 0 && at(i, j) == at(i - 1, j) + 1u) {
            ++r.deletions;
            --i;
        } else {
            ++r.insertions;
            --j;
        }
    }
    return r;
}

std::vector<std::string> words_of(std::string_view text) {
    std::vector<std::string> out;
    for (auto& t : expand_tokens(tokenize(text))) out.push_back(std::move(t.normalized));
    return out;
}

void CorruptionConfig::validate() const {
    auto prob = [](double p, const char* name) {
        if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(std::string(name) + " must lie in [0, 1]");
    };
    prob(p_word_drop, "p_word_drop");
    prob(p_word_substitute, "p_word_substitute");
    prob(p_phoneme_noise, "p_phoneme_noise");
    if (p_word_drop + p_word_substitute > 1.0 + 1e-12) {
        throw ConfigError("p_word_drop + p_word_substitute must not exceed 1");
    }
    for (const auto& g : silence_gaps) {
        if (!(g.start_s >= 0.0) || !(g.duration_s > 0.0)) throw ConfigError("silence gaps need start >= 0 and duration > 0");
    }
    if (!(gap_interval_s >= 0.0) || !(gap_duration_s >= 0.0)) {
        throw ConfigError("gap_interval_s and gap_duration_s must be non-negative");
    }
}

void SynthesisProfile::validate() const {
    if (!(phonemes_per_s > 0.0)) throw ConfigError("phonemes_per_s must be positive");
    if (duplication < 1) throw ConfigError("duplication must be at least 1");
    if (!(duration_jitter >= 0.0 && duration_jitter < 1.0)) throw ConfigError("duration_jitter must lie in [0, 1)");
    if (!(marker_interval_s > 0.0)) throw ConfigError("marker_interval_s must be positive");
}

std::vector<std::string> load_vocabulary(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError(path.string() + ": cannot open vocabulary");
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.starts_with('#')) continue;
        const auto fields = split_whitespace(line);
        if (!fields.empty()) out.emplace_back(fields[0]);
    }
    if (out.empty()) throw InputError(path.string() + ": empty vocabulary");
    return out;
}

void write_markers(std::ostream& out, std::span<const GroundTruthMarker> markers) {
    for (const auto& m : markers) out << format_fixed(m.time_s, 6) << '\t' << m.word_index << '\n';
}

std::vector<GroundTruthMarker> read_markers(std::istream& in, const std::string& source) {
    std::vector<GroundTruthMarker> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto body = trim(line);
        if (body.empty() || body.starts_with('#')) continue;
        const auto fields = split_whitespace(body);
        if (fields.size() != 2) throw ParseError(source, line_no, "expected 'time_s<TAB>word_index'");
        GroundTruthMarker m;
        try {
            m.time_s = parse_double(fields[0]);
            const long long w = parse_integer(fields[1]);
            if (w < 0) throw std::invalid_argument("negative word index");
            m.word_index = static_cast<std::size_t>(w);
        } catch (const std::invalid_argument& e) {
            throw ParseError(source, line_no, e.what());
        }
        if (!out.empty() && (!(m.time_s > out.back().time_s) || m.word_index <= out.back().word_index)) {
            throw ParseError(source, line_no, "markers must strictly increase in time and word index");
        }
        out.push_back(m);
    }
    return out;
}

std::vector<GroundTruthMarker> markers_from_transcript(std::string_view text) {
    const auto inline_markers = extract_inline_markers(text);
    const auto words = expand_tokens(tokenize(text));
    std::vector<GroundTruthMarker> out;
    for (const auto& m : inline_markers) {
        const auto it = std::find_if(words.begin(), words.end(),
                                     [&](const WordToken& w) { return w.char_offset >= m.char_offset; });
        if (it == words.end()) {
            throw InputError("marker [t=" + format_fixed(m.time_s, 3) + "] is not followed by a word");
        }
        out.push_back({m.time_s, it->word_index});
    }
    validate_markers(out);
    return out;
}

void write_curve_csv(std::ostream& out, const ErrorCurve& curve) {
    out << "margin_s,fraction\n";
    for (std::size_t i = 0; i < curve.margins_s.size(); ++i) {
        out << format_fixed(curve.margins_s[i], 3) << ',' << format_fixed(curve.fraction_within[i], 6) << '\n';
    }
}

void write_trace_csv(std::ostream& out, std::span<const ErrorTracePoint> trace) {
    out << "audio_time_s,error_s\n";
    for (const auto& p : trace) out << format_fixed(p.audio_time_s, 3) << ',' << format_fixed(p.error_s, 3) << '\n';
}

}  // namespace speechalign
