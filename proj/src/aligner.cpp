#include "speechalign/aligner.hpp"

#include <algorithm>
#include <future>
#include <istream>
#include <limits>
#include <ostream>

#include "speechalign/error.hpp"
#include "speechalign/text_io.hpp"

namespace speechalign {

namespace {

using Cost = std::int32_t;

// Sub-problems at or below this many cells are solved with the full table.
constexpr std::size_t kBaseCells = std::size_t{1} << 16;
// Forward and backward sweeps run concurrently above this many cells.
constexpr std::size_t kParallelCells = std::size_t{1} << 22;
constexpr std::size_t kQuadraticCellLimit = std::size_t{1} << 28;

struct Problem {
    std::span<const PhonemeLabel> speech;
    std::span<const PhonemeLabel> text;
    const AlignConfig& config;

    Cost diag(std::size_t i, std::size_t j) const {
        return speech[i] == text[j] ? config.copy_cost : config.replace_cost;
    }
};

void append(Alignment& out, EditKind kind, std::optional<std::size_t> si, std::optional<std::size_t> ti,
            const AlignConfig& config) {
    out.ops.push_back({kind, si, ti});
    out.score += op_cost(kind, config);
    switch (kind) {
        case EditKind::Copy: ++out.counts.copies; break;
        case EditKind::Delete: ++out.counts.deletions; break;
        case EditKind::Insert: ++out.counts.insertions; break;
        case EditKind::Replace: ++out.counts.replacements; break;
    }
}

// Suffix-cost table over speech[i0, i1) x text[j0, j1), then a greedy walk
// from the top-left corner that takes the highest-priority optimal op.
void solve_block(const Problem& p, std::size_t i0, std::size_t i1, std::size_t j0, std::size_t j1,
                 Alignment& out, LinearSpaceStats* stats) {
    const std::size_t n = i1 - i0;
    const std::size_t m = j1 - j0;
    const std::size_t width = m + 1;
    std::vector<Cost> h((n + 1) * width);
    if (stats) stats->peak_work_bytes = std::max(stats->peak_work_bytes, h.size() * sizeof(Cost));
    auto at = [&](std::size_t i, std::size_t j) -> Cost& { return h[i * width + j]; };

    const auto& c = p.config;
    at(n, m) = 0;
    for (std::size_t j = m; j-- > 0;) at(n, j) = at(n, j + 1) + c.insert_cost;
    for (std::size_t i = n; i-- > 0;) {
        at(i, m) = at(i + 1, m) + c.delete_cost;
        for (std::size_t j = m; j-- > 0;) {
            const Cost d = at(i + 1, j + 1) + p.diag(i0 + i, j0 + j);
            const Cost del = at(i + 1, j) + c.delete_cost;
            const Cost ins = at(i, j + 1) + c.insert_cost;
            at(i, j) = std::min({d, del, ins});
        }
    }

    std::size_t i = 0;
    std::size_t j = 0;
    while (i < n || j < m) {
        const Cost here = at(i, j);
        if (i < n && j < m) {
            const bool same = p.speech[i0 + i] == p.text[j0 + j];
            if (here == at(i + 1, j + 1) + p.diag(i0 + i, j0 + j)) {
                append(out, same ? EditKind::Copy : EditKind::Replace, i0 + i, j0 + j, c);
                ++i;
                ++j;
                continue;
            }
        }
        if (i < n && here == at(i + 1, j) + c.delete_cost) {
            append(out, EditKind::Delete, i0 + i, std::nullopt, c);
            ++i;
            continue;
        }
        append(out, EditKind::Insert, std::nullopt, j0 + j, c);
        ++j;
    }
}

// Costs of aligning speech[i0, mid) with every prefix of text[j0, j1).
void forward_by_speech(const Problem& p, std::size_t i0, std::size_t mid, std::size_t j0, std::size_t j1,
                       std::vector<Cost>& row) {
    const std::size_t m = j1 - j0;
    const auto& c = p.config;
    row[0] = 0;
    for (std::size_t j = 1; j <= m; ++j) row[j] = row[j - 1] + c.insert_cost;
    for (std::size_t i = i0; i < mid; ++i) {
        Cost diag = row[0];
        row[0] += c.delete_cost;
        const PhonemeLabel s = p.speech[i];
        for (std::size_t j = 1; j <= m; ++j) {
            const Cost up = row[j];
            const Cost sub = s == p.text[j0 + j - 1] ? c.copy_cost : c.replace_cost;
            row[j] = std::min({diag + sub, up + c.delete_cost, row[j - 1] + c.insert_cost});
            diag = up;
        }
    }
}

// Costs of aligning speech[mid, i1) with every suffix text[j0 + j, j1).
void backward_by_speech(const Problem& p, std::size_t mid, std::size_t i1, std::size_t j0, std::size_t j1,
                        std::vector<Cost>& row) {
    const std::size_t m = j1 - j0;
    const auto& c = p.config;
    row[m] = 0;
    for (std::size_t j = m; j-- > 0;) row[j] = row[j + 1] + c.insert_cost;
    for (std::size_t i = i1; i-- > mid;) {
        Cost diag = row[m];
        row[m] += c.delete_cost;
        const PhonemeLabel s = p.speech[i];
        for (std::size_t j = m; j-- > 0;) {
            const Cost down = row[j];
            const Cost sub = s == p.text[j0 + j] ? c.copy_cost : c.replace_cost;
            row[j] = std::min({diag + sub, down + c.delete_cost, row[j + 1] + c.insert_cost});
            diag = down;
        }
    }
}

// Costs of aligning every prefix of speech[i0, i1) with text[j0, mid).
void forward_by_text(const Problem& p, std::size_t i0, std::size_t i1, std::size_t j0, std::size_t mid,
                     std::vector<Cost>& col) {
    const std::size_t n = i1 - i0;
    const auto& c = p.config;
    col[0] = 0;
    for (std::size_t i = 1; i <= n; ++i) col[i] = col[i - 1] + c.delete_cost;
    for (std::size_t j = j0; j < mid; ++j) {
        Cost diag = col[0];
        col[0] += c.insert_cost;
        const PhonemeLabel t = p.text[j];
        for (std::size_t i = 1; i <= n; ++i) {
            const Cost left = col[i];
            const Cost sub = p.speech[i0 + i - 1] == t ? c.copy_cost : c.replace_cost;
            col[i] = std::min({diag + sub, left + c.insert_cost, col[i - 1] + c.delete_cost});
            diag = left;
        }
    }
}

// Costs of aligning every suffix speech[i0 + i, i1) with text[mid, j1).
void backward_by_text(const Problem& p, std::size_t i0, std::size_t i1, std::size_t mid, std::size_t j1,
                      std::vector<Cost>& col) {
    const std::size_t n = i1 - i0;
    const auto& c = p.config;
    col[n] = 0;
    for (std::size_t i = n; i-- > 0;) col[i] = col[i + 1] + c.delete_cost;
    for (std::size_t j = j1; j-- > mid;) {
        Cost diag = col[n];
        col[n] += c.insert_cost;
        const PhonemeLabel t = p.text[j];
        for (std::size_t i = n; i-- > 0;) {
            const Cost right = col[i];
            const Cost sub = p.speech[i0 + i] == t ? c.copy_cost : c.replace_cost;
            col[i] = std::min({diag + sub, right + c.insert_cost, col[i + 1] + c.delete_cost});
            diag = right;
        }
    }
}

// Index minimizing fwd + bwd; the last one wins ties.
std::size_t best_split(const std::vector<Cost>& fwd, const std::vector<Cost>& bwd, std::size_t len) {
    std::size_t best = 0;
    long long best_cost = std::numeric_limits<long long>::max();
    for (std::size_t k = 0; k <= len; ++k) {
        const long long total = static_cast<long long>(fwd[k]) + bwd[k];
        if (total <= best_cost) {
            best_cost = total;
            best = k;
        }
    }
    return best;
}

struct Workspace {
    std::vector<Cost> fwd;
    std::vector<Cost> bwd;
};

void solve(const Problem& p, std::size_t i0, std::size_t i1, std::size_t j0, std::size_t j1, Alignment& out,
           Workspace& ws, LinearSpaceStats* stats, std::size_t depth) {
    if (stats) stats->max_depth = std::max(stats->max_depth, depth);
    const std::size_t n = i1 - i0;
    const std::size_t m = j1 - j0;
    if (n == 0) {
        for (std::size_t j = j0; j < j1; ++j) append(out, EditKind::Insert, std::nullopt, j, p.config);
        return;
    }
    if (m == 0) {
        for (std::size_t i = i0; i < i1; ++i) append(out, EditKind::Delete, i, std::nullopt, p.config);
        return;
    }
    if (n * m <= kBaseCells || n == 1 || m == 1) {
        solve_block(p, i0, i1, j0, j1, out, stats);
        return;
    }

    const bool parallel = n * m >= kParallelCells;
    if (n >= m) {
        const std::size_t mid = i0 + n / 2;
        if (parallel) {
            auto job = std::async(std::launch::async, [&] { backward_by_speech(p, mid, i1, j0, j1, ws.bwd); });
            forward_by_speech(p, i0, mid, j0, j1, ws.fwd);
            job.get();
        } else {
            forward_by_speech(p, i0, mid, j0, j1, ws.fwd);
            backward_by_speech(p, mid, i1, j0, j1, ws.bwd);
        }
        const std::size_t split = j0 + best_split(ws.fwd, ws.bwd, m);
        solve(p, i0, mid, j0, split, out, ws, stats, depth + 1);
        solve(p, mid, i1, split, j1, out, ws, stats, depth + 1);
    } else {
        const std::size_t mid = j0 + m / 2;
        if (parallel) {
            auto job = std::async(std::launch::async, [&] { backward_by_text(p, i0, i1, mid, j1, ws.bwd); });
            forward_by_text(p, i0, i1, j0, mid, ws.fwd);
            job.get();
        } else {
            forward_by_text(p, i0, i1, j0, mid, ws.fwd);
            backward_by_text(p, i0, i1, mid, j1, ws.bwd);
        }
        const std::size_t split = i0 + best_split(ws.fwd, ws.bwd, n);
        solve(p, i0, split, j0, mid, out, ws, stats, depth + 1);
        solve(p, split, i1, mid, j1, out, ws, stats, depth + 1);
    }
}

}  // namespace

std::string_view to_string(EditKind kind) {
    switch (kind) {
        case EditKind::Copy: return "copy";
        case EditKind::Delete: return "delete";
        case EditKind::Insert: return "insert";
        case EditKind::Replace: return "replace";
    }
    return "?";
}

int op_cost(EditKind kind, const AlignConfig& config) {
    switch (kind) {
        case EditKind::Copy: return config.copy_cost;
        case EditKind::Delete: return config.delete_cost;
        case EditKind::Insert: return config.insert_cost;
        case EditKind::Replace: return config.replace_cost;
    }
    return 0;
}

Alignment align_quadratic(std::span<const PhonemeLabel> speech, std::span<const PhonemeLabel> text,
                          const AlignConfig& config) {
    if ((speech.size() + 1) * (text.size() + 1) > kQuadraticCellLimit) {
        throw InputError("align_quadratic: input too large for a full table, use align_linear_space");
    }
    Alignment out;
    out.ops.reserve(speech.size() + text.size());
    const Problem p{speech, text, config};
    solve_block(p, 0, speech.size(), 0, text.size(), out, nullptr);
    check_alignment(out, speech.size(), text.size(), config);
    return out;
}

Alignment align_linear_space(std::span<const PhonemeLabel> speech, std::span<const PhonemeLabel> text,
                             const AlignConfig& config, LinearSpaceStats* stats) {
    Alignment out;
    out.ops.reserve(speech.size() + text.size());
    const Problem p{speech, text, config};
    Workspace ws;
    const std::size_t shorter = std::min(speech.size(), text.size());
    ws.fwd.resize(shorter + 1);
    ws.bwd.resize(shorter + 1);
    if (stats) {
        *stats = {};
        stats->peak_work_bytes = 2 * (shorter + 1) * sizeof(Cost);
    }
    solve(p, 0, speech.size(), 0, text.size(), out, ws, stats, 0);
    if (stats) stats->peak_work_bytes = std::max(stats->peak_work_bytes, 2 * (shorter + 1) * sizeof(Cost));
    check_alignment(out, speech.size(), text.size(), config);
    return out;
}

void check_alignment(const Alignment& alignment, std::size_t speech_size, std::size_t text_size,
                     const AlignConfig& config) {
    EditCounts counts;
    long long score = 0;
    std::size_t next_speech = 0;
    std::size_t next_text = 0;
    for (const auto& op : alignment.ops) {
        const bool wants_speech = op.kind != EditKind::Insert;
        const bool wants_text = op.kind != EditKind::Delete;
        if (op.speech_index.has_value() != wants_speech || op.text_index.has_value() != wants_text) {
            throw InvariantError("edit op " + std::string(to_string(op.kind)) + " carries the wrong indices");
        }
        if (wants_speech && *op.speech_index != next_speech++) {
            throw InvariantError("speech indices are not consecutive across ops");
        }
        if (wants_text && *op.text_index != next_text++) {
            throw InvariantError("text indices are not consecutive across ops");
        }
        score += op_cost(op.kind, config);
        switch (op.kind) {
            case EditKind::Copy: ++counts.copies; break;
            case EditKind::Delete: ++counts.deletions; break;
            case EditKind::Insert: ++counts.insertions; break;
            case EditKind::Replace: ++counts.replacements; break;
        }
    }
    if (next_speech != speech_size || next_text != text_size) {
        throw InvariantError("alignment does not consume both sequences");
    }
    if (counts.copies + counts.deletions + counts.replacements != speech_size ||
        counts.copies + counts.insertions + counts.replacements != text_size) {
        throw InvariantError("edit counts violate the bookkeeping identities");
    }
    if (!(counts == alignment.counts)) throw InvariantError("stored edit counts do not match the ops");
    if (score != alignment.score) throw InvariantError("stored score does not match the ops");
}

std::vector<PhonemeLabel> labels_of(std::span<const TimedPhoneme> phonemes) {
    std::vector<PhonemeLabel> out;
    out.reserve(phonemes.size());
    for (const auto& p : phonemes) out.push_back(p.label);
    return out;
}

WordTiming assign_word_timestamps(const Alignment& alignment, std::span<const TimedPhoneme> speech_phonemes,
                                  std::span<const WordPhonemes> words, TimestampMode mode) {
    std::size_t text_total = 0;
    for (const auto& w : words) text_total += w.detectable.size();

    constexpr std::size_t kUnmatched = std::numeric_limits<std::size_t>::max();
    std::vector<std::size_t> matched(text_total, kUnmatched);
    for (const auto& op : alignment.ops) {
        if (op.speech_index && *op.speech_index >= speech_phonemes.size()) {
            throw InputError("alignment references speech phoneme " + std::to_string(*op.speech_index) +
                             " but only " + std::to_string(speech_phonemes.size()) + " exist");
        }
        if (op.text_index && *op.text_index >= text_total) {
            throw InputError("alignment references text phoneme " + std::to_string(*op.text_index) +
                             " but the words hold only " + std::to_string(text_total));
        }
        if ((op.kind == EditKind::Copy || op.kind == EditKind::Replace) && op.speech_index && op.text_index) {
            matched[*op.text_index] = *op.speech_index;
        }
    }

    WordTiming timing;
    timing.words.resize(words.size());
    std::vector<std::size_t> anchors;
    std::size_t offset = 0;
    std::vector<double> starts;
    for (std::size_t w = 0; w < words.size(); ++w) {
        auto& out = timing.words[w];
        out.word_index = words[w].token.word_index;
        out.surface = words[w].token.surface;
        starts.clear();
        for (std::size_t k = 0; k < words[w].detectable.size(); ++k) {
            if (matched[offset + k] != kUnmatched) starts.push_back(speech_phonemes[matched[offset + k]].start_s);
        }
        offset += words[w].detectable.size();
        out.matched_phoneme_count = starts.size();
        if (starts.empty()) continue;
        out.raw_timestamp_s = mode == TimestampMode::FirstMatch ? starts.front() : starts[(starts.size() - 1) / 2];
        anchors.push_back(w);
    }
    timing.anchored = anchors.size();

    for (std::size_t w = 0; w < words.size(); ++w) {
        auto& out = timing.words[w];
        if (out.matched_phoneme_count > 0) continue;
        out.interpolated = true;
        if (anchors.empty()) continue;
        const auto next = std::upper_bound(anchors.begin(), anchors.end(), w);
        if (next == anchors.begin()) {
            out.raw_timestamp_s = timing.words[anchors.front()].raw_timestamp_s;
        } else if (next == anchors.end()) {
            out.raw_timestamp_s = timing.words[anchors.back()].raw_timestamp_s;
        } else {
            const auto& a = timing.words[*(next - 1)];
            const auto& b = timing.words[*next];
            const double span = static_cast<double>(b.word_index) - static_cast<double>(a.word_index);
            const double frac = (static_cast<double>(out.word_index) - static_cast<double>(a.word_index)) / span;
            out.raw_timestamp_s = a.raw_timestamp_s + frac * (b.raw_timestamp_s - a.raw_timestamp_s);
        }
    }

    for (std::size_t w = 0; w < timing.words.size(); ++w) {
        auto& out = timing.words[w];
        out.timestamp_s = out.raw_timestamp_s;
        if (w > 0 && out.timestamp_s < timing.words[w - 1].timestamp_s) {
            out.timestamp_s = timing.words[w - 1].timestamp_s;
            ++timing.monotonic_clamps;
        }
    }
    return timing;
}

void write_aligned_words(std::ostream& out, std::span<const AlignedWord> words) {
    for (const auto& w : words) {
        out << w.word_index << '\t' << format_fixed(w.timestamp_s, 6) << '\t' << (w.interpolated ? 1 : 0) << '\t'
            << w.surface << '\n';
    }
}

std::vector<AlignedWord> read_aligned_words(std::istream& in, const std::string& source) {
    std::vector<AlignedWord> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split(line, '\t');
        if (fields.size() != 4) {
            throw ParseError(source, line_no, "expected 'word_index<TAB>timestamp_s<TAB>interpolated<TAB>surface'");
        }
        AlignedWord w;
        try {
            const long long index = parse_integer(fields[0]);
            if (index < 0) throw std::invalid_argument("negative word index");
            w.word_index = static_cast<std::size_t>(index);
            w.timestamp_s = parse_double(fields[1]);
        } catch (const std::invalid_argument& e) {
            throw ParseError(source, line_no, e.what());
        }
        if (fields[2] != "0" && fields[2] != "1") throw ParseError(source, line_no, "interpolated flag must be 0 or 1");
        w.interpolated = fields[2] == "1";
        w.raw_timestamp_s = w.timestamp_s;
        w.surface = std::string(fields[3]);
        if (!out.empty() && w.word_index <= out.back().word_index) {
            throw ParseError(source, line_no, "word indices must be strictly increasing");
        }
        out.push_back(std::move(w));
    }
    return out;
}

}  // namespace speechalign
