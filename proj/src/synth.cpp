#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "speechalign/error.hpp"
#include "speechalign/eval.hpp"

namespace speechalign {

namespace {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // 53-bit uniform in [0, 1), independent of the standard library's distributions.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double symmetric() { return 2.0 * uniform() - 1.0; }
    std::size_t below(std::size_t n) { return std::min(n - 1, static_cast<std::size_t>(uniform() * static_cast<double>(n))); }

private:
    std::mt19937_64 engine_;
};

struct Candidate {
    std::string word;
    std::size_t length;
};

// Substitute pool keyed by first detectable label; key kPhonemeCount holds
// words without detectable phonemes.
using CandidatePool = std::map<std::size_t, std::vector<Candidate>>;

std::string to_lower_ascii(std::string_view s) {
    std::string out(s);
    for (auto& c : out) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return out;
}

std::size_t pool_key(const std::vector<PhonemeLabel>& detectable) {
    return detectable.empty() ? kPhonemeCount : index_of(detectable.front());
}

CandidatePool build_pool(std::span<const std::string> vocabulary, const PronouncingDictionary& dict,
                         const SubstitutionMap& subs) {
    std::vector<std::string> words;
    if (vocabulary.empty()) {
        words.reserve(dict.size());
        for (const auto& [w, _] : dict.entries()) words.push_back(w);
        std::sort(words.begin(), words.end());
    } else {
        words.assign(vocabulary.begin(), vocabulary.end());
    }
    CandidatePool pool;
    for (const auto& w : words) {
        const auto* pron = dict.find(w);
        if (pron == nullptr) continue;
        std::vector<PhonemeLabel> det;
        try {
            det = to_detectable(*pron, subs);
        } catch (const InputError&) {
            continue;
        }
        pool[pool_key(det)].push_back({to_upper_ascii(w), det.size()});
    }
    return pool;
}

std::string pick_substitute(const CandidatePool& pool, const WordPhonemes& original, Rng& rng) {
    const auto it = pool.find(pool_key(original.detectable));
    const std::vector<Candidate>* bucket = it == pool.end() ? nullptr : &it->second;
    if (bucket == nullptr || bucket->empty()) {
        // Fall back to any bucket, scanned in key order.
        for (const auto& [_, b] : pool) {
            if (!b.empty()) {
                bucket = &b;
                break;
            }
        }
    }
    if (bucket == nullptr) return original.token.normalized;
    const Candidate* chosen = nullptr;
    for (int attempt = 0; attempt < 8; ++attempt) {
        const auto& c = (*bucket)[rng.below(bucket->size())];
        if (c.word == original.token.normalized) continue;
        chosen = &c;
        const auto diff = c.length > original.detectable.size() ? c.length - original.detectable.size()
                                                                : original.detectable.size() - c.length;
        if (diff <= 1) break;
    }
    return chosen == nullptr ? original.token.normalized : chosen->word;
}

PhonemeLabel noisy_label(PhonemeLabel label, double p, Rng& rng) {
    if (p <= 0.0 || rng.uniform() >= p) return label;
    const auto other = rng.below(kPhonemeCount - 1);
    const auto idx = other >= index_of(label) ? other + 1 : other;
    return kAllPhonemes[idx];
}

}  // namespace

Benchmark synthesize_benchmark(std::string_view reference_text, const CorruptionConfig& config,
                               const PronouncingDictionary& dict, const SubstitutionMap& subs,
                               const SynthesisProfile& profile, std::span<const std::string> vocabulary) {
    config.validate();
    profile.validate();
    const auto words = phonemize(reference_text, dict, subs);
    std::size_t total_detectable = 0;
    for (const auto& w : words) total_detectable += w.detectable.size();
    if (words.empty() || total_detectable == 0) {
        throw InputError("reference text has no detectable phonemes");
    }

    Rng rng(config.rng_seed);
    Benchmark bench;
    bench.reference_words = words.size();

    const double mean_per_word = static_cast<double>(total_detectable) / static_cast<double>(words.size());
    const double word_duration = profile.duplication * mean_per_word / profile.phonemes_per_s;

    std::vector<SilenceGap> pending = config.silence_gaps;
    std::sort(pending.begin(), pending.end(), [](const auto& a, const auto& b) { return a.start_s < b.start_s; });
    std::size_t next_explicit = 0;
    const bool periodic = pending.empty() && config.gap_interval_s > 0.0 && config.gap_duration_s > 0.0;
    double next_periodic = config.gap_interval_s;

    std::vector<double> word_start(words.size());
    std::vector<bool> gap_after(words.size(), false);
    double cursor = 0.0;
    double spoken = 0.0;
    for (std::size_t i = 0; i < words.size(); ++i) {
        // Gaps open at word boundaries only.
        if (i > 0) {
            double inserted = 0.0;
            while (next_explicit < pending.size() && cursor >= pending[next_explicit].start_s) {
                inserted += pending[next_explicit++].duration_s;
            }
            if (periodic && spoken >= next_periodic) {
                inserted += config.gap_duration_s;
                next_periodic += config.gap_interval_s;
            }
            if (inserted > 0.0) {
                bench.gaps.push_back({cursor, inserted});
                gap_after[i - 1] = true;
                cursor += inserted;
            }
        }
        word_start[i] = cursor;
        const double dur = word_duration * (1.0 + profile.duration_jitter * rng.symmetric());
        const auto& det = words[i].detectable;
        if (!det.empty()) {
            std::vector<double> parts(det.size());
            double sum = 0.0;
            for (auto& p : parts) {
                p = 1.0 + profile.duration_jitter * rng.symmetric();
                sum += p;
            }
            double t = cursor;
            for (std::size_t k = 0; k < det.size(); ++k) {
                const double seg = dur * parts[k] / sum / profile.duplication;
                for (int d = 0; d < profile.duplication; ++d) {
                    const PhonemeLabel label = noisy_label(det[k], config.p_phoneme_noise, rng);
                    bench.speech.push_back({label, t, t + seg});
                    t += seg;
                }
            }
        }
        cursor += dur;
        spoken += dur;
    }
    bench.duration_s = cursor;

    const auto pool = build_pool(vocabulary, dict, subs);
    std::vector<std::string> out_words;
    std::vector<bool> before_gap;
    for (std::size_t i = 0; i < words.size(); ++i) {
        const double u = rng.uniform();
        if (u < config.p_word_drop) {
            if (gap_after[i] && !before_gap.empty()) before_gap.back() = true;
            continue;
        }
        if (u < config.p_word_drop + config.p_word_substitute) {
            out_words.push_back(to_lower_ascii(pick_substitute(pool, words[i], rng)));
        } else {
            out_words.push_back(to_lower_ascii(words[i].token.normalized));
        }
        bench.corrupted_word_times.push_back(word_start[i]);
        before_gap.push_back(gap_after[i]);
    }

    std::string text;
    for (std::size_t i = 0; i < out_words.size(); ++i) {
        if (i > 0) text += (i % 20 == 0) ? '\n' : ' ';
        text += out_words[i];
    }
    if (!text.empty()) text += '\n';
    bench.corrupted_transcript = std::move(text);

    // Markers at every interval boundary, at the last word before each gap,
    // and at the final word, so interpolation never spans a silence.
    const auto& times = bench.corrupted_word_times;
    std::vector<std::size_t> marked;
    std::size_t w = 0;
    for (double b = 0.0; w < times.size(); b += profile.marker_interval_s) {
        while (w < times.size() && times[w] < b) {
            if (before_gap[w]) marked.push_back(w);
            ++w;
        }
        if (w < times.size()) marked.push_back(w);
    }
    if (!times.empty()) marked.push_back(times.size() - 1);
    std::sort(marked.begin(), marked.end());
    marked.erase(std::unique(marked.begin(), marked.end()), marked.end());
    for (auto idx : marked) {
        if (!bench.truth_markers.empty() && !(times[idx] > bench.truth_markers.back().time_s)) continue;
        bench.truth_markers.push_back({times[idx], idx});
    }
    return bench;
}

}  // namespace speechalign
