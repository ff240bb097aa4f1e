// Acceptance checks; prints one PASS/FAIL line per criterion.

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "speechalign/aligner.hpp"
#include "speechalign/audio_ingest.hpp"
#include "speechalign/cli.hpp"
#include "speechalign/eval.hpp"
#include "speechalign/phoneme_audio.hpp"
#include "speechalign/phoneme_text.hpp"
#include "speechalign/text_io.hpp"
#include "test_support.hpp"

using namespace speechalign;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// Peak resident set in kB, from /proc/self/status.
long vm_hwm_kb() {
    std::ifstream in("/proc/self/status");
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind("VmHWM:", 0) == 0) return std::stol(line.substr(6));
    }
    return -1;
}

long vm_rss_kb() {
    std::ifstream in("/proc/self/status");
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind("VmRSS:", 0) == 0) return std::stol(line.substr(6));
    }
    return -1;
}

void reset_peak_rss() {
    std::ofstream clear("/proc/self/clear_refs");
    if (clear) clear << "5";
}

int cli(std::vector<std::string> args) {
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::run(args, out, err);
    if (code != 0) std::cerr << err.str();
    return code;
}

json read_json(const std::filesystem::path& p) { return json::parse(read_file(p)); }

bool curve_monotone(const json& curve) {
    double prev = -1.0;
    for (const auto& point : curve) {
        const double f = point["fraction"].get<double>();
        if (f < prev || f < 0.0 || f > 1.0) return false;
        prev = f;
    }
    return true;
}

Outcome scale() {
    std::mt19937 rng(2024);
    const auto speech = oracle::random_labels(rng, 64265);
    const auto text = oracle::random_labels(rng, 27645);
    reset_peak_rss();
    const long base_kb = std::max(vm_hwm_kb(), vm_rss_kb());
    const auto t0 = Clock::now();
    LinearSpaceStats stats;
    const auto a = align_linear_space(speech, text, {}, &stats);
    const double elapsed = seconds_since(t0);
    const long peak_kb = vm_hwm_kb();
    check_alignment(a, speech.size(), text.size(), {});
    const double delta_mb = static_cast<double>(peak_kb - base_kb) / 1024.0;
    const double work_mb = static_cast<double>(stats.peak_work_bytes) / (1024.0 * 1024.0);
    Outcome o;
    o.pass = elapsed < 120.0 && delta_mb < 100.0 && work_mb < 100.0;
    o.detail = format_fixed(elapsed, 1) + " s, peak RSS +" + format_fixed(delta_mb, 1) + " MB, DP working set " +
               format_fixed(work_mb, 2) + " MB";
    return o;
}

Outcome bookkeeping() {
    std::mt19937 rng(1);
    std::uniform_int_distribution<std::size_t> ls(0, 500);
    std::uniform_int_distribution<std::size_t> lt(0, 200);
    const auto t0 = Clock::now();
    std::size_t bad = 0;
    for (int run = 0; run < 1000; ++run) {
        const auto s = oracle::random_labels(rng, ls(rng));
        const auto t = oracle::random_labels(rng, lt(rng));
        const auto a = align_linear_space(s, t);
        const auto& c = a.counts;
        if (c.copies + c.deletions + c.replacements != s.size() || c.copies + c.insertions + c.replacements != t.size()) {
            ++bad;
        }
    }
    const double elapsed = seconds_since(t0);
    return {bad == 0 && elapsed < 10.0, "1000 pairs, " + std::to_string(bad) + " violations, " + format_fixed(elapsed, 2) + " s"};
}

Outcome optimality() {
    std::mt19937 rng(2);
    std::uniform_int_distribution<std::size_t> ls(0, 10);
    std::uniform_int_distribution<std::size_t> lt(0, 6);
    std::uniform_int_distribution<int> alphabet(2, 12);
    const AlignConfig cfg;
    const auto t0 = Clock::now();
    std::size_t bad = 0;
    const int cases = 1500;
    for (int run = 0; run < cases; ++run) {
        const auto s = oracle::random_labels(rng, ls(rng), alphabet(rng));
        const auto t = oracle::random_labels(rng, lt(rng), alphabet(rng));
        const auto best = oracle::enumerate_scripts(s, t, cfg.copy_cost, cfg.delete_cost, cfg.insert_cost, cfg.replace_cost).best;
        if (align_quadratic(s, t).score != best || align_linear_space(s, t).score != best) ++bad;
    }
    const double elapsed = seconds_since(t0);
    return {bad == 0 && elapsed < 60.0,
            std::to_string(cases) + " pairs, " + std::to_string(bad) + " mismatches, " + format_fixed(elapsed, 2) + " s"};
}

Outcome phonemizer() {
    using PL = PhonemeLabel;
    const auto dict = PronouncingDictionary::load(test_support::data_dir() / "cmudict.dict");
    const auto words = phonemize("beet boy resign", dict);
    bool ok = words.size() == 3 && words[0].detectable == std::vector<PL>{PL::IY} &&
              words[1].detectable == std::vector<PL>{PL::AO} &&
              words[2].detectable == std::vector<PL>{PL::IH, PL::S, PL::AH};
    const auto& subs = SubstitutionMap::standard();
    const std::pair<const char*, const char*> rules[] = {{"AW", "AH"}, {"AY", "AH"}, {"EY", "AE"}, {"OW", "UH"},
                                                         {"OY", "AO"}, {"Z", "S"},   {"CH", "SH"}};
    ok = ok && subs.rules().size() == 7;
    for (const auto& [from, to] : rules) ok = ok && subs.apply(from) == to;
    bool idempotent = true;
    for (const auto& [symbol, pron] : dict.entries()) {
        for (const auto& p : pron) {
            const auto once = std::string(subs.apply(p));
            idempotent = idempotent && subs.apply(once) == once;
        }
    }
    return {ok && idempotent, std::string("conversions and rules ") + (ok ? "exact" : "wrong") + ", idempotent " +
                                  (idempotent ? "yes" : "no")};
}

Outcome detector() {
    const auto t0 = Clock::now();
    const int rate = 16000;
    const auto table = load_formant_table(test_support::data_dir() / "formants_en.txt");
    const VadConfig vad;
    Outcome o;
    double worst_vowel = 1.0;
    for (std::size_t v = 0; v < kMonophthongCount; ++v) {
        const auto label = kAllPhonemes[v];
        const auto& f = table.at(label);
        std::size_t frames_total = 0;
        std::size_t correct = 0;
        for (double f0 : {100.0, 125.0, 150.0}) {
            AudioBuffer audio{oracle::synthesize_vowel(f[0], f[1], f[2], 1.0, rate, f0, static_cast<std::uint32_t>(v + f0)), rate};
            const auto frames = filter_speech(frame_signal(audio), vad);
            for (const auto& fr : frames) {
                ++frames_total;
                if (fr.is_speech && classify_frame(fr, table) == label) ++correct;
            }
        }
        const double frac = frames_total ? static_cast<double>(correct) / frames_total : 0.0;
        worst_vowel = std::min(worst_vowel, frac);
    }
    double worst_fric = 1.0;
    for (auto [lo, hi, label] : {std::tuple{3000.0, 4000.0, PhonemeLabel::S}, std::tuple{2500.0, 3000.0, PhonemeLabel::SH}}) {
        AudioBuffer audio{oracle::band_noise(lo, hi, 3.0, rate, 5), rate};
        const auto frames = frame_signal(audio);
        const double floor = energy_floor(frames, vad);
        std::size_t above = 0;
        std::size_t correct = 0;
        for (const auto& fr : frames) {
            if (fr.rms_energy < floor) continue;
            ++above;
            if (classify_frame(fr, table) == label) ++correct;
        }
        worst_fric = std::min(worst_fric, above ? static_cast<double>(correct) / above : 0.0);
    }
    const double elapsed = seconds_since(t0);
    o.pass = worst_vowel >= 0.95 && worst_fric >= 0.99 && elapsed < 60.0;
    o.detail = "worst vowel " + format_fixed(worst_vowel, 3) + ", worst fricative " + format_fixed(worst_fric, 3) + ", " +
               format_fixed(elapsed, 2) + " s";
    return o;
}

const std::vector<std::string> kNoiseless = {"--set", "corruption.p_word_drop=0",
                                             "--set", "corruption.p_word_substitute=0",
                                             "--set", "corruption.p_phoneme_noise=0",
                                             "--set", "corruption.gap_interval_s=0"};

Outcome noiseless(const test_support::TempDir& dir, std::vector<json>& curves) {
    std::vector<std::string> args = {"--deterministic", "--out", (dir / "noiseless").string()};
    args.insert(args.end(), kNoiseless.begin(), kNoiseless.end());
    args.push_back("bench");
    args.push_back((test_support::data_dir() / "bench_corpus.txt").string());
    if (cli(args) != 0) return {false, "bench failed"};
    const auto m = read_json(dir / "noiseless" / "metrics.json");
    curves.push_back(m["curve"]);
    const double within = m["fraction_within_1s"].get<double>();
    const double avg = m["avg_matching_error_s"].get<double>();
    return {within == 1.0 && avg < 0.2, "within 1 s " + format_fixed(within, 4) + ", avg error " + format_fixed(avg, 4) + " s"};
}

Outcome default_corruption(const test_support::TempDir& dir, std::vector<json>& curves) {
    const auto t0 = Clock::now();
    double wer_lo = 1.0;
    double wer_hi = 0.0;
    std::array<double, 3> sum{};
    for (int seed = 1; seed <= 5; ++seed) {
        const auto out = dir / ("seed" + std::to_string(seed));
        if (cli({"--deterministic", "--out", out.string(), "--set", "corruption.rng_seed=" + std::to_string(seed), "bench",
                 (test_support::data_dir() / "bench_corpus.txt").string()}) != 0) {
            return {false, "bench failed for seed " + std::to_string(seed)};
        }
        const auto report = read_json(out / "bench_report.json");
        if (report["duration_s"].get<double>() < 1800.0) return {false, "corpus shorter than 30 minutes"};
        const double wer = report["word_error_rate"].get<double>();
        wer_lo = std::min(wer_lo, wer);
        wer_hi = std::max(wer_hi, wer);
        for (std::size_t i = 0; i < 3; ++i) sum[i] += report["targets"][i]["achieved"].get<double>();
        curves.push_back(read_json(out / "metrics.json")["curve"]);
    }
    const double elapsed = seconds_since(t0);
    const std::array<double, 3> need{0.45, 0.60, 0.75};
    bool ok = wer_lo >= 0.6 && wer_hi <= 0.8 && elapsed < 300.0;
    std::string fr;
    for (std::size_t i = 0; i < 3; ++i) {
        ok = ok && sum[i] / 5.0 >= need[i];
        fr += (i ? "/" : "") + format_fixed(sum[i] / 5.0, 3);
    }
    return {ok, "WER " + format_fixed(wer_lo, 3) + ".." + format_fixed(wer_hi, 3) + ", mean within 10/20/30 s " + fr + ", " +
                    format_fixed(elapsed, 1) + " s"};
}

Outcome evaluation(const std::vector<json>& curves) {
    std::mt19937 rng(8);
    bool exact = true;
    bool affine = true;
    for (int run = 0; run < 200; ++run) {
        std::vector<GroundTruthMarker> markers;
        std::size_t word = 0;
        double t = std::uniform_real_distribution<double>(0.0, 5.0)(rng);
        const int n = std::uniform_int_distribution<int>(2, 12)(rng);
        for (int k = 0; k < n; ++k) {
            markers.push_back({t, word});
            word += std::uniform_int_distribution<std::size_t>(1, 40)(rng);
            t += std::uniform_real_distribution<double>(0.5, 30.0)(rng);
        }
        const std::size_t total = markers.back().word_index + 1;
        const auto truth = interpolate_truth(markers, total);
        for (const auto& m : markers) exact = exact && truth[m.word_index] == m.time_s;
        for (std::size_t k = 0; k + 1 < markers.size(); ++k) {
            const auto& a = markers[k];
            const auto& b = markers[k + 1];
            for (std::size_t w = a.word_index; w <= b.word_index; ++w) {
                const double expect = a.time_s + (b.time_s - a.time_s) * static_cast<double>(w - a.word_index) /
                                                     static_cast<double>(b.word_index - a.word_index);
                affine = affine && std::abs(truth[w] - expect) < 1e-9;
            }
        }
    }
    bool monotone = !curves.empty();
    for (const auto& c : curves) monotone = monotone && curve_monotone(c);
    const auto manual = words_of(read_file(test_support::fixture("lecture_manual.txt")));
    const auto asr = words_of(read_file(test_support::fixture("lecture_asr.txt")));
    const double same = word_error_rate(manual, manual).rate();
    const double fixture_wer = word_error_rate(manual, asr).rate();
    const bool ok = exact && affine && monotone && same == 0.0 && fixture_wer > 0.5;
    return {ok, std::string("exact ") + (exact ? "yes" : "no") + ", affine " + (affine ? "yes" : "no") + ", " +
                    std::to_string(curves.size()) + " curves monotone " + (monotone ? "yes" : "no") + ", fixture WER " +
                    format_fixed(fixture_wer, 3)};
}

bool same_tree(const std::filesystem::path& a, const std::filesystem::path& b, std::string& why) {
    std::size_t files = 0;
    for (const auto& entry : std::filesystem::directory_iterator(a)) {
        ++files;
        const auto other = b / entry.path().filename();
        if (!std::filesystem::exists(other) || read_file(entry.path()) != read_file(other)) {
            why = entry.path().filename().string();
            return false;
        }
    }
    std::size_t other_files = 0;
    for ([[maybe_unused]] const auto& entry : std::filesystem::directory_iterator(b)) ++other_files;
    if (files != other_files || files == 0) {
        why = "file sets differ";
        return false;
    }
    return true;
}

Outcome determinism(const test_support::TempDir& dir) {
    const auto data = test_support::data_dir();
    const auto table = load_formant_table(data / "formants_en.txt");
    std::vector<float> signal;
    for (int rep = 0; rep < 6; ++rep) {
        for (std::size_t v = 0; v < kMonophthongCount; ++v) {
            const auto& f = table.at(kAllPhonemes[v]);
            const auto part = oracle::synthesize_vowel(f[0], f[1], f[2], 0.2, 16000, 120.0, static_cast<std::uint32_t>(rep * 10 + v));
            signal.insert(signal.end(), part.begin(), part.end());
        }
        const auto s = oracle::band_noise(3000, 4000, 0.2, 16000, static_cast<std::uint32_t>(rep));
        signal.insert(signal.end(), s.begin(), s.end());
        signal.insert(signal.end(), 4000, 0.0f);
    }
    write_wav(dir / "speech.wav", signal, 16000);

    const auto bench_dir = [&](int run) { return (dir / ("det_bench" + std::to_string(run))).string(); };
    std::vector<std::function<std::vector<std::string>(int)>> commands = {
        [&](int run) {
            return std::vector<std::string>{"--out", (dir / ("det_extract" + std::to_string(run))).string(), "extract",
                                            (dir / "speech.wav").string()};
        },
        [&](int run) {
            return std::vector<std::string>{"--out", (dir / ("det_phonemize" + std::to_string(run))).string(), "phonemize",
                                            test_support::fixture("lecture_asr.txt").string()};
        },
        [&](int run) {
            return std::vector<std::string>{"--out", bench_dir(run), "bench", (data / "bench_corpus.txt").string()};
        },
        [&](int run) {
            return std::vector<std::string>{"--out", (dir / ("det_align" + std::to_string(run))).string(), "align",
                                            bench_dir(1) + "/speech_phonemes.tsv", bench_dir(1) + "/text_phonemes.tsv",
                                            bench_dir(1) + "/transcript.txt"};
        },
        [&](int run) {
            return std::vector<std::string>{"--out", (dir / ("det_evaluate" + std::to_string(run))).string(), "evaluate",
                                            bench_dir(1) + "/aligned_words.tsv", bench_dir(1) + "/markers.tsv"};
        },
    };
    const char* names[] = {"extract", "phonemize", "bench", "align", "evaluate"};
    for (std::size_t c = 0; c < commands.size(); ++c) {
        for (int run = 1; run <= 2; ++run) {
            auto args = commands[c](run);
            args.insert(args.begin(), "--deterministic");
            if (cli(args) != 0) return {false, std::string(names[c]) + " failed"};
        }
        const auto first = std::filesystem::path(commands[c](1)[1]);
        const auto second = std::filesystem::path(commands[c](2)[1]);
        std::string why;
        if (!same_tree(first, second, why)) return {false, std::string(names[c]) + " differs: " + why};
    }
    return {true, "extract, phonemize, align, evaluate, bench byte-identical"};
}

}  // namespace

int main() {
    const test_support::TempDir dir("acceptance");
    std::vector<json> curves;
    std::array<Outcome, 10> results{};
    auto guarded = [](auto&& fn) -> Outcome {
        try {
            return fn();
        } catch (const std::exception& e) {
            return {false, std::string("exception: ") + e.what()};
        }
    };
    // Peak memory is measured first, before anything else grows the heap.
    results[3] = guarded(scale);
    results[1] = guarded(bookkeeping);
    results[2] = guarded(optimality);
    results[4] = guarded(phonemizer);
    results[5] = guarded(detector);
    results[6] = guarded([&] { return noiseless(dir, curves); });
    results[7] = guarded([&] { return default_corruption(dir, curves); });
    results[8] = guarded([&] { return evaluation(curves); });
    results[9] = guarded([&] { return determinism(dir); });

    int failures = 0;
    for (int i = 1; i <= 9; ++i) {
        std::cout << (results[i].pass ? "PASS" : "FAIL") << " criterion " << i << ": " << results[i].detail << '\n';
        failures += results[i].pass ? 0 : 1;
    }
    return failures == 0 ? 0 : 1;
}
