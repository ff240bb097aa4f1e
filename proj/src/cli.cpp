#include "speechalign/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "speechalign/aligner.hpp"
#include "speechalign/audio_ingest.hpp"
#include "speechalign/config.hpp"
#include "speechalign/error.hpp"
#include "speechalign/eval.hpp"
#include "speechalign/phoneme_audio.hpp"
#include "speechalign/phoneme_text.hpp"
#include "speechalign/text_io.hpp"

namespace speechalign::cli {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

constexpr double kHeadlineMargins[3] = {10.0, 20.0, 30.0};
constexpr double kTargetFractions[3] = {0.60, 0.75, 0.90};

struct Context {
    PipelineConfig config;
    fs::path out_dir;
    bool deterministic = false;
    std::string stage = "setup";
    std::ostream* out = nullptr;
    std::ostream* err = nullptr;
    std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();
};

fs::path output_path(const Context& ctx, const std::string& name) { return ctx.out_dir / name; }

void write_text(const Context& ctx, const std::string& name, const std::string& content) {
    write_file(output_path(ctx, name), content);
}

void write_json(Context& ctx, const std::string& name, Json j) {
    if (!ctx.deterministic) {
        const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        std::tm tm{};
        gmtime_r(&now, &tm);
        std::ostringstream ts;
        ts << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
        j["generated_at"] = ts.str();
        j["elapsed_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - ctx.started).count();
    }
    write_text(ctx, name, j.dump(2) + "\n");
}

template <class Fn>
std::string render(Fn&& fn) {
    std::ostringstream s;
    fn(s);
    return s.str();
}

double rounded(double v, int decimals = 6) { return parse_double(format_fixed(v, decimals)); }

std::ifstream open_input(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError(path.string() + ": cannot open");
    return in;
}

Json curve_json(const ErrorCurve& curve) {
    Json arr = Json::array();
    for (std::size_t i = 0; i < curve.margins_s.size(); ++i) {
        arr.push_back({{"margin_s", rounded(curve.margins_s[i], 3)}, {"fraction", rounded(curve.fraction_within[i])}});
    }
    return arr;
}

Json headline_json(const Evaluation& ev) {
    Json j;
    j["avg_matching_error_s"] = rounded(ev.mean_error_s, 4);
    j["max_error_s"] = rounded(ev.max_error_s, 4);
    for (double m : kHeadlineMargins) {
        j["fraction_within_" + format_fixed(m, 0) + "s"] = rounded(ev.curve.at(m));
    }
    j["fraction_within_1s"] = rounded(ev.curve.at(1.0));
    return j;
}

struct AlignResult {
    Alignment alignment;
    WordTiming timing;
    LinearSpaceStats stats;
};

AlignResult align_words(const std::vector<TimedPhoneme>& speech, const std::vector<WordPhonemes>& words,
                        const AlignConfig& config) {
    AlignResult r;
    const auto speech_labels = labels_of(speech);
    const auto text_labels = flatten_detectable(words);
    r.alignment = align_linear_space(speech_labels, text_labels, config, &r.stats);
    check_alignment(r.alignment, speech_labels.size(), text_labels.size(), config);
    r.timing = assign_word_timestamps(r.alignment, speech, words, config.timestamp_mode);
    return r;
}

Json summary_json(const AlignResult& r, std::size_t speech_size, std::size_t text_size) {
    Json j;
    j["speech_phonemes"] = speech_size;
    j["text_phonemes"] = text_size;
    j["score"] = r.alignment.score;
    j["copies"] = r.alignment.counts.copies;
    j["deletions"] = r.alignment.counts.deletions;
    j["insertions"] = r.alignment.counts.insertions;
    j["replacements"] = r.alignment.counts.replacements;
    j["words"] = r.timing.words.size();
    j["anchored_words"] = r.timing.anchored;
    j["anchored_fraction"] = rounded(r.timing.anchored_fraction());
    j["monotonic_clamps"] = r.timing.monotonic_clamps;
    return j;
}

void write_alignment(Context& ctx, const AlignResult& r, std::size_t speech_size, std::size_t text_size) {
    ctx.stage = "write";
    write_text(ctx, "aligned_words.tsv", render([&](std::ostream& s) { write_aligned_words(s, r.timing.words); }));
    write_json(ctx, "align_summary.json", summary_json(r, speech_size, text_size));
}

// Writes curve/trace CSV and SVG plus metrics.json; returns the post-clamp evaluation.
Evaluation write_evaluation(Context& ctx, std::span<const AlignedWord> aligned, std::span<const double> truth,
                            std::span<const GroundTruthMarker> markers, std::span<const SilenceGap> gaps,
                            bool with_raw) {
    ctx.stage = "evaluate";
    const auto margins = default_margins();
    const auto ev = error_curve(aligned, truth, margins);
    for (std::size_t i = 1; i < ev.curve.fraction_within.size(); ++i) {
        if (ev.curve.fraction_within[i] < ev.curve.fraction_within[i - 1]) {
            throw InvariantError("error curve is not monotone");
        }
    }
    Json j;
    j["words"] = aligned.size();
    j["markers"] = markers.size();
    if (markers.size() >= 2) {
        j["mean_marker_spacing_s"] =
            rounded((markers.back().time_s - markers.front().time_s) / static_cast<double>(markers.size() - 1), 3);
    }
    j.update(headline_json(ev));
    if (with_raw) j["before_monotonic_clamp"] = headline_json(error_curve_raw(aligned, truth, margins));
    j["curve"] = curve_json(ev.curve);

    ctx.stage = "write";
    write_text(ctx, "curve.csv", render([&](std::ostream& s) { write_curve_csv(s, ev.curve); }));
    write_text(ctx, "trace.csv", render([&](std::ostream& s) { write_trace_csv(s, ev.trace); }));
    write_text(ctx, "curve.svg", render_curve_svg(ev.curve));
    write_text(ctx, "trace.svg", render_trace_svg(ev.trace, gaps, ev.mean_error_s));
    write_json(ctx, "metrics.json", j);
    return ev;
}

PronouncingDictionary load_dictionary(Context& ctx) {
    ctx.stage = "dictionary";
    return PronouncingDictionary::load(ctx.config.dictionary);
}

int cmd_extract(Context& ctx, const fs::path& audio_path) {
    const auto& c = ctx.config;
    ctx.stage = "ingest";
    const auto audio = load_audio(audio_path, c.sample_rate);
    const auto frames = filter_speech(frame_signal(audio, c.window_s), c.vad);
    ctx.stage = "classify";
    const auto table = c.load_formant_table();
    const auto labels = label_frames(frames, table, c.classifier);
    const auto phonemes = merge_phonemes(labels, c.window_s);

    const auto speech_frames = static_cast<std::size_t>(std::count_if(frames.begin(), frames.end(),
                                                                      [](const Frame& f) { return f.is_speech; }));
    const double duration = audio.duration_s();
    Json j;
    j["audio"] = audio_path.filename().string();
    j["duration_s"] = rounded(duration, 3);
    j["sample_rate"] = audio.sample_rate;
    j["frames"] = frames.size();
    j["speech_frames"] = speech_frames;
    j["speech_fraction"] = rounded(frames.empty() ? 0.0 : static_cast<double>(speech_frames) / frames.size());
    j["phonemes"] = phonemes.size();
    j["phonemes_per_min"] = rounded(duration > 0.0 ? phonemes.size() * 60.0 / duration : 0.0, 3);
    if (phonemes.empty()) {
        const std::string msg = speech_frames == 0 ? "no speech detected" : "no phonemes detected";
        j["warning"] = msg;
        *ctx.err << "warning [extract]: " << msg << " in " << audio_path.string() << '\n';
    }
    ctx.stage = "write";
    write_text(ctx, "speech_phonemes.tsv", render([&](std::ostream& s) { write_timed_phonemes(s, phonemes); }));
    write_json(ctx, "extract_stats.json", j);
    *ctx.out << phonemes.size() << " phonemes from " << frames.size() << " frames\n";
    return kExitOk;
}

int cmd_phonemize(Context& ctx, const fs::path& transcript_path) {
    const auto dict = load_dictionary(ctx);
    ctx.stage = "phonemize";
    const auto text = read_file(transcript_path);
    const auto words = phonemize(text, dict);
    const auto stats = summarize(words);
    Json j;
    j["words"] = stats.words;
    j["oov_words"] = stats.oov;
    j["stemmed_words"] = stats.stemmed;
    j["zero_phoneme_words"] = stats.zero_phoneme;
    j["detectable_phonemes"] = stats.detectable_phonemes;
    ctx.stage = "write";
    write_text(ctx, "text_phonemes.tsv", render([&](std::ostream& s) { write_text_phonemes(s, words); }));
    write_json(ctx, "phonemize_stats.json", j);
    *ctx.out << stats.words << " words, " << stats.oov << " out of vocabulary, " << stats.zero_phoneme
             << " without detectable phonemes\n";
    return kExitOk;
}

int cmd_align(Context& ctx, const fs::path& speech_path, const fs::path& text_path, const fs::path& words_path) {
    ctx.stage = "read";
    auto speech_in = open_input(speech_path);
    const auto speech = read_timed_phonemes(speech_in, speech_path.string());
    auto text_in = open_input(text_path);
    auto words = read_text_phonemes(text_in, text_path.string());
    if (!words_path.empty()) {
        const auto tokens = expand_tokens(tokenize(read_file(words_path)));
        if (tokens.size() != words.size()) {
            throw InputError(words_path.string() + ": " + std::to_string(tokens.size()) +
                             " words, but the text-phoneme file has " + std::to_string(words.size()));
        }
        for (std::size_t i = 0; i < words.size(); ++i) words[i].token.surface = tokens[i].surface;
    }
    ctx.stage = "align";
    const auto r = align_words(speech, words, ctx.config.align);
    write_alignment(ctx, r, speech.size(), flatten_detectable(words).size());
    *ctx.out << "score " << r.alignment.score << ", " << r.timing.anchored << "/" << r.timing.words.size()
             << " words anchored\n";
    return kExitOk;
}

int cmd_evaluate(Context& ctx, const fs::path& aligned_path, const fs::path& truth_path) {
    ctx.stage = "read";
    auto aligned_in = open_input(aligned_path);
    const auto aligned = read_aligned_words(aligned_in, aligned_path.string());
    const auto truth_text = read_file(truth_path);
    std::vector<GroundTruthMarker> markers;
    std::size_t total_words = 0;
    for (const auto& w : aligned) total_words = std::max(total_words, w.word_index + 1);
    if (!extract_inline_markers(truth_text).empty()) {
        markers = markers_from_transcript(truth_text);
        total_words = std::max(total_words, expand_tokens(tokenize(truth_text)).size());
    } else {
        std::istringstream in(truth_text);
        markers = read_markers(in, truth_path.string());
        if (!markers.empty()) total_words = std::max(total_words, markers.back().word_index + 1);
    }
    ctx.stage = "evaluate";
    const auto truth = interpolate_truth(markers, total_words);
    const auto ev = write_evaluation(ctx, aligned, truth, markers, ctx.config.corruption.silence_gaps, false);
    *ctx.out << "avg error " << format_fixed(ev.mean_error_s, 3) << " s; within 10/20/30 s: "
             << format_fixed(ev.curve.at(10), 3) << " " << format_fixed(ev.curve.at(20), 3) << " "
             << format_fixed(ev.curve.at(30), 3) << '\n';
    return kExitOk;
}

int cmd_bench(Context& ctx, fs::path reference_path) {
    if (reference_path.empty()) reference_path = ctx.config.transcript;
    if (reference_path.empty()) throw ConfigError("bench needs a reference transcript");
    const auto dict = load_dictionary(ctx);
    ctx.stage = "synthesize";
    const auto reference = read_file(reference_path);
    std::vector<std::string> vocabulary;
    if (!ctx.config.vocabulary.empty()) vocabulary = load_vocabulary(ctx.config.vocabulary);
    const auto bench = synthesize_benchmark(reference, ctx.config.corruption, dict, SubstitutionMap::standard(),
                                            ctx.config.synthesis, vocabulary);
    const auto wer = word_error_rate(words_of(reference), words_of(bench.corrupted_transcript));

    ctx.stage = "write";
    write_text(ctx, "transcript.txt", bench.corrupted_transcript);
    write_text(ctx, "markers.tsv", render([&](std::ostream& s) { write_markers(s, bench.truth_markers); }));
    write_text(ctx, "speech_phonemes.tsv", render([&](std::ostream& s) { write_timed_phonemes(s, bench.speech); }));

    ctx.stage = "phonemize";
    const auto words = phonemize(bench.corrupted_transcript, dict);
    ctx.stage = "write";
    write_text(ctx, "text_phonemes.tsv", render([&](std::ostream& s) { write_text_phonemes(s, words); }));

    ctx.stage = "align";
    const auto r = align_words(bench.speech, words, ctx.config.align);
    write_alignment(ctx, r, bench.speech.size(), flatten_detectable(words).size());

    ctx.stage = "evaluate";
    Evaluation ev;
    if (bench.truth_markers.size() >= 2 && !r.timing.words.empty()) {
        const auto truth = interpolate_truth(bench.truth_markers, words.size());
        ev = write_evaluation(ctx, r.timing.words, truth, bench.truth_markers, bench.gaps, true);
    } else {
        throw InputError("corrupted transcript is too short to evaluate (fewer than two markers)");
    }

    Json report;
    report["reference_words"] = bench.reference_words;
    report["transcript_words"] = words.size();
    report["duration_s"] = rounded(bench.duration_s, 3);
    report["speech_phonemes"] = bench.speech.size();
    report["rng_seed"] = ctx.config.corruption.rng_seed;
    report["word_error_rate"] = rounded(wer.rate());
    report["wer_substitutions"] = wer.substitutions;
    report["wer_deletions"] = wer.deletions;
    report["wer_insertions"] = wer.insertions;
    Json gaps = Json::array();
    for (const auto& g : bench.gaps) gaps.push_back({{"start_s", rounded(g.start_s, 3)}, {"duration_s", rounded(g.duration_s, 3)}});
    report["silence_gaps"] = gaps;
    report["avg_matching_error_s"] = rounded(ev.mean_error_s, 4);
    Json targets = Json::array();
    for (int i = 0; i < 3; ++i) {
        const double achieved = ev.curve.at(kHeadlineMargins[i]);
        targets.push_back({{"margin_s", kHeadlineMargins[i]},
                           {"achieved", rounded(achieved)},
                           {"target", kTargetFractions[i]},
                           {"met", achieved >= kTargetFractions[i]}});
    }
    report["targets"] = targets;
    write_json(ctx, "bench_report.json", report);

    *ctx.out << "WER " << format_fixed(wer.rate(), 3) << ", avg error " << format_fixed(ev.mean_error_s, 3) << " s\n";
    for (int i = 0; i < 3; ++i) {
        *ctx.out << "  within " << format_fixed(kHeadlineMargins[i], 0) << " s: "
                 << format_fixed(ev.curve.at(kHeadlineMargins[i]), 3) << " (target "
                 << format_fixed(kTargetFractions[i], 2) << ")\n";
    }
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Forced alignment of speech against highly imperfect transcripts", "speechalign"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    bool deterministic = false;
    std::vector<std::string> overrides;
    app.add_option("--config", config_path, "Key-value configuration file");
    app.add_option("--out", out_dir, "Output directory (default: output_dir from the config, else .)");
    app.add_flag("--deterministic", deterministic, "Omit wall-clock fields from JSON outputs");
    app.add_option("--set", overrides, "Override one configuration key (key=value); repeatable");

    std::string audio_path;
    auto* extract = app.add_subcommand("extract", "Detect timed phonemes in a WAV file");
    extract->add_option("audio", audio_path, "Input WAV file")->required();

    std::string transcript_path;
    std::string dict_path;
    auto* phon = app.add_subcommand("phonemize", "Convert a transcript into detectable phonemes per word");
    phon->add_option("transcript", transcript_path, "Transcript text file")->required();
    phon->add_option("--dict", dict_path, "Pronouncing dictionary (overrides the config)");

    std::string speech_path;
    std::string text_path;
    std::string words_path;
    auto* align = app.add_subcommand("align", "Align speech phonemes to text phonemes and time the words");
    align->add_option("speech", speech_path, "Timed speech-phoneme file")->required();
    align->add_option("text", text_path, "Text-phoneme file")->required();
    align->add_option("words", words_path, "Transcript supplying word surfaces (optional)");

    std::string aligned_path;
    std::string truth_path;
    auto* evaluate = app.add_subcommand("evaluate", "Score aligned words against ground-truth markers");
    evaluate->add_option("aligned", aligned_path, "Aligned-words file")->required();
    evaluate->add_option("truth", truth_path, "Marker file or transcript with [t=SECONDS] markers")->required();

    std::string reference_path;
    auto* bench = app.add_subcommand("bench", "Synthesize, align and evaluate a corrupted benchmark");
    bench->add_option("reference", reference_path, "Reference transcript (default: transcript from the config)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "speechalign: " << e.what() << '\n' << "run 'speechalign --help' for usage\n";
        return kExitUsage;
    }

    Context ctx;
    ctx.deterministic = deterministic;
    ctx.out = &out;
    ctx.err = &err;
    try {
        ctx.stage = "config";
        ctx.config = config_path.empty() ? PipelineConfig::defaults() : load_config(config_path);
        for (const auto& o : overrides) {
            const auto eq = o.find('=');
            if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + o + "'");
            ctx.config.set(trim(std::string_view(o).substr(0, eq)), trim(std::string_view(o).substr(eq + 1)));
        }
        if (!dict_path.empty()) ctx.config.dictionary = dict_path;
        ctx.config.validate();
        ctx.out_dir = out_dir.empty() ? ctx.config.output_dir : fs::path(out_dir);
        if (ctx.out_dir.empty()) ctx.out_dir = ".";
        std::error_code ec;
        fs::create_directories(ctx.out_dir, ec);
        if (ec) throw InputError(ctx.out_dir.string() + ": cannot create output directory: " + ec.message());

        if (*extract) return cmd_extract(ctx, audio_path);
        if (*phon) return cmd_phonemize(ctx, transcript_path);
        if (*align) return cmd_align(ctx, speech_path, text_path, words_path);
        if (*evaluate) return cmd_evaluate(ctx, aligned_path, truth_path);
        return cmd_bench(ctx, reference_path);
    } catch (const ConfigError& e) {
        err << "speechalign: configuration error [" << ctx.stage << "]: " << e.what() << '\n';
        return kExitUsage;
    } catch (const InputError& e) {
        err << "speechalign: input error [" << ctx.stage << "]: " << e.what() << '\n';
        return kExitInput;
    } catch (const InvariantError& e) {
        err << "speechalign: invariant violated [" << ctx.stage << "]: " << e.what() << '\n';
        return kExitInvariant;
    } catch (const std::exception& e) {
        err << "speechalign: internal error [" << ctx.stage << "]: " << e.what() << '\n';
        return kExitInvariant;
    }
}

}  // namespace speechalign::cli
