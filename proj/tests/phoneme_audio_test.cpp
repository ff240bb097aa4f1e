#include <doctest.h>

#include <cmath>
#include <algorithm>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "speechalign/error.hpp"
#include "speechalign/phoneme_audio.hpp"
#include "test_support.hpp"

using namespace speechalign;

namespace {

const FormantReferenceTable& shipped_table() {
    static const auto table = load_formant_table(test_support::data_dir() / "formants_en.txt");
    return table;
}

Frame make_frame(std::vector<float> samples, int rate = 16000) {
    Frame f;
    f.sample_rate = rate;
    f.span = samples.size();
    f.samples = std::move(samples);
    f.rms_energy = frame_rms(f.samples);
    f.is_speech = true;
    return f;
}

std::vector<Frame> speech_frames(const std::vector<float>& signal) {
    return filter_speech(frame_signal(AudioBuffer{signal, 16000}), VadConfig{});
}

}  // namespace

TEST_CASE("model order scales with the sample rate") {
    CHECK(default_model_order(16000) == 12);
    CHECK(default_model_order(48000) == 24);
    CHECK(default_model_order(32000) == 18);
}

TEST_CASE("formants of resonated white noise") {
    const auto peaks = oracle::cascade_peaks(500, 1500, 2500, 16000);
    REQUIRE(peaks.size() == 3);
    const auto signal = oracle::resonated_noise(500, 1500, 2500, 1.0, 16000);
    // A flat source carries no spectral tilt to undo, so pre-emphasis is off here.
    FormantConfig flat;
    flat.pre_emphasis = 0.0;
    int within = 0;
    int frames = 0;
    for (const auto& f : frame_signal(AudioBuffer{signal, 16000})) {
        ++frames;
        const auto est = estimate_formants(f, 12, flat);
        if (!est) continue;
        CHECK(est->f1 < est->f2);
        CHECK(est->f2 < est->f3);
        if (std::abs(est->f1 - peaks[0]) <= 50 && std::abs(est->f2 - peaks[1]) <= 75 &&
            std::abs(est->f3 - peaks[2]) <= 100) {
            ++within;
        }
    }
    CHECK(within >= frames * 9 / 10);
}

TEST_CASE("formants of synthesized vowels at default settings") {
    for (auto label : {PhonemeLabel::IY, PhonemeLabel::AE, PhonemeLabel::AA, PhonemeLabel::UW}) {
        CAPTURE(to_symbol(label));
        const auto& ref = shipped_table().at(label);
        const auto signal = oracle::synthesize_vowel(ref[0], ref[1], ref[2], 0.5, 16000);
        std::vector<double> f1;
        for (const auto& f : frame_signal(AudioBuffer{signal, 16000})) {
            const auto est = estimate_formants(f, default_model_order(16000));
            REQUIRE(est.has_value());
            f1.push_back(est->f1);
            CHECK(est->f2 == doctest::Approx(ref[1]).epsilon(0.08));
        }
        std::sort(f1.begin(), f1.end());
        CHECK(f1[f1.size() / 2] == doctest::Approx(ref[0]).epsilon(0.1));
    }
}

TEST_CASE("silence has no formants") {
    CHECK_FALSE(estimate_formants(make_frame(std::vector<float>(533, 0.0f)), 12).has_value());
    CHECK_FALSE(estimate_formants(make_frame(std::vector<float>(533, 0.25f)), 12).has_value());
    CHECK_THROWS_AS(estimate_formants(make_frame(std::vector<float>(533, 0.1f)), 4), ConfigError);
}

TEST_CASE("white noise frames are rejected by the distance threshold") {
    std::mt19937 rng(3);
    std::normal_distribution<double> noise(0.0, 0.2);
    int rejected = 0;
    for (int i = 0; i < 100; ++i) {
        std::vector<float> s(533);
        for (auto& v : s) v = static_cast<float>(noise(rng));
        const auto est = estimate_formants(make_frame(s), 12);
        if (!est || !classify_monophthong(*est, shipped_table())) ++rejected;
    }
    CHECK(rejected >= 90);
}

TEST_CASE("monophthong matching") {
    const auto& table = shipped_table();
    SUBCASE("exact entry") {
        const auto& iy = table.at(PhonemeLabel::IY);
        const auto m = classify_monophthong({iy[0], iy[1], iy[2], 0.0}, table);
        REQUIRE(m.has_value());
        CHECK(m->label == PhonemeLabel::IY);
        CHECK(m->distance == 0.0);
    }
    SUBCASE("midway ties go to the earlier label") {
        FormantReferenceTable t = table;
        t.weights = {1.0, 1.0, 1.0};
        t.distance_threshold = std::numeric_limits<double>::infinity();
        const auto& iy = t.at(PhonemeLabel::IY);
        const auto& ih = t.at(PhonemeLabel::IH);
        const FormantFrame mid{(iy[0] + ih[0]) / 2, (iy[1] + ih[1]) / 2, (iy[2] + ih[2]) / 2, 0.0};
        REQUIRE(formant_distance(mid, iy, t.weights) == formant_distance(mid, ih, t.weights));
        CHECK(classify_monophthong(mid, t)->label == PhonemeLabel::IY);
    }
    SUBCASE("AA shifted by 10 Hz in F1") {
        const auto& aa = table.at(PhonemeLabel::AA);
        const FormantFrame f{aa[0] + 10.0, aa[1], aa[2], 0.0};
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_i = 0;
        for (std::size_t i = 0; i < kMonophthongCount; ++i) {
            const auto& r = table.formants[i];
            double sum = 0.0;
            for (int k = 0; k < 3; ++k) {
                const double fk = k == 0 ? f.f1 : k == 1 ? f.f2 : f.f3;
                sum += std::pow(table.weights[k] * (fk - r[k]), 2);
            }
            if (std::sqrt(sum) < best) {
                best = std::sqrt(sum);
                best_i = i;
            }
        }
        REQUIRE(kAllPhonemes[best_i] == PhonemeLabel::AA);
        const auto m = classify_monophthong(f, table);
        REQUIRE(m.has_value());
        CHECK(m->label == PhonemeLabel::AA);
        CHECK(m->distance == doctest::Approx(best));
        CHECK(m->distance == doctest::Approx(10.0));
    }
    SUBCASE("beyond the threshold nothing matches") {
        CHECK_FALSE(classify_monophthong({1500, 3000, 4500, 0.0}, table).has_value());
    }
    SUBCASE("scaling all weights keeps the argmin") {
        FormantReferenceTable a = table;
        a.distance_threshold = std::numeric_limits<double>::infinity();
        FormantReferenceTable b = a;
        for (auto& w : b.weights) w *= 3.7;
        std::mt19937 rng(9);
        std::uniform_real_distribution<double> u(200, 3200);
        for (int i = 0; i < 500; ++i) {
            std::array<double, 3> v{u(rng), u(rng), u(rng)};
            std::sort(v.begin(), v.end());
            const FormantFrame f{v[0], v[1], v[2], 0.0};
            CHECK(classify_monophthong(f, a)->label == classify_monophthong(f, b)->label);
        }
    }
}

TEST_CASE("band energies") {
    SUBCASE("1 kHz sine sits in the low band") {
        std::vector<float> s(533);
        for (std::size_t i = 0; i < s.size(); ++i) s[i] = static_cast<float>(std::sin(2 * std::numbers::pi * 1000 * i / 16000.0));
        const auto e = band_energies(make_frame(s));
        CHECK(e.low > 0.99);
        CHECK(e.sh_band < 0.01);
        CHECK(e.s_band < 0.01);
        CHECK(e.low + e.sh_band + e.s_band <= 1.0 + 1e-12);
    }
    SUBCASE("band-limited noise") {
        const auto s_noise = oracle::band_noise(3000, 4000, 0.1, 16000);
        const auto sh_noise = oracle::band_noise(2500, 3000, 0.1, 16000);
        const auto es = band_energies(make_frame({s_noise.begin(), s_noise.begin() + 533}));
        CHECK(es.s_band > es.low);
        CHECK(es.s_band > es.sh_band);
        const auto esh = band_energies(make_frame({sh_noise.begin(), sh_noise.begin() + 533}));
        CHECK(esh.sh_band > esh.low);
        CHECK(esh.sh_band > esh.s_band);
    }
    SUBCASE("zero frame") {
        const auto e = band_energies(make_frame(std::vector<float>(533, 0.0f)));
        CHECK(e.low == 0.0);
        CHECK(e.sh_band == 0.0);
        CHECK(e.s_band == 0.0);
    }
}

TEST_CASE("frame classification") {
    const auto& table = shipped_table();
    auto majority = [&](const std::vector<float>& signal) {
        std::map<int, int> votes;
        for (const auto& f : speech_frames(signal)) {
            const auto l = classify_frame(f, table);
            ++votes[l ? static_cast<int>(index_of(*l)) : -1];
        }
        return std::max_element(votes.begin(), votes.end(), [](auto& a, auto& b) { return a.second < b.second; })->first;
    };
    CHECK(majority(oracle::band_noise(3000, 4000, 0.5, 16000)) == static_cast<int>(index_of(PhonemeLabel::S)));
    CHECK(majority(oracle::band_noise(2500, 3000, 0.5, 16000)) == static_cast<int>(index_of(PhonemeLabel::SH)));
    const auto& iy = table.at(PhonemeLabel::IY);
    CHECK(majority(oracle::synthesize_vowel(iy[0], iy[1], iy[2], 0.5, 16000)) ==
          static_cast<int>(index_of(PhonemeLabel::IY)));
}

TEST_CASE("classification ignores gain and is repeatable") {
    const auto& ae = shipped_table().at(PhonemeLabel::AE);
    const auto vowel = oracle::synthesize_vowel(ae[0], ae[1], ae[2], 0.3, 16000);
    const auto fric = oracle::band_noise(3000, 4000, 0.3, 16000);
    for (const auto* signal : {&vowel, &fric}) {
        for (const auto& f : frame_signal(AudioBuffer{*signal, 16000})) {
            const auto base = classify_frame(f, shipped_table());
            CHECK(classify_frame(f, shipped_table()) == base);
            for (float c : {0.1f, 0.5f}) {
                auto scaled = f.samples;
                for (auto& v : scaled) v *= c;
                CHECK(classify_frame(make_frame(scaled), shipped_table()) == base);
            }
        }
    }
}

TEST_CASE("merging frame labels") {
    const double w = 1.0 / 30.0;
    SUBCASE("runs collapse") {
        const std::vector<FrameLabel> labels = {{0, PhonemeLabel::IY}, {1, PhonemeLabel::IY}, {2, PhonemeLabel::S}};
        const auto out = merge_phonemes(labels, w);
        REQUIRE(out.size() == 2);
        CHECK(out[0] == TimedPhoneme{PhonemeLabel::IY, 0.0, 2 * w});
        CHECK(out[1].label == PhonemeLabel::S);
        CHECK(out[1].start_s == doctest::Approx(2 * w));
        CHECK(out[1].end_s == doctest::Approx(3 * w));
    }
    SUBCASE("index gaps split runs") {
        const std::vector<FrameLabel> labels = {{0, PhonemeLabel::IY}, {2, PhonemeLabel::IY}};
        CHECK(merge_phonemes(labels, w).size() == 2);
    }
    SUBCASE("unlabeled frames produce nothing") {
        const std::vector<FrameLabel> labels = {{0, std::nullopt}, {1, std::nullopt}};
        CHECK(merge_phonemes(labels, w).empty());
    }
    SUBCASE("indices must increase") {
        const std::vector<FrameLabel> labels = {{3, PhonemeLabel::IY}, {3, PhonemeLabel::S}};
        CHECK_THROWS_AS(merge_phonemes(labels, w), InputError);
    }
    SUBCASE("random label streams never leave contiguous equal labels") {
        std::mt19937 rng(17);
        std::uniform_int_distribution<int> pick(-1, 11);
        std::vector<FrameLabel> labels;
        std::size_t idx = 0;
        for (int i = 0; i < 2000; ++i) {
            idx += (rng() % 5 == 0) ? 2 : 1;
            const int v = pick(rng);
            labels.push_back({idx, v < 0 ? std::nullopt : std::optional(kAllPhonemes[static_cast<std::size_t>(v)])});
        }
        const auto out = merge_phonemes(labels, w);
        for (std::size_t i = 1; i < out.size(); ++i) {
            CHECK(out[i].start_s >= out[i - 1].end_s - 1e-12);
            if (std::abs(out[i].start_s - out[i - 1].end_s) < 1e-9) CHECK(out[i].label != out[i - 1].label);
        }
    }
}

TEST_CASE("phoneme rate of a synthetic vowel sequence") {
    const auto& table = shipped_table();
    std::vector<float> signal;
    const PhonemeLabel order[] = {PhonemeLabel::IY, PhonemeLabel::AA, PhonemeLabel::UW, PhonemeLabel::AE,
                                  PhonemeLabel::ER, PhonemeLabel::IH};
    for (int rep = 0; rep < 20; ++rep) {
        for (auto l : order) {
            const auto& r = table.at(l);
            const auto part = oracle::synthesize_vowel(r[0], r[1], r[2], 0.2, 16000, 110.0, static_cast<std::uint32_t>(rep));
            signal.insert(signal.end(), part.begin(), part.end());
        }
        const auto s = oracle::band_noise(3000, 4000, 0.1, 16000, static_cast<std::uint32_t>(rep));
        signal.insert(signal.end(), s.begin(), s.end());
    }
    const auto frames = speech_frames(signal);
    const auto phonemes = merge_phonemes(label_frames(frames, table), kDefaultWindowS);
    const double minutes = static_cast<double>(signal.size()) / 16000.0 / 60.0;
    const double per_min = static_cast<double>(phonemes.size()) / minutes;
    CHECK(per_min >= 100.0);
    CHECK(per_min <= 1400.0);
}

TEST_CASE("formant table file") {
    std::istringstream good(
        "# comment\nIY 270 2290 3010\nIH 390 1990 2550\nEH 530 1840 2480\nAE 660 1720 2410\nAH 640 1190 2390\n"
        "UW 300 870 2240\nUH 440 1020 2240\nAA 730 1090 2440\nER 490 1350 1690\nAO 570 840 2410\n");
    const auto t = parse_formant_table(good);
    CHECK(t.at(PhonemeLabel::AO)[1] == 840.0);

    std::istringstream missing("IY 270 2290 3010\n");
    CHECK_THROWS_AS(parse_formant_table(missing), InputError);
    std::istringstream bad("IY 270 2290\n");
    try {
        parse_formant_table(bad, "t.txt");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 1);
    }
    std::istringstream unordered("IY 2290 270 3010\n");
    CHECK_THROWS_AS(parse_formant_table(unordered), ParseError);
    std::istringstream fricative("S 3000 3500 3900\n");
    CHECK_THROWS_AS(parse_formant_table(fricative), ParseError);
}

TEST_CASE("timed phoneme files round-trip") {
    const std::vector<TimedPhoneme> p = {{PhonemeLabel::IY, 0.0, 0.0667}, {PhonemeLabel::S, 0.1, 0.1333}};
    std::stringstream s;
    write_timed_phonemes(s, p);
    const auto back = read_timed_phonemes(s);
    REQUIRE(back.size() == 2);
    CHECK(back[1].label == PhonemeLabel::S);
    CHECK(back[1].start_s == doctest::Approx(0.1));

    std::istringstream truncated("0.000000\t0.033333\tIY\n0.033333\t");
    try {
        read_timed_phonemes(truncated, "speech.tsv");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
        CHECK(std::string(e.what()).find("speech.tsv:2") != std::string::npos);
    }
    std::istringstream overlap("0.0\t0.5\tIY\n0.4\t0.6\tS\n");
    CHECK_THROWS_AS(read_timed_phonemes(overlap), ParseError);
    std::istringstream unknown("0.0\t0.5\tZH\n");
    CHECK_THROWS_AS(read_timed_phonemes(unknown), ParseError);
}
