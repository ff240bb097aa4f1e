#include "speechalign/phoneme_audio.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include <Eigen/Dense>
#include <unsupported/Eigen/Polynomials>

#include "speechalign/error.hpp"
#include "speechalign/parallel.hpp"
#include "speechalign/spectrum.hpp"
#include "speechalign/text_io.hpp"

namespace speechalign {

namespace {

// Levinson-Durbin recursion. Returns A(z) = 1 + a1 z^-1 + ... + ap z^-p, or
// an empty vector when the recursion is not stable.
std::vector<double> levinson(const std::vector<double>& r, int order) {
    std::vector<double> a(order + 1, 0.0);
    std::vector<double> prev(order + 1, 0.0);
    a[0] = 1.0;
    double err = r[0];
    for (int i = 1; i <= order; ++i) {
        double acc = r[i];
        for (int j = 1; j < i; ++j) acc += a[j] * r[i - j];
        const double k = -acc / err;
        if (!(std::abs(k) < 1.0)) return {};
        prev = a;
        for (int j = 1; j < i; ++j) a[j] = prev[j] + k * prev[i - j];
        a[i] = k;
        err *= 1.0 - k * k;
        if (!(err > 0.0)) return {};
    }
    return a;
}

}  // namespace

void FormantReferenceTable::validate() const {
    for (double w : weights) {
        if (!(w > 0.0)) throw ConfigError("formant weights must be positive");
    }
    if (!(distance_threshold > 0.0)) throw ConfigError("distance_threshold must be positive");
    for (std::size_t i = 0; i < kMonophthongCount; ++i) {
        const auto& f = formants[i];
        if (!(f[0] > 0.0 && f[0] < f[1] && f[1] < f[2])) {
            throw ConfigError("formant table entry " + std::string(to_symbol(kAllPhonemes[i])) +
                              " must satisfy 0 < F1 < F2 < F3");
        }
    }
}

int default_model_order(int sample_rate) {
    return static_cast<int>(std::lround(6.0 + 0.375 * sample_rate / 1000.0));
}

std::optional<FormantFrame> estimate_formants(const Frame& frame, int model_order, const FormantConfig& config) {
    if (model_order <= 0) model_order = default_model_order(frame.sample_rate);
    if (model_order < 8) throw ConfigError("model order must be at least 8");
    const auto& x = frame.samples;
    const std::size_t n = x.size();
    if (n <= static_cast<std::size_t>(model_order) || frame.sample_rate <= 0) return std::nullopt;

    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    if (*hi - *lo < 1e-9f) return std::nullopt;

    const auto window = hann_window(n);
    std::vector<double> y(n);
    y[0] = x[0] * window[0];
    for (std::size_t i = 1; i < n; ++i) y[i] = (x[i] - config.pre_emphasis * x[i - 1]) * window[i];

    std::vector<double> r(model_order + 1, 0.0);
    for (int lag = 0; lag <= model_order; ++lag) {
        double acc = 0.0;
        for (std::size_t i = static_cast<std::size_t>(lag); i < n; ++i) acc += y[i] * y[i - lag];
        r[lag] = acc;
    }
    if (!(r[0] > 1e-12)) return std::nullopt;
    r[0] *= 1.0 + 1e-9;

    const auto a = levinson(r, model_order);
    if (a.empty()) return std::nullopt;

    // Eigen wants coefficients in increasing degree: z^p + a1 z^(p-1) + ... + ap
    Eigen::VectorXd coeffs(model_order + 1);
    for (int i = 0; i <= model_order; ++i) coeffs[i] = a[model_order - i];
    Eigen::PolynomialSolver<double, Eigen::Dynamic> solver;
    solver.compute(coeffs);

    const double fs = frame.sample_rate;
    std::vector<double> peaks;
    for (Eigen::Index i = 0; i < solver.roots().size(); ++i) {
        const std::complex<double> z = solver.roots()[i];
        if (z.imag() <= 0.0) continue;
        const double radius = std::abs(z);
        if (!(radius > 0.0 && radius < 1.0)) continue;
        const double freq = std::arg(z) * fs / (2.0 * std::numbers::pi);
        const double bandwidth = -std::log(radius) * fs / std::numbers::pi;
        if (freq > config.min_formant_hz && freq < fs / 2.0 - 50.0 && bandwidth < config.max_bandwidth_hz) {
            peaks.push_back(freq);
        }
    }
    if (peaks.size() < 3) return std::nullopt;
    std::sort(peaks.begin(), peaks.end());

    FormantFrame out;
    out.f1 = peaks[0];
    out.f2 = peaks[1];
    out.f3 = peaks[2];
    if (!(out.f1 < out.f2 && out.f2 < out.f3)) return std::nullopt;
    out.voiced_confidence = 1.0 - spectral_flatness(power_spectrum(frame.samples, frame.sample_rate));
    return out;
}

double formant_distance(const FormantFrame& formants, const std::array<double, 3>& reference,
                        const std::array<double, 3>& weights) {
    const std::array<double, 3> measured{formants.f1, formants.f2, formants.f3};
    double sum = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
        const double d = weights[i] * (measured[i] - reference[i]);
        sum += d * d;
    }
    return std::sqrt(sum);
}

std::optional<MonophthongMatch> classify_monophthong(const FormantFrame& formants,
                                                     const FormantReferenceTable& table) {
    std::optional<MonophthongMatch> best;
    for (std::size_t i = 0; i < kMonophthongCount; ++i) {
        const double d = formant_distance(formants, table.formants[i], table.weights);
        if (!best || d < best->distance) best = MonophthongMatch{kAllPhonemes[i], d};
    }
    if (!best || best->distance > table.distance_threshold) return std::nullopt;
    return best;
}

BandEnergies band_energies(const Frame& frame) {
    BandEnergies out;
    if (frame.samples.empty() || frame.sample_rate <= 0) return out;
    const auto spectrum = power_spectrum(frame.samples, frame.sample_rate);
    const double total = spectrum.total();
    if (!(total > 0.0)) return out;
    out.total = total;
    out.low = spectrum.band(300.0, 2500.0) / total;
    out.sh_band = spectrum.band(2500.0, 3000.0) / total;
    out.s_band = spectrum.band(3000.0, 4000.0) / total;
    return out;
}

std::optional<PhonemeLabel> classify_frame(const Frame& frame, const FormantReferenceTable& table,
                                           const ClassifierConfig& config) {
    const auto bands = band_energies(frame);
    if (!(bands.total > 0.0)) return std::nullopt;
    if (std::max(bands.sh_band, bands.s_band) > bands.low * config.fricative_margin) {
        return bands.sh_band >= bands.s_band ? PhonemeLabel::SH : PhonemeLabel::S;
    }
    const auto formants = estimate_formants(frame, config.formants.model_order, config.formants);
    if (!formants) return std::nullopt;
    const auto match = classify_monophthong(*formants, table);
    if (!match) return std::nullopt;
    return match->label;
}

std::vector<TimedPhoneme> merge_phonemes(std::span<const FrameLabel> labels, double window_s) {
    std::vector<TimedPhoneme> out;
    bool open = false;
    std::size_t run_first = 0;
    std::size_t run_last = 0;
    PhonemeLabel run_label = PhonemeLabel::IY;

    auto close = [&] {
        if (!open) return;
        out.push_back({run_label, static_cast<double>(run_first) * window_s,
                       static_cast<double>(run_last + 1) * window_s});
        open = false;
    };

    for (std::size_t i = 0; i < labels.size(); ++i) {
        const auto& fl = labels[i];
        if (i > 0 && fl.frame_index <= labels[i - 1].frame_index) {
            throw InputError("merge_phonemes: frame indices must be strictly increasing");
        }
        if (!fl.label) {
            close();
            continue;
        }
        if (open && *fl.label == run_label && fl.frame_index == run_last + 1) {
            run_last = fl.frame_index;
            continue;
        }
        close();
        open = true;
        run_label = *fl.label;
        run_first = run_last = fl.frame_index;
    }
    close();

    for (std::size_t i = 1; i < out.size(); ++i) {
        if (out[i].label == out[i - 1].label && out[i].start_s <= out[i - 1].end_s) {
            throw InvariantError("merge_phonemes produced two contiguous phonemes with the same label");
        }
    }
    return out;
}

std::vector<FrameLabel> label_frames(std::span<const Frame> frames, const FormantReferenceTable& table,
                                     const ClassifierConfig& config) {
    std::vector<std::optional<PhonemeLabel>> labels(frames.size());
    parallel_for(frames.size(), [&](std::size_t i) {
        if (frames[i].is_speech) labels[i] = classify_frame(frames[i], table, config);
    });
    std::vector<FrameLabel> out;
    out.reserve(frames.size());
    for (std::size_t i = 0; i < frames.size(); ++i) {
        if (frames[i].is_speech) out.push_back({frames[i].index, labels[i]});
    }
    return out;
}

FormantReferenceTable parse_formant_table(std::istream& in, const std::string& source) {
    FormantReferenceTable table;
    std::array<bool, kMonophthongCount> seen{};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto body = trim(std::string_view(line).substr(0, line.find('#')));
        if (body.empty()) continue;
        const auto fields = split_whitespace(body);
        if (fields.size() != 4) throw ParseError(source, line_no, "expected 'SYMBOL F1 F2 F3'");
        const auto label = parse_label(fields[0]);
        if (!label || !is_monophthong(*label)) {
            throw ParseError(source, line_no, "'" + std::string(fields[0]) + "' is not a monophthong");
        }
        if (seen[index_of(*label)]) throw ParseError(source, line_no, "duplicate entry for " + std::string(fields[0]));
        seen[index_of(*label)] = true;
        auto& f = table.formants[index_of(*label)];
        try {
            for (std::size_t i = 0; i < 3; ++i) f[i] = parse_double(fields[i + 1]);
        } catch (const std::invalid_argument& e) {
            throw ParseError(source, line_no, e.what());
        }
        if (!(f[0] > 0.0 && f[0] < f[1] && f[1] < f[2])) {
            throw ParseError(source, line_no, "formants must satisfy 0 < F1 < F2 < F3");
        }
    }
    for (std::size_t i = 0; i < kMonophthongCount; ++i) {
        if (!seen[i]) throw InputError(source + ": missing entry for " + std::string(to_symbol(kAllPhonemes[i])));
    }
    return table;
}

FormantReferenceTable load_formant_table(const std::filesystem::path& path) {
    std::istringstream in(read_file(path));
    return parse_formant_table(in, path.string());
}

void write_timed_phonemes(std::ostream& out, std::span<const TimedPhoneme> phonemes) {
    for (const auto& p : phonemes) {
        out << format_fixed(p.start_s, 6) << '\t' << format_fixed(p.end_s, 6) << '\t' << to_symbol(p.label) << '\n';
    }
}

std::vector<TimedPhoneme> read_timed_phonemes(std::istream& in, const std::string& source) {
    std::vector<TimedPhoneme> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        const auto fields = split(line, '\t');
        if (fields.size() != 3) throw ParseError(source, line_no, "expected 'start<TAB>end<TAB>SYMBOL'");
        TimedPhoneme p;
        try {
            p.start_s = parse_double(fields[0]);
            p.end_s = parse_double(fields[1]);
        } catch (const std::invalid_argument& e) {
            throw ParseError(source, line_no, e.what());
        }
        const auto label = parse_label(trim(fields[2]));
        if (!label) throw ParseError(source, line_no, "unknown phoneme '" + std::string(fields[2]) + "'");
        p.label = *label;
        if (!(p.start_s < p.end_s)) throw ParseError(source, line_no, "start must precede end");
        if (!out.empty() && p.start_s < out.back().end_s - 1e-9) {
            throw ParseError(source, line_no, "phonemes must be sorted and non-overlapping");
        }
        out.push_back(p);
    }
    return out;
}

}  // namespace speechalign
