#include "speechalign/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include <unsupported/Eigen/FFT>

namespace speechalign {

std::vector<double> hann_window(std::size_t n) {
    std::vector<double> w(n, 1.0);
    if (n < 2) return w;
    for (std::size_t i = 0; i < n; ++i) {
        w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                    static_cast<double>(n - 1));
    }
    return w;
}

double PowerSpectrum::total() const {
    double sum = 0.0;
    for (double p : power) sum += p;
    return sum;
}

double PowerSpectrum::band(double low_hz, double high_hz) const {
    double sum = 0.0;
    for (std::size_t k = 0; k < power.size(); ++k) {
        const double f = static_cast<double>(k) * bin_hz;
        if (f >= low_hz && f < high_hz) sum += power[k];
    }
    return sum;
}

PowerSpectrum power_spectrum(std::span<const float> samples, int sample_rate) {
    std::size_t fft_size = 1;
    while (fft_size < samples.size()) fft_size <<= 1;
    fft_size = std::max<std::size_t>(fft_size, 2);

    const auto window = hann_window(samples.size());
    std::vector<double> padded(fft_size, 0.0);
    for (std::size_t i = 0; i < samples.size(); ++i) padded[i] = samples[i] * window[i];

    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> bins;
    fft.fwd(bins, padded);

    PowerSpectrum out;
    out.bin_hz = static_cast<double>(sample_rate) / static_cast<double>(fft_size);
    out.power.resize(fft_size / 2 + 1);
    for (std::size_t k = 0; k < out.power.size(); ++k) out.power[k] = std::norm(bins[k]);
    return out;
}

double spectral_flatness(const PowerSpectrum& spectrum) {
    if (spectrum.power.empty()) return 0.0;
    double log_sum = 0.0;
    double sum = 0.0;
    constexpr double kTiny = 1e-20;
    for (double p : spectrum.power) {
        log_sum += std::log(p + kTiny);
        sum += p + kTiny;
    }
    const double n = static_cast<double>(spectrum.power.size());
    const double flatness = std::exp(log_sum / n) / (sum / n);
    return std::clamp(flatness, 0.0, 1.0);
}

}  // namespace speechalign
