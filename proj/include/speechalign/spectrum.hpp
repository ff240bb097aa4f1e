#pragma once

#include <span>
#include <vector>

namespace speechalign {

// One-sided power spectrum of a Hann-tapered, zero-padded frame.
struct PowerSpectrum {
    std::vector<double> power;  // bins 0 .. fft_size/2
    double bin_hz = 0.0;

    double total() const;
    // Sum of bins whose centre frequency lies in [low_hz, high_hz).
    double band(double low_hz, double high_hz) const;
};

PowerSpectrum power_spectrum(std::span<const float> samples, int sample_rate);

// Geometric over arithmetic mean of the power spectrum, in [0, 1].
double spectral_flatness(const PowerSpectrum& spectrum);

std::vector<double> hann_window(std::size_t n);

}  // namespace speechalign
