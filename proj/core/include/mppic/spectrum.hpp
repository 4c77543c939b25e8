#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "mppic/probe.hpp"

namespace mppic {

struct Spectrum {
  std::vector<double> frequencies;  ///< k / (N dt) for k = 0 .. N/2 [Hz]
  std::vector<double> magnitudes;   ///< |X_k| of the mean-removed series
  double dominant = 0.0;            ///< frequency of the largest magnitude for k >= 1; 0 if flat
  std::size_t dominant_bin = 0;
};

inline constexpr std::size_t kMinSpectrumSamples = 64;

/// Full discrete Fourier transform, O(N^2).
std::vector<std::complex<double>> dft(std::span<const double> x);

/// Iterative radix-2 FFT; the length must be a power of two.
std::vector<std::complex<double>> fft_radix2(std::span<const double> x);

bool is_power_of_two(std::size_t n);

/// Magnitude spectrum of a uniformly sampled series with the mean removed. Uses the radix-2
/// path for power-of-two lengths unless `direct` is set. Ties in the dominant peak go to the
/// lowest frequency. Throws Error for non-uniform sampling or fewer than 64 samples.
Spectrum spectrum(const ProbeSeries& series, bool direct = false);

/// |sum |X_k|^2 / N - sum |x_n - mean|^2| / sum |x_n - mean|^2 over the full spectrum.
double parseval_relative_error(std::span<const double> x);

}  // namespace mppic
