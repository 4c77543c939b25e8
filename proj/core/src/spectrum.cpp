#include "mppic/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "mppic/error.hpp"
#include "mppic/parcels.hpp"

namespace mppic {

namespace {

std::vector<double> demeaned(std::span<const double> x) {
  // The rounded mean of a constant series need not equal its value.
  if (std::adjacent_find(x.begin(), x.end(), std::not_equal_to<>()) == x.end())
    return std::vector<double>(x.size(), 0.0);
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  std::vector<double> out(x.begin(), x.end());
  for (double& v : out) v -= mean;
  return out;
}

}  // namespace

bool is_power_of_two(std::size_t n) { return n > 0 && (n & (n - 1)) == 0; }

std::vector<std::complex<double>> dft(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    double re = 0.0;
    double im = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double ang = -2.0 * kPi * static_cast<double>((k * j) % n) / static_cast<double>(n);
      re += x[j] * std::cos(ang);
      im += x[j] * std::sin(ang);
    }
    out[k] = {re, im};
  }
  return out;
}

std::vector<std::complex<double>> fft_radix2(std::span<const double> x) {
  const std::size_t n = x.size();
  if (!is_power_of_two(n)) throw Error("radix-2 FFT needs a power-of-two length");
  std::vector<std::complex<double>> a(x.begin(), x.end());
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const double ang = -2.0 * kPi * static_cast<double>(k) / static_cast<double>(len);
        const std::complex<double> w(std::cos(ang), std::sin(ang));
        const std::complex<double> u = a[i + k];
        const std::complex<double> v = a[i + k + half] * w;
        a[i + k] = u + v;
        a[i + k + half] = u - v;
      }
    }
  }
  return a;
}

Spectrum spectrum(const ProbeSeries& series, bool direct) {
  const std::size_t n = series.values.size();
  if (n < kMinSpectrumSamples || series.times.size() != n)
    throw Error("spectrum needs at least 64 samples");
  const double dt = (series.times.back() - series.times.front()) / static_cast<double>(n - 1);
  if (!(dt > 0.0)) throw Error("spectrum needs increasing sample times");
  for (std::size_t i = 1; i < n; ++i) {
    const double step = series.times[i] - series.times[i - 1];
    if (std::abs(step - dt) > 1e-6 * dt) throw Error("spectrum needs uniformly spaced samples");
  }
  const std::vector<double> x = demeaned(series.values);
  const auto coeffs = (!direct && is_power_of_two(n)) ? fft_radix2(x) : dft(x);

  Spectrum s;
  const std::size_t half = n / 2;
  s.frequencies.resize(half + 1);
  s.magnitudes.resize(half + 1);
  for (std::size_t k = 0; k <= half; ++k) {
    s.frequencies[k] = static_cast<double>(k) / (static_cast<double>(n) * dt);
    s.magnitudes[k] = std::abs(coeffs[k]);
  }
  double best = 0.0;
  for (std::size_t k = 1; k <= half; ++k) {
    if (s.magnitudes[k] > best) {
      best = s.magnitudes[k];
      s.dominant_bin = k;
    }
  }
  s.dominant = s.frequencies[s.dominant_bin];
  return s;
}

double parseval_relative_error(std::span<const double> values) {
  const std::vector<double> x = demeaned(values);
  const auto coeffs = is_power_of_two(x.size()) ? fft_radix2(x) : dft(x);
  double time_energy = 0.0;
  for (const double v : x) time_energy += v * v;
  double freq_energy = 0.0;
  for (const auto& c : coeffs) freq_energy += std::norm(c);
  freq_energy /= static_cast<double>(x.size());
  if (time_energy == 0.0) return freq_energy == 0.0 ? 0.0 : 1.0;
  return std::abs(freq_energy - time_energy) / time_energy;
}

}  // namespace mppic
