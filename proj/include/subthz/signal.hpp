// SPDX-License-Identifier: Apache-2.0

#ifndef SUBTHZ_SIGNAL_HPP
#define SUBTHZ_SIGNAL_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "subthz/errors.hpp"

namespace subthz {

using Complex = std::complex<double>;
using ComplexVector = std::vector<Complex>;

/// Complex baseband envelope in volts (RMS-envelope convention).
struct SampleBuffer {
  ComplexVector samples;
  double sample_rate_hz = 1.0;

  std::size_t size() const { return samples.size(); }

  void validate() const {
    if (!(sample_rate_hz > 0.0) || !std::isfinite(sample_rate_hz))
      throw DataError("sample rate must be positive");
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (!std::isfinite(samples[i].real()) || !std::isfinite(samples[i].imag()))
        throw DataError("non-finite sample at index " + std::to_string(i));
    }
  }
};

inline double mean_power(std::span<const Complex> s) {
  if (s.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& v : s) acc += std::norm(v);
  return acc / static_cast<double>(s.size());
}

inline double peak_power(std::span<const Complex> s) {
  double peak = 0.0;
  for (const auto& v : s) peak = std::max(peak, std::norm(v));
  return peak;
}

}  // namespace subthz

#endif  // SUBTHZ_SIGNAL_HPP
