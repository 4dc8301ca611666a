// SPDX-License-Identifier: Apache-2.0
//
// Single-carrier (RRC) and OFDM baseband waveforms, QAM mapping, PAPR,
// input back-off scaling, one-tap equalization and EVM.
//
// Both modulators emit unit mean envelope power for unit-energy symbols, so
// back-off comparisons across waveforms are fair. With white noise of
// per-sample variance s2 added to a waveform of mean power P, the per-symbol
// SNR after demodulation is P * oversampling / s2 for both waveforms.

#ifndef SUBTHZ_WAVEFORMS_HPP
#define SUBTHZ_WAVEFORMS_HPP

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "subthz/errors.hpp"
#include "subthz/pa_models.hpp"
#include "subthz/random.hpp"
#include "subthz/signal.hpp"
#include "subthz/units.hpp"

namespace subthz {

enum class PulseShaping {
  circular,  // block-periodic RRC applied in the frequency domain (exact Nyquist)
  linear,    // FIR convolution with span-truncated RRC taps
};

struct WaveformConfig {
  int modulation_order = 64;
  int n_subcarriers = 1;  // 1 = single carrier
  double rolloff = 0.5;
  int oversampling = 0;  // 0 = default: 8 (single carrier), 4 (OFDM)
  int rrc_span = 32;     // symbols, linear pulse shaping only
  double cp_fraction = 0.125;
  double bandwidth_hz = 1e9;  // symbol rate (SC) or N_sc * subcarrier spacing (OFDM)
  PulseShaping shaping = PulseShaping::circular;

  bool single_carrier() const { return n_subcarriers == 1; }
  int effective_oversampling() const {
    if (oversampling > 0) return oversampling;
    return single_carrier() ? 8 : 4;
  }
  int bits_per_symbol() const { return std::countr_zero(static_cast<unsigned>(modulation_order)); }
  double sample_rate_hz() const { return bandwidth_hz * effective_oversampling(); }

  void validate() const {
    if (modulation_order != 4 && modulation_order != 16 && modulation_order != 64)
      throw ConfigError("modulation order must be 4, 16 or 64");
    if (n_subcarriers < 1 || (n_subcarriers > 1 && !std::has_single_bit(static_cast<unsigned>(n_subcarriers))))
      throw ConfigError("n_subcarriers must be 1 or a power of two");
    if (oversampling != 0 && oversampling < 2) throw ConfigError("oversampling must be >= 2");
    if (!(rolloff >= 0.0 && rolloff <= 1.0)) throw ConfigError("rolloff must lie in [0, 1]");
    if (rrc_span < 2 || rrc_span % 2 != 0) throw ConfigError("rrc_span must be an even number >= 2");
    if (!(cp_fraction >= 0.0 && cp_fraction < 1.0)) throw ConfigError("cp_fraction must lie in [0, 1)");
    if (!(bandwidth_hz > 0.0)) throw ConfigError("bandwidth must be positive");
  }
};

// ---------------------------------------------------------------------------
// Gray-mapped square QAM
// ---------------------------------------------------------------------------

class QamConstellation {
 public:
  explicit QamConstellation(int order) : order_(order) {
    if (order != 4 && order != 16 && order != 64) throw ConfigError("QAM order must be 4, 16 or 64");
    bits_ = std::countr_zero(static_cast<unsigned>(order));
    levels_ = 1 << (bits_ / 2);
    scale_ = 1.0 / std::sqrt(2.0 * (order - 1) / 3.0);
  }

  int order() const { return order_; }
  int bits_per_symbol() const { return bits_; }
  double max_magnitude() const { return std::sqrt(2.0) * (levels_ - 1) * scale_; }

  /// All points, indexed by their bit label.
  std::vector<Complex> points() const {
    std::vector<Complex> p;
    for (int label = 0; label < order_; ++label) p.push_back(point(static_cast<unsigned>(label)));
    return p;
  }

  /// Label bits are MSB-first; the first half selects I, the second half Q.
  Complex point(unsigned label) const {
    const int half = bits_ / 2;
    const unsigned i_bits = label >> half;
    const unsigned q_bits = label & ((1u << half) - 1u);
    return {level(i_bits), level(q_bits)};
  }

  std::vector<Complex> map(std::span<const std::uint8_t> bits) const {
    if (bits.size() % static_cast<std::size_t>(bits_) != 0)
      throw DataError("bit count " + std::to_string(bits.size()) + " is not a multiple of " + std::to_string(bits_));
    std::vector<Complex> out(bits.size() / static_cast<std::size_t>(bits_));
    for (std::size_t s = 0; s < out.size(); ++s) {
      unsigned label = 0;
      for (int b = 0; b < bits_; ++b) label = (label << 1) | (bits[s * static_cast<std::size_t>(bits_) + static_cast<std::size_t>(b)] & 1u);
      out[s] = point(label);
    }
    return out;
  }

  /// Hard-decision nearest-neighbour demapping (per-axis slicing).
  std::vector<std::uint8_t> demap(std::span<const Complex> symbols) const {
    std::vector<std::uint8_t> out(symbols.size() * static_cast<std::size_t>(bits_));
    const int half = bits_ / 2;
    for (std::size_t s = 0; s < symbols.size(); ++s) {
      const unsigned label = (slice(symbols[s].real()) << half) | slice(symbols[s].imag());
      for (int b = 0; b < bits_; ++b)
        out[s * static_cast<std::size_t>(bits_) + static_cast<std::size_t>(b)] =
            static_cast<std::uint8_t>((label >> (bits_ - 1 - b)) & 1u);
    }
    return out;
  }

 private:
  double level(unsigned gray) const {
    unsigned pos = gray;  // Gray -> binary
    for (unsigned shift = gray >> 1; shift != 0; shift >>= 1) pos ^= shift;
    return (2.0 * pos - (levels_ - 1)) * scale_;
  }

  unsigned slice(double v) const {
    const double pos = std::round((v / scale_ + (levels_ - 1)) / 2.0);
    const auto p = static_cast<unsigned>(std::clamp(pos, 0.0, static_cast<double>(levels_ - 1)));
    return p ^ (p >> 1);  // binary -> Gray
  }

  int order_;
  int bits_;
  int levels_;
  double scale_;
};

inline std::vector<std::uint8_t> random_bits(std::size_t count, CounterRng& rng) {
  std::vector<std::uint8_t> bits(count);
  std::uint64_t word = 0;
  for (std::size_t i = 0; i < count; ++i) {
    if (i % 64 == 0) word = rng.next_bits();
    bits[i] = static_cast<std::uint8_t>((word >> (i % 64)) & 1u);
  }
  return bits;
}

// ---------------------------------------------------------------------------
// Root-raised-cosine pulse
// ---------------------------------------------------------------------------

/// RRC amplitude response at frequency f in units of the symbol rate.
inline double rrc_frequency_response(double f, double rolloff) {
  const double af = std::abs(f);
  const double f1 = 0.5 * (1.0 - rolloff);
  const double f2 = 0.5 * (1.0 + rolloff);
  if (af <= f1) return 1.0;
  if (af >= f2) return 0.0;
  return std::sqrt(0.5 * (1.0 + std::cos(std::numbers::pi / rolloff * (af - f1))));
}

/// Unit-energy RRC taps spanning `span` symbols at `oversampling` samples/symbol.
inline std::vector<double> rrc_taps(double rolloff, int oversampling, int span) {
  const int n = span * oversampling + 1;
  const int mid = n / 2;
  std::vector<double> h(static_cast<std::size_t>(n));
  const double b = rolloff;
  for (int i = 0; i < n; ++i) {
    const double t = static_cast<double>(i - mid) / oversampling;  // in symbols
    double v;
    if (t == 0.0) {
      v = 1.0 - b + 4.0 * b / std::numbers::pi;
    } else if (b > 0.0 && std::abs(std::abs(4.0 * b * t) - 1.0) < 1e-12) {
      v = b / std::sqrt(2.0) *
          ((1.0 + 2.0 / std::numbers::pi) * std::sin(std::numbers::pi / (4.0 * b)) +
           (1.0 - 2.0 / std::numbers::pi) * std::cos(std::numbers::pi / (4.0 * b)));
    } else {
      const double pt = std::numbers::pi * t;
      v = (std::sin(pt * (1.0 - b)) + 4.0 * b * t * std::cos(pt * (1.0 + b))) / (pt * (1.0 - 16.0 * b * b * t * t));
    }
    h[static_cast<std::size_t>(i)] = v;
  }
  double e = 0.0;
  for (double v : h) e += v * v;
  for (double& v : h) v /= std::sqrt(e);
  return h;
}

namespace detail {

inline ComplexVector fft_forward(const ComplexVector& in) {
  Eigen::FFT<double> fft;
  ComplexVector out;
  fft.fwd(out, in);
  return out;
}

/// Inverse DFT including the 1/N factor.
inline ComplexVector fft_inverse(const ComplexVector& in) {
  Eigen::FFT<double> fft;
  ComplexVector out;
  fft.inv(out, in);
  return out;
}

/// Multiplies a length-L spectrum by the RRC response with `os` samples/symbol.
inline void apply_rrc_spectrum(ComplexVector& spec, int os, double rolloff) {
  const auto len = static_cast<std::ptrdiff_t>(spec.size());
  const double per_symbol = static_cast<double>(len) / os;  // bins per symbol-rate unit
  for (std::ptrdiff_t m = 0; m < len; ++m) {
    const std::ptrdiff_t k = m < (len + 1) / 2 ? m : m - len;
    spec[static_cast<std::size_t>(m)] *= rrc_frequency_response(static_cast<double>(k) / per_symbol, rolloff);
  }
}

inline ComplexVector convolve(std::span<const Complex> x, std::span<const double> h) {
  if (x.empty()) return {};
  ComplexVector y(x.size() + h.size() - 1);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] == Complex{}) continue;
    for (std::size_t k = 0; k < h.size(); ++k) y[i + k] += x[i] * h[k];
  }
  return y;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Single carrier
// ---------------------------------------------------------------------------

/// RRC pulse-shaped waveform with unit mean power for unit-energy symbols.
/// Circular shaping returns symbols.size() * os samples; linear shaping
/// returns the full convolution (symbols.size() * os + span * os samples).
inline SampleBuffer sc_modulate(std::span<const Complex> symbols, const WaveformConfig& cfg) {
  cfg.validate();
  if (!cfg.single_carrier()) throw ConfigError("sc_modulate requires n_subcarriers = 1");
  if (symbols.empty()) throw DataError("sc_modulate: no symbols");
  const int os = cfg.effective_oversampling();
  const double gain = std::sqrt(static_cast<double>(os));
  ComplexVector up(symbols.size() * static_cast<std::size_t>(os));
  for (std::size_t k = 0; k < symbols.size(); ++k) up[k * static_cast<std::size_t>(os)] = symbols[k];

  if (cfg.shaping == PulseShaping::linear) {
    const auto h = rrc_taps(cfg.rolloff, os, cfg.rrc_span);
    auto y = detail::convolve(up, h);
    for (auto& v : y) v *= gain;
    return {std::move(y), cfg.sample_rate_hz()};
  }
  // unit-passband response: one more sqrt(os) to match the unit-energy taps
  auto spec = detail::fft_forward(up);
  detail::apply_rrc_spectrum(spec, os, cfg.rolloff);
  auto y = detail::fft_inverse(spec);
  for (auto& v : y) v *= gain * gain;
  return {std::move(y), cfg.sample_rate_hz()};
}

/// Matched RRC filter and symbol-rate decimation (group delay removed).
inline std::vector<Complex> sc_demodulate(const SampleBuffer& buffer, const WaveformConfig& cfg) {
  cfg.validate();
  if (!cfg.single_carrier()) throw ConfigError("sc_demodulate requires n_subcarriers = 1");
  const int os = cfg.effective_oversampling();
  const auto uos = static_cast<std::size_t>(os);
  const double gain = 1.0 / std::sqrt(static_cast<double>(os));

  if (cfg.shaping == PulseShaping::linear) {
    const auto h = rrc_taps(cfg.rolloff, os, cfg.rrc_span);
    if (buffer.size() < h.size()) throw DataError("sc_demodulate: buffer shorter than the RRC filter span");
    const std::size_t nsym = (buffer.size() - h.size() + 1 + uos - 1) / uos;
    const auto y = detail::convolve(buffer.samples, h);
    const std::size_t delay = h.size() - 1;
    std::vector<Complex> out(nsym);
    for (std::size_t k = 0; k < nsym; ++k) out[k] = y[delay + k * uos] * gain;
    return out;
  }
  if (buffer.size() == 0 || buffer.size() % uos != 0)
    throw DataError("sc_demodulate: circular buffer length must be a nonzero multiple of the oversampling factor");
  auto spec = detail::fft_forward(buffer.samples);
  detail::apply_rrc_spectrum(spec, os, cfg.rolloff);
  const auto y = detail::fft_inverse(spec);
  std::vector<Complex> out(buffer.size() / uos);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = y[k * uos];
  return out;
}

// ---------------------------------------------------------------------------
// OFDM
// ---------------------------------------------------------------------------

namespace detail {

/// FFT bin of active subcarrier j (0..n_sc-1), centred on DC.
inline std::size_t active_bin(int j, int n_sc, int fft_size) {
  const int k = j - n_sc / 2;
  return static_cast<std::size_t>((k + fft_size) % fft_size);
}

inline int cp_length(const WaveformConfig& cfg) {
  return static_cast<int>(std::lround(cfg.cp_fraction * cfg.n_subcarriers * cfg.effective_oversampling()));
}

}  // namespace detail

/// OFDM symbols of n_sc * os samples, n_sc centred active bins and a cyclic
/// prefix of cp_fraction of the symbol duration. Unit mean power.
inline SampleBuffer ofdm_modulate(std::span<const Complex> symbols, const WaveformConfig& cfg) {
  cfg.validate();
  if (cfg.single_carrier()) throw ConfigError("ofdm_modulate requires n_subcarriers > 1");
  const int nsc = cfg.n_subcarriers;
  if (symbols.empty() || symbols.size() % static_cast<std::size_t>(nsc) != 0)
    throw DataError("symbol count " + std::to_string(symbols.size()) + " is not a positive multiple of " +
                    std::to_string(nsc));
  const int nfft = nsc * cfg.effective_oversampling();
  const int cp = detail::cp_length(cfg);
  const double gain = static_cast<double>(nfft) / std::sqrt(static_cast<double>(nsc));
  const std::size_t n_ofdm = symbols.size() / static_cast<std::size_t>(nsc);

  Eigen::FFT<double> fft;
  ComplexVector freq(static_cast<std::size_t>(nfft)), time;
  ComplexVector out;
  out.reserve(n_ofdm * static_cast<std::size_t>(nfft + cp));
  for (std::size_t s = 0; s < n_ofdm; ++s) {
    std::fill(freq.begin(), freq.end(), Complex{});
    for (int j = 0; j < nsc; ++j) freq[detail::active_bin(j, nsc, nfft)] = symbols[s * static_cast<std::size_t>(nsc) + static_cast<std::size_t>(j)];
    fft.inv(time, freq);
    for (auto& v : time) v *= gain;
    out.insert(out.end(), time.end() - cp, time.end());
    out.insert(out.end(), time.begin(), time.end());
  }
  return {std::move(out), cfg.sample_rate_hz()};
}

inline std::vector<Complex> ofdm_demodulate(const SampleBuffer& buffer, const WaveformConfig& cfg) {
  cfg.validate();
  if (cfg.single_carrier()) throw ConfigError("ofdm_demodulate requires n_subcarriers > 1");
  const int nsc = cfg.n_subcarriers;
  const int nfft = nsc * cfg.effective_oversampling();
  const int cp = detail::cp_length(cfg);
  const auto block = static_cast<std::size_t>(nfft + cp);
  if (buffer.size() == 0 || buffer.size() % block != 0)
    throw DataError("ofdm_demodulate: buffer length is not a multiple of the OFDM symbol length");
  const double gain = std::sqrt(static_cast<double>(nsc)) / static_cast<double>(nfft);
  Eigen::FFT<double> fft;
  ComplexVector time(static_cast<std::size_t>(nfft)), freq;
  std::vector<Complex> out;
  out.reserve(buffer.size() / block * static_cast<std::size_t>(nsc));
  for (std::size_t off = 0; off < buffer.size(); off += block) {
    std::copy_n(buffer.samples.begin() + static_cast<std::ptrdiff_t>(off + static_cast<std::size_t>(cp)), nfft,
                time.begin());
    fft.fwd(freq, time);
    for (int j = 0; j < nsc; ++j) out.push_back(freq[detail::active_bin(j, nsc, nfft)] * gain);
  }
  return out;
}

inline SampleBuffer modulate(std::span<const Complex> symbols, const WaveformConfig& cfg) {
  return cfg.single_carrier() ? sc_modulate(symbols, cfg) : ofdm_modulate(symbols, cfg);
}

inline std::vector<Complex> demodulate(const SampleBuffer& buffer, const WaveformConfig& cfg) {
  return cfg.single_carrier() ? sc_demodulate(buffer, cfg) : ofdm_demodulate(buffer, cfg);
}

// ---------------------------------------------------------------------------
// Metrics and scaling
// ---------------------------------------------------------------------------

inline double papr(std::span<const Complex> s) {
  if (s.empty()) throw DomainError("papr: empty buffer");
  const double mean = mean_power(s);
  if (!(mean > 0.0)) throw DomainError("papr: zero-power buffer");
  return 10.0 * std::log10(peak_power(s) / mean);
}

/// Scales to mean power x_1dB^2 / 10^(ibo/10).
inline SampleBuffer scale_to_ibo(const SampleBuffer& buffer, double compression_amplitude, double ibo_db) {
  if (!std::isfinite(ibo_db)) throw DomainError("scale_to_ibo: non-finite back-off");
  if (!(compression_amplitude > 0.0)) throw DomainError("scale_to_ibo: compression point must be positive");
  const double p = mean_power(buffer.samples);
  if (!(p > 0.0)) throw DomainError("scale_to_ibo: zero-power buffer");
  const double target = compression_amplitude * compression_amplitude / db_to_linear_power(ibo_db);
  const double g = std::sqrt(target / p);
  SampleBuffer out{buffer.samples, buffer.sample_rate_hz};
  for (auto& v : out.samples) v *= g;
  return out;
}

inline SampleBuffer scale_to_ibo(const SampleBuffer& buffer, const RappParams& rp, double ibo_db) {
  return scale_to_ibo(buffer, compression_point_1db(rp), ibo_db);
}

/// Data-aided one-tap equalizer per stream; symbol i belongs to stream i % n_streams.
/// Tap c = sum(ref conj(rx)) / sum(|rx|^2).
inline std::vector<Complex> equalize(std::span<const Complex> rx, std::span<const Complex> ref, int n_streams = 1,
                                     std::vector<Complex>* taps = nullptr) {
  if (rx.size() != ref.size()) throw DataError("equalize: length mismatch");
  if (n_streams < 1) throw ConfigError("equalize: n_streams must be >= 1");
  const auto ns = static_cast<std::size_t>(n_streams);
  std::vector<Complex> num(ns);
  std::vector<double> den(ns, 0.0);
  for (std::size_t i = 0; i < rx.size(); ++i) {
    num[i % ns] += ref[i] * std::conj(rx[i]);
    den[i % ns] += std::norm(rx[i]);
  }
  std::vector<Complex> c(ns);
  for (std::size_t s = 0; s < ns; ++s) {
    if (!(den[s] > 0.0)) throw DomainError("equalize: zero-power received stream " + std::to_string(s));
    c[s] = num[s] / den[s];
  }
  std::vector<Complex> out(rx.size());
  for (std::size_t i = 0; i < rx.size(); ++i) out[i] = rx[i] * c[i % ns];
  if (taps) *taps = c;
  return out;
}

inline constexpr double kEvmFloorDb = -150.0;

/// 20 log10(RMS(measured - reference) / max|reference|), floored at kEvmFloorDb.
inline double evm_db(std::span<const Complex> measured, std::span<const Complex> reference) {
  if (measured.empty()) throw DataError("evm: empty input");
  if (measured.size() != reference.size()) throw DataError("evm: length mismatch");
  double err = 0.0, peak = 0.0;
  for (std::size_t i = 0; i < measured.size(); ++i) {
    err += std::norm(measured[i] - reference[i]);
    peak = std::max(peak, std::abs(reference[i]));
  }
  if (!(peak > 0.0)) throw DataError("evm: reference has zero magnitude");
  const double v = 20.0 * std::log10(std::sqrt(err / static_cast<double>(measured.size())) / peak);
  return std::max(v, kEvmFloorDb);
}

}  // namespace subthz

#endif  // SUBTHZ_WAVEFORMS_HPP
