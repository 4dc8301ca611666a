// SPDX-License-Identifier: Apache-2.0
//
// Link budget and the end-to-end chain:
//   modulate -> scale to back-off -> [predistort] -> PA -> AWGN -> demodulate -> equalize
// plus the EVM / BER / PA-input sweeps built on it.

#ifndef SUBTHZ_LINK_SIM_HPP
#define SUBTHZ_LINK_SIM_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "subthz/errors.hpp"
#include "subthz/pa_models.hpp"
#include "subthz/predistortion.hpp"
#include "subthz/random.hpp"
#include "subthz/signal.hpp"
#include "subthz/units.hpp"
#include "subthz/waveforms.hpp"

namespace subthz {

// ---------------------------------------------------------------------------
// Link budget
// ---------------------------------------------------------------------------

/// Sea-level standard-atmosphere gaseous specific attenuation near 315 GHz
/// (oxygen + 7.5 g/m^3 water vapour), read off the published P.676 curves.
inline constexpr double kDefaultAttenuationDbPerKm = 6.0;

struct LinkConfig {
  double g_t_dbi = 45.0;
  double g_r_dbi = 14.0;
  double distance_m = 35.0;
  double fc_hz = 315e9;
  double bandwidth_hz = 1e9;
  double noise_temp_k = 290.0;
  double atten_db_per_km = kDefaultAttenuationDbPerKm;

  void validate() const {
    if (!(distance_m > 0.0) || !std::isfinite(distance_m)) throw ConfigError("link distance must be positive");
    if (!(fc_hz > 0.0) || !std::isfinite(fc_hz)) throw ConfigError("link carrier frequency must be positive");
    if (!(bandwidth_hz > 0.0) || !std::isfinite(bandwidth_hz)) throw ConfigError("link bandwidth must be positive");
    if (!(noise_temp_k > 0.0) || !std::isfinite(noise_temp_k)) throw ConfigError("noise temperature must be positive");
    if (!std::isfinite(g_t_dbi) || !std::isfinite(g_r_dbi)) throw ConfigError("antenna gains must be finite");
    if (!(atten_db_per_km >= 0.0) || !std::isfinite(atten_db_per_km))
      throw ConfigError("specific attenuation must be finite and >= 0");
  }
};

/// 20 log10(4 pi d / lambda).
inline double free_space_loss_db(double distance_m, double fc_hz) {
  const double lambda = kSpeedOfLight / fc_hz;
  return 20.0 * std::log10(4.0 * std::numbers::pi * distance_m / lambda);
}

/// Antenna gains minus free-space and gaseous losses, dB.
inline double link_gain_db(const LinkConfig& cfg) {
  cfg.validate();
  return cfg.g_t_dbi + cfg.g_r_dbi - free_space_loss_db(cfg.distance_m, cfg.fc_hz) -
         cfg.atten_db_per_km * cfg.distance_m / 1000.0;
}

inline double received_power_dbm(double p_t_dbm, const LinkConfig& cfg) { return p_t_dbm + link_gain_db(cfg); }

/// kTB in dBm.
inline double noise_power_dbm(const LinkConfig& cfg) {
  cfg.validate();
  return watts_to_dbm(kBoltzmann * cfg.noise_temp_k * cfg.bandwidth_hz);
}

// ---------------------------------------------------------------------------
// Theory
// ---------------------------------------------------------------------------

inline double q_function(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

/// Nearest-neighbour approximation of Gray square M-QAM BER in AWGN at Es/N0 (linear).
inline double gray_qam_ber(int order, double es_n0) {
  const double m = order;
  const double k = std::log2(m);
  return 4.0 / k * (1.0 - 1.0 / std::sqrt(m)) * q_function(std::sqrt(3.0 * es_n0 / (m - 1.0)));
}

// ---------------------------------------------------------------------------
// Chain
// ---------------------------------------------------------------------------

enum class NoiseMode {
  none,         // noiseless EVM run
  direct,       // SNR given relative to the measured PA output power
  link_budget,  // thermal noise through the link; SNR follows from the back-off
};

inline const char* to_string(NoiseMode m) {
  switch (m) {
    case NoiseMode::none: return "none";
    case NoiseMode::direct: return "direct";
    case NoiseMode::link_budget: return "link_budget";
  }
  return "?";
}

struct BerStopping {
  std::uint64_t min_errors = 100;
  std::uint64_t max_bits = 10'000'000;
};

struct ChainConfig {
  WaveformConfig waveform;
  PaModel model{RappParams{}, 315e9};
  std::string model_id = "model";
  std::optional<Predistorter> pd;
  bool linear_pa = false;  // replace the PA by its small-signal gain
  double ibo_db = 0.0;
  NoiseMode noise = NoiseMode::none;
  double snr_db = 30.0;  // direct mode only
  LinkConfig link;
  std::uint64_t seed = 1;
  std::size_t symbols = 20'000;        // noiseless runs
  std::size_t frame_symbols = 16'384;  // noisy runs, per frame
  BerStopping stopping;

  void validate() const {
    waveform.validate();
    model.validate();
    link.validate();
    if (!std::isfinite(ibo_db)) throw ConfigError("ibo must be finite");
    if (noise == NoiseMode::direct && !std::isfinite(snr_db)) throw ConfigError("snr must be finite");
    if (symbols == 0 || frame_symbols == 0) throw ConfigError("symbol counts must be positive");
    if (stopping.max_bits == 0) throw ConfigError("bit budget must be positive");
  }
};

struct ChainMetrics {
  double evm_db = 0.0;
  double ber = 0.0;
  double ber_std_error = 0.0;
  std::uint64_t bit_errors = 0;
  std::uint64_t bits = 0;
  std::uint64_t symbols = 0;
  bool ber_below_resolution = false;  // no errors observed
  bool ber_converged = false;         // min_errors reached before the bit budget
  double ibo_db = 0.0;
  double snr_db = std::numeric_limits<double>::quiet_NaN();  // requested / nominal
  double measured_snr_db = std::numeric_limits<double>::quiet_NaN();
  double mean_pa_input_dbm = 0.0;
  double mean_pa_output_dbm = 0.0;
  double clip_rate = 0.0;
};

/// Back-off reference: closed form for Rapp, bisection otherwise.
inline double compression_reference(const PaModel& model) {
  if (const auto* rp = std::get_if<RappParams>(&model.params)) return compression_point_1db(*rp);
  return compression_point_1db_numeric(model);
}

/// Nominal transmit power G^2 x_1dB^2 / 10^(ibo/10), dBm.
inline double nominal_tx_power_dbm(const PaModel& model, double ibo_db) {
  const double g = small_signal_gain(model);
  const double x = compression_reference(model);
  return watts_to_dbm(g * g * x * x) - ibo_db;
}

inline double link_snr_db(const PaModel& model, double ibo_db, const LinkConfig& link) {
  return nominal_tx_power_dbm(model, ibo_db) + link_gain_db(link) - noise_power_dbm(link);
}

/// Back-off that yields `snr_db` in link-budget mode.
inline double ibo_for_link_snr(const PaModel& model, double snr_db, const LinkConfig& link) {
  return nominal_tx_power_dbm(model, 0.0) + link_gain_db(link) - noise_power_dbm(link) - snr_db;
}

namespace detail {

inline std::size_t round_up(std::size_t n, std::size_t multiple) { return (n + multiple - 1) / multiple * multiple; }

}  // namespace detail

/// Runs the chain. Deterministic given cfg.seed.
///
/// Noiseless runs process cfg.symbols symbols in one frame. Noisy runs
/// process frames of cfg.frame_symbols until cfg.stopping is met.
inline ChainMetrics run_chain(const ChainConfig& cfg) {
  cfg.validate();
  const WaveformConfig& wf = cfg.waveform;
  const QamConstellation qam(wf.modulation_order);
  const auto nsc = static_cast<std::size_t>(wf.n_subcarriers);
  const double os = wf.effective_oversampling();
  const double x1db = compression_reference(cfg.model);
  const double g_small = small_signal_gain(cfg.model);

  double noise_var_link = 0.0;  // per-sample variance referred to the transmitter
  ChainMetrics m;
  m.ibo_db = cfg.ibo_db;
  if (cfg.noise == NoiseMode::link_budget) {
    const double gain = link_gain_db(cfg.link);
    noise_var_link = dbm_to_watts(noise_power_dbm(cfg.link) - gain) * os;
    m.snr_db = link_snr_db(cfg.model, cfg.ibo_db, cfg.link);
  } else if (cfg.noise == NoiseMode::direct) {
    m.snr_db = cfg.snr_db;
  }

  const bool noisy = cfg.noise != NoiseMode::none;
  const std::size_t frame = detail::round_up(noisy ? cfg.frame_symbols : cfg.symbols, nsc);
  CounterRng bit_rng(hash_combine(cfg.seed, 0xb175));
  CounterRng noise_rng(hash_combine(cfg.seed, 0x2015e));

  double err_acc = 0.0, peak = 0.0;
  double p_in_acc = 0.0, p_out_acc = 0.0, noise_acc = 0.0;
  std::uint64_t samples = 0, clipped = 0;
  const std::size_t bits_per_frame = frame * static_cast<std::size_t>(qam.bits_per_symbol());

  for (;;) {
    const auto bits = random_bits(bits_per_frame, bit_rng);
    const auto ref = qam.map(bits);
    SampleBuffer x = scale_to_ibo(modulate(ref, wf), x1db, cfg.ibo_db);
    if (cfg.pd) {
      auto out = apply_predistorter(x.samples, *cfg.pd);
      clipped += out.clipped;
      x.samples = std::move(out.samples);
    }
    SampleBuffer z;
    z.sample_rate_hz = x.sample_rate_hz;
    if (cfg.linear_pa) {
      z.samples = x.samples;
      for (auto& v : z.samples) v *= g_small;
    } else {
      z.samples = apply_pa(x.samples, cfg.model);
    }
    const double pz = mean_power(z.samples);
    p_in_acc += mean_power(x.samples) * static_cast<double>(x.size());
    p_out_acc += pz * static_cast<double>(z.size());
    samples += x.size();

    if (noisy) {
      const double var = cfg.noise == NoiseMode::direct ? pz * os / db_to_linear_power(cfg.snr_db) : noise_var_link;
      for (auto& v : z.samples) {
        const Complex n = noise_rng.next_complex_gaussian(var);
        noise_acc += std::norm(n);
        v += n;
      }
    }

    const auto rx = equalize(demodulate(z, wf), ref, wf.n_subcarriers);
    for (std::size_t i = 0; i < ref.size(); ++i) {
      err_acc += std::norm(rx[i] - ref[i]);
      peak = std::max(peak, std::abs(ref[i]));
    }
    const auto hat = qam.demap(rx);
    for (std::size_t i = 0; i < bits.size(); ++i) m.bit_errors += bits[i] != hat[i];
    m.bits += bits.size();
    m.symbols += ref.size();

    if (!noisy) break;
    if (m.bit_errors >= cfg.stopping.min_errors || m.bits >= cfg.stopping.max_bits) break;
  }

  const double nb = static_cast<double>(m.bits);
  m.evm_db = std::max(kEvmFloorDb, 20.0 * std::log10(std::sqrt(err_acc / static_cast<double>(m.symbols)) / peak));
  m.ber = static_cast<double>(m.bit_errors) / nb;
  m.ber_std_error = std::sqrt(m.ber * (1.0 - m.ber) / nb);
  m.ber_below_resolution = m.bit_errors == 0;
  m.ber_converged = m.bit_errors >= cfg.stopping.min_errors;
  m.mean_pa_input_dbm = watts_to_dbm(p_in_acc / static_cast<double>(samples));
  m.mean_pa_output_dbm = watts_to_dbm(p_out_acc / static_cast<double>(samples));
  m.clip_rate = static_cast<double>(clipped) / static_cast<double>(samples);
  if (noisy && noise_acc > 0.0) m.measured_snr_db = linear_power_to_db(p_out_acc * os / noise_acc);
  return m;
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

struct SweepRow {
  double axis = 0.0;
  ChainMetrics metrics;
  bool ok = true;
  std::string error;  // set when ok == false
};

struct SweepMetadata {
  std::string kind;       // evm-vs-nsc, ber-vs-snr, pa-input-vs-ibo
  std::string axis_name;  // n_subcarriers, snr_db, ibo_db
  std::uint64_t seed = 0;
  std::string model_id;
  std::string pd_mode = "none";
  int pd_order_amplitude = 0;
  int pd_order_phase = 0;
  double pd_chi = 0.0;
  std::string noise_mode = "none";
  std::uint64_t total_symbols = 0;
  std::uint64_t total_bits = 0;
};

struct SweepResult {
  SweepMetadata meta;
  std::vector<SweepRow> rows;
};

namespace detail {

inline SweepMetadata sweep_metadata(const ChainConfig& cfg, const char* kind, const char* axis) {
  SweepMetadata md;
  md.kind = kind;
  md.axis_name = axis;
  md.seed = cfg.seed;
  md.model_id = cfg.model_id;
  md.noise_mode = to_string(cfg.noise);
  if (cfg.linear_pa) md.pd_mode = "linear-pa";
  if (cfg.pd) {
    md.pd_mode = to_string(cfg.pd->mode());
    md.pd_chi = cfg.pd->chi();
    if (cfg.pd->mode() == PdMode::polynomial) {
      md.pd_order_amplitude = cfg.pd->order_amplitude();
      md.pd_order_phase = cfg.pd->order_phase();
    }
  }
  return md;
}

template <class Configure>
SweepResult run_sweep(const ChainConfig& base, std::span<const double> axis, const char* kind, const char* axis_name,
                      Configure&& configure) {
  if (axis.empty()) throw ConfigError(std::string(kind) + ": axis list is empty");
  base.validate();
  SweepResult res;
  res.meta = sweep_metadata(base, kind, axis_name);
  for (double v : axis) {
    SweepRow row;
    row.axis = v;
    try {
      ChainConfig cfg = base;
      cfg.seed = derive_seed(base.seed, v);
      configure(cfg, v);
      row.metrics = run_chain(cfg);
      res.meta.total_symbols += row.metrics.symbols;
      res.meta.total_bits += row.metrics.bits;
    } catch (const Error& e) {
      row.ok = false;
      row.error = e.what();
    }
    res.rows.push_back(std::move(row));
  }
  return res;
}

}  // namespace detail

/// Noiseless EVM for each subcarrier count (OFDM) at base.ibo_db.
inline SweepResult sweep_evm_vs_nsc(const ChainConfig& base, std::span<const int> n_subcarriers) {
  std::vector<double> axis(n_subcarriers.begin(), n_subcarriers.end());
  ChainConfig b = base;
  b.noise = NoiseMode::none;
  return detail::run_sweep(b, axis, "evm-vs-nsc", "n_subcarriers", [](ChainConfig& c, double v) {
    c.waveform.n_subcarriers = static_cast<int>(v);
    c.waveform.validate();
  });
}

/// BER against SNR. Direct mode keeps base.ibo_db; link-budget mode sets the
/// back-off from each SNR through the link budget.
inline SweepResult sweep_ber_vs_snr(const ChainConfig& base, std::span<const double> snr_db) {
  if (base.noise == NoiseMode::none) throw ConfigError("ber sweep needs noise mode direct or link_budget");
  return detail::run_sweep(base, snr_db, "ber-vs-snr", "snr_db", [](ChainConfig& c, double v) {
    if (c.noise == NoiseMode::direct)
      c.snr_db = v;
    else
      c.ibo_db = ibo_for_link_snr(c.model, v, c.link);
  });
}

/// Noiseless run per back-off; rows carry the mean PA input power.
inline SweepResult sweep_pa_input_vs_ibo(const ChainConfig& base, std::span<const double> ibo_db) {
  ChainConfig b = base;
  b.noise = NoiseMode::none;
  return detail::run_sweep(b, ibo_db, "pa-input-vs-ibo", "ibo_db", [](ChainConfig& c, double v) { c.ibo_db = v; });
}

}  // namespace subthz

#endif  // SUBTHZ_LINK_SIM_HPP
