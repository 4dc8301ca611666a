// SPDX-License-Identifier: Apache-2.0
//
// Quasi-memoryless power-amplifier behavioral models (AM-AM / AM-PM).
//
// Volt-domain models (Rapp, Saleh, Ghorbani) map an input envelope amplitude
// in volts to an output amplitude in volts and a phase shift in degrees. The
// polynomial model works in dBm; it is bridged to the volt domain through the
// reference-resistance convention of units.hpp.

#ifndef SUBTHZ_PA_MODELS_HPP
#define SUBTHZ_PA_MODELS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "subthz/errors.hpp"
#include "subthz/polynomial.hpp"
#include "subthz/signal.hpp"
#include "subthz/units.hpp"

namespace subthz {

namespace detail {

inline void require_amplitude(double x, const char* what) {
  if (!std::isfinite(x)) throw DomainError(std::string(what) + ": non-finite input amplitude");
  if (x < 0.0) throw DomainError(std::string(what) + ": negative input amplitude " + std::to_string(x));
}

inline void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(name) + " must be positive and finite");
}

inline void require_finite(double v, const char* name) {
  if (!std::isfinite(v)) throw ConfigError(std::string(name) + " must be finite");
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Modified Rapp
// ---------------------------------------------------------------------------

struct RappParams {
  double g_lin = 1.0;  // small-signal voltage gain
  double v_sat = 1.0;  // saturation voltage (V)
  double p = 1.0;      // smoothness
  double a_pm = 0.0;   // deg * V^-q1
  double b_pm = 1.0;   // V
  double q1 = 1.0;
  double q2 = 1.0;

  void validate() const {
    detail::require_positive(g_lin, "rapp.g_lin");
    detail::require_positive(v_sat, "rapp.v_sat");
    detail::require_positive(p, "rapp.p");
    detail::require_positive(b_pm, "rapp.b_pm");
    detail::require_positive(q2, "rapp.q2");
    detail::require_finite(a_pm, "rapp.a_pm");
    detail::require_finite(q1, "rapp.q1");
  }

  bool operator==(const RappParams&) const = default;
};

/// G x / (1 + |G x / Vsat|^{2p})^{1/(2p)}.
inline double rapp_amplitude(double rho_in, const RappParams& rp) {
  detail::require_amplitude(rho_in, "rapp_amplitude");
  const double u = rp.g_lin * rho_in / rp.v_sat;
  const double two_p = 2.0 * rp.p;
  // Factor out the dominant term so large u (or large p) cannot overflow.
  if (u <= 1.0) return rp.g_lin * rho_in / std::pow(1.0 + std::pow(u, two_p), 1.0 / two_p);
  return rp.v_sat / std::pow(1.0 + std::pow(u, -two_p), 1.0 / two_p);
}

/// A x^{q1} / (1 + |x / B|^{q2}), degrees.
inline double rapp_phase(double rho_in, const RappParams& rp) {
  detail::require_amplitude(rho_in, "rapp_phase");
  if (rho_in == 0.0) return 0.0;
  return rp.a_pm * std::pow(rho_in, rp.q1) / (1.0 + std::pow(rho_in / rp.b_pm, rp.q2));
}

/// Input amplitude at which the Rapp AM-AM gain has dropped by 1 dB.
inline double compression_point_1db(const RappParams& rp) {
  rp.validate();
  return (rp.v_sat / rp.g_lin) * std::pow(std::pow(10.0, rp.p / 10.0) - 1.0, 1.0 / (2.0 * rp.p));
}

// ---------------------------------------------------------------------------
// Saleh
// ---------------------------------------------------------------------------

/// alpha x^n / (1 + beta x^2)^nu, the general Saleh branch.
inline double saleh_branch(double x, double alpha, double beta, int n, int nu) {
  if (!std::isfinite(x)) throw DomainError("saleh: non-finite input amplitude");
  if (x < 0.0) throw DomainError("saleh: negative input amplitude");
  return alpha * std::pow(x, n) / std::pow(1.0 + beta * x * x, nu);
}

struct SalehParams {
  double alpha1 = 1.0;
  double beta1 = 1.0;
  double alpha2 = 0.0;
  double beta2 = 1.0;
  int n_amplitude = 1;
  int nu_amplitude = 1;
  int n_phase = 2;
  int nu_phase = 1;

  void validate() const {
    detail::require_finite(alpha1, "saleh.alpha1");
    detail::require_finite(alpha2, "saleh.alpha2");
    detail::require_positive(beta1, "saleh.beta1");
    detail::require_positive(beta2, "saleh.beta2");
    for (int n : {n_amplitude, n_phase})
      if (n < 1 || n > 3) throw ConfigError("saleh exponent n must be in {1,2,3}");
    for (int nu : {nu_amplitude, nu_phase})
      if (nu < 1 || nu > 2) throw ConfigError("saleh exponent nu must be in {1,2}");
  }

  bool operator==(const SalehParams&) const = default;
};

inline double saleh_amplitude(double x, const SalehParams& sp) {
  return saleh_branch(x, sp.alpha1, sp.beta1, sp.n_amplitude, sp.nu_amplitude);
}

inline double saleh_phase(double x, const SalehParams& sp) {
  return saleh_branch(x, sp.alpha2, sp.beta2, sp.n_phase, sp.nu_phase);
}

// ---------------------------------------------------------------------------
// Ghorbani
// ---------------------------------------------------------------------------

struct GhorbaniParams {
  std::array<double, 4> y{};  // AM-AM
  std::array<double, 4> z{};  // AM-PM

  void validate() const {
    for (double v : y) detail::require_finite(v, "ghorbani.y");
    for (double v : z) detail::require_finite(v, "ghorbani.z");
    if (y[1] > 0.0 && y[2] < 0.0) throw ConfigError("ghorbani.y3 must be >= 0 when y2 > 0");
    if (z[1] > 0.0 && z[2] < 0.0) throw ConfigError("ghorbani.z3 must be >= 0 when z2 > 0");
  }

  bool operator==(const GhorbaniParams&) const = default;
};

/// c1 x^{c2} / (1 + c3 x^{c2}) + c4 x
inline double ghorbani_branch(double x, const std::array<double, 4>& c) {
  detail::require_amplitude(x, "ghorbani");
  if (x == 0.0) return 0.0;
  const double xp = std::pow(x, c[1]);
  return c[0] * xp / (1.0 + c[2] * xp) + c[3] * x;
}

inline double ghorbani_amplitude(double x, const GhorbaniParams& gp) { return ghorbani_branch(x, gp.y); }
inline double ghorbani_phase(double x, const GhorbaniParams& gp) { return ghorbani_branch(x, gp.z); }

// ---------------------------------------------------------------------------
// Polynomial (dBm domain)
// ---------------------------------------------------------------------------

enum class RangePolicy {
  error,  // out-of-range input raises RangeError
  clamp,  // below range: hold the gain at the lower bound; above: hold the output at the upper bound
};

struct PolyParams {
  std::vector<double> a;  // AM-AM, dBm -> dBm, ascending powers
  std::vector<double> b;  // AM-PM, dBm -> degrees
  double range_lo = -40.0;
  double range_hi = 0.0;
  RangePolicy policy = RangePolicy::error;

  void validate() const {
    if (a.size() < 2 || b.size() < 2) throw ConfigError("polynomial model needs order >= 1 for both branches");
    for (double v : a) detail::require_finite(v, "poly.a");
    for (double v : b) detail::require_finite(v, "poly.b");
    if (!(range_lo < range_hi)) throw ConfigError("poly valid_range must satisfy lo < hi");
  }

  bool operator==(const PolyParams&) const = default;
};

namespace detail {

inline double poly_checked_input(double alpha_i, const PolyParams& pp) {
  if (!std::isfinite(alpha_i)) throw DomainError("polynomial model: non-finite input power");
  if (alpha_i < pp.range_lo) {
    if (pp.policy == RangePolicy::error)
      throw RangeError("polynomial model: input " + std::to_string(alpha_i) + " dBm below valid range lower bound " +
                           std::to_string(pp.range_lo) + " dBm",
                       pp.range_lo);
    return pp.range_lo;
  }
  if (alpha_i > pp.range_hi) {
    if (pp.policy == RangePolicy::error)
      throw RangeError("polynomial model: input " + std::to_string(alpha_i) + " dBm above valid range upper bound " +
                           std::to_string(pp.range_hi) + " dBm",
                       pp.range_hi);
    return pp.range_hi;
  }
  return alpha_i;
}

}  // namespace detail

/// Output power (dBm) for an input power (dBm).
inline double poly_amplitude(double alpha_i, const PolyParams& pp) {
  const double xin = detail::poly_checked_input(alpha_i, pp);
  const double out = horner(pp.a, xin);
  if (alpha_i < pp.range_lo) return out + (alpha_i - xin);  // constant-gain extension
  return out;
}

/// Output phase (degrees) for an input power (dBm).
inline double poly_phase(double alpha_i, const PolyParams& pp) {
  return horner(pp.b, detail::poly_checked_input(alpha_i, pp));
}

// ---------------------------------------------------------------------------
// Tagged model
// ---------------------------------------------------------------------------

enum class ModelKind { polynomial, ghorbani, saleh, rapp };

inline const char* to_string(ModelKind k) {
  switch (k) {
    case ModelKind::polynomial:
      return "polynomial";
    case ModelKind::ghorbani:
      return "ghorbani";
    case ModelKind::saleh:
      return "saleh";
    case ModelKind::rapp:
      return "rapp";
  }
  return "?";
}

struct PaModel {
  std::variant<PolyParams, GhorbaniParams, SalehParams, RappParams> params;
  double fc_hz = 1.0;

  ModelKind kind() const { return static_cast<ModelKind>(params.index()); }

  void validate() const {
    detail::require_positive(fc_hz, "fc_hz");
    std::visit([](const auto& p) { p.validate(); }, params);
  }

  bool operator==(const PaModel&) const = default;
};

struct AmPm {
  double amplitude = 0.0;  // V
  double phase_deg = 0.0;
};

/// Evaluates a model on an envelope amplitude in volts. A zero amplitude maps
/// to zero output for every model (a zero sample has no phase or power).
inline AmPm evaluate(const PaModel& model, double rho) {
  detail::require_amplitude(rho, "evaluate");
  if (rho == 0.0) return {};
  return std::visit(
      [rho](const auto& p) -> AmPm {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, RappParams>) {
          return {rapp_amplitude(rho, p), rapp_phase(rho, p)};
        } else if constexpr (std::is_same_v<T, SalehParams>) {
          return {saleh_amplitude(rho, p), saleh_phase(rho, p)};
        } else if constexpr (std::is_same_v<T, GhorbaniParams>) {
          return {ghorbani_amplitude(rho, p), ghorbani_phase(rho, p)};
        } else {
          const double pin = volts_to_dbm(rho);
          return {dbm_to_volts(poly_amplitude(pin, p)), poly_phase(pin, p)};
        }
      },
      model.params);
}

/// z = F_A(|y|) exp(j (arg y + F_P(|y|))) per sample.
inline ComplexVector apply_pa(std::span<const Complex> input, const PaModel& model) {
  ComplexVector out(input.size());
  for (std::size_t i = 0; i < input.size(); ++i) {
    const double rho = std::abs(input[i]);
    AmPm r;
    try {
      r = evaluate(model, rho);
    } catch (const RangeError& e) {
      throw RangeError(std::string(e.what()) + " (sample " + std::to_string(i) + ")", e.bound());
    } catch (const DomainError& e) {
      throw DomainError(std::string(e.what()) + " (sample " + std::to_string(i) + ")");
    }
    out[i] = rho == 0.0 ? Complex{} : std::polar(r.amplitude, std::arg(input[i]) + deg_to_rad(r.phase_deg));
  }
  return out;
}

inline SampleBuffer apply_pa(const SampleBuffer& buffer, const PaModel& model) {
  return {apply_pa(buffer.samples, model), buffer.sample_rate_hz};
}

namespace detail {

/// Input amplitude of peak secant gain for Ghorbani AM-AM. With y1 != 1 the
/// gain has no small-signal limit, so the peak stands in for it.
inline double ghorbani_peak_gain_input(const GhorbaniParams& gp) {
  auto g = [&](double lx) {
    const double x = std::pow(10.0, lx);
    return ghorbani_amplitude(x, gp) / x;
  };
  double best = -12.0;
  for (int i = 0; i <= 1100; ++i) {
    const double lx = -12.0 + 0.01 * i;
    if (g(lx) > g(best)) best = lx;
  }
  double a = best - 0.01, b = best + 0.01;
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int i = 0; i < 80; ++i) {
    const double c = b - r * (b - a), d = a + r * (b - a);
    (g(c) > g(d) ? b : a) = g(c) > g(d) ? d : c;
  }
  return std::pow(10.0, 0.5 * (a + b));
}

}  // namespace detail

/// Small-signal voltage gain of a model. Closed form where one exists, the
/// peak gain for Ghorbani, otherwise the secant gain at `reference_amplitude`.
inline double small_signal_gain(const PaModel& model, double reference_amplitude = 1e-6) {
  if (const auto* rp = std::get_if<RappParams>(&model.params)) return rp->g_lin;
  if (const auto* sp = std::get_if<SalehParams>(&model.params); sp && sp->n_amplitude == 1) return sp->alpha1;
  if (const auto* gp = std::get_if<GhorbaniParams>(&model.params)) {
    const double x = detail::ghorbani_peak_gain_input(*gp);
    return ghorbani_amplitude(x, *gp) / x;
  }
  if (const auto* pp = std::get_if<PolyParams>(&model.params))
    reference_amplitude = std::max(reference_amplitude, dbm_to_volts(pp->range_lo));
  return evaluate(model, reference_amplitude).amplitude / reference_amplitude;
}

/// Gain compression (dB, <= 0 when compressed) relative to the small-signal gain.
inline double gain_compression_db(const PaModel& model, double rho, double g_small) {
  return 20.0 * std::log10(evaluate(model, rho).amplitude / (g_small * rho));
}

/// 1-dB compression input amplitude found by bracketing + bisection. Works for
/// every model kind; for Rapp it must agree with the closed form.
inline double compression_point_1db_numeric(const PaModel& model, double rel_tol = 1e-13) {
  model.validate();
  const double g0 = small_signal_gain(model);
  double lo = 1e-9;
  if (const auto* pp = std::get_if<PolyParams>(&model.params)) lo = dbm_to_volts(pp->range_lo);
  if (const auto* gp = std::get_if<GhorbaniParams>(&model.params)) lo = detail::ghorbani_peak_gain_input(*gp);
  if (gain_compression_db(model, lo, g0) <= -1.0) throw NumericalError("model already compressed at the lower bracket");
  double hi = lo;
  for (int i = 0; i < 200; ++i) {
    hi *= 2.0;
    if (const auto* pp = std::get_if<PolyParams>(&model.params); pp && volts_to_dbm(hi) > pp->range_hi)
      throw NumericalError("no 1-dB compression point inside the polynomial model range");
    if (gain_compression_db(model, hi, g0) <= -1.0) break;
    lo = hi;
    if (i == 199) throw NumericalError("1-dB compression point not bracketed");
  }
  while ((hi - lo) > rel_tol * hi) {
    const double mid = 0.5 * (lo + hi);
    if (gain_compression_db(model, mid, g0) > -1.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// Frequency trend and gain drop
// ---------------------------------------------------------------------------

inline constexpr double kVsatTrendSlope = -2.5585e-13;  // V/Hz
inline constexpr double kVsatTrendIntercept = 0.1345;   // V

/// First-order Vsat(f) trend of the fitted Rapp saturation voltage.
inline double vsat_trend(double f_hz) {
  if (!(f_hz > 0.0) || !std::isfinite(f_hz)) throw DomainError("vsat_trend: frequency must be positive");
  const double v = kVsatTrendSlope * f_hz + kVsatTrendIntercept;
  if (v <= 0.0)
    throw RangeError("vsat_trend: trend is non-positive at " + std::to_string(f_hz) + " Hz",
                     -kVsatTrendIntercept / kVsatTrendSlope);
  return v;
}

/// Band-power gain drop relative to the small-signal S21: P_out - P_in - S21.
inline double gain_drop(double p_out_dbm, double p_in_dbm, double s21_db) {
  if (!std::isfinite(p_out_dbm) || !std::isfinite(p_in_dbm) || !std::isfinite(s21_db))
    throw DomainError("gain_drop: non-finite input");
  return p_out_dbm - p_in_dbm - s21_db;
}

}  // namespace subthz

#endif  // SUBTHZ_PA_MODELS_HPP
