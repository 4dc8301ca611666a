// SPDX-License-Identifier: Apache-2.0
//
// Parameter extraction from AM-AM / AM-PM measurement curves.
//
// Residual conventions (reported in FitReport):
//   polynomial  - RMS error in dB (AM-AM) and degrees (AM-PM)
//   volt models - RMS error in volts (AM-AM) and degrees (AM-PM)

#ifndef SUBTHZ_FITTING_HPP
#define SUBTHZ_FITTING_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "subthz/errors.hpp"
#include "subthz/pa_models.hpp"
#include "subthz/polynomial.hpp"
#include "subthz/random.hpp"
#include "subthz/simplex.hpp"
#include "subthz/units.hpp"

namespace subthz {

struct MeasurementPoint {
  double p_in_dbm = 0.0;
  double p_out_dbm = 0.0;
  double phase_deg = 0.0;
  bool operator==(const MeasurementPoint&) const = default;
};

struct MeasurementCurve {
  double fc_hz = 0.0;
  std::vector<MeasurementPoint> points;  // strictly increasing p_in

  void validate() const {
    const std::string tag = " (fc = " + std::to_string(fc_hz) + " Hz)";
    if (points.size() < 2) throw DataError("measurement curve needs at least 2 points" + tag);
    for (std::size_t i = 0; i < points.size(); ++i) {
      const auto& p = points[i];
      if (!std::isfinite(p.p_in_dbm) || !std::isfinite(p.p_out_dbm) || !std::isfinite(p.phase_deg))
        throw DataError("non-finite measurement value at point " + std::to_string(i) + tag);
      if (i > 0 && !(p.p_in_dbm > points[i - 1].p_in_dbm))
        throw DataError("input power not strictly increasing at point " + std::to_string(i) + tag);
    }
  }

  std::vector<double> input_dbm() const {
    std::vector<double> v;
    for (const auto& p : points) v.push_back(p.p_in_dbm);
    return v;
  }
  std::vector<double> output_dbm() const {
    std::vector<double> v;
    for (const auto& p : points) v.push_back(p.p_out_dbm);
    return v;
  }
  std::vector<double> phase() const {
    std::vector<double> v;
    for (const auto& p : points) v.push_back(p.phase_deg);
    return v;
  }
  std::vector<double> input_volts() const {
    std::vector<double> v;
    for (const auto& p : points) v.push_back(dbm_to_volts(p.p_in_dbm));
    return v;
  }
  std::vector<double> output_volts() const {
    std::vector<double> v;
    for (const auto& p : points) v.push_back(dbm_to_volts(p.p_out_dbm));
    return v;
  }
};

struct FitReport {
  PaModel model;
  double residual_amplitude = 0.0;  // dB (polynomial) or V (volt-domain models), RMS
  double residual_phase = 0.0;      // degrees, RMS
  int iterations = 0;               // simplex iterations summed over restarts and branches
  bool converged = true;
  std::uint64_t seed = 0;
  int starts = 0;  // multi-start count (0 for closed-form fits)
  std::string amplitude_units;
};

struct FitOptions {
  std::uint64_t seed = 0x5eedULL;
  int starts = 8;  // deterministic jittered starts, index 0 is the unjittered initialization
  double jitter = 0.3;
  SimplexOptions simplex{1e-10, 2000};
  int polish_passes = 4;
};

// ---------------------------------------------------------------------------
// Phase preprocessing
// ---------------------------------------------------------------------------

struct RawPhaseSample {
  double f_hz = 0.0;
  double p_in_dbm = 0.0;
  double phase_deg = 0.0;  // raw S21 phase, possibly wrapped
};

struct PhasePoint {
  double p_in_dbm = 0.0;
  double phase_deg = 0.0;
};

struct PhaseCurve {
  double fc_hz = 0.0;
  std::vector<PhasePoint> points;
};

/// Removes +-360 degree jumps along the sequence (consecutive steps kept within +-180).
inline std::vector<double> unwrap_degrees(std::span<const double> phase) {
  std::vector<double> out(phase.begin(), phase.end());
  double offset = 0.0;
  for (std::size_t i = 1; i < out.size(); ++i) {
    const double step = phase[i] - phase[i - 1];
    offset -= 360.0 * std::round(step / 360.0);
    out[i] = phase[i] + offset;
  }
  return out;
}

namespace detail {

/// Phase at `ref` from a sorted curve: exact sample, or linear interpolation
/// between bracketing samples when the nearest one is within `max_gap_db`.
inline double phase_at_reference(std::span<const double> pin, std::span<const double> phase, double ref,
                                 double max_gap_db, double f_hz) {
  for (std::size_t i = 0; i < pin.size(); ++i)
    if (pin[i] == ref) return phase[i];
  auto it = std::lower_bound(pin.begin(), pin.end(), ref);
  if (it != pin.begin() && it != pin.end()) {
    const std::size_t hi = static_cast<std::size_t>(it - pin.begin());
    const std::size_t lo = hi - 1;
    const double gap = std::min(ref - pin[lo], pin[hi] - ref);
    if (gap <= max_gap_db) {
      const double t = (ref - pin[lo]) / (pin[hi] - pin[lo]);
      return phase[lo] + t * (phase[hi] - phase[lo]);
    }
  }
  throw DataError("no phase reference sample at " + std::to_string(ref) + " dBm for frequency " +
                  std::to_string(f_hz) + " Hz");
}

}  // namespace detail

/// Phi(f, Pin) = phi21(f, Pin) - phi21(f, Pref), after unwrapping along Pin.
inline std::vector<PhaseCurve> normalize_phase(std::span<const RawPhaseSample> raw, double reference_pin_dbm = -40.0,
                                               double max_gap_db = 0.5) {
  std::map<double, std::vector<PhasePoint>> groups;
  for (const auto& s : raw) groups[s.f_hz].push_back({s.p_in_dbm, s.phase_deg});
  std::vector<PhaseCurve> out;
  for (auto& [f, pts] : groups) {
    std::stable_sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) { return a.p_in_dbm < b.p_in_dbm; });
    std::vector<double> pin, ph;
    for (const auto& p : pts) {
      pin.push_back(p.p_in_dbm);
      ph.push_back(p.phase_deg);
    }
    const auto unwrapped = unwrap_degrees(ph);
    const double ref = detail::phase_at_reference(pin, unwrapped, reference_pin_dbm, max_gap_db, f);
    PhaseCurve c{f, {}};
    for (std::size_t i = 0; i < pin.size(); ++i) c.points.push_back({pin[i], unwrapped[i] - ref});
    out.push_back(std::move(c));
  }
  return out;
}

/// In-place normalization of a measurement curve's phase column.
inline void normalize_curve_phase(MeasurementCurve& curve, double reference_pin_dbm = -40.0, double max_gap_db = 0.5) {
  std::vector<RawPhaseSample> raw;
  for (const auto& p : curve.points) raw.push_back({curve.fc_hz, p.p_in_dbm, p.phase_deg});
  const auto norm = normalize_phase(raw, reference_pin_dbm, max_gap_db);
  for (std::size_t i = 0; i < curve.points.size(); ++i) curve.points[i].phase_deg = norm.front().points[i].phase_deg;
}

// ---------------------------------------------------------------------------
// Polynomial model
// ---------------------------------------------------------------------------

/// Independent LS fits of AM-AM (dBm) and AM-PM (degrees) against input dBm.
inline FitReport fit_polynomial(const MeasurementCurve& curve, int order) {
  curve.validate();
  if (order < 1) throw ConfigError("polynomial order must be >= 1");
  if (curve.points.size() <= static_cast<std::size_t>(order))
    throw ConfigError("polynomial order " + std::to_string(order) + " needs more than " + std::to_string(order) +
                      " points");
  const auto pin = curve.input_dbm();
  const auto amam = fit_least_squares(pin, curve.output_dbm(), order);
  const auto ampm = fit_least_squares(pin, curve.phase(), order);
  PolyParams pp;
  pp.a = amam.coeffs;
  pp.b = ampm.coeffs;
  pp.range_lo = pin.front();
  pp.range_hi = pin.back();
  FitReport r;
  r.model = PaModel{pp, curve.fc_hz};
  r.residual_amplitude = amam.rms_residual;
  r.residual_phase = ampm.rms_residual;
  r.amplitude_units = "dB";
  return r;
}

struct OrderResidual {
  int order = 0;
  double amplitude_rms = 0.0;  // dB
  double phase_rms = 0.0;      // degrees
  bool ok = true;              // false: the LS system was numerically rank deficient
};

/// Polynomial fit residual for each requested order. Orders that break down
/// numerically are reported with ok = false and NaN residuals.
inline std::vector<OrderResidual> fit_error_vs_order(const MeasurementCurve& curve, std::span<const int> orders) {
  curve.validate();
  std::vector<OrderResidual> out;
  for (int m : orders) {
    OrderResidual row{m, std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN(), false};
    try {
      const auto r = fit_polynomial(curve, m);
      row.amplitude_rms = r.residual_amplitude;
      row.phase_rms = r.residual_phase;
      row.ok = true;
    } catch (const Error&) {
    }
    out.push_back(row);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Saleh closed-form LS
// ---------------------------------------------------------------------------

struct SalehBranchFit {
  double alpha = 0.0;
  double beta = 0.0;
  int n = 1;
  int nu = 1;
  double rms_residual = 0.0;  // in the data's own units
  std::size_t excluded = 0;   // curve samples left out of the transformed fit
};

/// Closed-form MSE fit of z = alpha x^n / (1 + beta x^2)^nu.
///
/// With w_m = (z_m / x_m^n)^(-1/nu) the model is linear in x^2:
/// w = alpha^(-1/nu) (1 + beta x^2), and (alpha, beta) follow from the 2x2
/// normal equations of that line fit. Uniformly negative data (e.g. AM-PM
/// phase lag) is fitted on |z| and returned with a negative alpha.
inline SalehBranchFit fit_saleh(std::span<const double> x, std::span<const double> z, int n, int nu) {
  if (n < 1 || n > 3) throw ConfigError("saleh exponent n must be in {1,2,3}");
  if (nu < 1 || nu > 2) throw ConfigError("saleh exponent nu must be in {1,2}");
  if (x.size() != z.size()) throw DataError("fit_saleh: length mismatch");
  if (x.size() < 2) throw DataError("fit_saleh: need at least 2 points");

  bool all_neg = true;
  for (double v : z) all_neg = all_neg && v < 0.0;
  const double sign = all_neg ? -1.0 : 1.0;

  double s2 = 0.0, s4 = 0.0, sw = 0.0, swx2 = 0.0;
  const double count = static_cast<double>(x.size());
  for (std::size_t m = 0; m < x.size(); ++m) {
    if (!(x[m] > 0.0) || !std::isfinite(x[m])) throw DomainError("fit_saleh: input amplitudes must be positive");
    const double ratio = sign * z[m] / std::pow(x[m], n);
    if (!(ratio > 0.0) || !std::isfinite(ratio))
      throw DomainError("fit_saleh: z/x^n must be positive (point " + std::to_string(m) + ")");
    const double w = std::pow(ratio, -1.0 / nu);
    const double x2 = x[m] * x[m];
    s2 += x2;
    s4 += x2 * x2;
    sw += w;
    swx2 += w * x2;
  }
  const double denom = s2 * swx2 - s4 * sw;
  if (denom == 0.0 || !std::isfinite(denom)) throw NumericalError("fit_saleh: degenerate data (zero denominator)");
  SalehBranchFit f;
  f.n = n;
  f.nu = nu;
  f.alpha = sign * std::pow((s2 * s2 - count * s4) / denom, nu);
  f.beta = (s2 * sw - count * swx2) / denom;
  double acc = 0.0;
  for (std::size_t m = 0; m < x.size(); ++m) {
    const double e = z[m] - saleh_branch(x[m], f.alpha, f.beta, n, nu);
    acc += e * e;
  }
  f.rms_residual = std::sqrt(acc / count);
  return f;
}

enum class SalehBranch { amplitude, phase };

/// Saleh fit of one branch of a measurement curve (volt-domain input).
/// The phase branch is sign-definite, so phase samples that are zero (the
/// normalization reference) or opposite in sign to the largest-magnitude
/// sample have no real w_m; they are left out and counted in `excluded`.
inline SalehBranchFit fit_saleh(const MeasurementCurve& curve, SalehBranch branch, int n, int nu) {
  curve.validate();
  std::vector<double> x, z;
  double dominant = 0.0;
  for (const auto& p : curve.points)
    if (std::abs(p.phase_deg) > std::abs(dominant)) dominant = p.phase_deg;
  std::size_t excluded = 0;
  for (const auto& p : curve.points) {
    if (branch == SalehBranch::amplitude) {
      x.push_back(dbm_to_volts(p.p_in_dbm));
      z.push_back(dbm_to_volts(p.p_out_dbm));
    } else if (p.phase_deg * dominant > 0.0) {
      x.push_back(dbm_to_volts(p.p_in_dbm));
      z.push_back(p.phase_deg);
    } else {
      ++excluded;
    }
  }
  auto f = fit_saleh(x, z, n, nu);
  f.excluded = excluded;
  return f;
}

/// Both Saleh branches with the classic exponents (n, nu) = (1, 1) and (2, 1).
inline FitReport fit_saleh_model(const MeasurementCurve& curve) {
  const auto a = fit_saleh(curve, SalehBranch::amplitude, 1, 1);
  const auto p = fit_saleh(curve, SalehBranch::phase, 2, 1);
  SalehParams sp{a.alpha, a.beta, p.alpha, p.beta, 1, 1, 2, 1};
  FitReport r;
  r.model = PaModel{sp, curve.fc_hz};
  r.residual_amplitude = a.rms_residual;
  // Phase residual over every point, excluded ones included.
  double acc = 0.0;
  for (const auto& pt : curve.points) {
    const double e = pt.phase_deg - saleh_phase(dbm_to_volts(pt.p_in_dbm), sp);
    acc += e * e;
  }
  r.residual_phase = std::sqrt(acc / static_cast<double>(curve.points.size()));
  r.amplitude_units = "V";
  return r;
}

// ---------------------------------------------------------------------------
// Simplex-based fits (Rapp, Ghorbani)
// ---------------------------------------------------------------------------

namespace detail {

struct BranchFit {
  std::vector<double> u;  // optimizer coordinates
  double l2 = 0.0;
  int iterations = 0;
  bool converged = true;
};

/// Multi-start minimization of an L2 cost. Start 0 is `u0`; starts 1.. are
/// `u0 + jitter * U(-1, 1)` per coordinate, drawn from a counter-based stream
/// keyed by (seed, branch_salt). Best cost wins; ties go to the lower index.
template <class Cost>
BranchFit multistart(Cost&& cost, const std::vector<double>& u0, const FitOptions& opt, std::uint64_t branch_salt) {
  CounterRng rng(hash_combine(opt.seed, branch_salt));
  BranchFit best;
  best.l2 = std::numeric_limits<double>::infinity();
  const int starts = std::max(1, opt.starts);
  for (int k = 0; k < starts; ++k) {
    std::vector<double> start = u0;
    if (k > 0)
      for (double& c : start) c += opt.jitter * (2.0 * rng.next_uniform() - 1.0);
    if (!std::isfinite(cost(start))) continue;
    const auto r = minimize_simplex_restarted(cost, start, opt.simplex, opt.polish_passes);
    best.iterations += r.iterations;
    if (r.value < best.l2) {
      best.l2 = r.value;
      best.u = r.x;
      best.converged = r.converged;
    }
  }
  if (best.u.empty()) throw NumericalError("no finite starting point for the fit");
  return best;
}

inline double l2_norm_diff(std::span<const double> a, const std::function<double(std::size_t)>& model) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double e = a[i] - model(i);
    acc += e * e;
  }
  return std::sqrt(acc);
}

/// Secant gain over the lowest `count` points (LS line through the origin).
inline double small_signal_secant_gain(std::span<const double> x, std::span<const double> y, std::size_t count = 5) {
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < std::min(count, x.size()); ++i) {
    sxy += x[i] * y[i];
    sxx += x[i] * x[i];
  }
  return sxy / sxx;
}

struct PhaseExtremum {
  double rho = 0.0;
  double phase = 0.0;
};

inline PhaseExtremum phase_extremum(std::span<const double> x, std::span<const double> phase) {
  PhaseExtremum e;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (std::abs(phase[i]) > std::abs(e.phase)) e = {x[i], phase[i]};
  return e;
}

inline double rms_from_l2(double l2, std::size_t n) { return l2 / std::sqrt(static_cast<double>(n)); }

}  // namespace detail

/// Modified Rapp fit: AM-AM (G, Vsat, p) and AM-PM (A, B, q1, q2) branches,
/// each minimizing the L2 norm between data and model over the curve.
///
/// Initialization: G0 = secant gain of the lowest 5 points, Vsat0 = largest
/// measured output amplitude, p0 = 1; q1 = q2 = 1.5, B0 = amplitude of the
/// largest phase excursion and A0 chosen so the start curve passes through
/// half that excursion at B0. Phases must be normalized (zero at small signal).
inline FitReport fit_rapp(const MeasurementCurve& curve, const FitOptions& opt = {}) {
  curve.validate();
  const auto x = curve.input_volts();
  const auto d = curve.output_volts();
  const auto ph = curve.phase();

  const double g0 = detail::small_signal_secant_gain(x, d);
  const double vsat0 = *std::max_element(d.begin(), d.end());
  auto amam_cost = [&](const std::vector<double>& u) {
    const RappParams rp{std::exp(u[0]), std::exp(u[1]), std::exp(u[2]), 0.0, 1.0, 1.0, 1.0};
    return detail::l2_norm_diff(d, [&](std::size_t i) { return rapp_amplitude(x[i], rp); });
  };
  const auto amam = detail::multistart(amam_cost, {std::log(g0), std::log(vsat0), 0.0}, opt, 1);

  RappParams rp{std::exp(amam.u[0]), std::exp(amam.u[1]), std::exp(amam.u[2]), 0.0, 1.0, 1.0, 1.0};
  FitReport r;
  r.iterations = amam.iterations;
  r.converged = amam.converged;

  const auto ext = detail::phase_extremum(x, ph);
  double phase_l2 = detail::l2_norm_diff(ph, [](std::size_t) { return 0.0; });
  if (ext.phase != 0.0) {
    const double q0 = 1.5;
    const double a0 = ext.phase / std::pow(ext.rho, q0);
    auto ampm_cost = [&](const std::vector<double>& u) {
      const RappParams pp{1.0, 1.0, 1.0, a0 * u[0], std::exp(u[1]), std::exp(u[2]), std::exp(u[3])};
      return detail::l2_norm_diff(ph, [&](std::size_t i) { return rapp_phase(x[i], pp); });
    };
    const auto ampm = detail::multistart(ampm_cost, {1.0, std::log(ext.rho), std::log(q0), std::log(q0)}, opt, 2);
    rp.a_pm = a0 * ampm.u[0];
    rp.b_pm = std::exp(ampm.u[1]);
    rp.q1 = std::exp(ampm.u[2]);
    rp.q2 = std::exp(ampm.u[3]);
    phase_l2 = ampm.l2;
    r.iterations += ampm.iterations;
    r.converged = r.converged && ampm.converged;
  }
  r.model = PaModel{rp, curve.fc_hz};
  r.residual_amplitude = detail::rms_from_l2(amam.l2, x.size());
  r.residual_phase = detail::rms_from_l2(phase_l2, x.size());
  r.seed = opt.seed;
  r.starts = opt.starts;
  r.amplitude_units = "V";
  return r;
}

/// Ghorbani fit of both four-parameter branches by multi-start simplex.
/// The problem is underdetermined, so only the residual is meaningful; the
/// result never does worse than the all-zero model.
inline FitReport fit_ghorbani(const MeasurementCurve& curve, const FitOptions& opt = {}) {
  curve.validate();
  const auto x = curve.input_volts();
  const auto d = curve.output_volts();
  const auto ph = curve.phase();
  const double zero_amam = detail::l2_norm_diff(d, [](std::size_t) { return 0.0; });
  const double zero_ampm = detail::l2_norm_diff(ph, [](std::size_t) { return 0.0; });

  // Coordinates: (c1 / c1_0, ln c2, ln c3, c4 / c4_scale); c3 > 0 keeps the
  // denominator positive on x >= 0.
  auto make_branch = [](const std::vector<double>& u, double c1_0, double c4_scale) {
    return std::array<double, 4>{c1_0 * u[0], std::exp(u[1]), std::exp(u[2]), c4_scale * u[3]};
  };
  auto fit_branch = [&](std::span<const double> data, double c1_0, double c2_0, double c3_0, double c4_scale,
                        double zero_cost, std::uint64_t salt, int& iterations, bool& converged) {
    auto cost = [&](const std::vector<double>& u) {
      const auto c = make_branch(u, c1_0, c4_scale);
      return detail::l2_norm_diff(data, [&](std::size_t i) { return ghorbani_branch(x[i], c); });
    };
    const auto best = detail::multistart(cost, {1.0, std::log(c2_0), std::log(c3_0), 0.0}, opt, salt);
    iterations += best.iterations;
    converged = converged && best.converged;
    if (best.l2 > zero_cost) return std::pair{std::array<double, 4>{0.0, 1.0, 0.0, 0.0}, zero_cost};
    return std::pair{make_branch(best.u, c1_0, c4_scale), best.l2};
  };

  FitReport r;
  const double g0 = detail::small_signal_secant_gain(x, d);
  const double dmax = *std::max_element(d.begin(), d.end());
  auto [y, amam_l2] = fit_branch(d, g0, 1.0, g0 / dmax, g0, zero_amam, 3, r.iterations, r.converged);

  std::array<double, 4> z{0.0, 1.0, 0.0, 0.0};
  double ampm_l2 = zero_ampm;
  const auto ext = detail::phase_extremum(x, ph);
  if (ext.phase != 0.0) {
    const double rho2 = ext.rho * ext.rho;
    auto fit = fit_branch(ph, 2.0 * ext.phase / rho2, 2.0, 1.0 / rho2, std::abs(ext.phase) / ext.rho, zero_ampm, 4,
                          r.iterations, r.converged);
    z = fit.first;
    ampm_l2 = fit.second;
  }
  r.model = PaModel{GhorbaniParams{y, z}, curve.fc_hz};
  r.residual_amplitude = detail::rms_from_l2(amam_l2, x.size());
  r.residual_phase = detail::rms_from_l2(ampm_l2, x.size());
  r.seed = opt.seed;
  r.starts = opt.starts;
  r.amplitude_units = "V";
  return r;
}

/// RMS error of a model against a curve: amplitude in dB of output power, phase in degrees.
struct CurveError {
  double amplitude_db = 0.0;
  double phase_deg = 0.0;
};

inline CurveError curve_error(const PaModel& model, const MeasurementCurve& curve) {
  double ea = 0.0, ep = 0.0;
  for (const auto& p : curve.points) {
    const auto r = evaluate(model, dbm_to_volts(p.p_in_dbm));
    const double da = volts_to_dbm(r.amplitude) - p.p_out_dbm;
    const double dp = r.phase_deg - p.phase_deg;
    ea += da * da;
    ep += dp * dp;
  }
  const double n = static_cast<double>(curve.points.size());
  return {std::sqrt(ea / n), std::sqrt(ep / n)};
}

}  // namespace subthz

#endif  // SUBTHZ_FITTING_HPP
