// SPDX-License-Identifier: Apache-2.0
//
// Amplitude/phase predistortion for the modified Rapp amplifier.
//
// The ideal predistorter inverts the Rapp AM-AM curve up to an input clipping
// level chi (the inverse is singular at Vsat/G) and cancels the AM-PM shift
// evaluated at the predistorted amplitude. The polynomial predistorter
// replaces both functions with LS polynomial approximations.

#ifndef SUBTHZ_PREDISTORTION_HPP
#define SUBTHZ_PREDISTORTION_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "subthz/errors.hpp"
#include "subthz/pa_models.hpp"
#include "subthz/polynomial.hpp"
#include "subthz/signal.hpp"
#include "subthz/units.hpp"

namespace subthz {

enum class PdMode { ideal, polynomial };

inline const char* to_string(PdMode m) { return m == PdMode::ideal ? "ideal" : "polynomial"; }

/// Clip level at the same fraction of Vsat/G as chi = 4 mV for the 315 GHz model.
inline constexpr double kDefaultClipFraction = 0.935;

inline double default_clip_level(const RappParams& rp) { return kDefaultClipFraction * rp.v_sat / rp.g_lin; }

namespace detail {

inline double rapp_inverse_amplitude(double rho, const RappParams& rp) {
  const double two_p = 2.0 * rp.p;
  return rho / std::pow(1.0 - std::pow(rp.g_lin * rho / rp.v_sat, two_p), 1.0 / two_p);
}

}  // namespace detail

struct PdPolynomials {
  std::vector<double> eta;  // amplitude PD, V -> V, ascending powers
  std::vector<double> nu;   // phase PD, V -> degrees
  double residual_amplitude = 0.0;  // RMS over [0, chi], V
  double residual_phase = 0.0;      // RMS over [0, gamma], degrees
  int grid_points = 0;
};

class Predistorter {
 public:
  static Predistorter ideal(const RappParams& rp, double chi) {
    rp.validate();
    const double limit = rp.v_sat / rp.g_lin;
    if (!(chi > 0.0) || !(chi < limit))
      throw ConfigError("clip level chi must lie in (0, Vsat/G = " + std::to_string(limit) + ")");
    Predistorter pd;
    pd.rapp_ = rp;
    pd.chi_ = chi;
    pd.gamma_ = detail::rapp_inverse_amplitude(chi, rp);
    return pd;
  }

  /// Polynomial predistorter from explicit coefficients (e.g. loaded from disk).
  static Predistorter polynomial(const RappParams& rp, double chi, PdPolynomials poly) {
    Predistorter pd = ideal(rp, chi);
    if (poly.eta.empty() || poly.nu.empty()) throw ConfigError("polynomial predistorter needs both coefficient vectors");
    pd.mode_ = PdMode::polynomial;
    pd.poly_ = std::move(poly);
    return pd;
  }

  /// Same reference model and clip level, with LS polynomial approximations.
  Predistorter with_polynomials(int na, int ntheta, int grid_points = 4096) const;

  const RappParams& rapp() const { return rapp_; }
  double chi() const { return chi_; }
  double gamma() const { return gamma_; }
  PdMode mode() const { return mode_; }
  const PdPolynomials& polynomials() const { return poly_; }
  int order_amplitude() const { return static_cast<int>(poly_.eta.size()) - 1; }
  int order_phase() const { return static_cast<int>(poly_.nu.size()) - 1; }

 private:
  Predistorter() = default;
  RappParams rapp_;
  double chi_ = 0.0;
  double gamma_ = 0.0;
  PdMode mode_ = PdMode::ideal;
  PdPolynomials poly_;
};

/// A_PD(rho): rho / [1 - (G rho / Vsat)^{2p}]^{1/(2p)} with rho clipped at chi.
inline double ideal_amplitude_pd(double rho_x, const Predistorter& pd) {
  detail::require_amplitude(rho_x, "ideal_amplitude_pd");
  if (rho_x >= pd.chi()) return pd.gamma();
  return detail::rapp_inverse_amplitude(rho_x, pd.rapp());
}

/// Theta(rho) = -F_P(rho), degrees.
inline double ideal_phase_pd(double rho_y, const Predistorter& pd) { return -rapp_phase(rho_y, pd.rapp()); }

/// LS polynomial approximations of A_PD on [0, chi] and Theta on [0, gamma].
///
/// The integral objectives are discretized with composite-trapezoid weights on
/// a uniform grid. The fit is carried out in the normalized variable rho/limit
/// and mapped back to monomials in volts.
inline PdPolynomials fit_pd_polynomials(const Predistorter& pd, int na, int ntheta, int grid_points = 4096) {
  if (na < 1 || ntheta < 1) throw ConfigError("predistorter polynomial orders must be >= 1");
  if (grid_points < 10 * std::max(na, ntheta))
    throw ConfigError("grid_points must be at least 10 x the larger polynomial order");

  auto fit = [grid_points](double limit, int order, auto&& target) {
    const auto n = static_cast<std::size_t>(grid_points);
    std::vector<double> t(n), f(n), w(n, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
      t[i] = static_cast<double>(i) / static_cast<double>(n - 1);
      f[i] = target(t[i] * limit);
    }
    w.front() = w.back() = 0.5;
    PolyFit pf;
    try {
      pf = fit_least_squares(t, f, order, w);
    } catch (const NumericalError& e) {
      throw NumericalError(std::string("predistorter polynomial fit is ill-conditioned; use a lower order: ") +
                           e.what());
    }
    double scale = 1.0;
    for (double& c : pf.coeffs) {
      c /= scale;
      scale *= limit;
    }
    return pf;
  };

  const auto amp = fit(pd.chi(), na, [&](double r) { return ideal_amplitude_pd(r, pd); });
  const auto ph = fit(pd.gamma(), ntheta, [&](double r) { return ideal_phase_pd(r, pd); });
  return {amp.coeffs, ph.coeffs, amp.rms_residual, ph.rms_residual, grid_points};
}

inline Predistorter Predistorter::with_polynomials(int na, int ntheta, int grid_points) const {
  return polynomial(rapp_, chi_, fit_pd_polynomials(*this, na, ntheta, grid_points));
}

struct PredistortionOutput {
  ComplexVector samples;
  std::size_t clipped = 0;  // samples whose input amplitude exceeded chi
};

/// Per sample: rho_x = min(|x|, chi); rho_y = A(rho_x); theta_y = arg x + Theta(rho_y).
/// Polynomial amplitudes are floored at zero.
inline PredistortionOutput apply_predistorter(std::span<const Complex> x, const Predistorter& pd) {
  PredistortionOutput out;
  out.samples.resize(x.size());
  const bool poly = pd.mode() == PdMode::polynomial;
  const auto& eta = pd.polynomials().eta;
  const auto& nu = pd.polynomials().nu;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double rho_x = std::abs(x[i]);
    if (rho_x > pd.chi()) {
      rho_x = pd.chi();
      ++out.clipped;
    }
    double rho_y = 0.0;
    double theta = 0.0;
    if (poly) {
      rho_y = std::max(0.0, horner(eta, rho_x));
      theta = horner(nu, rho_y);
    } else {
      rho_y = ideal_amplitude_pd(rho_x, pd);
      theta = ideal_phase_pd(rho_y, pd);
    }
    out.samples[i] = std::polar(rho_y, std::arg(x[i]) + deg_to_rad(theta));
  }
  return out;
}

}  // namespace subthz

#endif  // SUBTHZ_PREDISTORTION_HPP
