// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "subthz/predistortion.hpp"

using namespace subthz;

namespace {
RappParams rapp315() { return {13.0732, 0.0559, 0.878, -1.7204e5, 8.5695e-3, 1.6949, 1.7404}; }
double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }
}  // namespace

TEST(Predistorter, GammaAtDefaultClip) {
  const auto pd = Predistorter::ideal(rapp315(), 4e-3);
  EXPECT_LT(rel(pd.gamma(), 1.402051097922372e-2), 1e-12);
  EXPECT_LT(rel(pd.gamma(), 1.40205e-2), 1e-3);
  EXPECT_EQ(pd.mode(), PdMode::ideal);
}

TEST(Predistorter, DefaultClipLevel) {
  EXPECT_DOUBLE_EQ(default_clip_level(rapp315()), 0.935 * 0.0559 / 13.0732);
  EXPECT_NEAR(default_clip_level(rapp315()), 4e-3, 4e-6);
}

TEST(Predistorter, ChiMustStayBelowSingularity) {
  const auto rp = rapp315();
  EXPECT_THROW(Predistorter::ideal(rp, rp.v_sat / rp.g_lin), ConfigError);
  EXPECT_THROW(Predistorter::ideal(rp, 0.0), ConfigError);
}

TEST(IdealPd, InvertsAmplitudeAndPhase) {
  const auto rp = rapp315();
  const auto pd = Predistorter::ideal(rp, 4e-3);
  for (int i = 0; i <= 10000; ++i) {
    const double rho = 1e-6 + (0.99 * 4e-3 - 1e-6) * i / 10000.0;
    const double y = ideal_amplitude_pd(rho, pd);
    ASSERT_LT(std::abs(rapp_amplitude(y, rp) - rp.g_lin * rho) / (rp.g_lin * rho), 1e-9);
    ASSERT_LT(std::abs(ideal_phase_pd(y, pd) + rapp_phase(y, rp)), 1e-6);
  }
}

TEST(IdealPd, ClipsAboveChi) {
  const auto pd = Predistorter::ideal(rapp315(), 4e-3);
  EXPECT_EQ(ideal_amplitude_pd(5e-3, pd), pd.gamma());
  EXPECT_EQ(ideal_amplitude_pd(4e-3, pd), pd.gamma());
  EXPECT_EQ(ideal_amplitude_pd(0.0, pd), 0.0);
  EXPECT_THROW(ideal_amplitude_pd(-1.0, pd), DomainError);
}

TEST(PdPolynomials, ResidualShrinksWithOrder) {
  const auto pd = Predistorter::ideal(rapp315(), 4e-3);
  const auto p4 = fit_pd_polynomials(pd, 4, 4);
  const auto p8 = fit_pd_polynomials(pd, 8, 8);
  EXPECT_EQ(p4.eta.size(), 5u);
  EXPECT_EQ(p8.nu.size(), 9u);
  EXPECT_LT(p8.residual_amplitude, p4.residual_amplitude);
  EXPECT_LT(p8.residual_phase, p4.residual_phase);
  EXPECT_EQ(p8.grid_points, 4096);
}

TEST(PdPolynomials, MatchesTargetOnGrid) {
  const auto pd = Predistorter::ideal(rapp315(), 4e-3);
  const auto p = fit_pd_polynomials(pd, 8, 8);
  double worst = 0.0;
  for (int i = 0; i <= 400; ++i) {
    const double r = 4e-3 * i / 400.0;
    worst = std::max(worst, std::abs(horner(p.eta, r) - ideal_amplitude_pd(r, pd)));
  }
  EXPECT_LT(worst, 0.02 * pd.gamma());
}

TEST(PdPolynomials, GridTooSmall) {
  const auto pd = Predistorter::ideal(rapp315(), 4e-3);
  EXPECT_THROW(fit_pd_polynomials(pd, 8, 8, 50), ConfigError);
  EXPECT_THROW(fit_pd_polynomials(pd, 0, 8), ConfigError);
}

TEST(ApplyPredistorter, CascadeIsLinearBelowClip) {
  const auto rp = rapp315();
  const auto pd = Predistorter::ideal(rp, 4e-3);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> mag(0.0, 3.9e-3), ang(-M_PI, M_PI);
  ComplexVector x(2000);
  for (auto& v : x) v = std::polar(mag(rng), ang(rng));
  const auto y = apply_predistorter(x, pd);
  EXPECT_EQ(y.clipped, 0u);
  const auto z = apply_pa(y.samples, PaModel{rp, 315e9});
  for (std::size_t i = 0; i < x.size(); ++i) ASSERT_LT(std::abs(z[i] - rp.g_lin * x[i]), 1e-9 * rp.g_lin * 4e-3);
}

TEST(ApplyPredistorter, CountsClippedSamples) {
  const auto pd = Predistorter::ideal(rapp315(), 4e-3);
  const ComplexVector x{{1e-3, 0}, {0, 5e-3}, {-6e-3, 0}, {0, 0}};
  const auto y = apply_predistorter(x, pd);
  EXPECT_EQ(y.clipped, 2u);
  EXPECT_NEAR(std::abs(y.samples[1]), pd.gamma(), 1e-15);
  EXPECT_EQ(y.samples[3], Complex{});
}

TEST(ApplyPredistorter, PolynomialModeCloseToIdeal) {
  const auto ideal = Predistorter::ideal(rapp315(), 4e-3);
  const auto poly = ideal.with_polynomials(8, 8);
  EXPECT_EQ(poly.mode(), PdMode::polynomial);
  EXPECT_EQ(poly.order_amplitude(), 8);
  const ComplexVector x{{1e-3, 1e-3}, {2e-3, -1e-3}};
  const auto a = apply_predistorter(x, ideal).samples;
  const auto b = apply_predistorter(x, poly).samples;
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_LT(std::abs(a[i] - b[i]) / std::abs(a[i]), 0.02);
}
