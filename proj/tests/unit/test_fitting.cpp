// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <vector>

#include "subthz/fitting.hpp"
#include "subthz/io.hpp"

using namespace subthz;

namespace {

RappParams rapp315() { return {13.0732, 0.0559, 0.878, -1.7204e5, 8.5695e-3, 1.6949, 1.7404}; }

MeasurementCurve curve_from(const PaModel& m, double lo = -40.0, double hi = 0.0, double step = 0.5) {
  MeasurementCurve c{m.fc_hz, {}};
  for (double p = lo; p <= hi + 1e-9; p += step) {
    const auto r = evaluate(m, dbm_to_volts(p));
    c.points.push_back({p, volts_to_dbm(r.amplitude), r.phase_deg});
  }
  return c;
}

MeasurementCurve surrogate() {
  return parse_measurement_csv(std::filesystem::path(SUBTHZ_SOURCE_DIR) / "data/measurements/surrogate_315ghz.csv")
      .front();
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

double l2_amplitude(const MeasurementCurve& c, const RappParams& rp) {
  double acc = 0.0;
  for (const auto& p : c.points) {
    const double e = dbm_to_volts(p.p_out_dbm) - rapp_amplitude(dbm_to_volts(p.p_in_dbm), rp);
    acc += e * e;
  }
  return std::sqrt(acc);
}

}  // namespace

// ---- Phase normalization ---------------------------------------------------

TEST(NormalizePhase, ReferencePointIsZero) {
  std::vector<RawPhaseSample> raw;
  for (double p = -40.0; p <= 0.0; p += 1.0) raw.push_back({3.15e11, p, 17.0 - 0.3 * p * p / 40.0});
  const auto c = normalize_phase(raw);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].points.front().phase_deg, 0.0);
}

TEST(NormalizePhase, ConstantPhaseBecomesZero) {
  std::vector<RawPhaseSample> raw;
  for (double p = -40.0; p <= 0.0; p += 2.0) raw.push_back({3e11, p, -123.4});
  const auto c = normalize_phase(raw);
  for (const auto& pt : c.front().points) EXPECT_EQ(pt.phase_deg, 0.0);
}

TEST(NormalizePhase, LinearPhaseSlope) {
  // phi21 = c(f) + d Pin  ->  Phi = d (Pin + 40)
  std::vector<RawPhaseSample> raw;
  for (double f : {2.8e11, 3.15e11})
    for (double p = -40.0; p <= 0.0; p += 2.5) raw.push_back({f, p, (f > 3e11 ? 50.0 : -20.0) - 1.7 * p});
  const auto curves = normalize_phase(raw);
  ASSERT_EQ(curves.size(), 2u);
  for (const auto& c : curves)
    for (const auto& pt : c.points) EXPECT_NEAR(pt.phase_deg, -1.7 * (pt.p_in_dbm + 40.0), 1e-12);
}

TEST(NormalizePhase, UnwrapsBeforeDifferencing) {
  std::vector<RawPhaseSample> raw;
  for (int i = 0; i <= 40; ++i) {
    const double p = -40.0 + i;
    double ph = 170.0 + 2.0 * i;  // crosses 180
    ph = std::remainder(ph, 360.0);
    raw.push_back({3e11, p, ph});
  }
  const auto c = normalize_phase(raw);
  for (const auto& pt : c.front().points) EXPECT_NEAR(pt.phase_deg, 2.0 * (pt.p_in_dbm + 40.0), 1e-9);
}

TEST(NormalizePhase, InterpolatesWithinHalfDb) {
  std::vector<RawPhaseSample> raw{{3e11, -40.3, 1.0}, {3e11, -39.8, 2.0}, {3e11, -30.0, 5.0}};
  const auto c = normalize_phase(raw);
  // phase at -40 interpolated: 1 + 0.3/0.5 = 1.6
  EXPECT_NEAR(c[0].points[2].phase_deg, 5.0 - 1.6, 1e-12);
}

TEST(NormalizePhase, MissingReferenceNamesFrequency) {
  std::vector<RawPhaseSample> raw{{2.9e11, -30.0, 1.0}, {2.9e11, -20.0, 2.0}};
  try {
    normalize_phase(raw);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("290000000000"), std::string::npos) << e.what();
  }
}

// ---- Polynomial ------------------------------------------------------------

TEST(FitPolynomial, RecoversKnownOrder9) {
  PolyParams truth;
  truth.a = {4.93685, -0.0137525, -0.0376565, -0.00671547, -0.000751183, -4.90554e-05, -2.02848e-06, -5.08754e-08,
             -6.93973e-10, -3.92275e-12};
  truth.b = {-46.00981, -0.475385, 0.172884, 0.029412, 0.00550807, 0.000508238, 2.42772e-05, 6.33498e-07, 8.63223e-09,
             4.82313e-11};
  MeasurementCurve c{315e9, {}};
  for (double p = -40.0; p <= 0.0; p += 0.5) c.points.push_back({p, poly_amplitude(p, truth), poly_phase(p, truth)});
  const auto r = fit_polynomial(c, 9);
  const auto& pp = std::get<PolyParams>(r.model.params);
  for (std::size_t k = 0; k < 10; ++k) {
    EXPECT_LT(rel(pp.a[k], truth.a[k]), 1e-6) << "a" << k;
    EXPECT_LT(rel(pp.b[k], truth.b[k]), 1e-6) << "b" << k;
  }
  EXPECT_EQ(r.amplitude_units, "dB");
}

TEST(FitPolynomial, NestedOrdersNeverWorse) {
  const auto c = curve_from(PaModel{rapp315(), 315e9});
  const std::vector<int> orders{1, 3, 5, 9};
  const auto t = fit_error_vs_order(c, orders);
  ASSERT_EQ(t.size(), 4u);
  for (std::size_t i = 1; i < t.size(); ++i) {
    EXPECT_LE(t[i].amplitude_rms, t[i - 1].amplitude_rms + 1e-12);
    EXPECT_LE(t[i].phase_rms, t[i - 1].phase_rms + 1e-12);
  }
}

TEST(FitPolynomial, ErrorTableFlagsBreakdown) {
  const auto c = curve_from(PaModel{rapp315(), 315e9}, -40.0, 0.0, 10.0);  // 5 points
  const std::vector<int> orders{2, 8};
  const auto t = fit_error_vs_order(c, orders);
  EXPECT_TRUE(t[0].ok);
  EXPECT_FALSE(t[1].ok);
  EXPECT_TRUE(std::isnan(t[1].amplitude_rms));
}

TEST(FitPolynomial, DuplicateAbscissaeRejected) {
  MeasurementCurve c{3e11, {{-10, 1, 0}, {-10, 1, 0}, {-5, 2, 0}}};
  EXPECT_THROW(fit_polynomial(c, 1), DataError);
}

// ---- Saleh -----------------------------------------------------------------

TEST(FitSaleh, ExactRecovery) {
  std::vector<double> x, z;
  for (int i = 1; i <= 60; ++i) {
    x.push_back(5e-4 * i);
    z.push_back(saleh_branch(x.back(), 10.0, 6000.0, 1, 1));
  }
  const auto f = fit_saleh(x, z, 1, 1);
  EXPECT_LT(rel(f.alpha, 10.0), 1e-9);
  EXPECT_LT(rel(f.beta, 6000.0), 1e-9);
}

TEST(FitSaleh, ExactRecoveryGeneralExponents) {
  for (int n : {1, 2, 3})
    for (int nu : {1, 2}) {
      std::vector<double> x, z;
      for (int i = 1; i <= 40; ++i) {
        x.push_back(1e-3 * i);
        z.push_back(saleh_branch(x.back(), -3.5, 250.0, n, nu));
      }
      const auto f = fit_saleh(x, z, n, nu);
      EXPECT_LT(rel(f.alpha, -3.5), 1e-9) << n << nu;
      EXPECT_LT(rel(f.beta, 250.0), 1e-9) << n << nu;
    }
}

TEST(FitSaleh, MatchesBruteForceOfTransformedObjective) {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> noise(0.0, 0.01);
  std::vector<double> x, z;
  for (int i = 1; i <= 50; ++i) {
    x.push_back(4e-4 * i);
    z.push_back(saleh_branch(x.back(), 10.0, 6000.0, 1, 1) * (1.0 + noise(rng)));
  }
  const auto f = fit_saleh(x, z, 1, 1);
  // J(a, b) = sum (w - a (1 + b x^2))^2 over a coarse grid, then simplex
  std::vector<double> w;
  for (std::size_t m = 0; m < x.size(); ++m) w.push_back(x[m] / z[m]);
  auto J = [&](const std::vector<double>& u) {
    double acc = 0.0;
    for (std::size_t m = 0; m < x.size(); ++m) {
      const double e = w[m] - u[0] * (1.0 + u[1] * x[m] * x[m]);
      acc += e * e;
    }
    return acc;
  };
  std::vector<double> best{0.1, 1000.0};
  for (double a = 0.05; a <= 0.2; a += 0.005)
    for (double b = 1000.0; b <= 10000.0; b += 100.0)
      if (J({a, b}) < J(best)) best = {a, b};
  const auto r = minimize_simplex_restarted(J, best, {1e-14, 20000});
  EXPECT_LT(rel(f.alpha, 1.0 / r.x[0]), 1e-3);
  EXPECT_LT(rel(f.beta, r.x[1]), 1e-3);
}

TEST(FitSaleh, DomainAndDegenerateErrors) {
  std::vector<double> x{1e-3, 2e-3, 3e-3}, z{1.0, -1.0, 2.0};
  EXPECT_THROW(fit_saleh(x, z, 1, 1), DomainError);
  std::vector<double> x2{1e-3, 1e-3}, z2{1.0, 1.0};
  EXPECT_THROW(fit_saleh(x2, z2, 1, 1), NumericalError);
  EXPECT_THROW(fit_saleh(x, z, 4, 1), ConfigError);
}

TEST(FitSaleh, SurrogateAmplitudeBranchFrozenOracle) {
  // scipy closed form on the same samples: alpha = 9.954419, beta = 5606.0048
  const auto f = fit_saleh(surrogate(), SalehBranch::amplitude, 1, 1);
  EXPECT_LT(rel(f.alpha, 9.954419), 1e-6);
  EXPECT_LT(rel(f.beta, 5606.0048), 1e-6);
  EXPECT_LT(rel(f.alpha, 10.127), 0.05);
  EXPECT_LT(rel(f.beta, 5995.0), 0.10);
}

TEST(FitSaleh, PhaseBranchSkipsOppositeSignSamples) {
  const auto c = surrogate();
  const auto f = fit_saleh(c, SalehBranch::phase, 2, 1);
  EXPECT_GT(f.excluded, 0u);
  EXPECT_LT(f.alpha, 0.0);
  const auto rep = fit_saleh_model(c);
  EXPECT_TRUE(std::isfinite(rep.residual_phase));
}

// ---- Rapp ------------------------------------------------------------------

TEST(FitRapp, RecoversGeneratingParameters) {
  const auto c = curve_from(PaModel{rapp315(), 315e9});
  const auto r = fit_rapp(c);
  const auto& rp = std::get<RappParams>(r.model.params);
  const auto t = rapp315();
  EXPECT_LT(rel(rp.g_lin, t.g_lin), 0.01);
  EXPECT_LT(rel(rp.v_sat, t.v_sat), 0.01);
  EXPECT_LT(rel(rp.p, t.p), 0.01);
  EXPECT_LT(rel(rp.a_pm, t.a_pm), 0.01);
  EXPECT_LT(rel(rp.b_pm, t.b_pm), 0.01);
  EXPECT_LT(rel(rp.q1, t.q1), 0.01);
  EXPECT_LT(rel(rp.q2, t.q2), 0.01);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.starts, 8);
}

TEST(FitRapp, BeatsPerturbedVsat) {
  const auto c = surrogate();
  const auto r = fit_rapp(c);
  auto rp = std::get<RappParams>(r.model.params);
  const double fitted = l2_amplitude(c, rp);
  rp.v_sat *= 1.1;
  EXPECT_LE(fitted, l2_amplitude(c, rp));
}

TEST(FitRapp, SurrogateFrozenOracle) {
  // scipy Nelder-Mead on the same 81 samples
  const auto r = fit_rapp(surrogate());
  const auto& rp = std::get<RappParams>(r.model.params);
  EXPECT_LT(rel(rp.g_lin, 13.97177), 1e-4);
  EXPECT_LT(rel(rp.v_sat, 0.05675576), 1e-4);
  EXPECT_LT(rel(rp.p, 0.79329399), 1e-4);
  EXPECT_LT(rel(r.residual_amplitude * 9.0, 0.00277), 0.01);  // L2 = RMS * sqrt(81)
  EXPECT_LT(rel(rp.a_pm, -1.64427e5), 1e-3);
  EXPECT_LT(rel(rp.b_pm, 8.61563e-3), 1e-3);
  EXPECT_LT(rel(rp.q1, 1.68578), 1e-3);
  EXPECT_LT(rel(rp.q2, 1.73499), 1e-3);
}

TEST(FitRapp, DeterministicForSeed) {
  const auto c = surrogate();
  FitOptions o;
  o.seed = 99;
  EXPECT_EQ(fit_rapp(c, o).model, fit_rapp(c, o).model);
}

// ---- Ghorbani --------------------------------------------------------------

TEST(FitGhorbani, SelfGeneratedResidual) {
  const GhorbaniParams gp{{101.934, 1.26, 1728.859, -0.0174}, {-1.667e5, 1.678, 2.981e3, 1.418e2}};
  const auto c = curve_from(PaModel{gp, 315e9});
  const auto r = fit_ghorbani(c);
  EXPECT_LT(r.residual_amplitude, 1e-6);
}

TEST(FitGhorbani, NeverWorseThanZeroModel) {
  const auto c = surrogate();
  const auto r = fit_ghorbani(c);
  double zero = 0.0;
  for (const auto& p : c.points) zero += std::pow(dbm_to_volts(p.p_out_dbm), 2);
  EXPECT_LE(r.residual_amplitude, std::sqrt(zero / static_cast<double>(c.points.size())));
  EXPECT_LT(curve_error(r.model, c).amplitude_db, 0.5);
}

TEST(FitGhorbani, ConstantZeroPhaseGivesZeroBranch) {
  auto c = curve_from(PaModel{rapp315(), 315e9});
  for (auto& p : c.points) p.phase_deg = 0.0;
  const auto r = fit_ghorbani(c);
  EXPECT_EQ(r.residual_phase, 0.0);
}

// ---- Released measurement file (not shipped) -------------------------------

namespace {
std::filesystem::path released() {
  return std::filesystem::path(SUBTHZ_SOURCE_DIR) / "data/measurements/released_315ghz.csv";
}
}  // namespace

TEST(ReleasedData, PolynomialReproducesPublishedCoefficients) {
  if (!std::filesystem::exists(released())) GTEST_SKIP() << "released measurement file not present";
  const auto c = parse_measurement_csv(released(), true).front();
  const auto fr = fit_polynomial(c, 9);
  const auto& pp = std::get<PolyParams>(fr.model.params);
  const std::vector<double> a{4.93685, -0.0137525, -0.0376565, -0.00671547, -0.000751183, -4.90554e-05,
                              -2.02848e-06, -5.08754e-08, -6.93973e-10, -3.92275e-12};
  for (std::size_t k = 0; k < a.size(); ++k) EXPECT_LT(rel(pp.a[k], a[k]), 0.01) << k;
}

TEST(ReleasedData, SalehAndRappNearPublishedValues) {
  if (!std::filesystem::exists(released())) GTEST_SKIP() << "released measurement file not present";
  const auto c = parse_measurement_csv(released(), true).front();
  const auto s = fit_saleh(c, SalehBranch::amplitude, 1, 1);
  EXPECT_LT(rel(s.alpha, 10.127), 0.05);
  EXPECT_LT(rel(s.beta, 5995.0), 0.05);
  const auto fr = fit_rapp(c);
  const auto& rp = std::get<RappParams>(fr.model.params);
  EXPECT_LT(rel(rp.g_lin, 13.07), 0.05);
  EXPECT_LT(rel(rp.v_sat, 0.0559), 0.05);
  EXPECT_LT(curve_error(fit_ghorbani(c).model, c).amplitude_db, 0.5);
}
