// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "subthz/io.hpp"
#include "subthz/run_config.hpp"

using namespace subthz;
namespace fs = std::filesystem;

namespace {

const fs::path kSource = SUBTHZ_SOURCE_DIR;

RappParams rapp315() { return {13.0732, 0.0559, 0.878, -1.7204e5, 8.5695e-3, 1.6949, 1.7404}; }

fs::path temp_dir(const std::string& name) {
  auto d = fs::temp_directory_path() / ("subthz_io_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::vector<MeasurementCurve> parse(const std::string& text) {
  std::istringstream in(text);
  return parse_measurement_csv(in, "test.csv");
}

}  // namespace

// ---- models ----------------------------------------------------------------

TEST(ModelJson, RoundTripAllKinds) {
  std::vector<PaModel> models;
  models.push_back({rapp315(), 315e9});
  SalehParams s;
  s.alpha1 = 9.95;
  s.beta1 = 5606.0;
  s.alpha2 = -2.0e5;
  s.beta2 = 1.0e3;
  models.push_back({s, 315e9});
  models.push_back({GhorbaniParams{{12.0, 1.2, 1e4, 0.0}, {-166700.0, 1.678, 2981.0, 141.8}}, 315e9});
  PolyParams pp;
  pp.a = {4.9, -0.01};
  pp.b = {-46.0, 0.5};
  pp.policy = RangePolicy::clamp;
  models.push_back({pp, 300e9});

  for (const auto& m : models) {
    const auto back = model_from_json(model_to_json(m, {"unit test", "x", 0.1, 0.2, "dB"}));
    EXPECT_EQ(back.kind(), m.kind());
    EXPECT_EQ(back.fc_hz, m.fc_hz);
    for (double rho : {1e-4, 1e-3}) {
      const auto a = evaluate(m, rho);
      const auto b = evaluate(back, rho);
      EXPECT_EQ(a.amplitude, b.amplitude);
      EXPECT_EQ(a.phase_deg, b.phase_deg);
    }
  }
}

TEST(ModelJson, MetaRoundTrip) {
  ModelMeta in{"fit", "abc", 0.25, 1.5, "dBm"};
  ModelMeta out;
  model_from_json(model_to_json(PaModel{rapp315(), 315e9}, in), &out);
  EXPECT_EQ(out.source, "fit");
  EXPECT_EQ(out.id, "abc");
  EXPECT_EQ(out.residual_amplitude.value(), 0.25);
  EXPECT_EQ(out.residual_phase.value(), 1.5);
  EXPECT_EQ(out.amplitude_units, "dBm");
}

TEST(ModelJson, ShippedModelsLoad) {
  for (const char* f : {"poly_315ghz.json", "rapp_315ghz.json", "saleh_315ghz.json", "ghorbani_315ghz.json"}) {
    ModelMeta meta;
    const auto m = load_model(kSource / "data/models" / f, &meta);
    EXPECT_EQ(m.fc_hz, 315e9) << f;
    EXPECT_FALSE(meta.id.empty()) << f;
  }
  const auto poly = load_model(kSource / "data/models/poly_315ghz.json");
  const auto& pp = std::get<PolyParams>(poly.params);
  EXPECT_EQ(pp.a.size(), 10u);
  EXPECT_EQ(pp.a[0], 4.93685);
  EXPECT_EQ(pp.b[9], 4.82313e-11);
}

TEST(ModelJson, UnknownKindAndKeys) {
  Json j = model_to_json(PaModel{rapp315(), 315e9});
  j["kind"] = "cubic";
  try {
    model_from_json(j);
    FAIL();
  } catch (const SchemaError& e) {
    EXPECT_EQ(e.path(), "/kind");
    EXPECT_NE(std::string(e.what()).find("cubic"), std::string::npos);
  }
  j = model_to_json(PaModel{rapp315(), 315e9});
  j["params"]["gain"] = 1.0;
  EXPECT_THROW(model_from_json(j), SchemaError);
  j = model_to_json(PaModel{rapp315(), 315e9});
  j["params"].erase("v_sat");
  try {
    model_from_json(j);
    FAIL();
  } catch (const SchemaError& e) {
    EXPECT_EQ(e.path(), "/params/v_sat");
  }
  j = model_to_json(PaModel{rapp315(), 315e9});
  j["params"]["v_sat"] = "big";
  EXPECT_THROW(model_from_json(j), DataError);
  j["params"]["v_sat"] = -1.0;
  EXPECT_THROW(model_from_json(j), DataError);
}

TEST(ModelJson, MissingAndMalformedFiles) {
  EXPECT_THROW(load_model("/nonexistent/model.json"), IoError);
  const auto d = temp_dir("bad");
  write_text_file(d / "m.json", "{ \"kind\": ");
  try {
    load_model(d / "m.json");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_GE(e.line(), 1u);
  }
}

TEST(PredistorterJson, RoundTrip) {
  const auto ideal = Predistorter::ideal(rapp315(), 4e-3);
  const auto poly = ideal.with_polynomials(4, 4);
  for (const auto& pd : {ideal, poly}) {
    const auto back = predistorter_from_json(predistorter_to_json(pd, 315e9));
    EXPECT_EQ(back.mode(), pd.mode());
    EXPECT_EQ(back.chi(), pd.chi());
    EXPECT_EQ(back.gamma(), pd.gamma());
    EXPECT_EQ(back.polynomials().eta, pd.polynomials().eta);
  }
  Json j = predistorter_to_json(ideal, 315e9);
  j["chi"] = 1.0;
  EXPECT_THROW(predistorter_from_json(j), DataError);
}

// ---- measurement CSV -------------------------------------------------------

TEST(MeasurementCsv, ParsesExampleRow) {
  const auto c = parse("freq_hz,pin_dbm,pout_dbm,phase_deg\n3.15e11,-40,-17.7,0.0\n3.15e11,-35,-12.8,0.3\n");
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].fc_hz, 315e9);
  ASSERT_EQ(c[0].points.size(), 2u);
  EXPECT_EQ(c[0].points[0].p_in_dbm, -40.0);
  EXPECT_EQ(c[0].points[0].p_out_dbm, -17.7);
  EXPECT_EQ(c[0].points[1].phase_deg, 0.3);
}

TEST(MeasurementCsv, ColumnOrderCommentsAndSorting) {
  const auto c = parse(
      "# bench run\n"
      "phase_deg,pout_dbm,freq_hz,pin_dbm\n"
      "\n"
      "1.0,-10,3.15e11,-30\n"
      "0.5,-15,3.15e11,-35\n");
  ASSERT_EQ(c[0].points.size(), 2u);
  EXPECT_EQ(c[0].points[0].p_in_dbm, -35.0);
  EXPECT_EQ(c[0].points[0].phase_deg, 0.5);
}

TEST(MeasurementCsv, GroupsByFrequency) {
  const auto c = parse(
      "freq_hz,pin_dbm,pout_dbm,phase_deg\n"
      "3.15e11,-40,-17,0\n2.7e11,-40,-18,0\n3.15e11,-30,-7,1\n2.7e11,-30,-8,2\n");
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c[0].fc_hz, 315e9);
  EXPECT_EQ(c[1].fc_hz, 270e9);
  EXPECT_EQ(c[1].points[1].phase_deg, 2.0);
}

TEST(MeasurementCsv, MissingColumnNamed) {
  try {
    parse("freq_hz,pin_dbm,pout_dbm\n3.15e11,-40,-17\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("phase_deg"), std::string::npos);
    EXPECT_EQ(e.line(), 1u);
  }
}

TEST(MeasurementCsv, BadRowsReportLine) {
  try {
    parse("freq_hz,pin_dbm,pout_dbm,phase_deg\n3.15e11,-40,-17,0\n3.15e11,abc,-7,1\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  EXPECT_THROW(parse("freq_hz,pin_dbm,pout_dbm,phase_deg\n3.15e11,-40,-17\n"), ParseError);
  EXPECT_THROW(parse("freq_hz,pin_dbm,pout_dbm,phase_deg,extra\n"), ParseError);
  EXPECT_THROW(parse(""), ParseError);
  // duplicate input power
  EXPECT_THROW(parse("freq_hz,pin_dbm,pout_dbm,phase_deg\n1,-40,-17,0\n1,-40,-16,0\n"), DataError);
}

TEST(MeasurementCsv, NormalizePhase) {
  std::istringstream in("freq_hz,pin_dbm,pout_dbm,phase_deg\n1,-40,-17,12\n1,-30,-7,15\n");
  const auto c = parse_measurement_csv(in, "t", true, -40.0);
  EXPECT_EQ(c[0].points[0].phase_deg, 0.0);
  EXPECT_EQ(c[0].points[1].phase_deg, 3.0);
}

TEST(MeasurementCsv, WriterRoundTrip) {
  const auto c = parse("freq_hz,pin_dbm,pout_dbm,phase_deg\n3.15e11,-40,-17.7,0.1\n3.15e11,-35,-12.8,0.3\n");
  const auto back = parse(measurement_csv(c));
  EXPECT_EQ(back[0].points[0].phase_deg, 0.1);
  EXPECT_EQ(back[0].points[1].p_out_dbm, -12.8);
}

TEST(MeasurementCsv, SurrogateFileLoads) {
  const auto c = parse_measurement_csv(kSource / "data/measurements/surrogate_315ghz.csv");
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c[0].points.size(), 81u);
  EXPECT_THROW(parse_measurement_csv(fs::path("/nonexistent.csv")), IoError);
}

// ---- sweep results ---------------------------------------------------------

namespace {

SweepResult sample_sweep() {
  SweepResult r;
  r.meta.kind = "ber-vs-snr";
  r.meta.axis_name = "snr_db";
  r.meta.seed = 42;
  r.meta.model_id = "rapp";
  r.meta.pd_mode = "polynomial";
  r.meta.pd_order_amplitude = 8;
  r.meta.pd_order_phase = 8;
  r.meta.pd_chi = 4e-3;
  r.meta.noise_mode = "direct";
  SweepRow a;
  a.axis = 10.0;
  a.metrics.evm_db = -20.123456789012345;
  a.metrics.ber = 1.0 / 3.0;
  a.metrics.ber_std_error = 1e-3;
  a.metrics.bit_errors = 100;
  a.metrics.bits = 300;
  a.metrics.symbols = 50;
  a.metrics.ber_converged = true;
  a.metrics.snr_db = 10.0;
  a.metrics.measured_snr_db = 10.01;
  a.metrics.mean_pa_input_dbm = -25.5;
  a.metrics.clip_rate = 1e-4;
  SweepRow b;
  b.axis = 12.0;
  b.ok = false;
  b.error = "bad point, really";
  b.metrics.snr_db = std::numeric_limits<double>::quiet_NaN();
  r.rows = {a, b};
  r.meta.total_bits = 300;
  r.meta.total_symbols = 50;
  return r;
}

}  // namespace

TEST(SweepCsv, RoundTripBitExact) {
  const auto r = sample_sweep();
  std::istringstream in(sweep_csv(r));
  const auto back = parse_sweep_csv(in);
  EXPECT_EQ(back.meta.axis_name, "snr_db");
  ASSERT_EQ(back.rows.size(), 2u);
  EXPECT_EQ(back.rows[0].metrics.evm_db, r.rows[0].metrics.evm_db);
  EXPECT_EQ(back.rows[0].metrics.ber, r.rows[0].metrics.ber);
  EXPECT_EQ(back.rows[0].metrics.bit_errors, 100u);
  EXPECT_TRUE(back.rows[0].metrics.ber_converged);
  EXPECT_FALSE(back.rows[1].ok);
  EXPECT_TRUE(std::isnan(back.rows[1].metrics.snr_db));
  EXPECT_EQ(back.rows[1].error, "bad point; really");
}

TEST(SweepCsv, StableHeaderAndEmptySweep) {
  SweepResult r;
  r.meta.axis_name = "ibo_db";
  const auto s = sweep_csv(r);
  EXPECT_EQ(s.substr(0, s.find('\n')),
            "ibo_db,ok,evm_db,ber,ber_std_error,bit_errors,bits,symbols,ber_below_resolution,ber_converged,ibo_db,"
            "snr_db,measured_snr_db,mean_pa_input_dbm,mean_pa_output_dbm,clip_rate,error");
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 1);
  std::istringstream in(s);
  EXPECT_TRUE(parse_sweep_csv(in).rows.empty());
}

TEST(SweepJson, RoundTrip) {
  const auto r = sample_sweep();
  const Json j = sweep_to_json(r, Json{{"command", "ber-sweep"}});
  EXPECT_TRUE(j["rows"][1]["snr_db"].is_null());
  const auto back = sweep_from_json(Json::parse(j.dump()));
  EXPECT_EQ(back.meta.seed, 42u);
  EXPECT_EQ(back.meta.pd_order_amplitude, 8);
  EXPECT_EQ(back.meta.pd_chi, 4e-3);
  EXPECT_EQ(back.rows[0].metrics.evm_db, r.rows[0].metrics.evm_db);
  EXPECT_EQ(back.rows[1].error, "bad point, really");
  EXPECT_TRUE(std::isnan(back.rows[1].metrics.snr_db));
}

TEST(SweepJson, EmitResultsWritesFiles) {
  const auto d = temp_dir("emit");
  const auto r = sample_sweep();
  emit_results(r, d / "x.csv", ResultFormat::csv);
  emit_results(r, d / "x.json", ResultFormat::json);
  EXPECT_EQ(sweep_from_json(read_json_file(d / "x.json")).rows.size(), 2u);
  EXPECT_GT(fs::file_size(d / "x.csv"), 100u);
  EXPECT_THROW(emit_results(r, d / "missing" / "sub" / "x.csv", ResultFormat::csv), IoError);
}

// ---- run configs -----------------------------------------------------------

TEST(RunConfig, ShippedConfigsParse) {
  for (const char* f : {"evm_vs_nsc.json", "ber_vs_snr.json", "pa_input_vs_ibo.json"}) {
    const auto c = load_sweep_config(kSource / "configs" / f);
    EXPECT_FALSE(c.axis.empty()) << f;
    EXPECT_FALSE(c.variants.empty()) << f;
    for (const auto& v : c.variants) EXPECT_NO_THROW(make_chain(c, v)) << f << " " << v.label;
  }
}

TEST(RunConfig, RejectsUnknownKeys) {
  const std::string model = (kSource / "data/models/rapp_315ghz.json").string();
  Json j = {{"command", "ibo-sweep"}, {"model", model}, {"axis", {0, 1}}, {"bogus", 1}};
  EXPECT_THROW(parse_sweep_config(j, "."), ConfigError);
  j.erase("bogus");
  EXPECT_NO_THROW(parse_sweep_config(j, "."));
  j["chain"] = {{"ibo", 3}};
  EXPECT_THROW(parse_sweep_config(j, "."), ConfigError);
}

TEST(RunConfig, ValidationErrors) {
  const std::string model = (kSource / "data/models/rapp_315ghz.json").string();
  Json base = {{"command", "evm-sweep"}, {"model", model}, {"axis", {16, 64}}};
  EXPECT_NO_THROW(parse_sweep_config(base, "."));
  auto j = base;
  j["command"] = "sweep";
  EXPECT_THROW(parse_sweep_config(j, "."), ConfigError);
  j = base;
  j["axis"] = Json::array();
  EXPECT_THROW(parse_sweep_config(j, "."), ConfigError);
  j = base;
  j["axis"] = {16.5};
  EXPECT_THROW(parse_sweep_config(j, "."), ConfigError);
  j = base;
  j["model"] = "/nonexistent.json";
  EXPECT_THROW(parse_sweep_config(j, "."), ConfigError);
  j = base;
  j["waveform"] = {{"modulation_order", 32}};
  EXPECT_THROW(parse_sweep_config(j, "."), ConfigError);
  j = base;
  j["variants"] = {{{"label", "a"}, {"linear_pa", true}, {"pd", {{"mode", "ideal"}}}}};
  EXPECT_THROW(parse_sweep_config(j, "."), ConfigError);
}

TEST(RunConfig, BerSweepDefaultsToDirectNoise) {
  Json j = {{"command", "ber-sweep"}, {"model", (kSource / "data/models/rapp_315ghz.json").string()}, {"axis", {10}}};
  EXPECT_EQ(parse_sweep_config(j, ".").noise, NoiseMode::direct);
}

TEST(RunConfig, ResolvedConfigReproducesVariant) {
  const auto c = load_sweep_config(kSource / "configs/evm_vs_nsc.json");
  const auto& var = c.variants.back();
  const Json r = resolved_config(c, var);
  const auto again = parse_sweep_config(r, ".");
  ASSERT_EQ(again.variants.size(), 1u);
  EXPECT_EQ(output_stem(again, again.variants[0]), output_stem(c, var));
  const auto a = make_chain(c, var);
  const auto b = make_chain(again, again.variants[0]);
  EXPECT_EQ(a.pd.has_value(), b.pd.has_value());
  if (a.pd) {
    EXPECT_EQ(a.pd->chi(), b.pd->chi());
    EXPECT_EQ(a.pd->polynomials().eta, b.pd->polynomials().eta);
  }
  EXPECT_EQ(again.axis, c.axis);
  EXPECT_EQ(again.seed, c.seed);
}
