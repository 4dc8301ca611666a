// SPDX-License-Identifier: Apache-2.0
//
// subthz command-line front end.
//   fit | pd-design | evm-sweep | ber-sweep | ibo-sweep | eval-model
// Exit codes: 0 ok, 2 config error, 3 data error, 4 numerical error.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "subthz/fitting.hpp"
#include "subthz/io.hpp"
#include "subthz/link_sim.hpp"
#include "subthz/pa_models.hpp"
#include "subthz/predistortion.hpp"
#include "subthz/run_config.hpp"

namespace fs = std::filesystem;
using namespace subthz;

namespace {

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// --- fit -------------------------------------------------------------------

struct FitArgs {
  std::string data;
  std::string model = "poly";
  int order = 9;
  std::optional<double> fc;
  std::string out;
  bool normalize = false;
  double reference = -40.0;
  std::uint64_t seed = FitOptions{}.seed;
  int starts = FitOptions{}.starts;
  bool table = false;
};

MeasurementCurve select_curve(const std::vector<MeasurementCurve>& curves, const std::optional<double>& fc) {
  if (curves.empty()) throw DataError("no measurement curves in input");
  if (!fc) {
    if (curves.size() > 1) throw ConfigError("input holds several frequencies; choose one with --fc");
    return curves.front();
  }
  for (const auto& c : curves)
    if (std::abs(c.fc_hz - *fc) <= 1e-9 * std::abs(*fc)) return c;
  throw DataError("no curve at " + g17(*fc) + " Hz in input");
}

int run_fit(const FitArgs& a) {
  const auto curves = parse_measurement_csv(fs::path(a.data), a.normalize, a.reference);
  const auto curve = select_curve(curves, a.fc);
  FitOptions opt;
  opt.seed = a.seed;
  opt.starts = a.starts;

  if (a.table) {
    std::vector<int> orders;
    for (int m = 1; m <= a.order; ++m) orders.push_back(m);
    std::printf("order,amplitude_rms_db,phase_rms_deg,ok\n");
    for (const auto& r : fit_error_vs_order(curve, orders))
      std::printf("%d,%s,%s,%d\n", r.order, g17(r.amplitude_rms).c_str(), g17(r.phase_rms).c_str(), r.ok ? 1 : 0);
  }

  FitReport rep;
  if (a.model == "poly" || a.model == "polynomial")
    rep = fit_polynomial(curve, a.order);
  else if (a.model == "saleh")
    rep = fit_saleh_model(curve);
  else if (a.model == "rapp")
    rep = fit_rapp(curve, opt);
  else if (a.model == "ghorbani")
    rep = fit_ghorbani(curve, opt);
  else
    throw ConfigError("unknown model '" + a.model + "'");

  const auto j = fit_report_to_json(rep, fs::path(a.data).filename().string(),
                                    a.model + "_" + g17(curve.fc_hz / 1e9) + "ghz");
  if (!a.out.empty()) write_text_file(a.out, j.dump(2) + "\n");
  std::cout << j.dump(2) << "\n";
  if (!rep.converged) std::cerr << "warning: simplex hit the iteration limit before converging\n";
  return 0;
}

// --- pd-design -------------------------------------------------------------

struct PdArgs {
  std::string model;
  std::optional<double> chi;
  std::optional<int> na, ntheta;
  int grid = 4096;
  std::string out;
};

int run_pd_design(const PdArgs& a) {
  const PaModel model = load_model(a.model);
  const auto* rp = std::get_if<RappParams>(&model.params);
  if (!rp) throw ConfigError("pd-design needs a rapp model file");
  if (a.na.has_value() != a.ntheta.has_value()) throw ConfigError("give both --na and --ntheta, or neither");
  auto pd = Predistorter::ideal(*rp, a.chi.value_or(default_clip_level(*rp)));
  if (a.na) pd = pd.with_polynomials(*a.na, *a.ntheta, a.grid);
  const auto j = predistorter_to_json(pd, model.fc_hz);
  if (!a.out.empty()) write_text_file(a.out, j.dump(2) + "\n");
  std::cout << j.dump(2) << "\n";
  return 0;
}

// --- sweeps ----------------------------------------------------------------

struct SweepArgs {
  std::string config;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
};

int run_sweep_command(const std::string& command, const SweepArgs& a) {
  SweepConfig cfg = load_sweep_config(a.config);
  if (cfg.command != command)
    throw ConfigError(a.config + ": config is for '" + cfg.command + "', not '" + command + "'");
  if (a.seed) cfg.seed = *a.seed;
  if (!a.out_dir.empty()) cfg.output.dir = a.out_dir;
  fs::create_directories(cfg.output.dir);

  int failed = 0;
  for (const auto& var : cfg.variants) {
    const ChainConfig chain = make_chain(cfg, var);
    const SweepResult res = run_configured_sweep(cfg, chain);
    const std::string stem = output_stem(cfg, var);
    if (cfg.output.csv) emit_results(res, cfg.output.dir / (stem + ".csv"), ResultFormat::csv);
    if (cfg.output.json)
      emit_results(res, cfg.output.dir / (stem + ".json"), ResultFormat::json, resolved_config(cfg, var));

    std::printf("# %s  variant=%s  pd=%s  seed=%llu\n", res.meta.kind.c_str(), var.label.c_str(),
                res.meta.pd_mode.c_str(), static_cast<unsigned long long>(cfg.seed));
    std::printf("%12s %10s %12s %10s %12s %10s %9s\n", res.meta.axis_name.c_str(), "evm_db", "ber", "errors",
                "pa_in_dbm", "ibo_db", "clip");
    for (const auto& row : res.rows) {
      if (!row.ok) {
        ++failed;
        std::printf("%12g  error: %s\n", row.axis, row.error.c_str());
        continue;
      }
      const auto& m = row.metrics;
      std::printf("%12g %10.3f %12.4e %10llu %12.4f %10.3f %9.2e%s\n", row.axis, m.evm_db, m.ber,
                  static_cast<unsigned long long>(m.bit_errors), m.mean_pa_input_dbm, m.ibo_db, m.clip_rate,
                  m.ber_below_resolution ? "  (below resolution)" : "");
    }
  }
  if (failed) std::fprintf(stderr, "%d sweep point(s) failed\n", failed);
  return 0;
}

// --- eval-model ------------------------------------------------------------

struct EvalArgs {
  std::string model;
  std::string pin;
};

/// "<number>" or "<number>dBm" (dBm) / "<number>V" (volts).
std::pair<double, bool> parse_pin(const std::string& s) {
  std::string t = s;
  bool volts = false;
  auto strip = [&](const std::string& suffix) {
    if (t.size() > suffix.size()) {
      auto tail = t.substr(t.size() - suffix.size());
      std::transform(tail.begin(), tail.end(), tail.begin(), [](unsigned char c) { return std::tolower(c); });
      if (tail == suffix) {
        t.resize(t.size() - suffix.size());
        return true;
      }
    }
    return false;
  };
  if (!strip("dbm")) volts = strip("v");
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != t.size() || !std::isfinite(v)) throw ConfigError("cannot parse --pin '" + s + "'");
  return {v, volts};
}

int run_eval(const EvalArgs& a) {
  const PaModel model = load_model(a.model);
  const auto [value, volts] = parse_pin(a.pin);
  double pin_dbm = 0.0, pin_v = 0.0, pout_dbm = 0.0, pout_v = 0.0, phase = 0.0;
  const auto* pp = std::get_if<PolyParams>(&model.params);
  if (volts) {
    pin_v = value;
    pin_dbm = value > 0.0 ? volts_to_dbm(value) : -INFINITY;
  } else {
    pin_dbm = value;
    pin_v = dbm_to_volts(value);
  }
  if (pp && !volts) {  // stay in dBm: no volt round trip
    pout_dbm = poly_amplitude(pin_dbm, *pp);
    phase = poly_phase(pin_dbm, *pp);
    pout_v = dbm_to_volts(pout_dbm);
  } else {
    const auto r = evaluate(model, pin_v);
    pout_v = r.amplitude;
    phase = r.phase_deg;
    pout_dbm = pout_v > 0.0 ? volts_to_dbm(pout_v) : -INFINITY;
  }
  Json j = {{"model", to_string(model.kind())}, {"fc_hz", model.fc_hz},       {"pin_dbm", json_number(pin_dbm)},
            {"pin_v", pin_v},                   {"pout_dbm", json_number(pout_dbm)}, {"pout_v", pout_v},
            {"phase_deg", phase}};
  std::cout << j.dump() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sub-THz PA modelling, predistortion and link simulation"};
  app.require_subcommand(1);

  FitArgs fa;
  auto* fit = app.add_subcommand("fit", "Fit a PA model to a measurement CSV");
  fit->add_option("--data", fa.data, "CSV with freq_hz,pin_dbm,pout_dbm,phase_deg")->required();
  fit->add_option("--model", fa.model, "poly, rapp, saleh or ghorbani")
      ->check(CLI::IsMember({"poly", "polynomial", "rapp", "saleh", "ghorbani"}));
  fit->add_option("--order", fa.order, "Polynomial order")->check(CLI::PositiveNumber);
  fit->add_option("--fc", fa.fc, "Curve frequency (Hz) when the file has several");
  fit->add_option("--out", fa.out, "Output model JSON");
  fit->add_flag("--normalize-phase", fa.normalize, "Make phases relative to the reference input power");
  fit->add_option("--reference-pin", fa.reference, "Phase reference input power (dBm)");
  fit->add_option("--seed", fa.seed, "Multi-start seed");
  fit->add_option("--starts", fa.starts, "Multi-start count")->check(CLI::PositiveNumber);
  fit->add_flag("--error-table", fa.table, "Print polynomial fit error for orders 1..order");

  PdArgs pa;
  auto* pdd = app.add_subcommand("pd-design", "Design an ideal or polynomial predistorter");
  pdd->add_option("--model", pa.model, "Rapp model JSON")->required()->check(CLI::ExistingFile);
  pdd->add_option("--chi", pa.chi, "Clip level (V)");
  pdd->add_option("--na", pa.na, "Amplitude polynomial order");
  pdd->add_option("--ntheta", pa.ntheta, "Phase polynomial order");
  pdd->add_option("--grid", pa.grid, "LS grid points");
  pdd->add_option("--out", pa.out, "Output predistorter JSON");

  SweepArgs sa;
  std::vector<CLI::App*> sweeps;
  for (const char* name : {"evm-sweep", "ber-sweep", "ibo-sweep"}) {
    auto* s = app.add_subcommand(name, std::string("Run a ") + name + " from a config file");
    s->add_option("--config", sa.config, "Config JSON (or a previous result JSON)")->required()->check(CLI::ExistingFile);
    s->add_option("--out-dir", sa.out_dir, "Override output directory");
    s->add_option("--seed", sa.seed, "Override master seed");
    sweeps.push_back(s);
  }

  EvalArgs ea;
  auto* ev = app.add_subcommand("eval-model", "Evaluate a model at one input level");
  ev->add_option("--model", ea.model, "Model JSON")->required()->check(CLI::ExistingFile);
  ev->add_option("--pin", ea.pin, "Input level: dBm by default, or with a V / dBm suffix")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*fit) return run_fit(fa);
    if (*pdd) return run_pd_design(pa);
    if (*ev) return run_eval(ea);
    for (auto* s : sweeps)
      if (*s) return run_sweep_command(s->get_name(), sa);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(ErrorKind::data);
  }
  return 0;
}
