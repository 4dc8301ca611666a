// SPDX-License-Identifier: Apache-2.0
//
// Sweep run configuration files. Unknown keys are rejected. Input paths are
// resolved against the config file's directory; output paths against the
// working directory.
//
// A sweep result JSON is itself a valid config: its "config" member holds the
// fully resolved single-variant configuration (model and predistorter inline).

#ifndef SUBTHZ_RUN_CONFIG_HPP
#define SUBTHZ_RUN_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "subthz/errors.hpp"
#include "subthz/io.hpp"
#include "subthz/link_sim.hpp"
#include "subthz/predistortion.hpp"
#include "subthz/waveforms.hpp"

namespace subthz {

struct PdSpec {
  std::string mode = "none";  // none, ideal, polynomial
  double chi = 0.0;           // 0: default clip level for the model
  int na = 8;
  int ntheta = 8;
  int grid_points = 4096;
  std::optional<Json> predistorter;  // explicit predistorter document, overrides the fields above
};

struct Variant {
  std::string label = "run";
  PdSpec pd;
  bool linear_pa = false;
};

struct OutputSpec {
  std::filesystem::path dir = ".";
  std::string basename;
  bool csv = true;
  bool json = true;
};

struct SweepConfig {
  std::string command;  // evm-sweep, ber-sweep, ibo-sweep
  std::uint64_t seed = 1;
  Json model_json;
  PaModel model;
  std::string model_id;
  WaveformConfig waveform;
  LinkConfig link;
  double ibo_db = 0.0;
  NoiseMode noise = NoiseMode::none;
  double snr_db = 30.0;
  std::size_t symbols = 20'000;
  std::size_t frame_symbols = 16'384;
  BerStopping stopping;
  std::vector<double> axis;
  std::vector<Variant> variants;
  OutputSpec output;
};

namespace detail {

inline NoiseMode parse_noise_mode(const JsonView& v) {
  const auto s = v.string();
  if (s == "none") return NoiseMode::none;
  if (s == "direct") return NoiseMode::direct;
  if (s == "link_budget") return NoiseMode::link_budget;
  v.fail("expected 'none', 'direct' or 'link_budget'");
}

inline std::filesystem::path existing_file(const JsonView& v, const std::filesystem::path& base) {
  std::filesystem::path p = v.string();
  if (p.is_relative()) p = base / p;
  if (!std::filesystem::is_regular_file(p)) v.fail("file not found: " + p.string());
  return p;
}

/// Path string or inline object -> JSON document.
inline Json document(const JsonView& v, const std::filesystem::path& base) {
  if (v.is_object()) return v.raw();
  if (!v.is_string()) v.fail("expected a file path or an inline object");
  return read_json_file(existing_file(v, base));
}

inline PdSpec parse_pd(const JsonView& v, const std::filesystem::path& base) {
  v.only_keys({"mode", "chi", "na", "ntheta", "grid_points", "predistorter"});
  PdSpec pd;
  if (const auto doc = v.find("predistorter")) {
    for (const char* k : {"mode", "chi", "na", "ntheta", "grid_points"})
      if (v.has(k)) v.at(k).fail("not allowed together with 'predistorter'");
    pd.predistorter = document(*doc, base);
    try {
      pd.mode = to_string(predistorter_from_json(*pd.predistorter, doc->path()).mode());
    } catch (const DataError& e) {
      doc->fail(e.what());
    }
    return pd;
  }
  pd.mode = v.string_or("mode", "none");
  if (pd.mode != "none" && pd.mode != "ideal" && pd.mode != "polynomial")
    v.at("mode").fail("expected 'none', 'ideal' or 'polynomial'");
  pd.chi = v.number_or("chi", 0.0);
  pd.na = static_cast<int>(v.integer_or("na", 8));
  pd.ntheta = static_cast<int>(v.integer_or("ntheta", 8));
  pd.grid_points = static_cast<int>(v.integer_or("grid_points", 4096));
  return pd;
}

inline Json pd_to_json(const PdSpec& pd) {
  if (pd.predistorter) return {{"predistorter", *pd.predistorter}};
  Json j = {{"mode", pd.mode}, {"chi", pd.chi}};
  if (pd.mode == "polynomial") {
    j["na"] = pd.na;
    j["ntheta"] = pd.ntheta;
    j["grid_points"] = pd.grid_points;
  }
  return j;
}

inline const char* axis_key(const std::string& command) {
  if (command == "evm-sweep") return "n_subcarriers";
  if (command == "ber-sweep") return "snr_db";
  return "ibo_db";
}

}  // namespace detail

inline SweepConfig parse_sweep_config(const Json& j, const std::filesystem::path& base_dir) {
  const JsonView v(j, "", true);
  v.only_keys({"command", "seed", "model", "model_id", "waveform", "chain", "link", "axis", "pd", "variants", "output"});
  SweepConfig c;
  c.command = v.at("command").string();
  if (c.command != "evm-sweep" && c.command != "ber-sweep" && c.command != "ibo-sweep")
    v.at("command").fail("expected 'evm-sweep', 'ber-sweep' or 'ibo-sweep'");
  if (const auto s = v.find("seed")) c.seed = s->unsigned_integer();

  const auto mv = v.at("model");
  c.model_json = detail::document(mv, base_dir);
  ModelMeta meta;
  try {
    c.model = model_from_json(c.model_json, &meta, mv.path());
  } catch (const DataError& e) {
    mv.fail(e.what());
  }
  c.model_id = v.string_or("model_id", !meta.id.empty()       ? meta.id
                                       : mv.is_string()        ? std::filesystem::path(mv.string()).stem().string()
                                                               : to_string(c.model.kind()));

  if (const auto w = v.find("waveform")) {
    w->only_keys({"modulation_order", "n_subcarriers", "rolloff", "oversampling", "rrc_span", "cp_fraction",
                  "bandwidth_hz", "shaping"});
    auto& wf = c.waveform;
    wf.modulation_order = static_cast<int>(w->integer_or("modulation_order", wf.modulation_order));
    wf.n_subcarriers = static_cast<int>(w->integer_or("n_subcarriers", wf.n_subcarriers));
    wf.rolloff = w->number_or("rolloff", wf.rolloff);
    wf.oversampling = static_cast<int>(w->integer_or("oversampling", wf.oversampling));
    wf.rrc_span = static_cast<int>(w->integer_or("rrc_span", wf.rrc_span));
    wf.cp_fraction = w->number_or("cp_fraction", wf.cp_fraction);
    wf.bandwidth_hz = w->number_or("bandwidth_hz", wf.bandwidth_hz);
    const auto shaping = w->string_or("shaping", "circular");
    if (shaping == "linear")
      wf.shaping = PulseShaping::linear;
    else if (shaping != "circular")
      w->at("shaping").fail("expected 'circular' or 'linear'");
  }
  if (const auto ch = v.find("chain")) {
    ch->only_keys({"ibo_db", "noise", "snr_db", "symbols", "frame_symbols", "min_errors", "max_bits"});
    c.ibo_db = ch->number_or("ibo_db", c.ibo_db);
    if (const auto n = ch->find("noise")) c.noise = detail::parse_noise_mode(*n);
    c.snr_db = ch->number_or("snr_db", c.snr_db);
    if (const auto s = ch->find("symbols")) c.symbols = s->unsigned_integer();
    if (const auto s = ch->find("frame_symbols")) c.frame_symbols = s->unsigned_integer();
    if (const auto s = ch->find("min_errors")) c.stopping.min_errors = s->unsigned_integer();
    if (const auto s = ch->find("max_bits")) c.stopping.max_bits = s->unsigned_integer();
  }
  if (const auto l = v.find("link")) {
    l->only_keys({"g_t_dbi", "g_r_dbi", "distance_m", "fc_hz", "bandwidth_hz", "noise_temp_k", "atten_db_per_km"});
    auto& k = c.link;
    k.g_t_dbi = l->number_or("g_t_dbi", k.g_t_dbi);
    k.g_r_dbi = l->number_or("g_r_dbi", k.g_r_dbi);
    k.distance_m = l->number_or("distance_m", k.distance_m);
    k.fc_hz = l->number_or("fc_hz", k.fc_hz);
    k.bandwidth_hz = l->number_or("bandwidth_hz", k.bandwidth_hz);
    k.noise_temp_k = l->number_or("noise_temp_k", k.noise_temp_k);
    k.atten_db_per_km = l->number_or("atten_db_per_km", k.atten_db_per_km);
  }

  const auto axis = v.at("axis");
  c.axis = axis.numbers();
  if (c.axis.empty()) axis.fail("axis list is empty");
  if (c.command == "evm-sweep")
    for (const auto& e : axis.elements()) e.integer();
  if (c.command == "ber-sweep" && c.noise == NoiseMode::none) c.noise = NoiseMode::direct;

  if (v.has("pd") && v.has("variants")) v.at("variants").fail("use either 'pd' or 'variants', not both");
  if (const auto vs = v.find("variants")) {
    for (const auto& e : vs->elements()) {
      e.only_keys({"label", "pd", "linear_pa"});
      Variant var;
      var.label = e.at("label").string();
      if (const auto p = e.find("pd")) var.pd = detail::parse_pd(*p, base_dir);
      var.linear_pa = e.boolean_or("linear_pa", false);
      if (var.linear_pa && var.pd.mode != "none") e.at("pd").fail("a linear PA stand-in takes no predistorter");
      c.variants.push_back(std::move(var));
    }
    if (c.variants.empty()) vs->fail("variants list is empty");
  } else {
    Variant var;
    if (const auto p = v.find("pd")) var.pd = detail::parse_pd(*p, base_dir);
    c.variants.push_back(std::move(var));
  }

  c.output.basename = c.command;
  if (const auto o = v.find("output")) {
    o->only_keys({"dir", "basename", "formats"});
    c.output.dir = o->string_or("dir", ".");
    c.output.basename = o->string_or("basename", c.output.basename);
    if (const auto f = o->find("formats")) {
      c.output.csv = c.output.json = false;
      for (const auto& e : f->elements()) {
        const auto s = e.string();
        if (s == "csv")
          c.output.csv = true;
        else if (s == "json")
          c.output.json = true;
        else
          e.fail("expected 'csv' or 'json'");
      }
    }
  }

  try {
    c.waveform.validate();
    c.link.validate();
  } catch (const ConfigError& e) {
    v.fail(e.what());
  }
  return c;
}

/// Reads a config file, or the embedded config of a sweep result JSON.
inline SweepConfig load_sweep_config(const std::filesystem::path& path) {
  Json j = read_json_file(path);
  if (j.is_object() && j.contains("rows") && j.contains("config")) j = j["config"];
  return parse_sweep_config(j, path.parent_path());
}

inline Predistorter make_predistorter(const SweepConfig& c, const PdSpec& spec) {
  if (spec.predistorter) return predistorter_from_json(*spec.predistorter);
  const auto* rp = std::get_if<RappParams>(&c.model.params);
  if (!rp) throw ConfigError("predistorter design needs a rapp model; supply a 'predistorter' document instead");
  const double chi = spec.chi > 0.0 ? spec.chi : default_clip_level(*rp);
  const auto pd = Predistorter::ideal(*rp, chi);
  return spec.mode == "polynomial" ? pd.with_polynomials(spec.na, spec.ntheta, spec.grid_points) : pd;
}

inline ChainConfig make_chain(const SweepConfig& c, const Variant& var) {
  ChainConfig ch;
  ch.waveform = c.waveform;
  ch.model = c.model;
  ch.model_id = c.model_id;
  if (var.pd.mode != "none") ch.pd = make_predistorter(c, var.pd);
  ch.linear_pa = var.linear_pa;
  ch.ibo_db = c.ibo_db;
  ch.noise = c.noise;
  ch.snr_db = c.snr_db;
  ch.link = c.link;
  ch.seed = c.seed;
  ch.symbols = c.symbols;
  ch.frame_symbols = c.frame_symbols;
  ch.stopping = c.stopping;
  return ch;
}

/// File stem for one variant's outputs.
inline std::string output_stem(const SweepConfig& c, const Variant& var) {
  return c.variants.size() == 1 ? c.output.basename : c.output.basename + "_" + var.label;
}

/// Self-contained single-variant config reproducing one output file.
inline Json resolved_config(const SweepConfig& c, const Variant& var) {
  const auto& w = c.waveform;
  const auto& l = c.link;
  Json variant = {{"label", var.label}, {"linear_pa", var.linear_pa}, {"pd", detail::pd_to_json(var.pd)}};
  if (var.pd.mode != "none" && !var.pd.predistorter)
    variant["pd"] = {{"predistorter", predistorter_to_json(make_predistorter(c, var.pd), c.model.fc_hz)}};
  return {{"command", c.command},
          {"seed", c.seed},
          {"model", c.model_json},
          {"model_id", c.model_id},
          {"waveform",
           {{"modulation_order", w.modulation_order},
            {"n_subcarriers", w.n_subcarriers},
            {"rolloff", w.rolloff},
            {"oversampling", w.oversampling},
            {"rrc_span", w.rrc_span},
            {"cp_fraction", w.cp_fraction},
            {"bandwidth_hz", w.bandwidth_hz},
            {"shaping", w.shaping == PulseShaping::linear ? "linear" : "circular"}}},
          {"chain",
           {{"ibo_db", c.ibo_db},
            {"noise", to_string(c.noise)},
            {"snr_db", c.snr_db},
            {"symbols", c.symbols},
            {"frame_symbols", c.frame_symbols},
            {"min_errors", c.stopping.min_errors},
            {"max_bits", c.stopping.max_bits}}},
          {"link",
           {{"g_t_dbi", l.g_t_dbi},
            {"g_r_dbi", l.g_r_dbi},
            {"distance_m", l.distance_m},
            {"fc_hz", l.fc_hz},
            {"bandwidth_hz", l.bandwidth_hz},
            {"noise_temp_k", l.noise_temp_k},
            {"atten_db_per_km", l.atten_db_per_km}}},
          {"axis", c.axis},
          {"variants", Json::array({variant})},
          {"output",
           {{"dir", c.output.dir.string()},
            {"basename", output_stem(c, var)},
            {"formats", c.output.csv && c.output.json ? Json{"csv", "json"} : c.output.csv ? Json{"csv"} : Json{"json"}}}}};
}

inline SweepResult run_configured_sweep(const SweepConfig& c, const ChainConfig& chain) {
  if (c.command == "evm-sweep") {
    std::vector<int> nsc;
    for (double v : c.axis) nsc.push_back(static_cast<int>(v));
    return sweep_evm_vs_nsc(chain, nsc);
  }
  if (c.command == "ber-sweep") return sweep_ber_vs_snr(chain, c.axis);
  return sweep_pa_input_vs_ibo(chain, c.axis);
}

}  // namespace subthz

#endif  // SUBTHZ_RUN_CONFIG_HPP
