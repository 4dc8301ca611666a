// SPDX-License-Identifier: Apache-2.0
//
// Files: model and predistorter JSON, fit reports, measurement CSV and sweep
// results (CSV + JSON). Units everywhere: Hz, dBm, degrees, volts.

#ifndef SUBTHZ_IO_HPP
#define SUBTHZ_IO_HPP

#include <algorithm>
#include <iterator>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "subthz/errors.hpp"
#include "subthz/fitting.hpp"
#include "subthz/link_sim.hpp"
#include "subthz/pa_models.hpp"
#include "subthz/predistortion.hpp"

namespace subthz {

using Json = nlohmann::json;

/// Structurally invalid JSON document; path is a JSON pointer-like location.
class SchemaError : public DataError {
 public:
  SchemaError(const std::string& path, const std::string& what)
      : DataError(path + ": " + what), path_(path) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

// ---------------------------------------------------------------------------
// Strict JSON reading with path-aware errors
// ---------------------------------------------------------------------------

/// Read-only view of a JSON node that knows where it lives. `config` selects
/// ConfigError (run configuration) over SchemaError (data files).
class JsonView {
 public:
  JsonView(const Json& j, std::string path, bool config = false) : j_(&j), path_(std::move(path)), config_(config) {}

  const Json& raw() const { return *j_; }
  const std::string& path() const { return path_; }
  bool is_object() const { return j_->is_object(); }
  bool is_array() const { return j_->is_array(); }
  bool is_string() const { return j_->is_string(); }

  [[noreturn]] void fail(const std::string& msg) const {
    if (config_) throw ConfigError(path_ + ": " + msg);
    throw SchemaError(path_, msg);
  }

  JsonView object() const {
    if (!j_->is_object()) fail("expected an object");
    return *this;
  }

  bool has(const std::string& key) const { return j_->is_object() && j_->contains(key); }

  JsonView at(const std::string& key) const {
    object();
    const auto it = j_->find(key);
    if (it == j_->end()) JsonView(*j_, child_path(key), config_).fail("missing required key");
    return {*it, child_path(key), config_};
  }

  std::optional<JsonView> find(const std::string& key) const {
    object();
    const auto it = j_->find(key);
    if (it == j_->end() || it->is_null()) return std::nullopt;
    return JsonView{*it, child_path(key), config_};
  }

  /// Rejects keys outside `allowed`.
  const JsonView& only_keys(std::initializer_list<std::string_view> allowed) const {
    object();
    for (const auto& [k, v] : j_->items()) {
      if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
        JsonView(v, child_path(k), config_).fail("unknown key");
    }
    return *this;
  }

  double number() const {
    if (!j_->is_number()) fail("expected a number");
    return j_->get<double>();
  }
  long long integer() const {
    if (j_->is_number_integer()) return j_->get<long long>();
    if (j_->is_number_float()) {
      const double v = j_->get<double>();
      if (std::nearbyint(v) == v && std::abs(v) < 9e15) return static_cast<long long>(v);
    }
    fail("expected an integer");
  }
  std::uint64_t unsigned_integer() const {
    if (j_->is_number_unsigned()) return j_->get<std::uint64_t>();
    const long long v = integer();
    if (v < 0) fail("expected a non-negative integer");
    return static_cast<std::uint64_t>(v);
  }
  bool boolean() const {
    if (!j_->is_boolean()) fail("expected true or false");
    return j_->get<bool>();
  }
  std::string string() const {
    if (!j_->is_string()) fail("expected a string");
    return j_->get<std::string>();
  }
  std::vector<JsonView> elements() const {
    if (!j_->is_array()) fail("expected an array");
    std::vector<JsonView> out;
    for (std::size_t i = 0; i < j_->size(); ++i) out.emplace_back((*j_)[i], path_ + "/" + std::to_string(i), config_);
    return out;
  }
  std::vector<double> numbers() const {
    std::vector<double> out;
    for (const auto& e : elements()) out.push_back(e.number());
    return out;
  }

  double number_or(const std::string& key, double def) const {
    const auto v = find(key);
    return v ? v->number() : def;
  }
  long long integer_or(const std::string& key, long long def) const {
    const auto v = find(key);
    return v ? v->integer() : def;
  }
  bool boolean_or(const std::string& key, bool def) const {
    const auto v = find(key);
    return v ? v->boolean() : def;
  }
  std::string string_or(const std::string& key, std::string def) const {
    const auto v = find(key);
    return v ? v->string() : std::move(def);
  }

 private:
  std::string child_path(const std::string& key) const { return path_ + "/" + key; }
  const Json* j_;
  std::string path_;
  bool config_;
};

inline Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    const auto end = text.begin() + static_cast<std::ptrdiff_t>(std::min(e.byte, text.size()));
    const auto line = static_cast<std::size_t>(std::count(text.begin(), end, '\n')) + 1;
    throw ParseError(path.string() + ":" + std::to_string(line) + ": invalid JSON: " + e.what(), line);
  }
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  out.close();
  if (!out) throw IoError("write failed: " + path.string());
}

/// Finite doubles as numbers, NaN/inf as null.
inline Json json_number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline double number_or_nan(const JsonView& v) {
  if (v.raw().is_null()) return std::numeric_limits<double>::quiet_NaN();
  return v.number();
}

// ---------------------------------------------------------------------------
// PA models
// ---------------------------------------------------------------------------

struct ModelMeta {
  std::string source;
  std::string id;
  std::optional<double> residual_amplitude;
  std::optional<double> residual_phase;
  std::string amplitude_units;
};

inline std::string model_kind_name(ModelKind k) { return to_string(k); }

inline ModelKind parse_model_kind(const JsonView& v) {
  const std::string s = v.string();
  if (s == "polynomial" || s == "poly") return ModelKind::polynomial;
  if (s == "ghorbani") return ModelKind::ghorbani;
  if (s == "saleh") return ModelKind::saleh;
  if (s == "rapp") return ModelKind::rapp;
  v.fail("unknown model kind '" + s + "' (expected polynomial, ghorbani, saleh or rapp)");
}

inline Json params_to_json(const RappParams& p) {
  return {{"g_lin", p.g_lin}, {"v_sat", p.v_sat}, {"p", p.p}, {"a_pm", p.a_pm},
          {"b_pm", p.b_pm},   {"q1", p.q1},       {"q2", p.q2}};
}

inline RappParams rapp_from_json(const JsonView& v) {
  v.only_keys({"g_lin", "v_sat", "p", "a_pm", "b_pm", "q1", "q2"});
  return {v.at("g_lin").number(), v.at("v_sat").number(), v.at("p").number(), v.at("a_pm").number(),
          v.at("b_pm").number(),  v.at("q1").number(),    v.at("q2").number()};
}

inline Json model_to_json(const PaModel& model, const ModelMeta& meta = {}) {
  Json params = std::visit(
      [](const auto& p) -> Json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, RappParams>) {
          return params_to_json(p);
        } else if constexpr (std::is_same_v<T, SalehParams>) {
          return {{"alpha1", p.alpha1},           {"beta1", p.beta1},          {"alpha2", p.alpha2},
                  {"beta2", p.beta2},             {"n_amplitude", p.n_amplitude}, {"nu_amplitude", p.nu_amplitude},
                  {"n_phase", p.n_phase},         {"nu_phase", p.nu_phase}};
        } else if constexpr (std::is_same_v<T, GhorbaniParams>) {
          return {{"y", p.y}, {"z", p.z}};
        } else {
          return {{"a", p.a},
                  {"b", p.b},
                  {"valid_range_dbm", {p.range_lo, p.range_hi}},
                  {"range_policy", p.policy == RangePolicy::clamp ? "clamp" : "error"}};
        }
      },
      model.params);
  Json m = {{"source", meta.source}, {"id", meta.id}};
  if (meta.residual_amplitude || meta.residual_phase) {
    Json r = Json::object();
    if (meta.residual_amplitude) r["amplitude"] = *meta.residual_amplitude;
    if (meta.residual_phase) r["phase_deg"] = *meta.residual_phase;
    if (!meta.amplitude_units.empty()) r["amplitude_units"] = meta.amplitude_units;
    m["fit_residuals"] = r;
  }
  return {{"kind", model_kind_name(model.kind())}, {"fc_hz", model.fc_hz}, {"params", params}, {"meta", m}};
}

inline PaModel model_from_json(const Json& j, ModelMeta* meta_out = nullptr, const std::string& root = "") {
  const JsonView v(j, root);
  v.only_keys({"kind", "fc_hz", "params", "meta"});
  const ModelKind kind = parse_model_kind(v.at("kind"));
  PaModel model;
  model.fc_hz = v.at("fc_hz").number();
  const JsonView p = v.at("params").object();
  auto array4 = [](const JsonView& a) {
    const auto xs = a.numbers();
    if (xs.size() != 4) a.fail("expected 4 numbers");
    return std::array<double, 4>{xs[0], xs[1], xs[2], xs[3]};
  };
  switch (kind) {
    case ModelKind::rapp:
      model.params = rapp_from_json(p);
      break;
    case ModelKind::saleh: {
      p.only_keys({"alpha1", "beta1", "alpha2", "beta2", "n_amplitude", "nu_amplitude", "n_phase", "nu_phase"});
      SalehParams s;
      s.alpha1 = p.at("alpha1").number();
      s.beta1 = p.at("beta1").number();
      s.alpha2 = p.at("alpha2").number();
      s.beta2 = p.at("beta2").number();
      s.n_amplitude = static_cast<int>(p.integer_or("n_amplitude", 1));
      s.nu_amplitude = static_cast<int>(p.integer_or("nu_amplitude", 1));
      s.n_phase = static_cast<int>(p.integer_or("n_phase", 2));
      s.nu_phase = static_cast<int>(p.integer_or("nu_phase", 1));
      model.params = s;
      break;
    }
    case ModelKind::ghorbani:
      p.only_keys({"y", "z"});
      model.params = GhorbaniParams{array4(p.at("y")), array4(p.at("z"))};
      break;
    case ModelKind::polynomial: {
      p.only_keys({"a", "b", "valid_range_dbm", "range_policy"});
      PolyParams pp;
      pp.a = p.at("a").numbers();
      pp.b = p.at("b").numbers();
      if (const auto r = p.find("valid_range_dbm")) {
        const auto xs = r->numbers();
        if (xs.size() != 2) r->fail("expected [lo, hi]");
        pp.range_lo = xs[0];
        pp.range_hi = xs[1];
      }
      if (const auto pol = p.find("range_policy")) {
        const auto s = pol->string();
        if (s == "clamp")
          pp.policy = RangePolicy::clamp;
        else if (s != "error")
          pol->fail("expected 'error' or 'clamp'");
      }
      model.params = pp;
      break;
    }
  }
  try {
    model.validate();
  } catch (const ConfigError& e) {
    v.at("params").fail(e.what());
  }
  if (meta_out) {
    *meta_out = {};
    if (const auto m = v.find("meta")) {
      m->only_keys({"source", "id", "fit_residuals"});
      meta_out->source = m->string_or("source", "");
      meta_out->id = m->string_or("id", "");
      if (const auto r = m->find("fit_residuals")) {
        r->only_keys({"amplitude", "phase_deg", "amplitude_units"});
        if (const auto a = r->find("amplitude")) meta_out->residual_amplitude = a->number();
        if (const auto ph = r->find("phase_deg")) meta_out->residual_phase = ph->number();
        meta_out->amplitude_units = r->string_or("amplitude_units", "");
      }
    }
  }
  return model;
}

inline void save_model(const std::filesystem::path& path, const PaModel& model, const ModelMeta& meta = {}) {
  write_text_file(path, model_to_json(model, meta).dump(2) + "\n");
}

inline PaModel load_model(const std::filesystem::path& path, ModelMeta* meta = nullptr) {
  return model_from_json(read_json_file(path), meta);
}

// ---------------------------------------------------------------------------
// Fit reports
// ---------------------------------------------------------------------------

inline Json fit_report_to_json(const FitReport& r, const std::string& source, const std::string& id) {
  ModelMeta meta{source, id, r.residual_amplitude, r.residual_phase, r.amplitude_units};
  Json j = model_to_json(r.model, meta);
  j["meta"]["fit"] = {{"iterations", r.iterations},
                      {"converged", r.converged},
                      {"seed", r.seed},
                      {"starts", r.starts}};
  return j;
}

// ---------------------------------------------------------------------------
// Predistorters
// ---------------------------------------------------------------------------

inline Json predistorter_to_json(const Predistorter& pd, double fc_hz) {
  Json j = {{"kind", "predistorter"},
            {"mode", to_string(pd.mode())},
            {"fc_hz", fc_hz},
            {"rapp", params_to_json(pd.rapp())},
            {"chi", pd.chi()},
            {"gamma", pd.gamma()}};
  if (pd.mode() == PdMode::polynomial) {
    const auto& p = pd.polynomials();
    j["polynomial"] = {{"eta", p.eta},
                       {"nu", p.nu},
                       {"residual_amplitude", p.residual_amplitude},
                       {"residual_phase_deg", p.residual_phase},
                       {"grid_points", p.grid_points}};
  }
  return j;
}

inline Predistorter predistorter_from_json(const Json& j, const std::string& root = "") {
  const JsonView v(j, root);
  v.only_keys({"kind", "mode", "fc_hz", "rapp", "chi", "gamma", "polynomial"});
  if (v.at("kind").string() != "predistorter") v.at("kind").fail("expected 'predistorter'");
  const RappParams rp = rapp_from_json(v.at("rapp").object());
  const double chi = v.at("chi").number();
  const std::string mode = v.at("mode").string();
  try {
    if (mode == "ideal") return Predistorter::ideal(rp, chi);
    if (mode != "polynomial") v.at("mode").fail("expected 'ideal' or 'polynomial'");
    const JsonView p = v.at("polynomial");
    p.only_keys({"eta", "nu", "residual_amplitude", "residual_phase_deg", "grid_points"});
    PdPolynomials poly;
    poly.eta = p.at("eta").numbers();
    poly.nu = p.at("nu").numbers();
    poly.residual_amplitude = p.number_or("residual_amplitude", 0.0);
    poly.residual_phase = p.number_or("residual_phase_deg", 0.0);
    poly.grid_points = static_cast<int>(p.integer_or("grid_points", 0));
    return Predistorter::polynomial(rp, chi, std::move(poly));
  } catch (const ConfigError& e) {
    v.fail(e.what());
  }
}

inline void save_predistorter(const std::filesystem::path& path, const Predistorter& pd, double fc_hz) {
  write_text_file(path, predistorter_to_json(pd, fc_hz).dump(2) + "\n");
}

inline Predistorter load_predistorter(const std::filesystem::path& path) {
  return predistorter_from_json(read_json_file(path));
}

// ---------------------------------------------------------------------------
// CSV helpers
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    auto field = line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start);
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) field.remove_suffix(1);
    out.push_back(field);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::optional<double> parse_double(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline bool skip_line(std::string_view line) {
  for (char c : line) {
    if (c == '#') return true;
    if (c != ' ' && c != '\t' && c != '\r') return false;
  }
  return true;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Measurement CSV: freq_hz,pin_dbm,pout_dbm,phase_deg
// ---------------------------------------------------------------------------

inline constexpr std::string_view kMeasurementColumns[] = {"freq_hz", "pin_dbm", "pout_dbm", "phase_deg"};

/// One curve per distinct frequency (first-appearance order), points sorted by
/// input power. With `normalize`, phases become relative to `reference_pin_dbm`.
inline std::vector<MeasurementCurve> parse_measurement_csv(std::istream& in, const std::string& name = "<input>",
                                                           bool normalize = false, double reference_pin_dbm = -40.0) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<int> column_of(4, -1);
  std::size_t n_fields = 0;
  bool have_header = false;
  std::vector<MeasurementCurve> curves;
  std::map<double, std::size_t> index;

  while (std::getline(in, line)) {
    ++line_no;
    if (detail::skip_line(line)) continue;
    const auto fields = detail::split_csv(line);
    if (!have_header) {
      n_fields = fields.size();
      for (std::size_t f = 0; f < fields.size(); ++f) {
        const auto it = std::find(std::begin(kMeasurementColumns), std::end(kMeasurementColumns), fields[f]);
        if (it == std::end(kMeasurementColumns))
          throw ParseError(name + ":" + std::to_string(line_no) + ": unknown column '" + std::string(fields[f]) + "'",
                           line_no);
        column_of[static_cast<std::size_t>(it - std::begin(kMeasurementColumns))] = static_cast<int>(f);
      }
      for (std::size_t c = 0; c < 4; ++c) {
        if (column_of[c] < 0)
          throw ParseError(name + ":" + std::to_string(line_no) + ": missing column '" +
                               std::string(kMeasurementColumns[c]) + "'",
                           line_no);
      }
      have_header = true;
      continue;
    }
    if (fields.size() != n_fields)
      throw ParseError(name + ":" + std::to_string(line_no) + ": expected " + std::to_string(n_fields) +
                           " fields, found " + std::to_string(fields.size()),
                       line_no);
    double vals[4];
    for (std::size_t c = 0; c < 4; ++c) {
      const auto field = fields[static_cast<std::size_t>(column_of[c])];
      const auto v = detail::parse_double(field);
      if (!v || !std::isfinite(*v))
        throw ParseError(name + ":" + std::to_string(line_no) + ": bad value '" + std::string(field) + "' in column '" +
                             std::string(kMeasurementColumns[c]) + "'",
                         line_no);
      vals[c] = *v;
    }
    auto [it, inserted] = index.try_emplace(vals[0], curves.size());
    if (inserted) curves.push_back(MeasurementCurve{vals[0], {}});
    curves[it->second].points.push_back({vals[1], vals[2], vals[3]});
  }
  if (!have_header) throw ParseError(name + ": empty file (no header)", 0);

  for (auto& c : curves) {
    std::stable_sort(c.points.begin(), c.points.end(),
                     [](const auto& a, const auto& b) { return a.p_in_dbm < b.p_in_dbm; });
    c.validate();
    if (normalize) normalize_curve_phase(c, reference_pin_dbm);
  }
  return curves;
}

inline std::vector<MeasurementCurve> parse_measurement_csv(const std::filesystem::path& path, bool normalize = false,
                                                           double reference_pin_dbm = -40.0) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return parse_measurement_csv(in, path.string(), normalize, reference_pin_dbm);
}

inline std::string measurement_csv(std::span<const MeasurementCurve> curves) {
  std::string s = "freq_hz,pin_dbm,pout_dbm,phase_deg\n";
  for (const auto& c : curves)
    for (const auto& p : c.points)
      s += detail::format_double(c.fc_hz) + "," + detail::format_double(p.p_in_dbm) + "," +
           detail::format_double(p.p_out_dbm) + "," + detail::format_double(p.phase_deg) + "\n";
  return s;
}

// ---------------------------------------------------------------------------
// Sweep results
// ---------------------------------------------------------------------------

/// Stable CSV column order; the first column is named after the sweep axis.
inline constexpr std::string_view kSweepColumns[] = {
    "ok",        "evm_db",          "ber",          "ber_std_error",     "bit_errors",         "bits",
    "symbols",   "ber_below_resolution", "ber_converged", "ibo_db",     "snr_db",             "measured_snr_db",
    "mean_pa_input_dbm", "mean_pa_output_dbm", "clip_rate", "error"};

inline std::string sweep_csv(const SweepResult& r) {
  std::string s = r.meta.axis_name.empty() ? "axis" : r.meta.axis_name;
  for (auto c : kSweepColumns) (s += ",") += c;
  s += "\n";
  for (const auto& row : r.rows) {
    const auto& m = row.metrics;
    auto f = detail::format_double;
    std::string err = row.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    s += f(row.axis) + "," + (row.ok ? "1" : "0") + "," + f(m.evm_db) + "," + f(m.ber) + "," + f(m.ber_std_error) +
         "," + std::to_string(m.bit_errors) + "," + std::to_string(m.bits) + "," + std::to_string(m.symbols) + "," +
         (m.ber_below_resolution ? "1" : "0") + "," + (m.ber_converged ? "1" : "0") + "," + f(m.ibo_db) + "," +
         f(m.snr_db) + "," + f(m.measured_snr_db) + "," + f(m.mean_pa_input_dbm) + "," + f(m.mean_pa_output_dbm) +
         "," + f(m.clip_rate) + "," + err + "\n";
  }
  return s;
}

/// Reads rows written by sweep_csv (metadata other than the axis name is not in the CSV).
inline SweepResult parse_sweep_csv(std::istream& in, const std::string& name = "<input>") {
  SweepResult r;
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  constexpr std::size_t n_cols = std::size(kSweepColumns) + 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::skip_line(line)) continue;
    const auto fields = detail::split_csv(line);
    const auto where = name + ":" + std::to_string(line_no) + ": ";
    if (fields.size() != n_cols) throw ParseError(where + "expected " + std::to_string(n_cols) + " fields", line_no);
    if (!header) {
      r.meta.axis_name = std::string(fields[0]);
      for (std::size_t i = 0; i < std::size(kSweepColumns); ++i)
        if (fields[i + 1] != kSweepColumns[i])
          throw ParseError(where + "missing column '" + std::string(kSweepColumns[i]) + "'", line_no);
      header = true;
      continue;
    }
    auto num = [&](std::size_t i) {
      const auto v = detail::parse_double(fields[i]);
      if (!v) throw ParseError(where + "bad number '" + std::string(fields[i]) + "'", line_no);
      return *v;
    };
    auto count = [&](std::size_t i) { return static_cast<std::uint64_t>(num(i)); };
    SweepRow row;
    row.axis = num(0);
    row.ok = fields[1] == "1";
    auto& m = row.metrics;
    m.evm_db = num(2);
    m.ber = num(3);
    m.ber_std_error = num(4);
    m.bit_errors = count(5);
    m.bits = count(6);
    m.symbols = count(7);
    m.ber_below_resolution = fields[8] == "1";
    m.ber_converged = fields[9] == "1";
    m.ibo_db = num(10);
    m.snr_db = num(11);
    m.measured_snr_db = num(12);
    m.mean_pa_input_dbm = num(13);
    m.mean_pa_output_dbm = num(14);
    m.clip_rate = num(15);
    row.error = std::string(fields[16]);
    r.rows.push_back(std::move(row));
  }
  if (!header) throw ParseError(name + ": empty file (no header)", 0);
  return r;
}

inline Json sweep_metadata_to_json(const SweepMetadata& md) {
  return {{"kind", md.kind},
          {"axis", md.axis_name},
          {"seed", md.seed},
          {"model_id", md.model_id},
          {"pd_mode", md.pd_mode},
          {"pd_order_amplitude", md.pd_order_amplitude},
          {"pd_order_phase", md.pd_order_phase},
          {"pd_chi", md.pd_chi},
          {"noise_mode", md.noise_mode},
          {"total_symbols", md.total_symbols},
          {"total_bits", md.total_bits}};
}

/// `config` is the resolved run configuration that reproduces the result.
inline Json sweep_to_json(const SweepResult& r, const Json& config = nullptr) {
  Json rows = Json::array();
  for (const auto& row : r.rows) {
    const auto& m = row.metrics;
    Json j = {{"axis", row.axis},
              {"ok", row.ok},
              {"evm_db", json_number(m.evm_db)},
              {"ber", json_number(m.ber)},
              {"ber_std_error", json_number(m.ber_std_error)},
              {"bit_errors", m.bit_errors},
              {"bits", m.bits},
              {"symbols", m.symbols},
              {"ber_below_resolution", m.ber_below_resolution},
              {"ber_converged", m.ber_converged},
              {"ibo_db", json_number(m.ibo_db)},
              {"snr_db", json_number(m.snr_db)},
              {"measured_snr_db", json_number(m.measured_snr_db)},
              {"mean_pa_input_dbm", json_number(m.mean_pa_input_dbm)},
              {"mean_pa_output_dbm", json_number(m.mean_pa_output_dbm)},
              {"clip_rate", json_number(m.clip_rate)}};
    if (!row.ok) j["error"] = row.error;
    rows.push_back(std::move(j));
  }
  Json out = {{"meta", sweep_metadata_to_json(r.meta)}, {"rows", rows}};
  if (!config.is_null()) out["config"] = config;
  return out;
}

inline SweepResult sweep_from_json(const Json& j) {
  const JsonView v(j, "");
  v.only_keys({"meta", "rows", "config"});
  SweepResult r;
  const auto md = v.at("meta");
  r.meta.kind = md.at("kind").string();
  r.meta.axis_name = md.at("axis").string();
  r.meta.seed = md.at("seed").unsigned_integer();
  r.meta.model_id = md.string_or("model_id", "");
  r.meta.pd_mode = md.string_or("pd_mode", "none");
  r.meta.pd_order_amplitude = static_cast<int>(md.integer_or("pd_order_amplitude", 0));
  r.meta.pd_order_phase = static_cast<int>(md.integer_or("pd_order_phase", 0));
  r.meta.pd_chi = md.number_or("pd_chi", 0.0);
  r.meta.noise_mode = md.string_or("noise_mode", "none");
  r.meta.total_symbols = md.at("total_symbols").unsigned_integer();
  r.meta.total_bits = md.at("total_bits").unsigned_integer();
  for (const auto& e : v.at("rows").elements()) {
    SweepRow row;
    row.axis = e.at("axis").number();
    row.ok = e.at("ok").boolean();
    auto& m = row.metrics;
    m.evm_db = number_or_nan(e.at("evm_db"));
    m.ber = number_or_nan(e.at("ber"));
    m.ber_std_error = number_or_nan(e.at("ber_std_error"));
    m.bit_errors = e.at("bit_errors").unsigned_integer();
    m.bits = e.at("bits").unsigned_integer();
    m.symbols = e.at("symbols").unsigned_integer();
    m.ber_below_resolution = e.at("ber_below_resolution").boolean();
    m.ber_converged = e.at("ber_converged").boolean();
    m.ibo_db = number_or_nan(e.at("ibo_db"));
    m.snr_db = number_or_nan(e.at("snr_db"));
    m.measured_snr_db = number_or_nan(e.at("measured_snr_db"));
    m.mean_pa_input_dbm = number_or_nan(e.at("mean_pa_input_dbm"));
    m.mean_pa_output_dbm = number_or_nan(e.at("mean_pa_output_dbm"));
    m.clip_rate = number_or_nan(e.at("clip_rate"));
    row.error = e.string_or("error", "");
    r.rows.push_back(std::move(row));
  }
  return r;
}

enum class ResultFormat { csv, json };

inline void emit_results(const SweepResult& r, const std::filesystem::path& path, ResultFormat format,
                         const Json& config = nullptr) {
  if (format == ResultFormat::csv)
    write_text_file(path, sweep_csv(r));
  else
    write_text_file(path, sweep_to_json(r, config).dump(2) + "\n");
}

}  // namespace subthz

#endif  // SUBTHZ_IO_HPP
