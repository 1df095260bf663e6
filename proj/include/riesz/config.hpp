#pragma once

// Run configuration: defaults, file and dot-path overrides, validation, typed view.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "riesz/io.hpp"

namespace riesz::cli {

using json = io::json;

class ConfigError : public Error {
 public:
  ConfigError(std::string path, const std::string& msg)
      : Error(ErrorKind::ConfigError, path + ": " + msg), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

inline json default_config() {
  return json::parse(R"({
  "model": {
    "kind": "HarmonicOscillator",
    "d": 2,
    "r": "2",
    "shift": null,
    "test_mode": false,
    "potential": {"type": "gaussian", "amplitude": [0.0, 3.0], "scale": 1.0, "center": [0.0, 0.0]}
  },
  "truncation": {"levels": 20, "landau_mult_cap": 12, "deg_margin": 16},
  "enclosure": {
    "epsilon": 0.1,
    "threshold": 0.5,
    "n_cap": 100000,
    "grid_cap_exp": 40,
    "n0_source": "auto",
    "omega_c": 1.0,
    "disks": 8,
    "sigma_N": [1, 2, 5, 10, 20, 50, 100],
    "j_max": 1000000
  },
  "contour": {"circle_nodes": 64, "circle_max_nodes": 4096, "side_order": 16, "side_panels": 2, "crosscheck": true},
  "verification": {
    "nstar": 0,
    "bari_samples": 100,
    "probes": 8,
    "probe_levels": 3,
    "seed": 20261019,
    "trust_fraction": 0.5
  },
  "norms": {
    "families": ["zonal_harmonic"],
    "d": 2,
    "p": [2, 4, "inf"],
    "k_lo": 10,
    "k_hi": 200,
    "points": 16,
    "tol": 0.02
  },
  "output": {"directory": "", "formats": ["json", "csv"]}
})");
}

namespace detail {

inline std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : path) {
    if (c == '.') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  return parts;
}

/// Keys present in the user document but not in the defaults.
inline void check_known(const json& user, const json& ref, const std::string& prefix) {
  if (!user.is_object()) throw ConfigError(prefix.empty() ? "<root>" : prefix, "expected an object");
  for (auto it = user.begin(); it != user.end(); ++it) {
    const std::string path = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (!ref.contains(it.key())) throw ConfigError(path, "unknown key");
    const auto& r = ref.at(it.key());
    if (r.is_object()) check_known(it.value(), r, path);
  }
}

inline void merge(json& base, const json& over) {
  for (auto it = over.begin(); it != over.end(); ++it) {
    if (it.value().is_object() && base.contains(it.key()) && base[it.key()].is_object())
      merge(base[it.key()], it.value());
    else
      base[it.key()] = it.value();
  }
}

}  // namespace detail

/// Applies "a.b.c=value"; the value is read as JSON when it parses, otherwise as a string.
inline void apply_override(json& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError(assignment, "override must look like path=value");
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  const json ref = default_config();
  const json* r = &ref;
  json* node = &cfg;
  const auto parts = detail::split_path(path);
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (!r->is_object() || !r->contains(parts[i])) throw ConfigError(path, "unknown key");
    r = &r->at(parts[i]);
    if (i + 1 == parts.size()) {
      (*node)[parts[i]] = value;
    } else {
      node = &(*node)[parts[i]];
      if (!node->is_object()) *node = json::object();
    }
  }
}

/// Defaults, then the file (may be empty), then the overrides in order.
inline json resolve_config(const json& file_doc, const std::vector<std::string>& overrides) {
  const json ref = default_config();
  detail::check_known(file_doc, ref, "");
  json cfg = ref;
  detail::merge(cfg, file_doc);
  for (const auto& o : overrides) apply_override(cfg, o);
  return cfg;
}

inline json load_config_file(const std::string& path) {
  std::string text;
  try {
    text = io::read_file(path);
  } catch (const std::exception& e) {
    throw ConfigError("<file>", e.what());
  }
  json doc = json::parse(text, nullptr, false, true);
  if (doc.is_discarded()) throw ConfigError("<file>", "not valid JSON: " + path);
  return doc;
}

// ---------------------------------------------------------------------------
// typed view

struct PotentialConfig {
  std::string type;
  std::complex<double> amplitude;
  double scale = 1.0;
  double cx = 0.0, cy = 0.0;
};

struct RunConfig {
  // model
  catalog::ModelId model;
  bool test_mode = false;
  std::string r_text;
  catalog::LebesgueIndex<Rational> r = catalog::LebesgueIndex<Rational>::infinity();
  std::optional<double> shift;
  PotentialConfig potential;
  // truncation
  lab::Truncation truncation;
  // enclosure
  core::EnclosureOptions enclosure;
  lab::N0Source n0_source = lab::N0Source::Auto;
  double omega_c = 1.0;
  int disks = 8;
  std::vector<long long> sigma_N;
  // contour
  lab::ContourOptions contour;
  bool crosscheck = true;
  // verification
  long long nstar = 0;  // 0: N0 + 1
  int bari_samples = 100;
  int probes = 8;
  int probe_levels = 3;
  std::uint64_t seed = 0;
  double trust_fraction = 0.5;
  // norms
  std::vector<std::string> families;
  int norms_d = 2;
  std::vector<double> p_values;
  int k_lo = 10, k_hi = 200, points = 16;
  double tol = 0.02;
  // output
  std::string directory;
  bool want_json = true, want_csv = true;

  double resolved_shift() const { return shift ? *shift : catalog::default_shift(model); }
  lab::Potential make_potential() const;
};

inline lab::Potential RunConfig::make_potential() const {
  const auto& p = potential;
  if (p.type == "zero") return lab::Potential::zero();
  if (p.type == "constant") return lab::Potential::constant(p.amplitude);
  if (p.type == "gaussian") return lab::Potential::gaussian(p.amplitude, p.scale, p.cx, p.cy);
  if (p.type == "gaussian_cap") return lab::Potential::gaussian_cap(p.amplitude, p.scale);
  return lab::Potential::delta_equator(p.amplitude);
}

namespace detail {

class Reader {
 public:
  explicit Reader(const json& cfg) : cfg_(cfg) {}

  const json& at(const std::string& path) const {
    const json* n = &cfg_;
    for (const auto& p : split_path(path)) {
      if (!n->is_object() || !n->contains(p)) throw ConfigError(path, "missing");
      n = &n->at(p);
    }
    return *n;
  }

  long long integer(const std::string& path, long long lo, long long hi) const {
    const json& v = at(path);
    if (!v.is_number_integer()) throw ConfigError(path, "expected an integer");
    const long long x = v.get<long long>();
    if (x < lo || x > hi)
      throw ConfigError(path, "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "], got " + std::to_string(x));
    return x;
  }

  double number(const std::string& path) const {
    const json& v = at(path);
    if (!v.is_number()) throw ConfigError(path, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) throw ConfigError(path, "must be finite");
    return x;
  }

  /// lo < x < hi (open) or lo <= x <= hi.
  double number_in(const std::string& path, double lo, double hi, bool open_lo, bool open_hi) const {
    const double x = number(path);
    if ((open_lo ? x <= lo : x < lo) || (open_hi ? x >= hi : x > hi))
      throw ConfigError(path, std::string("must lie in ") + (open_lo ? "(" : "[") + io::fmt(lo) + ", " + io::fmt(hi) +
                                  (open_hi ? ")" : "]") + ", got " + io::fmt(x));
    return x;
  }

  bool boolean(const std::string& path) const {
    const json& v = at(path);
    if (!v.is_boolean()) throw ConfigError(path, "expected true or false");
    return v.get<bool>();
  }

  std::string string(const std::string& path, const std::vector<std::string>& allowed = {}) const {
    const json& v = at(path);
    if (!v.is_string()) throw ConfigError(path, "expected a string");
    const std::string s = v.get<std::string>();
    if (!allowed.empty() && std::find(allowed.begin(), allowed.end(), s) == allowed.end()) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
      throw ConfigError(path, "'" + s + "' is not one of " + list);
    }
    return s;
  }

  const json& array(const std::string& path, std::size_t min_size) const {
    const json& v = at(path);
    if (!v.is_array()) throw ConfigError(path, "expected an array");
    if (v.size() < min_size) throw ConfigError(path, "needs at least " + std::to_string(min_size) + " entries");
    return v;
  }

 private:
  const json& cfg_;
};

inline std::complex<double> amplitude(const json& v, const std::string& path) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
    return {v[0].get<double>(), v[1].get<double>()};
  throw ConfigError(path, "expected a number or [re, im]");
}

}  // namespace detail

/// Validates every field in document order and returns the typed view.
/// The first failing path is named in the thrown ConfigError.
inline RunConfig parse_run_config(const json& cfg) {
  detail::Reader rd(cfg);
  RunConfig c;

  // model
  const std::string kind =
      rd.string("model.kind", {"HarmonicOscillator", "Landau", "SphereLB", "SphereDeltaCircle"});
  const long long d = rd.integer("model.d", 1, 64);
  c.test_mode = rd.boolean("model.test_mode");
  try {
    c.model = catalog::ModelId::make(catalog::model_kind_from_string(kind), static_cast<int>(d), c.test_mode);
  } catch (const Error& e) {
    throw ConfigError("model.d", e.what());
  }
  {
    const json& r = rd.at("model.r");
    std::string text;
    if (r.is_string())
      text = r.get<std::string>();
    else if (r.is_number_integer())
      text = std::to_string(r.get<long long>());
    else if (r.is_number())
      text = io::fmt(r.get<double>());
    else
      throw ConfigError("model.r", "expected a number, a fraction string such as \"5/2\", or \"inf\"");
    c.r_text = text;
    if (text == "inf" || text == "infinity") {
      c.r = catalog::LebesgueIndex<Rational>::infinity();
    } else {
      Rational q;
      try {
        q = Rational::parse(text);
      } catch (const std::exception& e) {
        throw ConfigError("model.r", e.what());
      }
      if (!(q > Rational(0))) throw ConfigError("model.r", "must be positive");
      c.r = catalog::LebesgueIndex<Rational>::from_r(q);
      if (c.r.inverse() > Rational(1)) throw ConfigError("model.r", "must be >= 1");
    }
  }
  if (!rd.at("model.shift").is_null()) c.shift = rd.number("model.shift");
  {
    const bool sphere = c.model.is_sphere();
    std::vector<std::string> allowed;
    if (c.model.kind == catalog::ModelKind::SphereDeltaCircle)
      allowed = {"zero", "delta_equator"};
    else if (sphere)
      allowed = {"zero", "constant", "gaussian_cap"};
    else
      allowed = {"zero", "constant", "gaussian"};
    c.potential.type = rd.string("model.potential.type", allowed);
    c.potential.amplitude = detail::amplitude(rd.at("model.potential.amplitude"), "model.potential.amplitude");
    c.potential.scale = rd.number_in("model.potential.scale", 0.0, 1e6, true, false);
    const json& ctr = rd.array("model.potential.center", 2);
    if (ctr.size() != 2 || !ctr[0].is_number() || !ctr[1].is_number())
      throw ConfigError("model.potential.center", "expected [x, y]");
    c.potential.cx = ctr[0].get<double>();
    c.potential.cy = ctr[1].get<double>();
    if (c.model.kind == catalog::ModelKind::Landau && (c.potential.cx != 0.0 || c.potential.cy != 0.0))
      throw ConfigError("model.potential.center", "Landau runs need a radial potential centred at the origin");
    if (c.model.kind == catalog::ModelKind::HarmonicOscillator && c.model.d == 1 && c.potential.cy != 0.0)
      throw ConfigError("model.potential.center", "the one-dimensional oscillator has no y coordinate");
  }

  // truncation
  c.truncation.levels = static_cast<int>(rd.integer("truncation.levels", 2, 400));
  c.truncation.landau_mult_cap = static_cast<int>(rd.integer("truncation.landau_mult_cap", 1, 200));
  c.truncation.deg_margin = static_cast<int>(rd.integer("truncation.deg_margin", 0, 512));

  // enclosure
  c.enclosure.epsilon = rd.number_in("enclosure.epsilon", 0.0, 1e6, true, false);
  c.enclosure.threshold = rd.number_in("enclosure.threshold", 0.0, 1.0, true, true);
  c.enclosure.n_cap = rd.integer("enclosure.n_cap", 1, 10'000'000);
  c.enclosure.grid_cap_exp = static_cast<int>(rd.integer("enclosure.grid_cap_exp", 0, 60));
  c.n0_source = lab::n0_source_from_string(rd.string("enclosure.n0_source", {"sigma", "matrix", "auto"}));
  c.omega_c = rd.number_in("enclosure.omega_c", 0.0, 1e12, false, false);
  c.disks = static_cast<int>(rd.integer("enclosure.disks", 0, 100000));
  for (const auto& v : rd.array("enclosure.sigma_N", 0)) {
    if (!v.is_number_integer() || v.get<long long>() < 1) throw ConfigError("enclosure.sigma_N", "entries must be integers >= 1");
    c.sigma_N.push_back(v.get<long long>());
  }
  c.enclosure.sums.j_max = rd.integer("enclosure.j_max", 100, 100'000'000);

  // contour
  c.contour.circle_nodes = static_cast<int>(rd.integer("contour.circle_nodes", 8, 4096));
  c.contour.circle_max_nodes = static_cast<int>(rd.integer("contour.circle_max_nodes", c.contour.circle_nodes, 1 << 16));
  c.contour.side_order = static_cast<int>(rd.integer("contour.side_order", 2, 64));
  c.contour.side_panels = static_cast<int>(rd.integer("contour.side_panels", 1, 256));
  c.crosscheck = rd.boolean("contour.crosscheck");

  // verification
  c.nstar = rd.integer("verification.nstar", 0, 100000);
  c.bari_samples = static_cast<int>(rd.integer("verification.bari_samples", 0, 100000));
  c.probes = static_cast<int>(rd.integer("verification.probes", 0, 10000));
  c.probe_levels = static_cast<int>(rd.integer("verification.probe_levels", 1, c.truncation.levels));
  {
    const json& s = rd.at("verification.seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0))
      throw ConfigError("verification.seed", "expected a nonnegative integer");
    c.seed = s.get<std::uint64_t>();
  }
  c.trust_fraction = rd.number_in("verification.trust_fraction", 0.0, 1.0, true, false);

  // norms
  for (const auto& v : rd.array("norms.families", 1)) {
    if (!v.is_string()) throw ConfigError("norms.families", "entries must be strings");
    try {
      norms::family_from_string(v.get<std::string>());
    } catch (const Error& e) {
      throw ConfigError("norms.families", e.what());
    }
    c.families.push_back(v.get<std::string>());
  }
  c.norms_d = static_cast<int>(rd.integer("norms.d", 1, 16));
  for (const auto& f : c.families) {
    try {
      norms::WitnessFamily{norms::family_from_string(f), c.norms_d}.validate();
    } catch (const Error& e) {
      throw ConfigError("norms.d", e.what());
    }
  }
  for (const auto& v : rd.array("norms.p", 1)) {
    double p = 0.0;
    if (v.is_string() && (v.get<std::string>() == "inf" || v.get<std::string>() == "infinity"))
      p = norms::kInf;
    else if (v.is_number())
      p = v.get<double>();
    else
      throw ConfigError("norms.p", "entries must be numbers >= 2 or \"inf\"");
    if (!(p >= 2.0)) throw ConfigError("norms.p", "entries must be >= 2");
    c.p_values.push_back(p);
  }
  c.k_lo = static_cast<int>(rd.integer("norms.k_lo", 1, 100000));
  c.k_hi = static_cast<int>(rd.integer("norms.k_hi", c.k_lo + 1, 100000));
  c.points = static_cast<int>(rd.integer("norms.points", 2, 10000));
  c.tol = rd.number_in("norms.tol", 0.0, 10.0, true, false);

  // output
  c.directory = rd.string("output.directory");
  c.want_json = c.want_csv = false;
  for (const auto& v : rd.array("output.formats", 1)) {
    if (!v.is_string() || (v != "json" && v != "csv")) throw ConfigError("output.formats", "entries must be \"json\" or \"csv\"");
    (v == "json" ? c.want_json : c.want_csv) = true;
  }
  return c;
}

}  // namespace riesz::cli
