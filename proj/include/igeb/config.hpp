#pragma once

// Run configuration: a single JSON document with nested sections describing
// the beam, boundary feedback, discretization, initial datum, Newton solver,
// output selection, certificate setup, and (optionally) a star network.
// Parsing is strict: unknown keys and malformed values raise ParameterError
// with the offending field named. serialize() emits a canonical full-field
// document, so parse -> serialize -> parse is the identity.

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "igeb/beam.hpp"
#include "igeb/diagonal.hpp"
#include "igeb/errors.hpp"
#include "igeb/integrate.hpp"
#include "igeb/io.hpp"
#include "igeb/lyapunov.hpp"
#include "igeb/mesh.hpp"
#include "igeb/network.hpp"
#include "igeb/presets.hpp"
#include "igeb/weights.hpp"

namespace igeb {

using json = nlohmann::ordered_json;

struct BeamConfig {
  double length = 1.0;
  std::string source = "preset";  // preset | diag | matrix | section
  std::string preset = "hesse2012";
  Vec6 mass_diag = Vec6::Ones();
  Vec6 flexibility_diag = Vec6::Ones();
  Mat6 mass = Mat6::Identity();
  Mat6 flexibility = Mat6::Identity();
  IsotropicSection section{};
  Vec3 precurvature = Vec3::Zero();
};

struct FeedbackConfig {
  std::string mode = "free";  // free|transparent|near_transparent|diag|matrix
  double mu1 = 0.0;
  double mu2 = 0.0;
  Mat6 matrix = Mat6::Zero();
  double scale = 1.0;
};

struct WeightConfig {
  std::string family = "exp";  // exp | poly | constant
  std::string sign = "pos";    // pos | neg (exp/poly families)
  double a = 0.0;              // constant family: the value
  double b = 1.0;
  double eta = 5.0;
  int n = 4;                   // poly family degree
  std::string shift = "none";  // none | start | end | value
  double shift_value = 0.0;
};

struct CertificateConfig {
  double rho = 1.5;
  std::string variant = "sqrt";  // identity | mc | sqrt
  int grid_pts = 1000;
  WeightConfig weight{};
};

struct NetworkNodeConfig {
  std::string kind = "controlled";  // free | clamped | controlled
  FeedbackConfig feedback{};
};

struct NetworkConfig {
  double rho = 1.5;
  int grid_pts = 1000;
  int count = 3;
  NetworkNodeConfig root{.kind = "clamped", .feedback = {}};
  NetworkNodeConfig outer{.kind = "controlled", .feedback = {}};
  WeightConfig root_weight{.family = "exp", .sign = "neg", .a = -1.0,
                           .b = 0.0, .eta = 5.0, .n = 4, .shift = "end",
                           .shift_value = 0.0};
  WeightConfig outer_weight{.family = "exp", .sign = "pos", .a = 0.0,
                            .b = 1.0, .eta = 5.0, .n = 4, .shift = "start",
                            .shift_value = 0.0};
};

struct RunConfig {
  BeamConfig beam{};
  FeedbackConfig feedback{};
  int elements = 20;
  int time_steps = 1001;
  double final_time = 1.0;
  std::string initial_preset = "helix_zero_velocity";
  std::string initial_path;
  NewtonSettings newton{};
  std::string out_dir = "out";
  bool write_states = true;
  bool write_energy = true;
  bool write_frames = false;
  std::string reconstruct_method = "both";  // time | space | both
  CertificateConfig certificate{};
  NetworkConfig network{};
};

namespace detail {

inline void check_keys(const json& obj, const char* section,
                       std::initializer_list<const char*> allowed) {
  if (!obj.is_object())
    throw ParameterError(std::string("config section '") + section +
                         "' must be an object");
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* k : allowed)
      if (item.key() == k) {
        known = true;
        break;
      }
    if (!known)
      throw ParameterError(std::string("config: unknown key '") + section +
                           "." + item.key() + "'");
  }
}

inline double as_number(const json& v, const std::string& field) {
  if (!v.is_number())
    throw ParameterError("config: field '" + field + "' must be a number");
  return v.get<double>();
}

inline int as_int(const json& v, const std::string& field) {
  if (!v.is_number_integer())
    throw ParameterError("config: field '" + field + "' must be an integer");
  return v.get<int>();
}

inline bool as_bool(const json& v, const std::string& field) {
  if (!v.is_boolean())
    throw ParameterError("config: field '" + field + "' must be a boolean");
  return v.get<bool>();
}

inline std::string as_string(const json& v, const std::string& field) {
  if (!v.is_string())
    throw ParameterError("config: field '" + field + "' must be a string");
  return v.get<std::string>();
}

template <typename Dst>
inline void read_fixed_array(const json& v, const std::string& field,
                             Dst& out, long expected) {
  if (!v.is_array() || static_cast<long>(v.size()) != expected)
    throw ParameterError("config: field '" + field + "' must be an array of " +
                         std::to_string(expected) + " numbers");
  for (long i = 0; i < expected; ++i)
    out(i) = as_number(v[static_cast<size_t>(i)],
                       field + "[" + std::to_string(i) + "]");
}

inline void read_matrix6(const json& v, const std::string& field, Mat6& out) {
  if (!v.is_array() || v.size() != 36)
    throw ParameterError("config: field '" + field +
                         "' must be an array of 36 numbers (row-major)");
  for (int r = 0; r < 6; ++r)
    for (int c = 0; c < 6; ++c)
      out(r, c) = as_number(v[static_cast<size_t>(6 * r + c)],
                            field + "[" + std::to_string(6 * r + c) + "]");
}

inline json dump_vec(const auto& v, long n) {
  json arr = json::array();
  for (long i = 0; i < n; ++i) arr.push_back(v(i));
  return arr;
}

inline json dump_matrix6(const Mat6& m) {
  json arr = json::array();
  for (int r = 0; r < 6; ++r)
    for (int c = 0; c < 6; ++c) arr.push_back(m(r, c));
  return arr;
}

inline void parse_feedback(const json& j, const std::string& section,
                           FeedbackConfig& fb) {
  check_keys(j, section.c_str(), {"mode", "mu", "matrix", "scale"});
  if (j.contains("mode")) fb.mode = as_string(j["mode"], section + ".mode");
  if (fb.mode != "free" && fb.mode != "transparent" &&
      fb.mode != "near_transparent" && fb.mode != "diag" &&
      fb.mode != "matrix")
    throw ParameterError("config: " + section + ".mode must be one of "
                         "free|transparent|near_transparent|diag|matrix");
  if (j.contains("mu")) {
    Eigen::Vector2d mu;
    read_fixed_array(j["mu"], section + ".mu", mu, 2);
    fb.mu1 = mu(0);
    fb.mu2 = mu(1);
  } else if (fb.mode == "diag") {
    throw ParameterError("config: " + section +
                         ".mu is required for mode 'diag'");
  }
  if (j.contains("matrix"))
    read_matrix6(j["matrix"], section + ".matrix", fb.matrix);
  else if (fb.mode == "matrix")
    throw ParameterError("config: " + section +
                         ".matrix is required for mode 'matrix'");
  if (j.contains("scale"))
    fb.scale = as_number(j["scale"], section + ".scale");
}

inline json dump_feedback(const FeedbackConfig& fb) {
  json j = json::object();
  j["mode"] = fb.mode;
  if (fb.mode == "diag") j["mu"] = json::array({fb.mu1, fb.mu2});
  if (fb.mode == "matrix") j["matrix"] = dump_matrix6(fb.matrix);
  j["scale"] = fb.scale;
  return j;
}

inline void parse_weight(const json& j, const std::string& section,
                         WeightConfig& w) {
  check_keys(j, section.c_str(),
             {"family", "sign", "a", "b", "eta", "n", "shift", "shift_value"});
  if (j.contains("family"))
    w.family = as_string(j["family"], section + ".family");
  if (w.family != "exp" && w.family != "poly" && w.family != "constant")
    throw ParameterError("config: " + section +
                         ".family must be one of exp|poly|constant");
  if (j.contains("sign")) w.sign = as_string(j["sign"], section + ".sign");
  if (w.sign != "pos" && w.sign != "neg")
    throw ParameterError("config: " + section + ".sign must be pos|neg");
  if (j.contains("a")) w.a = as_number(j["a"], section + ".a");
  if (j.contains("b")) w.b = as_number(j["b"], section + ".b");
  if (j.contains("eta")) w.eta = as_number(j["eta"], section + ".eta");
  if (j.contains("n")) w.n = as_int(j["n"], section + ".n");
  if (j.contains("shift"))
    w.shift = as_string(j["shift"], section + ".shift");
  if (w.shift != "none" && w.shift != "start" && w.shift != "end" &&
      w.shift != "value")
    throw ParameterError("config: " + section +
                         ".shift must be one of none|start|end|value");
  if (j.contains("shift_value"))
    w.shift_value = as_number(j["shift_value"], section + ".shift_value");
}

inline json dump_weight(const WeightConfig& w) {
  json j = json::object();
  j["family"] = w.family;
  j["sign"] = w.sign;
  j["a"] = w.a;
  j["b"] = w.b;
  j["eta"] = w.eta;
  j["n"] = w.n;
  j["shift"] = w.shift;
  j["shift_value"] = w.shift_value;
  return j;
}

inline void parse_network_node(const json& j, const std::string& section,
                               NetworkNodeConfig& node) {
  check_keys(j, section.c_str(), {"kind", "feedback"});
  if (j.contains("kind")) node.kind = as_string(j["kind"], section + ".kind");
  if (node.kind != "free" && node.kind != "clamped" &&
      node.kind != "controlled")
    throw ParameterError("config: " + section +
                         ".kind must be one of free|clamped|controlled");
  if (j.contains("feedback"))
    parse_feedback(j["feedback"], section + ".feedback", node.feedback);
}

inline json dump_network_node(const NetworkNodeConfig& node) {
  json j = json::object();
  j["kind"] = node.kind;
  j["feedback"] = dump_feedback(node.feedback);
  return j;
}

}  // namespace detail

inline RunConfig parse_config(const json& doc) {
  using detail::as_bool;
  using detail::as_int;
  using detail::as_number;
  using detail::as_string;
  using detail::check_keys;

  RunConfig cfg;
  check_keys(doc, "<root>",
             {"beam", "feedback", "discretization", "initial", "newton",
              "output", "reconstruct", "certificate", "network"});

  if (doc.contains("beam")) {
    const json& b = doc["beam"];
    check_keys(b, "beam",
               {"length", "preset", "mass_diag", "flexibility_diag", "mass",
                "flexibility", "section", "precurvature"});
    if (b.contains("length"))
      cfg.beam.length = as_number(b["length"], "beam.length");
    const bool has_preset = b.contains("preset");
    const bool has_diag =
        b.contains("mass_diag") || b.contains("flexibility_diag");
    const bool has_full = b.contains("mass") || b.contains("flexibility");
    const bool has_section = b.contains("section");
    const int sources = (has_preset ? 1 : 0) + (has_diag ? 1 : 0) +
                        (has_full ? 1 : 0) + (has_section ? 1 : 0);
    if (sources > 1)
      throw ParameterError(
          "config: beam must give exactly one of preset, "
          "mass_diag/flexibility_diag, mass/flexibility, or section");
    if (has_preset) {
      cfg.beam.source = "preset";
      cfg.beam.preset = as_string(b["preset"], "beam.preset");
      if (cfg.beam.preset != "hesse2012" && cfg.beam.preset != "unit")
        throw ParameterError("config: beam.preset must be hesse2012 or unit");
    } else if (has_diag) {
      if (!b.contains("mass_diag") || !b.contains("flexibility_diag"))
        throw ParameterError(
            "config: beam.mass_diag and beam.flexibility_diag must be given "
            "together");
      cfg.beam.source = "diag";
      detail::read_fixed_array(b["mass_diag"], "beam.mass_diag",
                               cfg.beam.mass_diag, 6);
      detail::read_fixed_array(b["flexibility_diag"], "beam.flexibility_diag",
                               cfg.beam.flexibility_diag, 6);
    } else if (has_full) {
      if (!b.contains("mass") || !b.contains("flexibility"))
        throw ParameterError(
            "config: beam.mass and beam.flexibility must be given together");
      cfg.beam.source = "matrix";
      detail::read_matrix6(b["mass"], "beam.mass", cfg.beam.mass);
      detail::read_matrix6(b["flexibility"], "beam.flexibility",
                           cfg.beam.flexibility);
    } else if (has_section) {
      cfg.beam.source = "section";
      const json& s = b["section"];
      check_keys(s, "beam.section",
                 {"rho", "a", "E", "G", "I2", "I3", "k1", "k2", "k3"});
      auto need = [&](const char* k) -> double {
        if (!s.contains(k))
          throw ParameterError(std::string("config: beam.section.") + k +
                               " is required");
        return as_number(s[k], std::string("beam.section.") + k);
      };
      cfg.beam.section.rho = need("rho");
      cfg.beam.section.a = need("a");
      cfg.beam.section.E = need("E");
      cfg.beam.section.G = need("G");
      cfg.beam.section.I2 = need("I2");
      cfg.beam.section.I3 = need("I3");
      cfg.beam.section.k1 = need("k1");
      cfg.beam.section.k2 = need("k2");
      cfg.beam.section.k3 = need("k3");
    }
    if (b.contains("precurvature"))
      detail::read_fixed_array(b["precurvature"], "beam.precurvature",
                               cfg.beam.precurvature, 3);
  }

  if (doc.contains("feedback"))
    detail::parse_feedback(doc["feedback"], "feedback", cfg.feedback);

  if (doc.contains("discretization")) {
    const json& d = doc["discretization"];
    check_keys(d, "discretization", {"elements", "time_steps", "final_time"});
    if (d.contains("elements"))
      cfg.elements = as_int(d["elements"], "discretization.elements");
    if (d.contains("time_steps"))
      cfg.time_steps = as_int(d["time_steps"], "discretization.time_steps");
    if (d.contains("final_time"))
      cfg.final_time = as_number(d["final_time"], "discretization.final_time");
  }

  if (doc.contains("initial")) {
    const json& i = doc["initial"];
    check_keys(i, "initial", {"preset", "path"});
    if (i.contains("preset"))
      cfg.initial_preset = as_string(i["preset"], "initial.preset");
    if (cfg.initial_preset != "helix_zero_velocity" &&
        cfg.initial_preset != "helix_compatible_velocity" &&
        cfg.initial_preset != "zero" && cfg.initial_preset != "file")
      throw ParameterError(
          "config: initial.preset must be one of helix_zero_velocity|"
          "helix_compatible_velocity|zero|file");
    if (i.contains("path"))
      cfg.initial_path = as_string(i["path"], "initial.path");
    if (cfg.initial_preset == "file" && cfg.initial_path.empty())
      throw ParameterError(
          "config: initial.path is required for preset 'file'");
  }

  if (doc.contains("newton")) {
    const json& n = doc["newton"];
    check_keys(n, "newton", {"max_iter", "tol_rel", "tol_abs"});
    if (n.contains("max_iter"))
      cfg.newton.max_iter = as_int(n["max_iter"], "newton.max_iter");
    if (n.contains("tol_rel"))
      cfg.newton.tol_rel = as_number(n["tol_rel"], "newton.tol_rel");
    if (n.contains("tol_abs"))
      cfg.newton.tol_abs = as_number(n["tol_abs"], "newton.tol_abs");
  }

  if (doc.contains("output")) {
    const json& o = doc["output"];
    check_keys(o, "output", {"directory", "states", "energy", "frames"});
    if (o.contains("directory"))
      cfg.out_dir = as_string(o["directory"], "output.directory");
    if (o.contains("states"))
      cfg.write_states = as_bool(o["states"], "output.states");
    if (o.contains("energy"))
      cfg.write_energy = as_bool(o["energy"], "output.energy");
    if (o.contains("frames"))
      cfg.write_frames = as_bool(o["frames"], "output.frames");
  }

  if (doc.contains("reconstruct")) {
    const json& r = doc["reconstruct"];
    check_keys(r, "reconstruct", {"method"});
    if (r.contains("method"))
      cfg.reconstruct_method = as_string(r["method"], "reconstruct.method");
    if (cfg.reconstruct_method != "time" &&
        cfg.reconstruct_method != "space" && cfg.reconstruct_method != "both")
      throw ParameterError(
          "config: reconstruct.method must be one of time|space|both");
  }

  if (doc.contains("certificate")) {
    const json& c = doc["certificate"];
    check_keys(c, "certificate", {"rho", "variant", "grid_pts", "weight"});
    if (c.contains("rho"))
      cfg.certificate.rho = as_number(c["rho"], "certificate.rho");
    if (c.contains("variant"))
      cfg.certificate.variant =
          as_string(c["variant"], "certificate.variant");
    if (cfg.certificate.variant != "identity" &&
        cfg.certificate.variant != "mc" && cfg.certificate.variant != "sqrt")
      throw ParameterError(
          "config: certificate.variant must be one of identity|mc|sqrt");
    if (c.contains("grid_pts"))
      cfg.certificate.grid_pts = as_int(c["grid_pts"], "certificate.grid_pts");
    if (c.contains("weight"))
      detail::parse_weight(c["weight"], "certificate.weight",
                           cfg.certificate.weight);
  }

  if (doc.contains("network")) {
    const json& n = doc["network"];
    check_keys(n, "network",
               {"rho", "grid_pts", "count", "root", "outer", "root_weight",
                "outer_weight"});
    if (n.contains("rho"))
      cfg.network.rho = as_number(n["rho"], "network.rho");
    if (n.contains("grid_pts"))
      cfg.network.grid_pts = as_int(n["grid_pts"], "network.grid_pts");
    if (n.contains("count"))
      cfg.network.count = as_int(n["count"], "network.count");
    if (n.contains("root"))
      detail::parse_network_node(n["root"], "network.root", cfg.network.root);
    if (n.contains("outer"))
      detail::parse_network_node(n["outer"], "network.outer",
                                 cfg.network.outer);
    if (n.contains("root_weight"))
      detail::parse_weight(n["root_weight"], "network.root_weight",
                           cfg.network.root_weight);
    if (n.contains("outer_weight"))
      detail::parse_weight(n["outer_weight"], "network.outer_weight",
                           cfg.network.outer_weight);
  }

  return cfg;
}

inline RunConfig parse_config_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParameterError(std::string("config: invalid JSON: ") + e.what());
  }
  return parse_config(doc);
}

inline json serialize_config(const RunConfig& cfg) {
  json doc = json::object();

  json b = json::object();
  b["length"] = cfg.beam.length;
  if (cfg.beam.source == "preset") {
    b["preset"] = cfg.beam.preset;
  } else if (cfg.beam.source == "diag") {
    b["mass_diag"] = detail::dump_vec(cfg.beam.mass_diag, 6);
    b["flexibility_diag"] = detail::dump_vec(cfg.beam.flexibility_diag, 6);
  } else if (cfg.beam.source == "matrix") {
    b["mass"] = detail::dump_matrix6(cfg.beam.mass);
    b["flexibility"] = detail::dump_matrix6(cfg.beam.flexibility);
  } else {
    json s = json::object();
    s["rho"] = cfg.beam.section.rho;
    s["a"] = cfg.beam.section.a;
    s["E"] = cfg.beam.section.E;
    s["G"] = cfg.beam.section.G;
    s["I2"] = cfg.beam.section.I2;
    s["I3"] = cfg.beam.section.I3;
    s["k1"] = cfg.beam.section.k1;
    s["k2"] = cfg.beam.section.k2;
    s["k3"] = cfg.beam.section.k3;
    b["section"] = s;
  }
  b["precurvature"] = detail::dump_vec(cfg.beam.precurvature, 3);
  doc["beam"] = b;

  doc["feedback"] = detail::dump_feedback(cfg.feedback);

  json d = json::object();
  d["elements"] = cfg.elements;
  d["time_steps"] = cfg.time_steps;
  d["final_time"] = cfg.final_time;
  doc["discretization"] = d;

  json i = json::object();
  i["preset"] = cfg.initial_preset;
  if (cfg.initial_preset == "file") i["path"] = cfg.initial_path;
  doc["initial"] = i;

  json n = json::object();
  n["max_iter"] = cfg.newton.max_iter;
  n["tol_rel"] = cfg.newton.tol_rel;
  n["tol_abs"] = cfg.newton.tol_abs;
  doc["newton"] = n;

  json o = json::object();
  o["directory"] = cfg.out_dir;
  o["states"] = cfg.write_states;
  o["energy"] = cfg.write_energy;
  o["frames"] = cfg.write_frames;
  doc["output"] = o;

  json r = json::object();
  r["method"] = cfg.reconstruct_method;
  doc["reconstruct"] = r;

  json c = json::object();
  c["rho"] = cfg.certificate.rho;
  c["variant"] = cfg.certificate.variant;
  c["grid_pts"] = cfg.certificate.grid_pts;
  c["weight"] = detail::dump_weight(cfg.certificate.weight);
  doc["certificate"] = c;

  json net = json::object();
  net["rho"] = cfg.network.rho;
  net["grid_pts"] = cfg.network.grid_pts;
  net["count"] = cfg.network.count;
  net["root"] = detail::dump_network_node(cfg.network.root);
  net["outer"] = detail::dump_network_node(cfg.network.outer);
  net["root_weight"] = detail::dump_weight(cfg.network.root_weight);
  net["outer_weight"] = detail::dump_weight(cfg.network.outer_weight);
  doc["network"] = net;

  return doc;
}

inline std::string serialize_config_text(const RunConfig& cfg) {
  return serialize_config(cfg).dump(2) + "\n";
}

// Applies "a.b.c=value" to the raw document; the value is parsed as JSON if
// possible and taken as a string otherwise.
inline void apply_override(json& doc, const std::string& spec) {
  const size_t eq = spec.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ParameterError("override '" + spec + "' is not of the form " +
                         "KEY=VALUE");
  const std::string path = spec.substr(0, eq);
  const std::string raw = spec.substr(eq + 1);

  std::vector<std::string> keys;
  std::stringstream ss(path);
  std::string part;
  while (std::getline(ss, part, '.')) {
    if (part.empty())
      throw ParameterError("override '" + spec + "' has an empty key part");
    keys.push_back(part);
  }
  if (keys.empty())
    throw ParameterError("override '" + spec + "' has no key");

  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;
  }

  json* cursor = &doc;
  for (size_t k = 0; k + 1 < keys.size(); ++k) {
    if (!cursor->contains(keys[k]) || !(*cursor)[keys[k]].is_object())
      (*cursor)[keys[k]] = json::object();
    cursor = &(*cursor)[keys[k]];
  }
  (*cursor)[keys.back()] = value;
}

// ---- builders: config -> module inputs -----------------------------------

inline BeamParameters make_params(const RunConfig& cfg) {
  BeamParameters p;
  if (cfg.beam.source == "preset") {
    p = cfg.beam.preset == "hesse2012" ? hesse2012()
                                       : unit_beam(cfg.beam.length);
    p.length = cfg.beam.length;
  } else if (cfg.beam.source == "diag") {
    p.length = cfg.beam.length;
    p.mass_matrix = cfg.beam.mass_diag.asDiagonal();
    p.flexibility_matrix = cfg.beam.flexibility_diag.asDiagonal();
  } else if (cfg.beam.source == "matrix") {
    p.length = cfg.beam.length;
    p.mass_matrix = cfg.beam.mass;
    p.flexibility_matrix = cfg.beam.flexibility;
  } else {
    p.length = cfg.beam.length;
    const auto [m, c] = isotropic_mass_flex(cfg.beam.section);
    p.mass_matrix = m;
    p.flexibility_matrix = c;
  }
  p.precurvature_vector = cfg.beam.precurvature;
  p.validate();
  return p;
}

inline Mat6 make_feedback(const FeedbackConfig& fb, const BeamParameters& p,
                          double x = 0.0) {
  Mat6 k = Mat6::Zero();
  if (fb.mode == "free") {
    k.setZero();
  } else if (fb.mode == "transparent") {
    k = transparent_K(p, x);
  } else if (fb.mode == "near_transparent") {
    const auto [mu1, mu2] = near_transparent_mu(p, x);
    k.topLeftCorner<3, 3>() = mu1 * Mat3::Identity();
    k.bottomRightCorner<3, 3>() = mu2 * Mat3::Identity();
  } else if (fb.mode == "diag") {
    k.topLeftCorner<3, 3>() = fb.mu1 * Mat3::Identity();
    k.bottomRightCorner<3, 3>() = fb.mu2 * Mat3::Identity();
  } else {
    k = fb.matrix;
  }
  return fb.scale * k;
}

inline Mesh make_mesh(const RunConfig& cfg) {
  Mesh mesh{cfg.beam.length, cfg.elements};
  mesh.validate();
  return mesh;
}

inline TimeGrid make_grid(const RunConfig& cfg) {
  TimeGrid grid{cfg.final_time, cfg.time_steps};
  grid.validate();
  return grid;
}

// Smooth ramp with zero slope at both ends, used by the compatible-velocity
// preset to connect the clamped end to the target boundary velocity.
inline double hermite_ramp(double xi) { return xi * xi * (3.0 - 2.0 * xi); }

inline VecX make_initial(const RunConfig& cfg, const BeamParameters& p,
                         const Mesh& mesh, const Mat6& K_feedback) {
  const int nodes = mesh.node_count();
  VecX full = VecX::Zero(12 * nodes);
  if (cfg.initial_preset == "zero") {
    // all zero
  } else if (cfg.initial_preset == "file") {
    // Accept a single-state table or a full run history; start from the
    // first stored step either way.
    const CsvTable table = read_csv(cfg.initial_path);
    const long rows = static_cast<long>(table.rows.size());
    if (rows % nodes != 0)
      throw ParameterError(
          "initial state file: row count is not a whole number of states");
    return read_states_csv(cfg.initial_path, mesh,
                           static_cast<int>(rows / nodes))[0];
  } else {
    for (int a = 0; a < nodes; ++a) {
      const double x = mesh.node_x(a);
      full.segment<6>(12 * a + 6) = helix_internal_forces(p, x);
    }
    if (cfg.initial_preset == "helix_compatible_velocity") {
      const Eigen::FullPivLU<Mat6> lu(K_feedback);
      if (!lu.isInvertible())
        throw ParameterError(
            "initial preset helix_compatible_velocity requires an invertible "
            "feedback matrix");
      const Vec6 v_end =
          -lu.solve(helix_internal_forces(p, p.length).eval());
      for (int a = 0; a < nodes; ++a) {
        const double xi = mesh.node_x(a) / p.length;
        full.segment<6>(12 * a) = hermite_ramp(xi) * v_end;
      }
    }
  }
  // Drop the clamped velocity at the first node.
  VecX reduced = VecX::Zero(mesh.reduced_dof_count());
  reduced.head(6) = full.segment<6>(6);
  reduced.tail(12 * (nodes - 1)) = full.tail(12 * (nodes - 1));
  return reduced;
}

inline ShiftedWeight make_weight(const WeightConfig& wc, double ell) {
  WeightFunction q;
  if (wc.family == "constant") {
    q = constant_weight(wc.a, ell);
  } else if (wc.family == "exp") {
    q = exp_weight(wc.a, wc.b, wc.eta, ell, wc.sign == "pos" ? +1 : -1);
  } else {
    q = poly_weight(wc.n, wc.eta, ell, wc.sign == "pos" ? +1 : -1);
  }
  if (wc.shift == "none") return shift_by(q, 0.0);
  if (wc.shift == "start") return shift_at_start(q);
  if (wc.shift == "end") return shift_at_end(q);
  return shift_by(q, wc.shift_value);
}

inline WVariant make_variant(const std::string& name) {
  if (name == "identity") return WVariant::identity;
  if (name == "mc") return WVariant::mass_flex;
  if (name == "sqrt") return WVariant::sqrt_pair;
  throw ParameterError("config: unknown weight-matrix variant '" + name +
                       "'");
}

inline NodeKind make_node_kind(const std::string& name) {
  if (name == "free") return NodeKind::simple_free;
  if (name == "clamped") return NodeKind::simple_clamped;
  if (name == "controlled") return NodeKind::simple_controlled;
  throw ParameterError("config: unknown node kind '" + name + "'");
}

inline StarNetwork make_star(const RunConfig& cfg) {
  if (cfg.network.count < 1)
    throw ParameterError("config: network.count must be >= 1");
  const BeamParameters p = make_params(cfg);
  StarNetwork net;
  net.rho = cfg.network.rho;
  net.grid_pts = cfg.network.grid_pts;
  const ShiftedWeight root_w = make_weight(cfg.network.root_weight, p.length);
  const ShiftedWeight outer_w =
      make_weight(cfg.network.outer_weight, p.length);
  for (int i = 0; i < cfg.network.count; ++i)
    net.beams.push_back({p, i == 0 ? root_w : outer_w});

  net.root_kind = make_node_kind(cfg.network.root.kind);
  net.root_K = net.root_kind == NodeKind::simple_controlled
                   ? make_feedback(cfg.network.root.feedback, p, 0.0)
                   : Mat6::Zero();
  const int n_outer = cfg.network.count == 1 ? 1 : cfg.network.count - 1;
  const NodeKind outer_kind = make_node_kind(cfg.network.outer.kind);
  const Mat6 outer_K =
      outer_kind == NodeKind::simple_controlled
          ? make_feedback(cfg.network.outer.feedback, p, p.length)
          : Mat6::Zero();
  for (int j = 0; j < n_outer; ++j) {
    net.outer_kinds.push_back(outer_kind);
    net.outer_K.push_back(outer_K);
  }
  return net;
}

inline LyapunovCertificate make_certificate(const RunConfig& cfg) {
  const BeamParameters p = make_params(cfg);
  const Mat6 k = make_feedback(cfg.feedback, p, p.length);
  const ShiftedWeight w = make_weight(cfg.certificate.weight, p.length);
  return certificate(p, k, cfg.certificate.rho, w,
                     make_variant(cfg.certificate.variant),
                     cfg.certificate.grid_pts);
}

}  // namespace igeb
