#pragma once
//
// Run configuration: a versioned JSON document describing the grid, the
// cloud, the discretization and the requested outputs.
//

#include <fstream>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "msdd/oracle.hpp"
#include "msdd/rtr.hpp"

namespace msdd {

using json = nlohmann::ordered_json;

inline constexpr int kConfigSchemaVersion = 1;

struct ConfigError : Error { using Error::Error; };

struct GridSpec {
  Vec2 origin = Vec2::Zero();
  double box_width = 1.0, box_height = 1.0;
  int cols = 1, rows = 1;
};

struct NearFieldSpec {
  Vec2 lo = Vec2::Zero(), hi = Vec2::Zero();
  int nx = 0, ny = 0;
};

struct OracleSpec {
  bool enabled = false;
  int n_per_scatterer = 16;
  double unknown_budget = 2e4;
};

struct RunConfig {
  double k = 1.0;
  GridSpec grid;
  /// Either a random cloud or an explicit list.
  std::optional<CloudSpec> cloud;
  std::vector<Scatterer> scatterer_list;
  Discretization disc;
  /// Unset values follow the defaults for k.
  std::optional<double> eta, epsilon, mu;
  std::vector<double> incidence{0.0};
  int far_field_count = 360;
  std::optional<NearFieldSpec> near_field;
  std::vector<Vec2> probes;
  OracleSpec oracle;

  RtrParams params() const {
    RtrParams p = RtrParams::defaults(k);
    if (eta) p.eta = *eta;
    if (epsilon) p.epsilon = *epsilon;
    if (mu) p.mu = *mu;
    return p;
  }

  void validate() const {
    if (!(k > 0.0)) throw ConfigError("k must be positive");
    if (grid.cols < 1 || grid.rows < 1) throw ConfigError("grid needs cols, rows >= 1");
    if (!(grid.box_width > 0.0) || !(grid.box_height > 0.0)) throw ConfigError("box size must be positive");
    if (cloud && !scatterer_list.empty())
      throw ConfigError("give either a scatterer spec or an explicit list, not both");
    if (cloud && cloud->per_box_count < 0) throw ConfigError("per_box_count must be >= 0");
    try {
      disc.validate();
      params().validate();
    } catch (const ParameterError& e) {
      throw ConfigError(e.what());
    }
    if (incidence.empty()) throw ConfigError("at least one incidence angle is needed");
    for (double a : incidence)
      if (!std::isfinite(a)) throw ConfigError("incidence angles must be finite");
    if (far_field_count < 1) throw ConfigError("far_field_count must be positive");
    if (near_field) {
      if (near_field->nx < 1 || near_field->ny < 1) throw ConfigError("near-field resolution must be positive");
      if (!(near_field->hi.x() > near_field->lo.x()) || !(near_field->hi.y() > near_field->lo.y()))
        throw ConfigError("near-field window must have positive extent");
    }
    if (oracle.n_per_scatterer < 8 || oracle.n_per_scatterer % 2 != 0)
      throw ConfigError("oracle n_per_scatterer must be even and >= 8");
    if (!(oracle.unknown_budget > 0.0)) throw ConfigError("oracle unknown_budget must be positive");
  }

  /// The grid with its scatterers, generated or assigned to boxes.
  BoxGrid build_grid() const {
    BoxGrid g = make_grid(grid.origin, grid.box_width, grid.box_height, grid.cols, grid.rows);
    if (cloud) return generate_cloud(g, *cloud);
    for (std::size_t i = 0; i < scatterer_list.size(); ++i) {
      const Vec2 c = scatterer_list[i].center();
      int owner = -1;
      for (int b = 0; b < g.box_count() && owner < 0; ++b)
        if (g.box(b).contains(c)) owner = b;
      if (owner < 0) throw GeometryError("scatterer " + std::to_string(i) + " lies outside the grid");
      g.scatterers[owner].push_back(scatterer_list[i]);
    }
    g.validate();
    return g;
  }
};

namespace detail {

inline Vec2 vec2_of(const json& j, const std::string& what) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ConfigError(what + " must be [x, y]");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline json json_of(const Vec2& v) { return json::array({v.x(), v.y()}); }

inline void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) throw ConfigError("unknown key '" + it.key() + "' in " + where);
  }
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j[key].is_null()) return fallback;
  try {
    return j[key].get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("key '") + key + "' has the wrong type");
  }
}

inline Scatterer scatterer_of(const json& j) {
  const std::string kind = get_or<std::string>(j, "kind", "");
  if (kind == "circle") {
    check_keys(j, "circle", {"kind", "center", "radius", "box"});
    return Scatterer::circle(vec2_of(j.at("center"), "circle center"), get_or<double>(j, "radius", 0.0));
  }
  if (kind == "segment") {
    check_keys(j, "segment", {"kind", "a", "b", "box"});
    return Scatterer::segment(vec2_of(j.at("a"), "segment a"), vec2_of(j.at("b"), "segment b"));
  }
  throw ConfigError("scatterer kind must be 'circle' or 'segment'");
}

inline json json_of(const Scatterer& s) {
  if (s.is_circle())
    return {{"kind", "circle"}, {"center", json_of(s.center())}, {"radius", s.radius()}};
  return {{"kind", "segment"}, {"a", json_of(s.endpoint_a())}, {"b", json_of(s.endpoint_b())}};
}

}  // namespace detail

inline RunConfig parse_config(const json& j) {
  using namespace detail;
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  check_keys(j, "config", {"schema_version", "k", "grid", "scatterers", "scatterer_list", "discretization",
                           "parameters", "incidence", "outputs", "oracle"});
  if (get_or<int>(j, "schema_version", -1) != kConfigSchemaVersion)
    throw ConfigError("schema_version must be " + std::to_string(kConfigSchemaVersion));
  RunConfig c;
  try {
    if (!j.contains("k")) throw ConfigError("missing k");
    c.k = get_or<double>(j, "k", 0.0);

    const json& g = j.at("grid");
    check_keys(g, "grid", {"origin", "box_size", "cols", "rows"});
    if (g.contains("origin")) c.grid.origin = vec2_of(g["origin"], "grid origin");
    if (g.contains("box_size")) {
      if (g["box_size"].is_number()) {
        c.grid.box_width = c.grid.box_height = g["box_size"].get<double>();
      } else {
        const Vec2 b = vec2_of(g["box_size"], "grid box_size");
        c.grid.box_width = b.x();
        c.grid.box_height = b.y();
      }
    }
    c.grid.cols = get_or<int>(g, "cols", 1);
    c.grid.rows = get_or<int>(g, "rows", 1);

    if (j.contains("scatterers") && !j["scatterers"].is_null()) {
      const json& s = j["scatterers"];
      check_keys(s, "scatterers", {"kind", "size", "per_box_count", "clearance", "seed"});
      CloudSpec cs;
      const std::string kind = get_or<std::string>(s, "kind", "segment");
      if (kind == "circle") cs.kind = Scatterer::Kind::circle;
      else if (kind == "segment") cs.kind = Scatterer::Kind::segment;
      else throw ConfigError("scatterers.kind must be 'circle' or 'segment'");
      cs.size = get_or<double>(s, "size", cs.size);
      cs.per_box_count = get_or<int>(s, "per_box_count", 0);
      cs.clearance = get_or<double>(s, "clearance", -1.0);
      cs.seed = get_or<std::uint64_t>(s, "seed", 0);
      c.cloud = cs;
    }
    if (j.contains("scatterer_list"))
      for (const json& s : j["scatterer_list"]) c.scatterer_list.push_back(scatterer_of(s));

    if (j.contains("discretization")) {
      const json& d = j["discretization"];
      check_keys(d, "discretization", {"n_per_edge", "n_per_scatterer", "grading"});
      c.disc.n_per_edge = get_or<int>(d, "n_per_edge", c.disc.n_per_edge);
      c.disc.n_per_scatterer = get_or<int>(d, "n_per_scatterer", c.disc.n_per_scatterer);
      c.disc.grading = get_or<int>(d, "grading", c.disc.grading);
    }
    if (j.contains("parameters")) {
      const json& p = j["parameters"];
      check_keys(p, "parameters", {"eta", "epsilon", "mu"});
      if (p.contains("eta") && !p["eta"].is_null()) c.eta = p["eta"].get<double>();
      if (p.contains("epsilon") && !p["epsilon"].is_null()) c.epsilon = p["epsilon"].get<double>();
      if (p.contains("mu") && !p["mu"].is_null()) c.mu = p["mu"].get<double>();
    }
    if (j.contains("incidence")) c.incidence = j["incidence"].get<std::vector<double>>();
    if (j.contains("outputs")) {
      const json& o = j["outputs"];
      check_keys(o, "outputs", {"far_field_count", "near_field", "probes"});
      c.far_field_count = get_or<int>(o, "far_field_count", c.far_field_count);
      if (o.contains("near_field") && !o["near_field"].is_null()) {
        const json& n = o["near_field"];
        check_keys(n, "near_field", {"lo", "hi", "nx", "ny"});
        NearFieldSpec ns;
        ns.lo = vec2_of(n.at("lo"), "near_field lo");
        ns.hi = vec2_of(n.at("hi"), "near_field hi");
        ns.nx = get_or<int>(n, "nx", 0);
        ns.ny = get_or<int>(n, "ny", 0);
        c.near_field = ns;
      }
      if (o.contains("probes"))
        for (const json& p : o["probes"]) c.probes.push_back(vec2_of(p, "probe"));
    }
    if (j.contains("oracle")) {
      const json& o = j["oracle"];
      check_keys(o, "oracle", {"enabled", "n_per_scatterer", "unknown_budget"});
      c.oracle.enabled = get_or<bool>(o, "enabled", false);
      c.oracle.n_per_scatterer = get_or<int>(o, "n_per_scatterer", c.oracle.n_per_scatterer);
      c.oracle.unknown_budget = get_or<double>(o, "unknown_budget", c.oracle.unknown_budget);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  } catch (const ParameterError& e) {
    throw ConfigError(e.what());
  }
  c.validate();
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config " + path + " is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

/// Canonical form of a config with every default filled in.
inline json to_json(const RunConfig& c) {
  using detail::json_of;
  json j;
  j["schema_version"] = kConfigSchemaVersion;
  j["k"] = c.k;
  j["grid"] = {{"origin", json_of(c.grid.origin)},
               {"box_size", json::array({c.grid.box_width, c.grid.box_height})},
               {"cols", c.grid.cols},
               {"rows", c.grid.rows}};
  if (c.cloud) {
    const CloudSpec& s = *c.cloud;
    j["scatterers"] = {{"kind", s.kind == Scatterer::Kind::circle ? "circle" : "segment"},
                       {"size", s.size},
                       {"per_box_count", s.per_box_count},
                       {"clearance", clearance_of(s)},
                       {"seed", s.seed}};
  }
  if (!c.scatterer_list.empty()) {
    json l = json::array();
    for (const auto& s : c.scatterer_list) l.push_back(detail::json_of(s));
    j["scatterer_list"] = l;
  }
  j["discretization"] = {{"n_per_edge", c.disc.n_per_edge},
                         {"n_per_scatterer", c.disc.n_per_scatterer},
                         {"grading", c.disc.grading}};
  const RtrParams p = c.params();
  j["parameters"] = {{"eta", p.eta}, {"epsilon", p.epsilon}, {"mu", p.mu}};
  j["incidence"] = c.incidence;
  json o;
  o["far_field_count"] = c.far_field_count;
  if (c.near_field)
    o["near_field"] = {{"lo", json_of(c.near_field->lo)},
                       {"hi", json_of(c.near_field->hi)},
                       {"nx", c.near_field->nx},
                       {"ny", c.near_field->ny}};
  json pr = json::array();
  for (const auto& x : c.probes) pr.push_back(json_of(x));
  o["probes"] = pr;
  j["outputs"] = o;
  j["oracle"] = {{"enabled", c.oracle.enabled},
                 {"n_per_scatterer", c.oracle.n_per_scatterer},
                 {"unknown_budget", c.oracle.unknown_budget}};
  return j;
}

/// Cloud document: the grid and every scatterer with its owning box.
inline json cloud_json(const BoxGrid& g) {
  using detail::json_of;
  json j;
  j["schema_version"] = kConfigSchemaVersion;
  j["grid"] = {{"origin", json_of(g.origin)},
               {"box_size", json::array({g.box_width, g.box_height})},
               {"cols", g.cols},
               {"rows", g.rows}};
  json l = json::array();
  for (int b = 0; b < g.box_count(); ++b)
    for (const auto& s : g.scatterers[b]) {
      json e = json_of(s);
      e["box"] = b;
      l.push_back(e);
    }
  j["scatterer_list"] = l;
  return j;
}

}  // namespace msdd
