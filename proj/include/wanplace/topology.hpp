#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace wanplace {

/// Signal speed in fiber, meters per second.
inline constexpr double kDefaultPropagationSpeedMps = 2.0e8;

/// Mean Earth radius used for great-circle distances, meters.
inline constexpr double kEarthRadiusMeters = 6'371'000.0;

/// Raised for malformed or inconsistent input files. The message carries the
/// file name and the JSON path of the offending element.
class ValidationError : public std::runtime_error {
public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// A candidate data-center site. Coordinates may be omitted only when every
/// link in the topology carries an explicit latency.
struct Site {
  std::string id;
  std::optional<double> lat;  // degrees, [-90, 90]
  std::optional<double> lon;  // degrees, [-180, 180]
  bool gateway = false;

  bool operator==(const Site&) const = default;
};

/// An undirected WAN link. Capacity applies to each direction independently;
/// latency is symmetric.
struct Link {
  std::string a;
  std::string b;
  double capacity_mbps = 0.0;
  double latency_ms = 0.0;

  bool operator==(const Link&) const = default;
};

/// Great-circle distance between two coordinate pairs, meters (haversine).
inline double great_circle_distance_m(double lat1, double lon1, double lat2,
                                      double lon2) {
  constexpr double kDegToRad = 3.14159265358979323846 / 180.0;
  const double phi1 = lat1 * kDegToRad;
  const double phi2 = lat2 * kDegToRad;
  const double dphi = (lat2 - lat1) * kDegToRad;
  const double dlambda = (lon2 - lon1) * kDegToRad;
  const double s1 = std::sin(dphi / 2.0);
  const double s2 = std::sin(dlambda / 2.0);
  const double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
  return 2.0 * kEarthRadiusMeters * std::asin(std::min(1.0, std::sqrt(h)));
}

struct Site;

/// Propagation delay between two sites in milliseconds: great-circle distance
/// divided by the signal speed.
inline double derive_latency(const Site& a, const Site& b, double speed_mps) {
  if (!a.lat || !a.lon || !b.lat || !b.lon) {
    throw std::invalid_argument("derive_latency: site without coordinates");
  }
  if (!(speed_mps > 0.0)) {
    throw std::invalid_argument("derive_latency: non-positive speed");
  }
  const double d = great_circle_distance_m(*a.lat, *a.lon, *b.lat, *b.lon);
  return d / speed_mps * 1000.0;
}

/// A validated WAN topology. Immutable after load; safe to share across
/// threads read-only.
struct Topology {
  std::string name;
  double propagation_speed_mps = kDefaultPropagationSpeedMps;
  std::vector<Site> sites;
  std::vector<Link> links;

  bool operator==(const Topology&) const = default;

  std::size_t site_count() const { return sites.size(); }

  const Site* find_site(std::string_view id) const {
    for (const Site& s : sites) {
      if (s.id == id) return &s;
    }
    return nullptr;
  }

  std::size_t site_index(std::string_view id) const {
    for (std::size_t i = 0; i < sites.size(); ++i) {
      if (sites[i].id == id) return i;
    }
    throw std::out_of_range("unknown site id: " + std::string(id));
  }

  /// The link joining the unordered pair {a, b}, or nullptr.
  const Link* find_link(std::string_view a, std::string_view b) const {
    for (const Link& l : links) {
      if ((l.a == a && l.b == b) || (l.a == b && l.b == a)) return &l;
    }
    return nullptr;
  }

  struct Edge {
    std::size_t to;
    double latency_ms;
    double capacity_mbps;
  };

  /// Adjacency lists indexed by site position; each undirected link appears
  /// in both endpoint lists.
  std::vector<std::vector<Edge>> build_adjacency() const {
    std::vector<std::vector<Edge>> adj(sites.size());
    for (const Link& l : links) {
      const std::size_t ia = site_index(l.a);
      const std::size_t ib = site_index(l.b);
      adj[ia].push_back({ib, l.latency_ms, l.capacity_mbps});
      adj[ib].push_back({ia, l.latency_ms, l.capacity_mbps});
    }
    for (auto& edges : adj) {
      std::sort(edges.begin(), edges.end(),
                [](const Edge& x, const Edge& y) { return x.to < y.to; });
    }
    return adj;
  }
};

/// Sites sharing a link with `site_id`.
inline std::set<std::string> neighbors(const Topology& topo,
                                       std::string_view site_id) {
  if (topo.find_site(site_id) == nullptr) {
    throw std::out_of_range("unknown site id: " + std::string(site_id));
  }
  std::set<std::string> out;
  for (const Link& l : topo.links) {
    if (l.a == site_id) out.insert(l.b);
    if (l.b == site_id) out.insert(l.a);
  }
  return out;
}

namespace detail {

inline void reject_unknown_fields(const nlohmann::json& obj,
                                  std::initializer_list<const char*> allowed,
                                  const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : allowed) {
      if (it.key() == k) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw ValidationError(where + ": unknown field \"" + it.key() + "\"");
    }
  }
}

inline double require_number(const nlohmann::json& obj, const char* key,
                             const std::string& where) {
  if (!obj.contains(key)) {
    throw ValidationError(where + ": missing field \"" + key + "\"");
  }
  if (!obj[key].is_number()) {
    throw ValidationError(where + ": field \"" + key + "\" must be a number");
  }
  return obj[key].get<double>();
}

}  // namespace detail

/// Parses and validates a topology from JSON text. `source` labels error
/// messages (normally the file path).
inline Topology parse_topology(const std::string& text,
                               const std::string& source) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(source + ": " + e.what());
  }
  if (!j.is_object()) {
    throw ValidationError(source + ": top level must be an object");
  }
  detail::reject_unknown_fields(
      j, {"name", "propagation_speed_m_per_s", "sites", "links"}, source);

  Topology topo;
  if (!j.contains("name") || !j["name"].is_string()) {
    throw ValidationError(source + ": missing string field \"name\"");
  }
  topo.name = j["name"].get<std::string>();
  if (j.contains("propagation_speed_m_per_s")) {
    topo.propagation_speed_mps =
        detail::require_number(j, "propagation_speed_m_per_s", source);
    if (!(topo.propagation_speed_mps > 0.0)) {
      throw ValidationError(source +
                            ": propagation_speed_m_per_s must be positive");
    }
  }

  if (!j.contains("sites") || !j["sites"].is_array()) {
    throw ValidationError(source + ": missing array field \"sites\"");
  }
  if (!j.contains("links") || !j["links"].is_array()) {
    throw ValidationError(source + ": missing array field \"links\"");
  }

  std::size_t idx = 0;
  for (const auto& js : j["sites"]) {
    const std::string where = source + ": sites[" + std::to_string(idx) + "]";
    if (!js.is_object()) throw ValidationError(where + ": must be an object");
    detail::reject_unknown_fields(js, {"id", "lat", "lon", "gateway"}, where);
    Site s;
    if (!js.contains("id") || !js["id"].is_string()) {
      throw ValidationError(where + ": missing string field \"id\"");
    }
    s.id = js["id"].get<std::string>();
    if (s.id.empty()) throw ValidationError(where + ": empty site id");
    if (js.contains("lat")) s.lat = detail::require_number(js, "lat", where);
    if (js.contains("lon")) s.lon = detail::require_number(js, "lon", where);
    if (!js.contains("gateway") || !js["gateway"].is_boolean()) {
      throw ValidationError(where + ": missing boolean field \"gateway\"");
    }
    s.gateway = js["gateway"].get<bool>();
    if (s.lat && (*s.lat < -90.0 || *s.lat > 90.0)) {
      throw ValidationError(where + ": lat out of range [-90, 90]");
    }
    if (s.lon && (*s.lon < -180.0 || *s.lon > 180.0)) {
      throw ValidationError(where + ": lon out of range [-180, 180]");
    }
    if (topo.find_site(s.id) != nullptr) {
      throw ValidationError(where + ": duplicate site id \"" + s.id + "\"");
    }
    topo.sites.push_back(std::move(s));
    ++idx;
  }
  if (topo.sites.empty()) {
    throw ValidationError(source + ": at least one site required");
  }

  idx = 0;
  std::vector<bool> has_explicit;
  for (const auto& jl : j["links"]) {
    const std::string where = source + ": links[" + std::to_string(idx) + "]";
    if (!jl.is_object()) throw ValidationError(where + ": must be an object");
    detail::reject_unknown_fields(jl, {"a", "b", "capacity_mbps", "latency_ms"},
                                  where);
    Link l;
    for (const char* key : {"a", "b"}) {
      if (!jl.contains(key) || !jl[key].is_string()) {
        throw ValidationError(where + ": missing string field \"" +
                              std::string(key) + "\"");
      }
    }
    l.a = jl["a"].get<std::string>();
    l.b = jl["b"].get<std::string>();
    if (topo.find_site(l.a) == nullptr) {
      throw ValidationError(where + ": unknown endpoint \"" + l.a + "\"");
    }
    if (topo.find_site(l.b) == nullptr) {
      throw ValidationError(where + ": unknown endpoint \"" + l.b + "\"");
    }
    if (l.a == l.b) {
      throw ValidationError(where + ": self-loop on site \"" + l.a + "\"");
    }
    if (topo.find_link(l.a, l.b) != nullptr) {
      throw ValidationError(where + ": duplicate link between \"" + l.a +
                            "\" and \"" + l.b + "\"");
    }
    l.capacity_mbps = detail::require_number(jl, "capacity_mbps", where);
    if (!(l.capacity_mbps > 0.0)) {
      throw ValidationError(where + ": capacity_mbps must be positive");
    }
    bool explicit_latency = false;
    if (jl.contains("latency_ms")) {
      l.latency_ms = detail::require_number(jl, "latency_ms", where);
      if (l.latency_ms < 0.0) {
        throw ValidationError(where + ": latency_ms must be non-negative");
      }
      explicit_latency = true;
    }
    has_explicit.push_back(explicit_latency);
    topo.links.push_back(std::move(l));
    ++idx;
  }

  const bool all_explicit =
      std::all_of(has_explicit.begin(), has_explicit.end(),
                  [](bool e) { return e; });
  if (!all_explicit) {
    for (std::size_t i = 0; i < topo.sites.size(); ++i) {
      if (!topo.sites[i].lat || !topo.sites[i].lon) {
        throw ValidationError(source + ": sites[" + std::to_string(i) +
                              "]: coordinates required (site \"" +
                              topo.sites[i].id +
                              "\" has none and not every link carries an "
                              "explicit latency_ms)");
      }
    }
  }

  bool any_gateway = false;
  for (const Site& s : topo.sites) any_gateway = any_gateway || s.gateway;
  if (!any_gateway) {
    throw ValidationError(source + ": no gateway site declared");
  }

  // Explicit latency wins over the derived value.
  for (std::size_t i = 0; i < topo.links.size(); ++i) {
    if (!has_explicit[i]) {
      Link& l = topo.links[i];
      topo.links[i].latency_ms =
          derive_latency(*topo.find_site(l.a), *topo.find_site(l.b),
                         topo.propagation_speed_mps);
    }
  }
  return topo;
}

inline Topology load_topology(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ValidationError(path + ": cannot open file");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_topology(buf.str(), path);
}

/// Serializes a topology with every latency written out, so a reload yields
/// the identical value.
inline nlohmann::ordered_json topology_to_json(const Topology& topo) {
  nlohmann::ordered_json j;
  j["name"] = topo.name;
  j["propagation_speed_m_per_s"] = topo.propagation_speed_mps;
  j["sites"] = nlohmann::ordered_json::array();
  for (const Site& s : topo.sites) {
    nlohmann::ordered_json js;
    js["id"] = s.id;
    if (s.lat) js["lat"] = *s.lat;
    if (s.lon) js["lon"] = *s.lon;
    js["gateway"] = s.gateway;
    j["sites"].push_back(std::move(js));
  }
  j["links"] = nlohmann::ordered_json::array();
  for (const Link& l : topo.links) {
    nlohmann::ordered_json jl;
    jl["a"] = l.a;
    jl["b"] = l.b;
    jl["capacity_mbps"] = l.capacity_mbps;
    jl["latency_ms"] = l.latency_ms;
    j["links"].push_back(std::move(jl));
  }
  return j;
}

inline void save_topology(const Topology& topo, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ValidationError(path + ": cannot open file for writing");
  }
  out << topology_to_json(topo).dump(2) << "\n";
}

}  // namespace wanplace
