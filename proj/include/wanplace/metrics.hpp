#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "wanplace/placement_model.hpp"
#include "wanplace/secondary_paths.hpp"
#include "wanplace/topology.hpp"

namespace wanplace {

/// SE = 1 - sum(b)/sum(x); empty when no primaries are placed.
inline std::optional<double> server_efficiency(const PlacementSolution& sol) {
  const long sx = sol.total_primary();
  if (sx <= 0) return std::nullopt;
  return 1.0 - static_cast<double>(sol.total_backup()) /
                   static_cast<double>(sx);
}

/// 1 - S/S' where S is the gamma=1 primary count and S' the gamma=0 one.
inline std::optional<double> capacity_reduction(long s, long s_prime) {
  if (s_prime <= 0) return std::nullopt;
  return 1.0 - static_cast<double>(s) / static_cast<double>(s_prime);
}

/// Latency statistics over the secondary paths of replicating pairs.
struct LatencyStats {
  std::vector<double> samples;  // sorted ascending; ABSENT pairs excluded
  std::vector<std::pair<double, double>> cdf;  // (latency, cumulative frac)
  std::optional<double> fraction_meeting;      // empty when no samples
  std::size_t absent_pairs = 0;
};

inline LatencyStats secondary_latency_stats(const PlacementSolution& sol,
                                            const Topology& topo,
                                            const SecondaryPathSet& S,
                                            double lworst_ms) {
  LatencyStats st;
  const std::size_t n = topo.sites.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      if (PlacementSolution::get(sol.e, topo.sites[i].id,
                                 topo.sites[j].id) != 1) {
        continue;
      }
      const SecondaryPath* p = S.path(i, j);
      if (p == nullptr) {
        ++st.absent_pairs;
      } else {
        st.samples.push_back(p->latency_ms);
      }
    }
  }
  std::sort(st.samples.begin(), st.samples.end());
  const double total = static_cast<double>(st.samples.size());
  for (std::size_t k = 0; k < st.samples.size(); ++k) {
    const bool last_of_value = k + 1 == st.samples.size() ||
                               st.samples[k + 1] > st.samples[k];
    if (last_of_value) {
      st.cdf.push_back({st.samples[k], static_cast<double>(k + 1) / total});
    }
  }
  if (!st.samples.empty()) {
    std::size_t meeting = 0;
    for (const double v : st.samples) {
      if (v <= lworst_ms + 1e-9) ++meeting;
    }
    st.fraction_meeting = static_cast<double>(meeting) / total;
  }
  return st;
}

/// Full run report with a fixed key order, so serialization is byte-stable.
inline nlohmann::ordered_json make_report(const Topology& topo,
                                          const PlacementSolution& sol,
                                          const SecondaryPathSet& S,
                                          const PlacementParams& params,
                                          const std::string& status,
                                          const std::string& solver_name,
                                          double time_limit_s) {
  nlohmann::ordered_json rep;
  nlohmann::ordered_json p;
  p["topology"] = topo.name;
  p["alpha"] = params.alpha;
  p["bandwidth_mbps"] = params.bandwidth_mbps;
  p["lworst_ms"] = params.lworst_ms;
  if (params.umax) {
    p["umax"] = *params.umax;
  } else {
    p["umax"] = "UNBOUNDED";
  }
  p["gamma"] = params.use_secondary_paths;
  p["big_m"] = params.big_m;
  p["solver"] = solver_name;
  p["time_limit_s"] = time_limit_s;
  rep["params"] = p;
  rep["status"] = status;

  nlohmann::ordered_json totals;
  totals["primary"] = sol.total_primary();
  totals["backup"] = sol.total_backup();
  totals["active_sites"] = sol.active_sites();
  totals["objective"] = sol.objective;
  rep["totals"] = totals;

  const auto se = server_efficiency(sol);
  if (se) {
    rep["server_efficiency"] = *se;
  } else {
    rep["server_efficiency"] = "NOT-APPLICABLE";
  }

  nlohmann::ordered_json placement = nlohmann::ordered_json::array();
  for (const Site& s : topo.sites) {
    nlohmann::ordered_json row;
    row["site"] = s.id;
    row["x"] = PlacementSolution::get(sol.x, s.id);
    row["b"] = PlacementSolution::get(sol.b, s.id);
    placement.push_back(row);
  }
  rep["placement"] = placement;

  nlohmann::ordered_json reps = nlohmann::ordered_json::array();
  const std::size_t n = topo.sites.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const long c = PlacementSolution::get(sol.c, topo.sites[i].id,
                                            topo.sites[j].id);
      if (c == 0) continue;
      nlohmann::ordered_json row;
      row["from"] = topo.sites[i].id;
      row["to"] = topo.sites[j].id;
      row["count"] = c;
      const Link* l = topo.find_link(topo.sites[i].id, topo.sites[j].id);
      if (l != nullptr) {
        row["link_latency_ms"] = l->latency_ms;
      } else {
        row["link_latency_ms"] = nullptr;
      }
      const SecondaryPath* path = S.path(i, j);
      if (path) {
        row["secondary_latency_ms"] = path->latency_ms;
      } else {
        row["secondary_latency_ms"] = "ABSENT";
      }
      reps.push_back(row);
    }
  }
  rep["replications"] = reps;

  const LatencyStats st =
      secondary_latency_stats(sol, topo, S, params.lworst_ms);
  nlohmann::ordered_json cdf = nlohmann::ordered_json::array();
  for (const auto& [lat, frac] : st.cdf) {
    cdf.push_back(nlohmann::ordered_json::array({lat, frac}));
  }
  rep["secondary_cdf"] = cdf;
  return rep;
}

/// One sweep CSV row; fractions carry 4 decimals.
inline std::string sweep_csv_row(double alpha, double lworst_ms, int gamma,
                                 long total_primary, long total_backup,
                                 const std::optional<double>& se,
                                 const std::string& status) {
  char buf[192];
  std::string se_text = "NOT-APPLICABLE";
  if (se) {
    char sbuf[32];
    std::snprintf(sbuf, sizeof(sbuf), "%.4f", *se);
    se_text = sbuf;
  }
  std::snprintf(buf, sizeof(buf), "%.6g,%.6g,%d,%ld,%ld,%s,%s\n", alpha,
                lworst_ms, gamma, total_primary, total_backup,
                se_text.c_str(), status.c_str());
  return buf;
}

inline constexpr const char* kSweepCsvHeader =
    "alpha,lworst_ms,gamma,total_primary,total_backup,server_efficiency,"
    "status";

}  // namespace wanplace
