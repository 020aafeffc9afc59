#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "wanplace/failure_model.hpp"
#include "wanplace/milp.hpp"
#include "wanplace/secondary_paths.hpp"
#include "wanplace/topology.hpp"

namespace wanplace {

inline constexpr double kDefaultBigM = 1e9;
inline constexpr double kDefaultBandwidthMbps = 240.0;

/// Parameters of one placement run (Table-1 style knobs).
struct PlacementParams {
  double alpha = 0.0;               // fraction of link capacity usable
  double bandwidth_mbps = kDefaultBandwidthMbps;  // B, per replicated server
  double lworst_ms = 0.0;           // maximum tolerated replication latency
  std::optional<long> umax;         // active-site cap; empty = unbounded
  int use_secondary_paths = 1;      // gamma, 0 or 1
  double big_m = kDefaultBigM;

  void validate() const {
    if (!(alpha > 0.0) || alpha > 1.0) {
      throw std::invalid_argument("alpha must be in (0, 1]");
    }
    if (!(bandwidth_mbps > 0.0)) {
      throw std::invalid_argument("bandwidth_mbps must be positive");
    }
    if (!(lworst_ms >= 0.0)) {
      throw std::invalid_argument("lworst_ms must be non-negative");
    }
    if (use_secondary_paths != 0 && use_secondary_paths != 1) {
      throw std::invalid_argument("use_secondary_paths must be 0 or 1");
    }
    if (umax && *umax < 1) {
      throw std::invalid_argument("umax must be a positive integer");
    }
    if (!(big_m > 0.0)) {
      throw std::invalid_argument("big_m must be positive");
    }
  }
};

/// Finite upper bounds for the integer variables, derived from capacities.
struct VariableBounds {
  std::vector<std::string> sites;
  std::vector<long> x_bound;
  std::vector<long> b_bound;
  std::map<std::pair<std::size_t, std::size_t>, long> c_bound;  // adjacent
  std::map<std::pair<std::size_t, std::size_t>, long> r_bound;

  long c_bound_of(std::size_t i, std::size_t j) const {
    auto it = c_bound.find({i, j});
    return it == c_bound.end() ? 0 : it->second;
  }

  std::string dump() const {
    std::string out;
    char buf[128];
    for (std::size_t i = 0; i < sites.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "x,%s,%ld\n", sites[i].c_str(),
                    x_bound[i]);
      out += buf;
    }
    for (std::size_t i = 0; i < sites.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "b,%s,%ld\n", sites[i].c_str(),
                    b_bound[i]);
      out += buf;
    }
    for (const auto& [key, v] : c_bound) {
      std::snprintf(buf, sizeof(buf), "c,%s,%s,%ld\n",
                    sites[key.first].c_str(), sites[key.second].c_str(), v);
      out += buf;
    }
    for (const auto& [key, v] : r_bound) {
      std::snprintf(buf, sizeof(buf), "r,%s,%s,%ld\n",
                    sites[key.first].c_str(), sites[key.second].c_str(), v);
      out += buf;
    }
    return out;
  }
};

inline VariableBounds variable_bounds(const Topology& topo,
                                      const PlacementParams& params) {
  params.validate();
  const std::size_t n = topo.sites.size();
  VariableBounds vb;
  vb.sites.reserve(n);
  for (const Site& s : topo.sites) vb.sites.push_back(s.id);
  vb.x_bound.assign(n, 0);
  vb.b_bound.assign(n, 0);

  const auto adj = topo.build_adjacency();
  for (std::size_t i = 0; i < n; ++i) {
    long xb = 0;
    for (const Topology::Edge& ed : adj[i]) {
      const long cb = static_cast<long>(
          std::floor(params.alpha * ed.capacity_mbps / params.bandwidth_mbps +
                     1e-9));
      const long rb =
          static_cast<long>(std::floor(params.alpha * ed.capacity_mbps + 1e-9));
      vb.c_bound[{i, ed.to}] = cb;
      vb.r_bound[{i, ed.to}] = rb;
      xb += cb;
    }
    vb.x_bound[i] = xb;
  }
  for (const auto& [key, cb] : vb.c_bound) {
    vb.b_bound[key.second] = std::max(vb.b_bound[key.second], cb);
  }
  return vb;
}

/// The ILP plus the index maps needed to read a solution back out.
struct MilpModel {
  Milp milp;
  std::vector<std::string> sites;
  PlacementParams params;
  VariableBounds bounds;
  std::vector<int> x, b, u;  // variable index per site
  std::map<std::pair<std::size_t, std::size_t>, int> c, e, r;  // per pair
  std::map<std::array<std::size_t, 3>, int> y;  // (k, i, j) with i < j
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // with c variables
  // Row indices of the Eq.-12 family constraining r of each pair.
  std::map<std::pair<std::size_t, std::size_t>, std::vector<int>> eq12_rows;

  std::size_t site_index(const std::string& id) const {
    for (std::size_t i = 0; i < sites.size(); ++i) {
      if (sites[i] == id) return i;
    }
    throw std::out_of_range("unknown site id: " + id);
  }
};

namespace detail {

inline std::string pair_tag(const std::string& eq, const std::string& a,
                            const std::string& b) {
  return eq + "[" + a + "," + b + "]";
}

}  // namespace detail

/// Builds the placement ILP. Variables exist only where they can be nonzero:
/// c/e/r per ordered adjacent pair, minus pairs whose secondary path is
/// ABSENT when gamma = 1 (replication over a bridge is unprotectable, and a
/// secondary path never crosses a bridge, so no Eq.-12 instance is lost).
/// y_kij exists for the (k, i<j) triples that Eq. 9 actually constrains.
inline MilpModel build_model(const Topology& topo,
                             const FailureIndependenceMatrix& I,
                             const SecondaryPathSet& S,
                             const PlacementParams& params) {
  params.validate();
  const std::size_t n = topo.sites.size();
  if (I.order.size() != n || S.order.size() != n) {
    throw std::invalid_argument(
        "independence matrix / path set site count differs from topology");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (I.order[i] != topo.sites[i].id || S.order[i] != topo.sites[i].id) {
      throw std::invalid_argument(
          "independence matrix / path set site order differs from topology");
    }
  }

  MilpModel m;
  m.sites.reserve(n);
  for (const Site& s : topo.sites) m.sites.push_back(s.id);
  m.params = params;
  m.bounds = variable_bounds(topo, params);
  const bool gamma = params.use_secondary_paths == 1;

  // Dense link lookups: usable capacity alpha*W and latency per ordered pair.
  std::vector<std::vector<double>> alpha_w(n, std::vector<double>(n, 0.0));
  std::vector<std::vector<double>> delta(n, std::vector<double>(n, 0.0));
  const auto adj = topo.build_adjacency();
  for (std::size_t i = 0; i < n; ++i) {
    for (const Topology::Edge& ed : adj[i]) {
      alpha_w[i][ed.to] = params.alpha * ed.capacity_mbps;
      delta[i][ed.to] = ed.latency_ms;
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    for (const Topology::Edge& ed : adj[i]) {
      const std::size_t j = ed.to;
      if (gamma && !S.path(i, j)) continue;  // bridge pair, c fixed to 0
      m.pairs.push_back({i, j});
    }
  }
  std::sort(m.pairs.begin(), m.pairs.end());

  const auto& ids = m.sites;
  for (std::size_t i = 0; i < n; ++i) {
    m.x.push_back(m.milp.add_var("x[" + ids[i] + "]", 0.0,
                                 static_cast<double>(m.bounds.x_bound[i])));
  }
  for (std::size_t i = 0; i < n; ++i) {
    m.b.push_back(m.milp.add_var("b[" + ids[i] + "]", 0.0,
                                 static_cast<double>(m.bounds.b_bound[i])));
  }
  for (std::size_t i = 0; i < n; ++i) {
    m.u.push_back(m.milp.add_var("u[" + ids[i] + "]", 0.0, 1.0, true));
  }
  for (const auto& [i, j] : m.pairs) {
    m.c[{i, j}] =
        m.milp.add_var(detail::pair_tag("c", ids[i], ids[j]), 0.0,
                       static_cast<double>(m.bounds.c_bound_of(i, j)));
  }
  for (const auto& [i, j] : m.pairs) {
    m.e[{i, j}] =
        m.milp.add_var(detail::pair_tag("e", ids[i], ids[j]), 0.0, 1.0, true);
  }
  for (const auto& [i, j] : m.pairs) {
    m.r[{i, j}] =
        m.milp.add_var(detail::pair_tag("r", ids[i], ids[j]), 0.0,
                       static_cast<double>(m.bounds.r_bound.at({i, j})));
  }
  // y_kij for i < j where both e_ik and e_jk exist and Eq. 9 applies.
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!m.e.count({i, k})) continue;
      for (std::size_t j = i + 1; j < n; ++j) {
        if (j == k || !m.e.count({j, k})) continue;
        if (!I.at(i, j)) continue;
        m.y[{k, i, j}] = m.milp.add_var(
            "y[" + ids[k] + "|" + ids[i] + "," + ids[j] + "]", 0.0, 1.0, true);
      }
    }
  }

  // Objective (Eq. 1): maximize sum(x_i - b_i).
  m.milp.maximize = true;
  m.milp.objective.assign(m.milp.vars.size(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    m.milp.objective[static_cast<std::size_t>(m.x[i])] = 1.0;
    m.milp.objective[static_cast<std::size_t>(m.b[i])] = -1.0;
  }

  // Eq. 2: c_ij I_ij = 0; a row only where I_ij = 1.
  for (const auto& [i, j] : m.pairs) {
    if (!I.at(i, j)) continue;
    m.milp.add_row(detail::pair_tag("eq2", ids[i], ids[j]),
                   {{m.c.at({i, j}), 1.0}}, Rel::EQ, 0.0);
  }

  // Eq. 3: sum_j c_ij = x_i.
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<LinTerm> terms;
    for (const auto& [key, var] : m.c) {
      if (key.first == i) terms.push_back({var, 1.0});
    }
    terms.push_back({m.x[i], -1.0});
    m.milp.add_row("eq3[" + ids[i] + "]", terms, Rel::EQ, 0.0);
  }

  // Eqs. 4-5: e_ij = 1 iff c_ij > 0. The Big-M is tightened to the c bound,
  // which is lossless given the explicit variable bounds.
  for (const auto& [i, j] : m.pairs) {
    const double mm = std::min(
        params.big_m, static_cast<double>(m.bounds.c_bound_of(i, j)));
    m.milp.add_row(detail::pair_tag("eq4", ids[i], ids[j]),
                   {{m.e.at({i, j}), mm}, {m.c.at({i, j}), -1.0}}, Rel::GE,
                   0.0);
    m.milp.add_row(detail::pair_tag("eq5", ids[i], ids[j]),
                   {{m.e.at({i, j}), 1.0}, {m.c.at({i, j}), -1.0}}, Rel::LE,
                   0.0);
  }

  // Eqs. 6-8: y_kij = e_ik AND e_jk.
  for (const auto& [key, yvar] : m.y) {
    const auto [k, i, j] = key;
    const int eik = m.e.at({i, k});
    const int ejk = m.e.at({j, k});
    const std::string tag =
        "[" + ids[k] + "|" + ids[i] + "," + ids[j] + "]";
    m.milp.add_row("eq6" + tag, {{yvar, 1.0}, {eik, -1.0}, {ejk, -1.0}},
                   Rel::GE, -1.0);
    m.milp.add_row("eq7" + tag, {{yvar, 1.0}, {eik, -1.0}}, Rel::LE, 0.0);
    m.milp.add_row("eq8" + tag, {{yvar, 1.0}, {ejk, -1.0}}, Rel::LE, 0.0);
  }

  // Eq. 9: sum_{i<j} I_ij y_kij = 0 per backup site k.
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<LinTerm> terms;
    for (const auto& [key, yvar] : m.y) {
      if (key[0] == k) terms.push_back({yvar, 1.0});  // I_ij = 1 by creation
    }
    if (terms.empty()) continue;
    m.milp.add_row("eq9[" + ids[k] + "]", terms, Rel::EQ, 0.0);
  }

  // Eq. 10: b_j >= c_ij.
  for (const auto& [i, j] : m.pairs) {
    m.milp.add_row(detail::pair_tag("eq10", ids[i], ids[j]),
                   {{m.b[j], 1.0}, {m.c.at({i, j}), -1.0}}, Rel::GE, 0.0);
  }

  // Eq. 11: B c_ij <= r_ij.
  for (const auto& [i, j] : m.pairs) {
    m.milp.add_row(detail::pair_tag("eq11", ids[i], ids[j]),
                   {{m.c.at({i, j}), params.bandwidth_mbps},
                    {m.r.at({i, j}), -1.0}},
                   Rel::LE, 0.0);
  }

  // Eq. 12: r_ij <= alpha W_ij - gamma B c_km s^km_ij, one instance per
  // (k,m) whose secondary path crosses directed link (i,j), plus the plain
  // r_ij <= alpha W_ij (the gamma = 0 collapse).
  for (const auto& [i, j] : m.pairs) {
    auto& rows12 = m.eq12_rows[{i, j}];
    rows12.push_back(static_cast<int>(m.milp.rows.size()));
    m.milp.add_row(detail::pair_tag("eq12", ids[i], ids[j]),
                   {{m.r.at({i, j}), 1.0}}, Rel::LE, alpha_w[i][j]);
    if (!gamma) continue;
    for (const auto& [k, mm] : S.users_of_edge(i, j)) {
      auto itc = m.c.find({k, mm});
      if (itc == m.c.end()) {
        throw std::logic_error("secondary path user lacks a c variable");
      }
      rows12.push_back(static_cast<int>(m.milp.rows.size()));
      m.milp.add_row("eq12[" + ids[i] + "," + ids[j] + "|" + ids[k] + "," +
                         ids[mm] + "]",
                     {{m.r.at({i, j}), 1.0},
                      {itc->second, params.bandwidth_mbps}},
                     Rel::LE, alpha_w[i][j]);
    }
  }

  // Eq. 13: e_ij Delta_ij <= L_worst.
  for (const auto& [i, j] : m.pairs) {
    m.milp.add_row(detail::pair_tag("eq13", ids[i], ids[j]),
                   {{m.e.at({i, j}), delta[i][j]}}, Rel::LE, params.lworst_ms);
  }

  // Eqs. 14-15: u_i = 1 iff x_i + b_i > 0, Big-M tightened to the x+b bound.
  for (std::size_t i = 0; i < n; ++i) {
    const double mm = std::min(
        params.big_m,
        static_cast<double>(m.bounds.x_bound[i] + m.bounds.b_bound[i]));
    m.milp.add_row("eq14[" + ids[i] + "]",
                   {{m.u[i], mm}, {m.x[i], -1.0}, {m.b[i], -1.0}}, Rel::GE,
                   0.0);
    m.milp.add_row("eq15[" + ids[i] + "]",
                   {{m.u[i], 1.0}, {m.x[i], -1.0}, {m.b[i], -1.0}}, Rel::LE,
                   0.0);
  }

  // Eq. 16: sum u_i <= U_max (omitted when unbounded).
  if (params.umax) {
    std::vector<LinTerm> terms;
    for (std::size_t i = 0; i < n; ++i) terms.push_back({m.u[i], 1.0});
    m.milp.add_row("eq16", terms, Rel::LE, static_cast<double>(*params.umax));
  }

  return m;
}

/// A candidate placement, keyed by site ids so it can be built by hand and
/// audited independently of any model object.
struct PlacementSolution {
  std::vector<std::string> sites;
  std::map<std::string, long> x, b, u;
  std::map<std::pair<std::string, std::string>, long> c, e, r;
  long objective = 0;

  static long get(const std::map<std::string, long>& m, const std::string& k) {
    auto it = m.find(k);
    return it == m.end() ? 0 : it->second;
  }
  static long get(const std::map<std::pair<std::string, std::string>, long>& m,
                  const std::string& a, const std::string& b) {
    auto it = m.find({a, b});
    return it == m.end() ? 0 : it->second;
  }

  long total_primary() const {
    long t = 0;
    for (const auto& [k, v] : x) t += v;
    return t;
  }
  long total_backup() const {
    long t = 0;
    for (const auto& [k, v] : b) t += v;
    return t;
  }
  long active_sites() const {
    long t = 0;
    for (const auto& [k, v] : u) t += v;
    return t;
  }
  void recompute_objective() { objective = total_primary() - total_backup(); }
};

/// All-zero placement; feasible for every instance.
inline PlacementSolution zero_solution(const Topology& topo) {
  PlacementSolution s;
  for (const Site& site : topo.sites) {
    s.sites.push_back(site.id);
    s.x[site.id] = 0;
    s.b[site.id] = 0;
    s.u[site.id] = 0;
  }
  s.objective = 0;
  return s;
}

/// Reads a solved variable vector back into a PlacementSolution.
inline PlacementSolution extract_solution(const MilpModel& m,
                                          const std::vector<double>& vals) {
  if (vals.size() != m.milp.vars.size()) {
    throw std::invalid_argument("value vector does not match model");
  }
  auto as_long = [](double v) { return std::lround(v); };
  PlacementSolution s;
  s.sites = m.sites;
  for (std::size_t i = 0; i < m.sites.size(); ++i) {
    s.x[m.sites[i]] = as_long(vals[static_cast<std::size_t>(m.x[i])]);
    s.b[m.sites[i]] = as_long(vals[static_cast<std::size_t>(m.b[i])]);
    s.u[m.sites[i]] = as_long(vals[static_cast<std::size_t>(m.u[i])]);
  }
  for (const auto& [key, var] : m.c) {
    const long v = as_long(vals[static_cast<std::size_t>(var)]);
    if (v != 0) s.c[{m.sites[key.first], m.sites[key.second]}] = v;
  }
  for (const auto& [key, var] : m.e) {
    const long v = as_long(vals[static_cast<std::size_t>(var)]);
    if (v != 0) s.e[{m.sites[key.first], m.sites[key.second]}] = v;
  }
  for (const auto& [key, var] : m.r) {
    const long v = as_long(vals[static_cast<std::size_t>(var)]);
    if (v != 0) s.r[{m.sites[key.first], m.sites[key.second]}] = v;
  }
  s.recompute_objective();
  return s;
}

/// One failed constraint: which equation, at which indices, and both sides.
struct Violation {
  std::string equation;  // e.g. "eq10[B,C]"
  double lhs = 0.0;
  double rhs = 0.0;
  std::string detail;
};

/// Audits Eqs. 2-16 plus the domain conditions (Eqs. 17-18) directly from
/// the topology, independence matrix, and path set -- independent of
/// build_model. Eq. 12 is verified in its min-form restatement,
/// r_ij <= alpha W_ij - gamma B max_{k,m} (c_km s^km_ij). Eqs. 6-8 define
/// y as the AND of two e entries; the audit derives y that way, so only
/// Eq. 9 can fail on their behalf. Additionally enforces the bridge policy:
/// with gamma = 1, c_ij > 0 requires a secondary path to exist for (i,j).
inline std::vector<Violation> check_solution(const PlacementSolution& sol,
                                             const Topology& topo,
                                             const FailureIndependenceMatrix& I,
                                             const SecondaryPathSet& S,
                                             const PlacementParams& params) {
  params.validate();
  const std::size_t n = topo.sites.size();
  std::vector<Violation> out;
  char buf[256];
  auto add = [&out](std::string eq, double lhs, double rhs,
                    std::string detail) {
    out.push_back({std::move(eq), lhs, rhs, std::move(detail)});
  };

  std::vector<std::string> ids;
  ids.reserve(n);
  for (const Site& s : topo.sites) ids.push_back(s.id);

  std::vector<std::vector<double>> alpha_w(n, std::vector<double>(n, 0.0));
  std::vector<std::vector<double>> delta(n, std::vector<double>(n, -1.0));
  const auto adj = topo.build_adjacency();
  for (std::size_t i = 0; i < n; ++i) {
    for (const Topology::Edge& ed : adj[i]) {
      alpha_w[i][ed.to] = params.alpha * ed.capacity_mbps;
      delta[i][ed.to] = ed.latency_ms;
    }
  }

  auto cv = [&](std::size_t i, std::size_t j) {
    return PlacementSolution::get(sol.c, ids[i], ids[j]);
  };
  auto ev = [&](std::size_t i, std::size_t j) {
    return PlacementSolution::get(sol.e, ids[i], ids[j]);
  };
  auto rv = [&](std::size_t i, std::size_t j) {
    return PlacementSolution::get(sol.r, ids[i], ids[j]);
  };
  auto xv = [&](std::size_t i) {
    return PlacementSolution::get(sol.x, ids[i]);
  };
  auto bv = [&](std::size_t i) {
    return PlacementSolution::get(sol.b, ids[i]);
  };
  auto uv = [&](std::size_t i) {
    return PlacementSolution::get(sol.u, ids[i]);
  };

  const double gamma = params.use_secondary_paths;
  const double B = params.bandwidth_mbps;
  const double float_tol = 1e-6;

  // Domains first (Eqs. 17-18): counts non-negative, indicators binary.
  for (std::size_t i = 0; i < n; ++i) {
    if (xv(i) < 0) add("eq17[x," + ids[i] + "]", xv(i), 0, "x_i >= 0");
    if (bv(i) < 0) add("eq17[b," + ids[i] + "]", bv(i), 0, "b_i >= 0");
    if (uv(i) != 0 && uv(i) != 1) {
      add("eq18[u," + ids[i] + "]", uv(i), 1, "u_i binary");
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      if (cv(i, j) < 0) {
        add(detail::pair_tag("eq17[c]", ids[i], ids[j]), cv(i, j), 0,
            "c_ij >= 0");
      }
      if (rv(i, j) < 0) {
        add(detail::pair_tag("eq17[r]", ids[i], ids[j]), rv(i, j), 0,
            "r_ij >= 0");
      }
      if (ev(i, j) != 0 && ev(i, j) != 1) {
        add(detail::pair_tag("eq18[e]", ids[i], ids[j]), ev(i, j), 1,
            "e_ij binary");
      }
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    long row_sum = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const long cij = cv(i, j);
      row_sum += cij;

      // Eq. 2.
      if (I.at(i, j) && cij != 0) {
        std::snprintf(buf, sizeof(buf), "c=%ld with I_ij=1", cij);
        add(detail::pair_tag("eq2", ids[i], ids[j]),
            static_cast<double>(cij), 0.0, buf);
      }
      // Eq. 4.
      if (params.big_m * ev(i, j) - cij < -float_tol) {
        add(detail::pair_tag("eq4", ids[i], ids[j]),
            params.big_m * ev(i, j) - cij, 0.0, "M e_ij - c_ij >= 0");
      }
      // Eq. 5.
      if (ev(i, j) > cij) {
        add(detail::pair_tag("eq5", ids[i], ids[j]),
            static_cast<double>(ev(i, j)), static_cast<double>(cij),
            "e_ij <= c_ij");
      }
      // Eq. 10.
      if (bv(j) < cv(i, j)) {
        std::snprintf(buf, sizeof(buf), "b_%s=%ld < c=%ld", ids[j].c_str(),
                      bv(j), cij);
        add(detail::pair_tag("eq10", ids[i], ids[j]),
            static_cast<double>(bv(j)), static_cast<double>(cij), buf);
      }
      // Eq. 11.
      if (B * cij - rv(i, j) > float_tol) {
        add(detail::pair_tag("eq11", ids[i], ids[j]), B * cij,
            static_cast<double>(rv(i, j)), "B c_ij <= r_ij");
      }
      // Eq. 12 in min-form.
      double worst = 0.0;
      std::size_t wk = n, wm = n;
      for (const auto& [k, mm] : S.users_of_edge(i, j)) {
        const double load = static_cast<double>(cv(k, mm));
        if (load > worst) {
          worst = load;
          wk = k;
          wm = mm;
        }
      }
      const double rhs12 = alpha_w[i][j] - gamma * B * worst;
      if (rv(i, j) > rhs12 + float_tol) {
        if (wk < n) {
          std::snprintf(buf, sizeof(buf),
                        "r=%ld > alphaW=%.6g - gamma B c_%s%s=%.6g", rv(i, j),
                        alpha_w[i][j], ids[wk].c_str(), ids[wm].c_str(),
                        gamma * B * worst);
        } else {
          std::snprintf(buf, sizeof(buf), "r=%ld > alphaW=%.6g", rv(i, j),
                        alpha_w[i][j]);
        }
        add(detail::pair_tag("eq12", ids[i], ids[j]),
            static_cast<double>(rv(i, j)), rhs12, buf);
      }
      // Eq. 13 (Delta undefined for non-links; those pairs are killed by
      // Eq. 12 above since alpha W = 0 there).
      if (ev(i, j) == 1 && delta[i][j] >= 0.0 &&
          delta[i][j] > params.lworst_ms + 1e-9) {
        add(detail::pair_tag("eq13", ids[i], ids[j]), delta[i][j],
            params.lworst_ms, "e_ij Delta_ij <= L_worst");
      }
      // Bridge policy: gamma = 1 forbids replication without a secondary.
      if (gamma == 1.0 && cij > 0 && alpha_w[i][j] > 0.0 && !S.path(i, j)) {
        std::snprintf(buf, sizeof(buf), "c=%ld over a bridge link", cij);
        add(detail::pair_tag("gamma-bridge", ids[i], ids[j]),
            static_cast<double>(cij), 0.0, buf);
      }
    }
    // Eq. 3.
    if (row_sum != xv(i)) {
      std::snprintf(buf, sizeof(buf), "sum_j c_ij=%ld != x_i=%ld", row_sum,
                    xv(i));
      add("eq3[" + ids[i] + "]", static_cast<double>(row_sum),
          static_cast<double>(xv(i)), buf);
    }
  }

  // Eq. 9 with y derived per Eqs. 6-8 (y_kij = e_ik AND e_jk).
  for (std::size_t k = 0; k < n; ++k) {
    long lhs = 0;
    std::string first;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == k || ev(i, k) != 1) continue;
      for (std::size_t j = i + 1; j < n; ++j) {
        if (j == k || ev(j, k) != 1) continue;
        if (I.at(i, j)) {
          ++lhs;
          if (first.empty()) first = ids[i] + "," + ids[j];
        }
      }
    }
    if (lhs != 0) {
      add("eq9[" + ids[k] + "]", static_cast<double>(lhs), 0.0,
          "shared backup at " + ids[k] + " for dependent pair (" + first +
              ")");
    }
  }

  // Eqs. 14-16.
  long usum = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const long load = xv(i) + bv(i);
    usum += uv(i);
    if (params.big_m * uv(i) - load < -float_tol) {
      add("eq14[" + ids[i] + "]", params.big_m * uv(i),
          static_cast<double>(load), "M u_i >= x_i + b_i");
    }
    if (uv(i) > load) {
      add("eq15[" + ids[i] + "]", static_cast<double>(uv(i)),
          static_cast<double>(load), "u_i <= x_i + b_i");
    }
  }
  if (params.umax && usum > *params.umax) {
    add("eq16", static_cast<double>(usum), static_cast<double>(*params.umax),
        "sum u_i <= U_max");
  }

  return out;
}

}  // namespace wanplace
