#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "wanplace/placement_model.hpp"
#include "wanplace/simplex.hpp"

namespace wanplace {

enum class SolveStatus { OPTIMAL, FEASIBLE, TIMEOUT };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::OPTIMAL:
      return "OPTIMAL";
    case SolveStatus::FEASIBLE:
      return "FEASIBLE";
    case SolveStatus::TIMEOUT:
      return "TIMEOUT";
  }
  return "UNKNOWN";
}

struct SolveOutcome {
  PlacementSolution solution;
  SolveStatus status = SolveStatus::TIMEOUT;
  long nodes_explored = 0;
  double wall_time_s = 0.0;
};

namespace detail {

inline double eval_row(const RowCon& row, const std::vector<double>& x) {
  double lhs = 0.0;
  for (const LinTerm& t : row.terms) {
    lhs += t.coef * x[static_cast<std::size_t>(t.var)];
  }
  return lhs;
}

inline bool row_holds(const RowCon& row, double lhs) {
  const double tol = 1e-6 * std::max(1.0, std::fabs(row.rhs));
  switch (row.rel) {
    case Rel::LE:
      return lhs <= row.rhs + tol;
    case Rel::GE:
      return lhs >= row.rhs - tol;
    case Rel::EQ:
      return std::fabs(lhs - row.rhs) <= tol;
  }
  return false;
}

inline int first_violated_row(const Milp& milp, const std::vector<double>& x) {
  for (std::size_t r = 0; r < milp.rows.size(); ++r) {
    if (!row_holds(milp.rows[r], eval_row(milp.rows[r], x))) {
      return static_cast<int>(r);
    }
  }
  return -1;
}

struct BnbResult {
  bool proven = false;
  bool timed_out = false;
  std::vector<double> best;
  double best_obj = 0.0;
  long nodes = 0;
};

/// Best-first branch and bound over the LP relaxation. Every variable is
/// integer (Eq. 18). Deterministic: node order is (bound desc, id asc),
/// branching picks the most fractional variable with smallest-index ties.
/// `seed` must be an integral feasible point (the all-zero placement).
inline BnbResult branch_and_bound(
    const Milp& milp, const std::vector<double>& seed,
    std::chrono::steady_clock::time_point deadline) {
  if (!milp.maximize) throw std::invalid_argument("expected a max problem");
  const std::size_t nv = milp.vars.size();

  BnbResult res;
  res.best = seed;
  if (first_violated_row(milp, seed) >= 0) {
    throw std::logic_error("branch and bound seed is infeasible");
  }
  long inc = std::lround(milp.objective_value(seed));
  res.best_obj = static_cast<double>(inc);

  struct Node {
    std::vector<double> lb, ub;
    double bound = 0.0;
  };
  // Keyed by (-bound, id): begin() is the best-bound, oldest node.
  std::map<std::pair<double, long>, Node> open;
  long next_id = 0;

  Node root;
  root.lb.reserve(nv);
  root.ub.reserve(nv);
  for (const MilpVar& v : milp.vars) {
    root.lb.push_back(v.lb);
    root.ub.push_back(v.ub);
  }
  root.bound = std::numeric_limits<double>::infinity();
  open.emplace(std::make_pair(-root.bound, next_id++), std::move(root));

  BoundedSimplex lp(milp);
  std::vector<double> cand(nv);
  bool lp_trouble = false;

  auto prunable = [&inc](double bound) {
    return std::floor(bound + 1e-6) <= static_cast<double>(inc);
  };

  while (!open.empty()) {
    if (std::chrono::steady_clock::now() > deadline) {
      res.timed_out = true;
      break;
    }
    auto it = open.begin();
    Node node = std::move(it->second);
    open.erase(it);
    if (prunable(node.bound)) continue;
    ++res.nodes;

    const LpSolution rel = lp.solve(node.lb, node.ub);
    if (rel.status == LpStatus::Infeasible) continue;
    if (rel.status != LpStatus::Optimal) {
      lp_trouble = true;  // cannot bound this node soundly
      continue;
    }
    if (prunable(rel.objective)) continue;

    // Rounded probe; also the acceptance test for integral LP optima.
    for (std::size_t j = 0; j < nv; ++j) {
      cand[j] = std::clamp(std::round(rel.x[j]), node.lb[j], node.ub[j]);
    }
    const int bad_row = first_violated_row(milp, cand);
    if (bad_row < 0) {
      const long cobj = std::lround(milp.objective_value(cand));
      if (cobj > inc) {
        inc = cobj;
        res.best = cand;
        res.best_obj = static_cast<double>(cobj);
        // Drop queued nodes that can no longer win.
        for (auto qit = open.begin(); qit != open.end();) {
          if (prunable(-qit->first.first)) {
            qit = open.erase(qit);
          } else {
            ++qit;
          }
        }
      }
    }

    // Most fractional variable, smallest index on ties.
    int branch_var = -1;
    double branch_score = 1e-6;
    for (std::size_t j = 0; j < nv; ++j) {
      const double f = rel.x[j] - std::floor(rel.x[j]);
      const double score = std::min(f, 1.0 - f);
      if (score > branch_score + 1e-12) {
        branch_score = score;
        branch_var = static_cast<int>(j);
      }
    }
    if (branch_var < 0) {
      if (bad_row < 0) continue;  // integral and feasible: node resolved
      // Integral within tolerance yet infeasible once rounded (a Big-M
      // artifact): branch on the first unfixed variable of the violated row.
      for (const LinTerm& t : milp.rows[static_cast<std::size_t>(bad_row)]
                                  .terms) {
        const auto j = static_cast<std::size_t>(t.var);
        if (node.ub[j] - node.lb[j] > 0.5) {
          branch_var = t.var;
          break;
        }
      }
      if (branch_var < 0) continue;  // fully fixed box, provably infeasible
    }

    const auto bv = static_cast<std::size_t>(branch_var);
    // Clamp so both children are strict sub-boxes even if the LP value sits
    // on a bound (possible on the violated-row branch path).
    const double split = std::clamp(std::floor(rel.x[bv] + 1e-9),
                                    node.lb[bv], node.ub[bv] - 1.0);
    if (!prunable(rel.objective)) {
      Node down;
      down.lb = node.lb;
      down.ub = node.ub;
      down.ub[bv] = split;
      down.bound = rel.objective;
      if (down.lb[bv] <= down.ub[bv]) {
        open.emplace(std::make_pair(-down.bound, next_id++), std::move(down));
      }
      Node up;
      up.lb = std::move(node.lb);
      up.ub = std::move(node.ub);
      up.lb[bv] = split + 1.0;
      up.bound = rel.objective;
      if (up.lb[bv] <= up.ub[bv]) {
        open.emplace(std::make_pair(-up.bound, next_id++), std::move(up));
      }
    }
  }

  res.proven = open.empty() && !res.timed_out && !lp_trouble;
  return res;
}

}  // namespace detail

/// Exact solve: branch and bound on Eq. 1, then a second lexicographic pass
/// maximizing sum(x) at the optimal objective so the reported placement is a
/// canonical optimum (stable totals across equivalent optima).
inline SolveOutcome solve_exact(const MilpModel& model,
                                double time_limit_s = 300.0) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto deadline =
      t0 + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
               std::chrono::duration<double>(time_limit_s));
  for (const MilpVar& v : model.milp.vars) {
    if (!(v.ub < 1e12)) {
      throw std::invalid_argument("variable without finite upper bound: " +
                                  v.name);
    }
  }

  SolveOutcome out;
  const std::vector<double> zero(model.milp.vars.size(), 0.0);
  detail::BnbResult a = detail::branch_and_bound(model.milp, zero, deadline);
  out.nodes_explored = a.nodes;
  if (!a.proven) {
    out.status = SolveStatus::TIMEOUT;
    out.solution = extract_solution(model, a.best);
    out.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    return out;
  }
  const double zstar = std::round(a.best_obj);

  Milp second = model.milp;
  std::vector<LinTerm> lex;
  for (std::size_t i = 0; i < model.sites.size(); ++i) {
    lex.push_back({model.x[i], 1.0});
    lex.push_back({model.b[i], -1.0});
  }
  second.add_row("lex-objective", lex, Rel::GE, zstar);
  second.objective.assign(second.vars.size(), 0.0);
  for (std::size_t i = 0; i < model.sites.size(); ++i) {
    second.objective[static_cast<std::size_t>(model.x[i])] = 1.0;
  }

  detail::BnbResult b = detail::branch_and_bound(second, a.best, deadline);
  out.nodes_explored += b.nodes;
  out.status = b.proven ? SolveStatus::OPTIMAL : SolveStatus::TIMEOUT;
  out.solution = extract_solution(model, b.best);
  out.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return out;
}

/// Exhaustive ground truth for tiny instances. Enumerates every integer c
/// assignment over the pairs that could carry replication, derives the other
/// variables (x from Eq. 3; b as the max per Eq. 10; e, u as indicators;
/// r maximal under Eq. 12), and keeps the first assignment attaining the
/// best objective. Guarded: at most 6 sites, c bounds at most max_c (<= 3),
/// and a hard cap on the assignment count.
inline SolveOutcome brute_force_oracle(const Topology& topo,
                                       const FailureIndependenceMatrix& I,
                                       const SecondaryPathSet& S,
                                       const PlacementParams& params,
                                       long max_c = 3) {
  params.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t n = topo.sites.size();
  if (n > 6) {
    throw std::invalid_argument("oracle guard exceeded: more than 6 sites");
  }
  if (max_c < 0 || max_c > 3) {
    throw std::invalid_argument("oracle guard exceeded: max_c must be in 0..3");
  }

  const VariableBounds vb = variable_bounds(topo, params);
  const bool gamma = params.use_secondary_paths == 1;
  const double B = params.bandwidth_mbps;

  std::vector<std::vector<double>> alpha_w(n, std::vector<double>(n, 0.0));
  std::vector<std::vector<double>> delta(n, std::vector<double>(n, -1.0));
  std::vector<std::pair<std::size_t, std::size_t>> links;
  const auto adj = topo.build_adjacency();
  for (std::size_t i = 0; i < n; ++i) {
    for (const Topology::Edge& ed : adj[i]) {
      alpha_w[i][ed.to] = params.alpha * ed.capacity_mbps;
      delta[i][ed.to] = ed.latency_ms;
      links.push_back({i, ed.to});
    }
  }
  std::sort(links.begin(), links.end());

  // Pairs that can carry c > 0 given Eqs. 2 and 13 and the bridge policy.
  struct Pair {
    std::size_t i, j;
    long bound;
  };
  std::vector<Pair> pairs;
  std::map<std::pair<std::size_t, std::size_t>, int> pair_index;
  for (const auto& [i, j] : links) {
    const long cb = vb.c_bound_of(i, j);
    if (cb == 0) continue;
    if (cb > max_c) {
      throw std::invalid_argument(
          "oracle guard exceeded: c bound " + std::to_string(cb) +
          " above max_c for pair " + topo.sites[i].id + "," +
          topo.sites[j].id);
    }
    if (I.at(i, j)) continue;
    if (delta[i][j] > params.lworst_ms + 1e-9) continue;
    if (gamma && !S.path(i, j)) continue;
    pair_index[{i, j}] = static_cast<int>(pairs.size());
    pairs.push_back({i, j, cb});
  }

  double space = 1.0;
  for (const Pair& p : pairs) space *= static_cast<double>(p.bound + 1);
  if (space > 2e6) {
    throw std::invalid_argument(
        "oracle guard exceeded: search space above 2e6 assignments");
  }

  // Per directed link: enumerable pairs whose secondary path crosses it.
  std::vector<std::vector<int>> link_users(links.size());
  std::vector<int> link_pair(links.size(), -1);
  for (std::size_t l = 0; l < links.size(); ++l) {
    const auto [i, j] = links[l];
    auto it = pair_index.find({i, j});
    if (it != pair_index.end()) link_pair[l] = it->second;
    if (!gamma) continue;
    for (const auto& [k, m] : S.users_of_edge(i, j)) {
      auto uit = pair_index.find({k, m});
      if (uit != pair_index.end()) link_users[l].push_back(uit->second);
    }
  }

  std::vector<long> assign(pairs.size(), 0);
  std::vector<long> x(n), b(n);
  std::vector<std::vector<char>> e(n, std::vector<char>(n, 0));

  long best_obj = -1;
  std::vector<long> best_assign(pairs.size(), 0);
  long explored = 0;

  auto evaluate = [&]() -> long {  // objective, or -1 when infeasible
    std::fill(x.begin(), x.end(), 0L);
    std::fill(b.begin(), b.end(), 0L);
    for (auto& row : e) std::fill(row.begin(), row.end(), 0);
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      const long c = assign[p];
      if (c == 0) continue;
      x[pairs[p].i] += c;
      b[pairs[p].j] = std::max(b[pairs[p].j], c);
      e[pairs[p].i][pairs[p].j] = 1;
    }
    // Eq. 9: no shared backup for failure-dependent pairs.
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t i = 0; i < n; ++i) {
        if (i == k || !e[i][k]) continue;
        for (std::size_t j = i + 1; j < n; ++j) {
          if (j == k || !e[j][k]) continue;
          if (I.at(i, j)) return -1;
        }
      }
    }
    // Eqs. 11-12 in min-form, with integral r existence.
    for (std::size_t l = 0; l < links.size(); ++l) {
      long worst = 0;
      for (const int p : link_users[l]) {
        worst = std::max(worst, assign[static_cast<std::size_t>(p)]);
      }
      const long c = link_pair[l] < 0
                         ? 0
                         : assign[static_cast<std::size_t>(link_pair[l])];
      const auto [i, j] = links[l];
      const double room =
          std::floor(alpha_w[i][j] -
                     (gamma ? B * static_cast<double>(worst) : 0.0) + 1e-9);
      if (room < 0.0) return -1;                       // r >= 0 impossible
      if (std::ceil(B * static_cast<double>(c) - 1e-9) > room) return -1;
    }
    long obj = 0, active = 0;
    for (std::size_t i = 0; i < n; ++i) {
      obj += x[i] - b[i];
      if (x[i] + b[i] > 0) ++active;
    }
    if (params.umax && active > *params.umax) return -1;
    return obj;
  };

  for (;;) {
    ++explored;
    const long obj = evaluate();
    if (obj > best_obj) {
      best_obj = obj;
      best_assign = assign;
    }
    std::size_t p = 0;
    while (p < pairs.size() && assign[p] == pairs[p].bound) {
      assign[p] = 0;
      ++p;
    }
    if (p == pairs.size()) break;
    ++assign[p];
  }

  if (best_obj < 0) {
    throw std::logic_error("oracle found no feasible assignment");
  }

  // Materialize the winning assignment as a full PlacementSolution.
  PlacementSolution sol = zero_solution(topo);
  assign = best_assign;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    if (assign[p] == 0) continue;
    const auto& pr = pairs[p];
    sol.c[{topo.sites[pr.i].id, topo.sites[pr.j].id}] = assign[p];
    sol.e[{topo.sites[pr.i].id, topo.sites[pr.j].id}] = 1;
    sol.x[topo.sites[pr.i].id] += assign[p];
    sol.b[topo.sites[pr.j].id] =
        std::max(sol.b[topo.sites[pr.j].id], assign[p]);
  }
  for (const Site& s : topo.sites) {
    sol.u[s.id] = (sol.x[s.id] + sol.b[s.id] > 0) ? 1 : 0;
  }
  for (std::size_t l = 0; l < links.size(); ++l) {
    long worst = 0;
    for (const int p : link_users[l]) {
      worst = std::max(worst, assign[static_cast<std::size_t>(p)]);
    }
    const auto [i, j] = links[l];
    const double room =
        std::floor(alpha_w[i][j] -
                   (gamma ? B * static_cast<double>(worst) : 0.0) + 1e-9);
    const long r = std::max(0L, static_cast<long>(room));
    if (r != 0) sol.r[{topo.sites[i].id, topo.sites[j].id}] = r;
  }
  sol.recompute_objective();

  const auto violations = check_solution(sol, topo, I, S, params);
  if (!violations.empty()) {
    throw std::logic_error("oracle produced a solution failing the audit: " +
                           violations.front().equation);
  }

  SolveOutcome out;
  out.solution = std::move(sol);
  out.status = SolveStatus::OPTIMAL;
  out.nodes_explored = explored;
  out.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return out;
}

/// Greedy heuristic: repeatedly add one replication c_ij += 1, choosing the
/// pair with the largest objective gain (sharing an existing backup gains 1,
/// opening a new backup slot gains 0), first-in-pair-order on ties, until no
/// increment keeps the model satisfied.
inline SolveOutcome solve_greedy(const MilpModel& model) {
  const auto t0 = std::chrono::steady_clock::now();
  const Milp& milp = model.milp;
  const std::size_t nv = milp.vars.size();
  const std::size_t n = model.sites.size();

  std::map<std::pair<std::size_t, std::size_t>, long> c;
  for (const auto& p : model.pairs) c[p] = 0;

  auto derive = [&](std::vector<double>& v) {
    v.assign(nv, 0.0);
    for (const auto& [key, cnt] : c) {
      v[static_cast<std::size_t>(model.c.at(key))] =
          static_cast<double>(cnt);
      if (cnt > 0) v[static_cast<std::size_t>(model.e.at(key))] = 1.0;
    }
    for (std::size_t i = 0; i < n; ++i) {
      long xi = 0;
      long bi = 0;
      for (const auto& [key, cnt] : c) {
        if (key.first == i) xi += cnt;
        if (key.second == i) bi = std::max(bi, cnt);
      }
      v[static_cast<std::size_t>(model.x[i])] = static_cast<double>(xi);
      v[static_cast<std::size_t>(model.b[i])] = static_cast<double>(bi);
      v[static_cast<std::size_t>(model.u[i])] = (xi + bi > 0) ? 1.0 : 0.0;
    }
    for (const auto& [key, yvar] : model.y) {
      const auto [k, i, j] = key;
      const double eik = v[static_cast<std::size_t>(model.e.at({i, k}))];
      const double ejk = v[static_cast<std::size_t>(model.e.at({j, k}))];
      v[static_cast<std::size_t>(yvar)] = eik * ejk;
    }
    // r maximal under its Eq.-12 rows (and its own bound).
    for (const auto& [key, rvar] : model.r) {
      const auto rj = static_cast<std::size_t>(rvar);
      double cap = milp.vars[rj].ub;
      for (const int row : model.eq12_rows.at(key)) {
        double others = 0.0;
        for (const LinTerm& t : milp.rows[static_cast<std::size_t>(row)]
                                    .terms) {
          if (t.var != rvar) {
            others += t.coef * v[static_cast<std::size_t>(t.var)];
          }
        }
        cap = std::min(cap, milp.rows[static_cast<std::size_t>(row)].rhs -
                               others);
      }
      v[rj] = std::max(0.0, std::floor(cap + 1e-9));
    }
  };

  std::vector<double> v;
  derive(v);
  if (detail::first_violated_row(milp, v) >= 0) {
    throw std::logic_error("greedy start point is infeasible");
  }
  long cur_obj = 0;
  long steps = 0;

  for (;;) {
    long best_delta = -1;
    const std::pair<std::size_t, std::size_t>* best_pair = nullptr;
    for (const auto& p : model.pairs) {
      if (c[p] + 1 > model.bounds.c_bound_of(p.first, p.second)) continue;
      ++c[p];
      derive(v);
      if (detail::first_violated_row(milp, v) < 0) {
        const long delta = std::lround(milp.objective_value(v)) - cur_obj;
        if (delta > best_delta) {
          best_delta = delta;
          best_pair = &p;
        }
      }
      --c[p];
    }
    if (best_pair == nullptr) break;
    ++c[*best_pair];
    cur_obj += best_delta;
    ++steps;
  }

  derive(v);
  SolveOutcome out;
  out.solution = extract_solution(model, v);
  out.status = SolveStatus::FEASIBLE;
  out.nodes_explored = steps;
  out.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return out;
}

}  // namespace wanplace
