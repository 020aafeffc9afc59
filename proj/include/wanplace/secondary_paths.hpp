#pragma once

#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <queue>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "wanplace/topology.hpp"

namespace wanplace {

/// Tolerance when comparing summed link latencies.
inline constexpr double kLatencyEpsMs = 1e-9;

/// Protection path for one replication link: the latency-shortest route from
/// `source` to `target` that avoids the direct link between them.
struct SecondaryPath {
  std::string source;
  std::string target;
  std::vector<std::string> hops;  // starts at source, ends at target
  double latency_ms = 0.0;
};

/// Sum of link latencies along the hops of a path.
inline double path_latency(const SecondaryPath& path, const Topology& topo) {
  if (path.hops.size() < 2) {
    throw std::invalid_argument("path must contain at least two hops");
  }
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < path.hops.size(); ++i) {
    const Link* l = topo.find_link(path.hops[i], path.hops[i + 1]);
    if (l == nullptr) {
      throw std::invalid_argument("hops " + path.hops[i] + " and " +
                                  path.hops[i + 1] + " are not linked");
    }
    total += l->latency_ms;
  }
  return total;
}

/// Secondary paths for every ordered adjacent pair (k, m). A pair maps to
/// nullopt when the replication link is a bridge.
struct SecondaryPathSet {
  std::vector<std::string> order;  // site ids, topology order
  std::map<std::pair<std::size_t, std::size_t>, std::optional<SecondaryPath>>
      paths;
  // Directed edge (i, j) -> pairs (k, m) whose secondary path traverses it.
  std::map<std::pair<std::size_t, std::size_t>,
           std::vector<std::pair<std::size_t, std::size_t>>>
      edge_users;

  /// The k -> m secondary path, or nullptr when absent or not adjacent.
  const SecondaryPath* path(std::size_t k, std::size_t m) const {
    auto it = paths.find({k, m});
    if (it == paths.end() || !it->second) return nullptr;
    return &*it->second;
  }

  /// s^km_ij: whether directed edge (i, j) lies on the k -> m secondary path.
  bool on_path(std::size_t k, std::size_t m, std::size_t i,
               std::size_t j) const {
    auto it = edge_users.find({i, j});
    if (it == edge_users.end()) return false;
    for (const auto& km : it->second) {
      if (km.first == k && km.second == m) return true;
    }
    return false;
  }

  const std::vector<std::pair<std::size_t, std::size_t>>& users_of_edge(
      std::size_t i, std::size_t j) const {
    static const std::vector<std::pair<std::size_t, std::size_t>> kEmpty;
    auto it = edge_users.find({i, j});
    return it == edge_users.end() ? kEmpty : it->second;
  }

  /// One line per ordered pair: "k,m,hop:hop:...,latency" or "k,m,ABSENT".
  std::string dump() const {
    std::ostringstream os;
    for (const auto& [km, path] : paths) {
      os << order[km.first] << "," << order[km.second] << ",";
      if (!path) {
        os << "ABSENT";
      } else {
        for (std::size_t i = 0; i < path->hops.size(); ++i) {
          if (i > 0) os << ":";
          os << path->hops[i];
        }
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.9g", path->latency_ms);
        os << "," << buf;
      }
      os << "\n";
    }
    return os.str();
  }
};

namespace detail {

struct PathCost {
  double latency = std::numeric_limits<double>::infinity();
  std::size_t hop_count = 0;

  bool reachable() const { return latency < std::numeric_limits<double>::infinity(); }
};

// Latency first, then hop count; latencies compare with a small tolerance so
// floating-point noise cannot flip a tie.
inline bool cost_less(const PathCost& a, const PathCost& b) {
  if (a.latency < b.latency - kLatencyEpsMs) return true;
  if (a.latency > b.latency + kLatencyEpsMs) return false;
  return a.hop_count < b.hop_count;
}

inline bool cost_equal(const PathCost& a, const PathCost& b) {
  return !cost_less(a, b) && !cost_less(b, a);
}

// Dijkstra over (latency, hop count) from `start`, with the undirected link
// between `skip_a` and `skip_b` removed.
inline std::vector<PathCost> dijkstra_without_link(
    const Topology& topo, const std::vector<std::vector<Topology::Edge>>& adj,
    std::size_t start, std::size_t skip_a, std::size_t skip_b) {
  const std::size_t n = topo.site_count();
  std::vector<PathCost> dist(n);
  dist[start] = {0.0, 0};
  using QItem = std::tuple<double, std::size_t, std::size_t>;  // lat, hops, node
  std::priority_queue<QItem, std::vector<QItem>, std::greater<>> pq;
  pq.emplace(0.0, 0, start);
  std::vector<bool> done(n, false);
  while (!pq.empty()) {
    const auto [lat, hops, u] = pq.top();
    pq.pop();
    if (done[u]) continue;
    done[u] = true;
    for (const Topology::Edge& e : adj[u]) {
      if ((u == skip_a && e.to == skip_b) || (u == skip_b && e.to == skip_a)) {
        continue;
      }
      const PathCost cand{lat + e.latency_ms, hops + 1};
      if (cost_less(cand, dist[e.to])) {
        dist[e.to] = cand;
        pq.emplace(cand.latency, cand.hop_count, e.to);
      }
    }
  }
  return dist;
}

}  // namespace detail

/// Step 1 of the placement scheme: for each ordered adjacent pair (k, m),
/// the minimum-latency path from k to m in the graph with link (k, m)
/// removed. Ties break toward fewer hops, then the lexicographically
/// smallest site-id sequence, so output is reproducible.
inline SecondaryPathSet compute_secondary_paths(const Topology& topo) {
  const std::size_t n = topo.site_count();
  const auto adj = topo.build_adjacency();
  SecondaryPathSet out;
  out.order.reserve(n);
  for (const Site& s : topo.sites) out.order.push_back(s.id);

  for (const Link& l : topo.links) {
    const std::size_t ia = topo.site_index(l.a);
    const std::size_t ib = topo.site_index(l.b);
    for (const auto& [k, m] : {std::pair{ia, ib}, std::pair{ib, ia}}) {
      const auto dist_k = detail::dijkstra_without_link(topo, adj, k, k, m);
      if (!dist_k[m].reachable()) {
        out.paths[{k, m}] = std::nullopt;
        continue;
      }
      const auto dist_m = detail::dijkstra_without_link(topo, adj, m, k, m);
      const detail::PathCost total = dist_k[m];

      // Walk the shortest-path DAG from k, always taking the smallest-id
      // successor that still completes a minimum-cost path to m. Hop counts
      // grow strictly along the walk, so it terminates at m with no repeats.
      SecondaryPath path;
      path.source = topo.sites[k].id;
      path.target = topo.sites[m].id;
      path.hops.push_back(path.source);
      std::size_t cur = k;
      detail::PathCost prefix{0.0, 0};
      while (cur != m) {
        std::size_t best = n;
        double best_edge_latency = 0.0;
        for (const Topology::Edge& e : adj[cur]) {
          if ((cur == k && e.to == m) || (cur == m && e.to == k)) continue;
          const detail::PathCost via{prefix.latency + e.latency_ms +
                                         dist_m[e.to].latency,
                                     prefix.hop_count + 1 + dist_m[e.to].hop_count};
          if (dist_m[e.to].reachable() && detail::cost_equal(via, total)) {
            const std::string& cand_id = topo.sites[e.to].id;
            if (best == n || cand_id < topo.sites[best].id) {
              best = e.to;
              best_edge_latency = e.latency_ms;
            }
          }
        }
        if (best == n) {
          throw std::logic_error("secondary path reconstruction failed");
        }
        prefix.latency += best_edge_latency;
        prefix.hop_count += 1;
        cur = best;
        path.hops.push_back(topo.sites[cur].id);
      }
      path.latency_ms = path_latency(path, topo);
      out.paths[{k, m}] = std::move(path);
    }
  }

  // Directed-edge index used by the bandwidth constraints.
  for (const auto& [km, path] : out.paths) {
    if (!path) continue;
    for (std::size_t h = 0; h + 1 < path->hops.size(); ++h) {
      const std::size_t i = topo.site_index(path->hops[h]);
      const std::size_t j = topo.site_index(path->hops[h + 1]);
      out.edge_users[{i, j}].push_back(km);
    }
  }
  return out;
}

}  // namespace wanplace
