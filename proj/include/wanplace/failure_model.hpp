#pragma once

#include <cstdint>
#include <queue>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "wanplace/topology.hpp"

namespace wanplace {

/// A single failure: one site or one link (both directions) goes down.
struct FailureEvent {
  enum class Kind { Site, Link };
  Kind kind = Kind::Site;
  std::string site;          // Kind::Site
  std::string link_a;        // Kind::Link
  std::string link_b;

  static FailureEvent site_failure(std::string id) {
    FailureEvent e;
    e.kind = Kind::Site;
    e.site = std::move(id);
    return e;
  }
  static FailureEvent link_failure(std::string a, std::string b) {
    FailureEvent e;
    e.kind = Kind::Link;
    e.link_a = std::move(a);
    e.link_b = std::move(b);
    return e;
  }

  std::string describe() const {
    if (kind == Kind::Site) return "site(" + site + ")";
    return "link(" + link_a + "," + link_b + ")";
  }
};

/// Every single-failure event of a topology: each site, then each link, in
/// declaration order.
inline std::vector<FailureEvent> all_single_failure_events(
    const Topology& topo) {
  std::vector<FailureEvent> events;
  events.reserve(topo.sites.size() + topo.links.size());
  for (const Site& s : topo.sites) {
    events.push_back(FailureEvent::site_failure(s.id));
  }
  for (const Link& l : topo.links) {
    events.push_back(FailureEvent::link_failure(l.a, l.b));
  }
  return events;
}

/// Sites left without a path to any surviving gateway after `event`, plus the
/// failed site itself for site failures.
inline std::set<std::string> unreachable_sites(const Topology& topo,
                                               const FailureEvent& event) {
  const std::size_t n = topo.site_count();
  std::size_t failed_site = n;  // n = no site failed
  std::size_t failed_a = n, failed_b = n;
  if (event.kind == FailureEvent::Kind::Site) {
    failed_site = topo.site_index(event.site);
  } else {
    failed_a = topo.site_index(event.link_a);
    failed_b = topo.site_index(event.link_b);
    if (topo.find_link(event.link_a, event.link_b) == nullptr) {
      throw std::out_of_range("no link between " + event.link_a + " and " +
                              event.link_b);
    }
  }

  // Residual adjacency after removing the failed element. A failed link is
  // down in both directions.
  std::vector<std::vector<std::size_t>> adj(n);
  for (const Link& l : topo.links) {
    const std::size_t ia = topo.site_index(l.a);
    const std::size_t ib = topo.site_index(l.b);
    if (ia == failed_site || ib == failed_site) continue;
    if ((ia == failed_a && ib == failed_b) ||
        (ia == failed_b && ib == failed_a)) {
      continue;
    }
    adj[ia].push_back(ib);
    adj[ib].push_back(ia);
  }

  // Reachability from every surviving gateway.
  std::vector<bool> reached(n, false);
  std::queue<std::size_t> frontier;
  for (std::size_t i = 0; i < n; ++i) {
    if (topo.sites[i].gateway && i != failed_site) {
      reached[i] = true;
      frontier.push(i);
    }
  }
  while (!frontier.empty()) {
    const std::size_t u = frontier.front();
    frontier.pop();
    for (std::size_t v : adj[u]) {
      if (!reached[v]) {
        reached[v] = true;
        frontier.push(v);
      }
    }
  }

  std::set<std::string> out;
  for (std::size_t i = 0; i < n; ++i) {
    if (i == failed_site || !reached[i]) out.insert(topo.sites[i].id);
  }
  return out;
}

/// Symmetric binary matrix with unit diagonal: entry (i, j) is 1 iff sites i
/// and j can become unreachable under the same single failure.
struct FailureIndependenceMatrix {
  std::vector<std::string> order;
  std::vector<std::vector<std::uint8_t>> entries;

  std::uint8_t at(std::size_t i, std::size_t j) const { return entries[i][j]; }

  std::uint8_t at(std::string_view a, std::string_view b) const {
    return entries[index_of(a)][index_of(b)];
  }

  std::size_t index_of(std::string_view id) const {
    for (std::size_t i = 0; i < order.size(); ++i) {
      if (order[i] == id) return i;
    }
    throw std::out_of_range("unknown site id: " + std::string(id));
  }

  std::string to_csv() const {
    std::ostringstream os;
    for (const std::string& id : order) os << "," << id;
    os << "\n";
    for (std::size_t i = 0; i < order.size(); ++i) {
      os << order[i];
      for (std::size_t j = 0; j < order.size(); ++j) {
        os << "," << int(entries[i][j]);
      }
      os << "\n";
    }
    return os.str();
  }
};

/// Builds the matrix by enumerating every single site and link failure.
inline FailureIndependenceMatrix build_independence_matrix(
    const Topology& topo) {
  const std::size_t n = topo.site_count();
  FailureIndependenceMatrix m;
  m.order.reserve(n);
  for (const Site& s : topo.sites) m.order.push_back(s.id);
  m.entries.assign(n, std::vector<std::uint8_t>(n, 0));
  for (std::size_t i = 0; i < n; ++i) m.entries[i][i] = 1;

  for (const FailureEvent& event : all_single_failure_events(topo)) {
    const std::set<std::string> down = unreachable_sites(topo, event);
    std::vector<std::size_t> idx;
    idx.reserve(down.size());
    for (const std::string& id : down) idx.push_back(topo.site_index(id));
    for (std::size_t a : idx) {
      for (std::size_t b : idx) {
        m.entries[a][b] = 1;
      }
    }
  }
  return m;
}

}  // namespace wanplace
