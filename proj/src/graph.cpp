// Copyright 2026 The mvugpca Authors
// SPDX-License-Identifier: Apache-2.0

#include "mvugpca/graph.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <queue>
#include <set>
#include <utility>

#include "mvugpca/error.hpp"
#include "mvugpca/kernels.hpp"

namespace mvugpca::graph {

namespace {

const std::vector<Edge>& active_edges(const NeighborGraph& g) {
  return g.edges_gprime.empty() ? g.edges_g : g.edges_gprime;
}

const Edge* find_edge(const std::vector<Edge>& edges, int i, int j) {
  if (i > j) std::swap(i, j);
  const auto it = std::lower_bound(edges.begin(), edges.end(), std::pair{i, j},
                                   [](const Edge& e, const std::pair<int, int>& key) {
                                     return std::pair{e.i, e.j} < key;
                                   });
  if (it == edges.end() || it->i != i || it->j != j) return nullptr;
  return &*it;
}

// Same kernel as build_knn so that G and G′ weights agree bit for bit.
double squared_distance(const Eigen::MatrixXd& points, int i, int j) {
  const Eigen::VectorXd xi = points.row(i).transpose();
  const Eigen::VectorXd xj = points.row(j).transpose();
  return kernels::squared_distance({xi.data(), static_cast<std::size_t>(xi.size())},
                                   {xj.data(), static_cast<std::size_t>(xj.size())});
}

}  // namespace

double NeighborGraph::weight(int i, int j) const {
  const Edge* e = find_edge(active_edges(*this), i, j);
  if (!e) fail(ErrorKind::Graph, "no edge (" + std::to_string(i) + ", " + std::to_string(j) + ")");
  return e->weight;
}

bool NeighborGraph::has_edge_g(int i, int j) const { return find_edge(edges_g, i, j) != nullptr; }
bool NeighborGraph::has_edge_gprime(int i, int j) const { return find_edge(edges_gprime, i, j) != nullptr; }

NeighborGraph build_knn(const PointCloud& cloud, int k) {
  const int n = static_cast<int>(cloud.size());
  if (k < 1 || k > n - 1)
    fail(ErrorKind::Input, "k = " + std::to_string(k) + " out of range [1, " + std::to_string(n - 1) + "]");

  const Eigen::MatrixXd dist = kernels::pairwise_squared_distances(cloud.points);
  NeighborGraph g;
  g.n_vertices = n;
  g.k = k;
  g.neighbors.resize(static_cast<std::size_t>(n));
  std::set<std::pair<int, int>> pairs;
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int v = 0; v < n; ++v) {
    std::iota(order.begin(), order.end(), 0);
    order.erase(order.begin() + v);
    std::partial_sort(order.begin(), order.begin() + k, order.end(), [&](int a, int b) {
      return dist(v, a) != dist(v, b) ? dist(v, a) < dist(v, b) : a < b;
    });
    auto& nb = g.neighbors[static_cast<std::size_t>(v)];
    nb.assign(order.begin(), order.begin() + k);
    for (int u : nb) pairs.insert({std::min(u, v), std::max(u, v)});
    order.resize(static_cast<std::size_t>(n));
  }
  g.edges_g.reserve(pairs.size());
  for (const auto& [i, j] : pairs) g.edges_g.push_back({i, j, dist(i, j)});
  return g;
}

NeighborGraph augment_cliques(const NeighborGraph& graph, const PointCloud& cloud) {
  if (graph.n_vertices != cloud.size())
    fail(ErrorKind::Graph, "graph has " + std::to_string(graph.n_vertices) + " vertices but cloud has " +
                               std::to_string(cloud.size()) + " points");
  std::set<std::pair<int, int>> pairs;
  for (const auto& e : graph.edges_g) pairs.insert({e.i, e.j});
  for (int v = 0; v < graph.n_vertices; ++v) {
    std::vector<int> clique = graph.neighbors[static_cast<std::size_t>(v)];
    clique.push_back(v);
    for (std::size_t a = 0; a < clique.size(); ++a)
      for (std::size_t b = a + 1; b < clique.size(); ++b)
        pairs.insert({std::min(clique[a], clique[b]), std::max(clique[a], clique[b])});
  }
  NeighborGraph out = graph;
  // G edges keep the weights build_knn computed; only new pairs are measured.
  out.edges_gprime.clear();
  out.edges_gprime.reserve(pairs.size());
  for (const auto& [i, j] : pairs) {
    if (const Edge* e = find_edge(graph.edges_g, i, j)) {
      out.edges_gprime.push_back(*e);
    } else {
      out.edges_gprime.push_back({i, j, squared_distance(cloud.points, i, j)});
    }
  }
  return out;
}

Connectivity check_connected(const NeighborGraph& graph) {
  const int n = graph.n_vertices;
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
  for (const auto& e : graph.edges_g) {
    adj[static_cast<std::size_t>(e.i)].push_back(e.j);
    adj[static_cast<std::size_t>(e.j)].push_back(e.i);
  }
  Connectivity c;
  c.component.assign(static_cast<std::size_t>(n), -1);
  int next = 0;
  for (int s = 0; s < n; ++s) {
    if (c.component[static_cast<std::size_t>(s)] >= 0) continue;
    std::queue<int> q;
    q.push(s);
    c.component[static_cast<std::size_t>(s)] = next;
    while (!q.empty()) {
      const int v = q.front();
      q.pop();
      for (int u : adj[static_cast<std::size_t>(v)]) {
        if (c.component[static_cast<std::size_t>(u)] < 0) {
          c.component[static_cast<std::size_t>(u)] = next;
          q.push(u);
        }
      }
    }
    ++next;
  }
  c.n_components = std::max(next, 1);
  c.connected = next <= 1;
  return c;
}

std::vector<int> largest_component(const Connectivity& conn) {
  std::vector<int> sizes(static_cast<std::size_t>(conn.n_components), 0);
  for (int id : conn.component) ++sizes[static_cast<std::size_t>(id)];
  const int best = static_cast<int>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
  std::vector<int> out;
  for (std::size_t v = 0; v < conn.component.size(); ++v)
    if (conn.component[v] == best) out.push_back(static_cast<int>(v));
  return out;
}

std::string edge_list_text(const NeighborGraph& graph) {
  std::string out;
  char buf[64];
  for (const auto& e : active_edges(graph)) {
    std::snprintf(buf, sizeof buf, "%d %d %.17g\n", e.i, e.j, e.weight);
    out += buf;
  }
  return out;
}

}  // namespace mvugpca::graph
