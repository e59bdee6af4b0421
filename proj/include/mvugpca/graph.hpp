// Copyright 2026 The mvugpca Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "mvugpca/types.hpp"

namespace mvugpca::graph {

/// Undirected edge with i < j and its squared Euclidean length.
struct Edge {
  int i = 0;
  int j = 0;
  double weight = 0.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// k-NN graph G and its clique-augmented supergraph G′. Edge lists are
/// sorted by (i, j) and hold each unordered pair once.
struct NeighborGraph {
  int n_vertices = 0;
  int k = 0;
  std::vector<std::vector<int>> neighbors;  // N_v(k), nearest first
  std::vector<Edge> edges_g;
  std::vector<Edge> edges_gprime;           // empty until augment_cliques

  /// Weight of (i, j) in G′ (or G if not yet augmented); throws if absent.
  double weight(int i, int j) const;
  bool has_edge_g(int i, int j) const;
  bool has_edge_gprime(int i, int j) const;
};

/// Each vertex selects its k nearest neighbours (ties to the lower index);
/// an edge exists when either endpoint selects the other.
NeighborGraph build_knn(const PointCloud& cloud, int k);

/// Adds every pair inside N_v(k) ∪ {v} for each v, weighted from the cloud.
NeighborGraph augment_cliques(const NeighborGraph& graph, const PointCloud& cloud);

struct Connectivity {
  bool connected = true;
  int n_components = 1;
  std::vector<int> component;  // per vertex, numbered by first appearance
};

/// Connectivity of G (not G′).
Connectivity check_connected(const NeighborGraph& graph);

/// Vertices of the largest component (ties go to the lower component id),
/// ascending.
std::vector<int> largest_component(const Connectivity& conn);

/// "i j weight" per G′ edge (G when not augmented), 17 significant digits.
std::string edge_list_text(const NeighborGraph& graph);

}  // namespace mvugpca::graph
