#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "colearn/numerics/dense_vector.hpp"
#include "colearn/numerics/rng.hpp"

namespace colearn::topology {

// Undirected simple graph on nodes 0..n-1.
class Graph {
 public:
  Graph() = default;
  explicit Graph(std::size_t n) : n_(n), adj_(n * n, 0) {}

  std::size_t size() const noexcept { return n_; }
  void add_edge(std::size_t i, std::size_t j);
  bool has_edge(std::size_t i, std::size_t j) const { return adj_.at(i * n_ + j) != 0; }
  std::size_t degree(std::size_t i) const;
  std::size_t max_degree() const;
  std::size_t edge_count() const;
  bool is_connected() const;

 private:
  std::size_t n_ = 0;
  std::vector<std::uint8_t> adj_;
};

// Edge-list text: one "i j" pair per line, 1-based. Blank lines and lines
// starting with '#' are skipped. An optional "nodes N" line fixes the node
// count; otherwise it is the largest index seen.
Graph parse_edge_list(const std::string& text);
std::string to_edge_list(const Graph& g);

Graph complete_graph(std::size_t n);
Graph path_graph(std::size_t n);
Graph ring_graph(std::size_t n);
Graph star_graph(std::size_t n);
// Uniform random spanning tree plus each remaining edge with probability p.
Graph random_connected_graph(std::size_t n, double p, RngStream& rng);

// Dense row-major n x n matrix.
class WeightMatrix {
 public:
  WeightMatrix() = default;
  explicit WeightMatrix(std::size_t n, double fill = 0.0) : n_(n), w_(n * n, fill) {}

  std::size_t size() const noexcept { return n_; }
  double& operator()(std::size_t i, std::size_t j) { return w_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return w_[i * n_ + j]; }

  static WeightMatrix identity(std::size_t n);
  // Every entry 1/n.
  static WeightMatrix uniform(std::size_t n);

 private:
  std::size_t n_ = 0;
  std::vector<double> w_;
};

// W = I - (D - A) / (d_max + 1).
WeightMatrix laplacian_weights(const Graph& g);

bool is_doubly_stochastic(const WeightMatrix& w, double tol = 1e-12);
bool is_symmetric(const WeightMatrix& w, double tol = 0.0);

struct SpectralGapOptions {
  std::size_t max_iterations = 1000;
  double rel_tol = 1e-12;
};

// 1 - |lambda_2| by power iteration on W restricted to the complement of the all-ones vector.
double spectral_gap(const WeightMatrix& w, const SpectralGapOptions& opt = {});

// theta_i + sum_{j != i} W_ij (theta_j - theta_i), which equals sum_j W_ij theta_j
// for row-stochastic W and leaves identical models untouched.
std::vector<DenseVector> consensus_step(const std::vector<DenseVector>& models, const WeightMatrix& w);

// sum_i ||theta_i - mean||^2.
double disagreement(const std::vector<DenseVector>& models);

}  // namespace colearn::topology
