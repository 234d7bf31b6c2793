#include "colearn/topology/graph.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "colearn/error.hpp"

namespace colearn::topology {

void Graph::add_edge(std::size_t i, std::size_t j) {
  COLEARN_REQUIRE(i < n_ && j < n_, "Graph::add_edge: node out of range");
  COLEARN_REQUIRE(i != j, "Graph::add_edge: self-loops are not allowed");
  adj_[i * n_ + j] = 1;
  adj_[j * n_ + i] = 1;
}

std::size_t Graph::degree(std::size_t i) const {
  std::size_t d = 0;
  for (std::size_t j = 0; j < n_; ++j) d += adj_[i * n_ + j];
  return d;
}

std::size_t Graph::max_degree() const {
  std::size_t m = 0;
  for (std::size_t i = 0; i < n_; ++i) m = std::max(m, degree(i));
  return m;
}

std::size_t Graph::edge_count() const {
  std::size_t e = 0;
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = i + 1; j < n_; ++j) e += adj_[i * n_ + j];
  return e;
}

bool Graph::is_connected() const {
  if (n_ <= 1) return true;
  std::vector<std::uint8_t> seen(n_, 0);
  std::vector<std::size_t> stack{0};
  seen[0] = 1;
  std::size_t count = 1;
  while (!stack.empty()) {
    const std::size_t u = stack.back();
    stack.pop_back();
    for (std::size_t v = 0; v < n_; ++v) {
      if (adj_[u * n_ + v] && !seen[v]) {
        seen[v] = 1;
        ++count;
        stack.push_back(v);
      }
    }
  }
  return count == n_;
}

Graph parse_edge_list(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  std::size_t declared = 0, largest = 0, line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    std::string a, b, extra;
    ls >> a >> b;
    const bool has_extra = static_cast<bool>(ls >> extra);
    auto fail = [&](const std::string& why) {
      throw ContractViolation("edge list line " + std::to_string(line_no) + ": " + why);
    };
    auto to_index = [&](const std::string& s) -> std::size_t {
      if (s.empty() || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; }))
        fail("expected a positive integer, got '" + s + "'");
      return static_cast<std::size_t>(std::stoull(s));
    };
    if (b.empty() || has_extra) fail("expected exactly two fields");
    if (a == "nodes") {
      declared = to_index(b);
      continue;
    }
    const std::size_t i = to_index(a), j = to_index(b);
    if (i == 0 || j == 0) fail("node indices are 1-based");
    if (i == j) fail("self-loop");
    largest = std::max({largest, i, j});
    edges.emplace_back(i - 1, j - 1);
  }
  if (declared != 0 && largest > declared)
    throw ContractViolation("edge list: index " + std::to_string(largest) + " exceeds declared node count");
  Graph g(declared != 0 ? declared : largest);
  for (const auto& [i, j] : edges) g.add_edge(i, j);
  return g;
}

std::string to_edge_list(const Graph& g) {
  std::ostringstream out;
  out << "nodes " << g.size() << "\n";
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = i + 1; j < g.size(); ++j)
      if (g.has_edge(i, j)) out << i + 1 << " " << j + 1 << "\n";
  return out.str();
}

Graph complete_graph(std::size_t n) {
  Graph g(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) g.add_edge(i, j);
  return g;
}

Graph path_graph(std::size_t n) {
  Graph g(n);
  for (std::size_t i = 0; i + 1 < n; ++i) g.add_edge(i, i + 1);
  return g;
}

Graph ring_graph(std::size_t n) {
  Graph g = path_graph(n);
  if (n >= 3) g.add_edge(n - 1, 0);
  return g;
}

Graph star_graph(std::size_t n) {
  Graph g(n);
  for (std::size_t i = 1; i < n; ++i) g.add_edge(0, i);
  return g;
}

Graph random_connected_graph(std::size_t n, double p, RngStream& rng) {
  Graph g(n);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  rng.shuffle(order);
  for (std::size_t k = 1; k < n; ++k) g.add_edge(order[k], order[rng.uniform_index(k)]);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (!g.has_edge(i, j) && rng.bernoulli(p)) g.add_edge(i, j);
  return g;
}

WeightMatrix WeightMatrix::identity(std::size_t n) {
  WeightMatrix w(n);
  for (std::size_t i = 0; i < n; ++i) w(i, i) = 1.0;
  return w;
}

WeightMatrix WeightMatrix::uniform(std::size_t n) {
  COLEARN_REQUIRE(n >= 1, "WeightMatrix::uniform: n must be positive");
  return WeightMatrix(n, 1.0 / static_cast<double>(n));
}

WeightMatrix laplacian_weights(const Graph& g) {
  COLEARN_REQUIRE(g.size() >= 1, "laplacian_weights: empty graph");
  const std::size_t n = g.size();
  const double denom = static_cast<double>(g.max_degree() + 1);
  WeightMatrix w(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) {
        w(i, i) = 1.0 - static_cast<double>(g.degree(i)) / denom;
      } else if (g.has_edge(i, j)) {
        w(i, j) = 1.0 / denom;
      }
    }
  }
  return w;
}

bool is_doubly_stochastic(const WeightMatrix& w, double tol) {
  const std::size_t n = w.size();
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0, col = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (w(i, j) < -tol) return false;
      row += w(i, j);
      col += w(j, i);
    }
    if (std::abs(row - 1.0) > tol || std::abs(col - 1.0) > tol) return false;
  }
  return true;
}

bool is_symmetric(const WeightMatrix& w, double tol) {
  for (std::size_t i = 0; i < w.size(); ++i)
    for (std::size_t j = i + 1; j < w.size(); ++j)
      if (std::abs(w(i, j) - w(j, i)) > tol) return false;
  return true;
}

double spectral_gap(const WeightMatrix& w, const SpectralGapOptions& opt) {
  const std::size_t n = w.size();
  COLEARN_REQUIRE(n >= 1, "spectral_gap: empty matrix");
  if (n == 1) return 1.0;

  auto deflate = [n](std::vector<double>& x) {
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);
    double norm = 0.0;
    for (double& v : x) {
      v -= mean;
      norm += v * v;
    }
    return std::sqrt(norm);
  };

  RngStream rng(0x5eed, "spectral_gap");
  std::vector<double> x(n), y(n);
  for (double& v : x) v = rng.normal();
  double norm = deflate(x);
  for (double& v : x) v /= norm;

  double estimate = 0.0;
  for (std::size_t it = 0; it < opt.max_iterations; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += w(i, j) * x[j];
      y[i] = s;
    }
    norm = deflate(y);
    const double previous = estimate;
    estimate = norm;  // x has unit norm
    if (norm == 0.0) break;
    for (std::size_t i = 0; i < n; ++i) x[i] = y[i] / norm;
    if (it > 0 && std::abs(estimate - previous) <= opt.rel_tol * estimate) break;
  }
  return 1.0 - estimate;
}

std::vector<DenseVector> consensus_step(const std::vector<DenseVector>& models, const WeightMatrix& w) {
  const std::size_t n = models.size();
  COLEARN_REQUIRE(n == w.size(), "consensus_step: model count does not match weight matrix");
  for (const auto& m : models) require_same_dim(models.front(), m, "consensus_step");
  std::vector<DenseVector> out = models;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i || w(i, j) == 0.0) continue;
      const double wij = w(i, j);
      for (std::size_t k = 0; k < out[i].dim(); ++k) out[i][k] += wij * (models[j][k] - models[i][k]);
    }
  }
  return out;
}

double disagreement(const std::vector<DenseVector>& models) {
  COLEARN_REQUIRE(!models.empty(), "disagreement: no models");
  RunningMean mean(models.front().dim());
  for (const auto& m : models) mean.add(m);
  double s = 0.0;
  for (const auto& m : models) s += (m - mean.mean()).norm2_squared();
  return s;
}

}  // namespace colearn::topology
