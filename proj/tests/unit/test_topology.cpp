#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>

#include "colearn/error.hpp"
#include "colearn/topology/graph.hpp"
#include "test_support.hpp"

using namespace colearn;
using namespace colearn::topology;
using test_support::random_vector;

namespace {

Eigen::MatrixXd to_eigen(const WeightMatrix& w) {
  Eigen::MatrixXd m(w.size(), w.size());
  for (std::size_t i = 0; i < w.size(); ++i)
    for (std::size_t j = 0; j < w.size(); ++j) m(i, j) = w(i, j);
  return m;
}

// Second largest eigenvalue magnitude of a symmetric stochastic matrix.
double oracle_lambda2(const WeightMatrix& w) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(to_eigen(w));
  std::vector<double> mags;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) mags.push_back(std::abs(es.eigenvalues()(i)));
  std::sort(mags.rbegin(), mags.rend());
  return mags.at(1);
}

std::vector<DenseVector> random_models(std::size_t n, std::size_t d, RngStream& rng) {
  std::vector<DenseVector> m;
  for (std::size_t i = 0; i < n; ++i) m.push_back(random_vector(d, rng));
  return m;
}

}  // namespace

TEST(laplacian_weights, complete_graph_k3_is_uniform) {
  const WeightMatrix w = laplacian_weights(complete_graph(3));
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(w(i, j), 1.0 / 3.0, 1e-15);
}

TEST(laplacian_weights, edgeless_graph_is_identity) {
  const WeightMatrix w = laplacian_weights(Graph(4));
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) EXPECT_EQ(w(i, j), i == j ? 1.0 : 0.0);
}

TEST(laplacian_weights, path_of_three) {
  // d_max = 2: W = I - (D - A) / 3.
  const WeightMatrix w = laplacian_weights(path_graph(3));
  const double t = 1.0 / 3.0;
  const double expected[3][3] = {{2 * t, t, 0.0}, {t, t, t}, {0.0, t, 2 * t}};
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(w(i, j), expected[i][j], 1e-15);
}

TEST(laplacian_weights, random_connected_graphs_are_doubly_stochastic_and_symmetric) {
  RngStream rng(1, "graphs");
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.uniform_index(31);
    const Graph g = random_connected_graph(n, rng.uniform(0.0, 0.5), rng);
    ASSERT_TRUE(g.is_connected());
    const WeightMatrix w = laplacian_weights(g);
    EXPECT_TRUE(is_doubly_stochastic(w));
    EXPECT_TRUE(is_symmetric(w));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (i != j && !g.has_edge(i, j)) EXPECT_EQ(w(i, j), 0.0);
  }
}

TEST(is_doubly_stochastic, rejects_bad_matrices) {
  WeightMatrix w = WeightMatrix::identity(3);
  EXPECT_TRUE(is_doubly_stochastic(w));
  w(0, 1) = 0.1;
  EXPECT_FALSE(is_doubly_stochastic(w));
  WeightMatrix neg(2);
  neg(0, 0) = 1.5;
  neg(0, 1) = -0.5;
  neg(1, 0) = -0.5;
  neg(1, 1) = 1.5;
  EXPECT_FALSE(is_doubly_stochastic(neg));
}

TEST(spectral_gap, examples) {
  EXPECT_NEAR(spectral_gap(WeightMatrix::uniform(3)), 1.0, 1e-15);
  EXPECT_NEAR(spectral_gap(WeightMatrix::identity(5)), 0.0, 1e-15);
  const WeightMatrix ring4 = laplacian_weights(ring_graph(4));
  EXPECT_NEAR(spectral_gap(ring4), 1.0 - oracle_lambda2(ring4), 1e-8);
  EXPECT_NEAR(spectral_gap(ring4), 2.0 / 3.0, 1e-8);
}

TEST(spectral_gap, matches_eigensolver_on_small_graphs) {
  RngStream rng(2, "gap");
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 3 + rng.uniform_index(14);
    const WeightMatrix w = laplacian_weights(random_connected_graph(n, 0.3, rng));
    SpectralGapOptions opt;
    opt.max_iterations = 200000;
    opt.rel_tol = 0.0;
    EXPECT_NEAR(spectral_gap(w, opt), 1.0 - oracle_lambda2(w), 1e-6) << "n=" << n;
  }
  for (std::size_t n : {5u, 8u, 16u}) {
    const WeightMatrix w = laplacian_weights(ring_graph(n));
    EXPECT_NEAR(spectral_gap(w), 1.0 - oracle_lambda2(w), 1e-8) << "ring " << n;
  }
}

TEST(consensus_step, identity_and_uniform_weights) {
  RngStream rng(3, "cons");
  const auto models = random_models(5, 7, rng);
  const auto same = consensus_step(models, WeightMatrix::identity(5));
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(same[i], models[i]);

  const auto mixed = consensus_step(models, WeightMatrix::uniform(5));
  DenseVector avg(7);
  for (const auto& m : models) avg += m;
  avg *= 0.2;
  for (const auto& m : mixed) EXPECT_LE((m - avg).norm_inf(), 1e-14);

  std::vector<DenseVector> identical(4, models[0]);
  for (const auto& m : consensus_step(identical, WeightMatrix::uniform(4))) EXPECT_EQ(m, models[0]);
}

TEST(consensus_step, preserves_mean_under_doubly_stochastic_weights) {
  RngStream rng(4, "mean");
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + rng.uniform_index(20);
    const WeightMatrix w = laplacian_weights(random_connected_graph(n, 0.2, rng));
    const auto models = random_models(n, 6, rng);
    const auto next = consensus_step(models, w);
    DenseVector before(6), after(6);
    for (std::size_t i = 0; i < n; ++i) {
      before += models[i];
      after += next[i];
    }
    EXPECT_LE((before - after).norm_inf(), 1e-12);
  }
}

TEST(consensus_step, matches_matrix_product) {
  RngStream rng(5, "prod");
  const WeightMatrix w = laplacian_weights(random_connected_graph(9, 0.3, rng));
  const auto models = random_models(9, 4, rng);
  const auto next = consensus_step(models, w);
  for (std::size_t i = 0; i < 9; ++i) {
    DenseVector expect(4);
    for (std::size_t j = 0; j < 9; ++j) expect.axpy(w(i, j), models[j]);
    EXPECT_LE((next[i] - expect).norm_inf(), 1e-13);
  }
}

TEST(consensus_step, disagreement_decays_at_lambda2_rate) {
  RngStream rng(6, "decay");
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 4 + rng.uniform_index(12);
    const WeightMatrix w = laplacian_weights(random_connected_graph(n, 0.25, rng));
    const double lambda2 = oracle_lambda2(w);
    auto models = random_models(n, 3, rng);
    const double d0 = disagreement(models);
    for (int k = 1; k <= 30; ++k) {
      models = consensus_step(models, w);
      EXPECT_LE(disagreement(models), std::pow(lambda2, 2 * k) * d0 * (1.0 + 1e-9) + 1e-280);
    }
  }
}

TEST(consensus_step, dimension_mismatch_throws) {
  std::vector<DenseVector> models{DenseVector(3), DenseVector(4)};
  EXPECT_THROW(consensus_step(models, WeightMatrix::identity(2)), ContractViolation);
  EXPECT_THROW(consensus_step({DenseVector(3)}, WeightMatrix::identity(2)), ContractViolation);
}

TEST(edge_list, parse_and_round_trip) {
  const Graph g = parse_edge_list("# ring\n1 2\n2 3\n\n3 1\n");
  EXPECT_EQ(g.size(), 3u);
  EXPECT_EQ(g.edge_count(), 3u);
  EXPECT_TRUE(g.has_edge(0, 2));
  const Graph h = parse_edge_list("nodes 5\n1 2\n");
  EXPECT_EQ(h.size(), 5u);
  EXPECT_FALSE(h.is_connected());
  const Graph r = parse_edge_list(to_edge_list(h));
  EXPECT_EQ(r.size(), 5u);
  EXPECT_EQ(r.edge_count(), 1u);
}

TEST(edge_list, errors_name_the_line) {
  try {
    parse_edge_list("1 2\n2 2\n");
    FAIL();
  } catch (const ContractViolation& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
  EXPECT_THROW(parse_edge_list("0 1\n"), ContractViolation);
  EXPECT_THROW(parse_edge_list("1 x\n"), ContractViolation);
  EXPECT_THROW(parse_edge_list("1 2 3\n"), ContractViolation);
  EXPECT_THROW(parse_edge_list("nodes 2\n1 3\n"), ContractViolation);
}
