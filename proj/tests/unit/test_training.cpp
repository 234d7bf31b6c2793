#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>

#include "colearn/compression/quantize.hpp"
#include "colearn/error.hpp"
#include "colearn/training/trainer.hpp"
#include "test_support.hpp"

using namespace colearn;
using namespace colearn::training;
using test_support::random_vector;

namespace {

Problem regression_problem(std::size_t devices, std::size_t d, std::size_t samples, std::uint64_t seed) {
  RngStream rng(seed, "data");
  Dataset data = make_regression_data(samples, d, 0.1, rng);
  Problem p;
  p.loss = LossModel::quadratic(d);
  p.shards = make_shards(data, devices, ShardMode::iid, rng);
  p.eval = data;
  p.initial = DenseVector(d);
  return p;
}

Problem classification_problem(std::size_t devices, std::size_t samples, ShardMode mode, std::uint64_t seed) {
  RngStream rng(seed, "data");
  Dataset data = make_classification_data(samples, 4, 3, 2.0, rng);
  auto split = split_holdout(data, 0.2, rng);
  Problem p;
  p.loss = LossModel::logistic(5, 3);
  p.shards = make_shards(split.train, devices, mode, rng);
  p.eval = split.eval;
  p.initial = DenseVector(p.loss.param_dim());
  return p;
}

// Same samples on every device.
Problem identical_shards(const Problem& base, std::size_t devices) {
  Problem p = base;
  DataShard all;
  for (const auto& s : base.shards) all.samples.insert(all.samples.end(), s.samples.begin(), s.samples.end());
  p.shards.assign(devices, all);
  for (std::size_t i = 0; i < devices; ++i) p.shards[i].owner = i;
  return p;
}

// Least-squares minimizer over the union of shards via the normal equations.
Eigen::VectorXd least_squares_oracle(const Problem& p) {
  const std::size_t d = p.initial.dim();
  Eigen::MatrixXd ata = Eigen::MatrixXd::Zero(d, d);
  Eigen::VectorXd atb = Eigen::VectorXd::Zero(d);
  for (const auto& shard : p.shards)
    for (const auto& s : shard.samples) {
      Eigen::Map<const Eigen::VectorXd> a(s.features.data(), static_cast<Eigen::Index>(d));
      ata += a * a.transpose();
      atb += s.label * a;
    }
  return ata.ldlt().solve(atb);
}

double distance_to(const DenseVector& theta, const Eigen::VectorXd& target) {
  double s = 0.0;
  for (std::size_t k = 0; k < theta.dim(); ++k) s += std::pow(theta[k] - target(static_cast<Eigen::Index>(k)), 2);
  return std::sqrt(s);
}

// Random K-subset participation drawn from a dedicated stream per round.
Participation random_k(std::size_t k, std::uint64_t seed) {
  return [k, seed](const ParticipationQuery& q) {
    RngStream rng = RngStream(seed, "participation").child("round", q.round);
    RoundPlan plan;
    plan.selected = rng.sample_subset(q.devices, k);
    return plan;
  };
}

// Samples with zero features and labels: every gradient vanishes.
Problem zero_gradient_problem(std::size_t devices, std::size_t d) {
  Problem p;
  p.loss = LossModel::quadratic(d);
  for (std::size_t i = 0; i < devices; ++i) {
    DataShard s;
    s.owner = i;
    s.samples.push_back(Sample{i, std::vector<double>(d, 0.0), 0.0});
    p.shards.push_back(s);
  }
  RngStream rng(3, "init");
  p.initial = random_vector(d, rng);
  return p;
}

Problem single_sample_problem(const std::vector<std::pair<std::vector<double>, double>>& per_device) {
  Problem p;
  p.loss = LossModel::quadratic(per_device.front().first.size());
  for (std::size_t i = 0; i < per_device.size(); ++i) {
    DataShard s;
    s.owner = i;
    s.samples.push_back(Sample{i, per_device[i].first, per_device[i].second});
    p.shards.push_back(s);
  }
  p.initial = DenseVector(per_device.front().first.size());
  return p;
}

TrainConfig base_config(std::size_t rounds, std::size_t h, std::size_t batch, std::uint64_t seed) {
  TrainConfig c;
  c.rounds = rounds;
  c.local_steps = h;
  c.batch_size = batch;
  c.lr.eta0 = 0.05;
  c.seed = seed;
  return c;
}

void expect_same_trajectory(const RunTrace& a, const RunTrace& b) {
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t t = 0; t < a.records.size(); ++t) {
    EXPECT_EQ(a.records[t].train_loss, b.records[t].train_loss) << "round " << t + 1;
    EXPECT_EQ(a.records[t].eval_metric, b.records[t].eval_metric) << "round " << t + 1;
  }
  EXPECT_TRUE(a.final_model == b.final_model);
}

}  // namespace

TEST(lr_schedule, constant_and_step_decay) {
  LrSchedule s;
  s.eta0 = 0.5;
  EXPECT_EQ(s.at(1), 0.5);
  EXPECT_EQ(s.at(1000), 0.5);
  s.rule = LrRule::step;
  s.step_every = 10;
  s.step_factor = 0.1;
  EXPECT_EQ(s.at(10), 0.5);
  EXPECT_DOUBLE_EQ(s.at(11), 0.05);
  EXPECT_DOUBLE_EQ(s.at(21), 0.005);
}

TEST(train_config, rejects_out_of_range_parameters) {
  TrainConfig c;
  c.rounds = 0;
  EXPECT_THROW(c.validate(), ContractViolation);
  c = TrainConfig{};
  c.local_steps = 0;
  EXPECT_THROW(c.validate(), ContractViolation);
  c = TrainConfig{};
  c.lr.eta0 = 0.0;
  EXPECT_THROW(c.validate(), ContractViolation);
  c = TrainConfig{};
  c.slowmo_beta = 1.0;
  EXPECT_THROW(c.validate(), ContractViolation);
  c = TrainConfig{};
  c.slowmo_alpha = 0.0;
  EXPECT_THROW(c.validate(), ContractViolation);
}

TEST(round_latency, parallel_and_pipelined_rules) {
  RoundPlan plan;
  plan.selected = {0, 1};
  plan.uplink_rate_bps = {10.0, 20.0};
  plan.compute_s = {1.0, 3.0};
  const std::vector<double> bits{20.0, 20.0};
  EXPECT_DOUBLE_EQ(round_latency(plan, bits, 0.0), 4.0);  // max(1 + 2, 3 + 1)
  plan.rule = LatencyRule::pipelined;
  EXPECT_DOUBLE_EQ(round_latency(plan, bits, 0.0), 4.0);  // max(max(0,1)+2, 3) + 1
  plan.compute_s = {1.0, 1.0};
  EXPECT_DOUBLE_EQ(round_latency(plan, bits, 0.0), 4.0);  // (1 + 2) + 1
  plan.downlink_rate_bps = 8.0;
  EXPECT_DOUBLE_EQ(round_latency(plan, bits, 16.0), 6.0);
}

TEST(reduction_lattice, fedavg_one_step_full_participation_equals_pssgd) {
  const Problem p = regression_problem(5, 6, 100, 1);
  const TrainConfig c = base_config(40, 1, 3, 11);
  const RunTrace fed = run_fedavg(c, p, full_participation());
  const RunTrace ps = run_pssgd(c, p);
  expect_same_trajectory(fed, ps);
  EXPECT_EQ(trace_to_tsv(fed), trace_to_tsv(ps));
}

TEST(reduction_lattice, compressed_ef_identity_equals_fedavg) {
  const Problem p = classification_problem(6, 300, ShardMode::iid, 2);
  TrainConfig c = base_config(30, 3, 4, 12);
  c.uplink = compression::CompressorSpec{};
  c.downlink = compression::CompressorSpec{};
  const auto part = random_k(3, 99);
  const RunTrace ef = run_compressed_ef(c, p, part);
  const RunTrace fed = run_fedavg(c, p, part);
  expect_same_trajectory(ef, fed);
  EXPECT_TRUE(ef.devices_synchronized);
  for (std::size_t t = 0; t < ef.records.size(); ++t) {
    EXPECT_EQ(ef.records[t].scheduled, fed.records[t].scheduled);
    EXPECT_EQ(ef.records[t].uplink_bytes, fed.records[t].uplink_bytes);
  }
}

TEST(reduction_lattice, hfl_single_cluster_one_period_equals_fedavg) {
  const Problem p = classification_problem(6, 300, ShardMode::label_skew, 3);
  const TrainConfig c = base_config(25, 4, 2, 13);
  HflOptions h;
  h.clusters = {{0, 1, 2, 3, 4, 5}};
  const RunTrace hfl = run_hfl(c, p, h);
  const RunTrace fed = run_fedavg(c, p, full_participation());
  expect_same_trajectory(hfl, fed);
  EXPECT_EQ(trace_to_tsv(hfl), trace_to_tsv(fed));
}

TEST(reduction_lattice, slowmo_without_momentum_equals_fedavg) {
  const Problem p = classification_problem(5, 250, ShardMode::iid, 4);
  TrainConfig c = base_config(30, 2, 5, 14);
  c.slowmo_alpha = 1.0;
  c.slowmo_beta = 0.0;
  const auto part = random_k(2, 7);
  const RunTrace sm = run_slowmo(c, p, part);
  const RunTrace fed = run_fedavg(c, p, part);
  expect_same_trajectory(sm, fed);
  EXPECT_EQ(trace_to_tsv(sm), trace_to_tsv(fed));
}

TEST(reduction_lattice, decentralized_uniform_mixing_identical_shards_equals_pssgd) {
  const Problem p = identical_shards(regression_problem(1, 5, 60, 5), 4);
  const TrainConfig c = base_config(30, 1, 0, 15);
  std::vector<std::vector<DenseVector>> seen;
  const RunTrace dec = run_decentralized(c, p, topology::WeightMatrix::uniform(4),
                                         [&](std::size_t, const std::vector<DenseVector>& m) { seen.push_back(m); });
  const RunTrace ps = run_pssgd(c, p);
  expect_same_trajectory(dec, ps);
  ASSERT_EQ(seen.size(), 30u);
  for (const auto& models : seen)
    for (const auto& m : models) EXPECT_TRUE(m == models.front());
}

TEST(reduction_lattice, hfl_singleton_clusters_equal_pssgd) {
  const Problem p = regression_problem(4, 5, 80, 6);
  const TrainConfig c = base_config(20, 1, 2, 16);
  HflOptions h;
  h.clusters = {{0}, {1}, {2}, {3}};
  expect_same_trajectory(run_hfl(c, p, h), run_pssgd(c, p));
}

TEST(run_pssgd, single_device_matches_sequential_sgd) {
  const Problem p = regression_problem(1, 4, 30, 7);
  const TrainConfig c = base_config(25, 1, 2, 17);
  DenseVector theta = p.initial;
  for (std::size_t t = 1; t <= c.rounds; ++t) {
    RngStream rng = RngStream(c.seed, "train").child("device", 0).child("round", t);
    std::vector<Sample> batch;
    for (std::size_t b = 0; b < c.batch_size; ++b)
      batch.push_back(p.shards[0].samples[rng.uniform_index(p.shards[0].size())]);
    theta = sgd_step(theta, grad(p.loss, theta, batch), c.lr.at(t));
  }
  EXPECT_TRUE(run_pssgd(c, p).final_model == theta);
}

TEST(run_pssgd, identical_shards_match_single_device) {
  const Problem one = identical_shards(regression_problem(1, 4, 40, 8), 1);
  const Problem four = identical_shards(one, 4);
  const TrainConfig c = base_config(30, 1, 0, 18);
  const RunTrace a = run_pssgd(c, four), b = run_pssgd(c, one);
  EXPECT_TRUE(a.final_model == b.final_model);
  // Training loss averages over the repeated union, so it agrees only to rounding.
  for (std::size_t t = 0; t < a.records.size(); ++t)
    EXPECT_NEAR(a.records[t].train_loss, b.records[t].train_loss, 1e-12 * b.records[t].train_loss);
}

TEST(run_pssgd, full_gradient_converges_to_least_squares_solution) {
  const Problem p = regression_problem(4, 20, 400, 9);
  TrainConfig c = base_config(500, 1, 0, 19);
  c.lr.eta0 = 0.1;
  const RunTrace tr = run_pssgd(c, p);
  EXPECT_LE(distance_to(tr.final_model, least_squares_oracle(p)), 1e-6);
  for (std::size_t t = 1; t < tr.records.size(); ++t)
    EXPECT_LE(tr.records[t].train_loss, tr.records[t - 1].train_loss * (1.0 + 1e-12));
}

TEST(run_fedavg, empty_schedule_is_a_null_round) {
  const Problem p = regression_problem(3, 3, 30, 10);
  const TrainConfig c = base_config(4, 1, 1, 20);
  const auto part = [](const ParticipationQuery& q) {
    RoundPlan plan;
    if (q.round % 2 == 0) plan.selected = {1};
    return plan;
  };
  const RunTrace tr = run_fedavg(c, p, part);
  EXPECT_TRUE(tr.records[0].scheduled.empty());
  EXPECT_EQ(tr.records[0].uplink_bytes, 0u);
  EXPECT_EQ(tr.records[0].train_loss, loss(p.loss, p.initial, p.eval));
  EXPECT_EQ(tr.records[0].max_age, 1u);
  EXPECT_EQ(tr.records[1].ages, (std::vector<std::size_t>{2, 0, 2}));
  EXPECT_EQ(tr.participation, (std::vector<std::size_t>{0, 2, 0}));
}

TEST(run_fedavg, uniform_weights_by_default) {
  Problem p = regression_problem(2, 3, 30, 21);
  p.shards[1].samples.resize(3);
  TrainConfig c = base_config(5, 1, 0, 21);
  const RunTrace uniform = run_fedavg(c, p, full_participation());
  c.weight_by_size = true;
  const RunTrace weighted = run_fedavg(c, p, full_participation());
  EXPECT_FALSE(uniform.final_model == weighted.final_model);
  EXPECT_TRUE(uniform.final_model == run_pssgd(base_config(5, 1, 0, 21), p).final_model);
}

TEST(run_fedavg, logistic_local_steps_track_centralized_sgd) {
  const Problem p = classification_problem(10, 1000, ShardMode::iid, 22);
  TrainConfig c = base_config(200, 5, 8, 22);
  c.lr.eta0 = 0.05;
  const RunTrace fed = run_fedavg(c, p, full_participation());

  Problem central = identical_shards(p, 1);
  central.eval = p.eval;
  TrainConfig cc = c;
  cc.rounds = c.rounds * c.local_steps;
  cc.local_steps = 1;
  const RunTrace ref = run_pssgd(cc, central);

  const double initial = loss(p.loss, p.initial, central.shards[0].samples);
  const double final_fed = fed.records.back().train_loss;
  const double final_ref = ref.records.back().train_loss;
  EXPECT_LT(final_fed, initial);
  EXPECT_LE(std::abs(final_fed - final_ref), 0.05 * final_ref);
}

TEST(run_fedavg, uplink_bytes_match_serialized_identity_messages) {
  const Problem p = regression_problem(4, 7, 40, 23);
  const TrainConfig c = base_config(3, 1, 1, 23);
  RngStream rng(1, "x");
  const auto size = compression::compress(DenseVector(7), compression::CompressorSpec{}, rng).byte_size();
  const RunTrace tr = run_fedavg(c, p, random_k(2, 5));
  for (const auto& r : tr.records) EXPECT_EQ(r.uplink_bytes, 2 * size);
}

TEST(run_compressed_ef, top_k_with_error_feedback_converges) {
  const Problem p = regression_problem(4, 20, 400, 9);
  // Residuals of heterogeneous devices leave an O(eta) offset, so the step is smaller than for PSSGD.
  TrainConfig c = base_config(5000, 1, 0, 24);
  c.lr.eta0 = 0.01;
  compression::CompressorSpec topk;
  topk.scheme = compression::Scheme::top_k;
  topk.k = 2;
  c.uplink = topk;
  const RunTrace tr = run_compressed_ef(c, p, full_participation());
  EXPECT_LE(distance_to(tr.final_model, least_squares_oracle(p)), 1e-3);
}

TEST(run_compressed_ef, single_device_top_k_reaches_the_optimum) {
  const Problem p = regression_problem(1, 20, 400, 9);
  TrainConfig c = base_config(3000, 1, 0, 24);
  c.lr.eta0 = 0.1;
  compression::CompressorSpec topk;
  topk.scheme = compression::Scheme::top_k;
  topk.k = 2;
  c.uplink = topk;
  const RunTrace tr = run_compressed_ef(c, p, full_participation());
  EXPECT_LE(distance_to(tr.final_model, least_squares_oracle(p)), 1e-10);
}

TEST(run_compressed_ef, downlink_compression_keeps_devices_synchronized) {
  const Problem p = classification_problem(5, 200, ShardMode::label_skew, 25);
  TrainConfig c = base_config(20, 2, 4, 25);
  compression::CompressorSpec up;
  up.scheme = compression::Scheme::top_k;
  up.k = 3;
  compression::CompressorSpec down;
  down.scheme = compression::Scheme::stochastic_uniform;
  down.levels = 4;
  c.uplink = up;
  c.downlink = down;
  const RunTrace tr = run_compressed_ef(c, p, random_k(3, 4));
  EXPECT_TRUE(tr.devices_synchronized);
  EXPECT_TRUE(tr.final_model.all_finite());
}

TEST(run_signsgd_mv, single_device_positive_gradient_steps_down_by_eta) {
  const Problem p = single_sample_problem({{{1.0, 1.0, 1.0}, -10.0}});
  TrainConfig c = base_config(1, 1, 1, 26);
  c.lr.eta0 = 0.25;
  const RunTrace tr = run_signsgd_mv(c, p);
  EXPECT_TRUE(tr.final_model == (DenseVector{-0.25, -0.25, -0.25}));
}

TEST(run_signsgd_mv, majority_of_three_votes) {
  // Gradients at zero are -b: (+, +, -).
  const Problem p = single_sample_problem({{{1.0}, -1.0}, {{1.0}, -2.0}, {{1.0}, 3.0}});
  TrainConfig c = base_config(1, 1, 1, 27);
  c.lr.eta0 = 0.5;
  EXPECT_TRUE(run_signsgd_mv(c, p).final_model == DenseVector{-0.5});
}

TEST(run_signsgd_mv, uplink_carries_one_bit_per_coordinate) {
  const Problem p = regression_problem(3, 16, 30, 28);
  const RunTrace tr = run_signsgd_mv(base_config(2, 1, 1, 28), p);
  compression::CompressorSpec sign;
  sign.scheme = compression::Scheme::sign;
  RngStream rng(1, "x");
  const auto size = compression::compress(DenseVector(16, 1.0), sign, rng).byte_size();
  EXPECT_EQ(tr.records[0].uplink_bytes, 3 * size);
  EXPECT_LE(size, 16u / 8u + 8u);
}

TEST(run_signsgd_mv, aggregate_is_invariant_to_gradient_scaling) {
  RngStream rng(29, "fuzz");
  for (int c = 0; c < 1000; ++c) {
    const std::size_t n = 1 + rng.uniform_index(5), d = 1 + rng.uniform_index(8);
    std::vector<DenseVector> grads;
    for (std::size_t i = 0; i < n; ++i) grads.push_back(random_vector(d, rng));
    auto vote = [](const std::vector<DenseVector>& g) {
      std::vector<std::vector<int>> v;
      for (const auto& x : g) v.push_back(compression::sign_quant(x, 0.0, compression::SignMode::sign));
      return compression::majority_vote(v);
    };
    const auto before = vote(grads);
    grads[rng.uniform_index(n)] *= 10.0;
    ASSERT_EQ(vote(grads), before);
  }
}

TEST(run_sync_sparse_avg, full_level_matches_one_step_fedavg) {
  const Problem p = regression_problem(4, 6, 80, 30);
  const TrainConfig c = base_config(30, 1, 2, 30);
  SyncSparseOptions o;
  o.phi = 1.0;
  const RunTrace sync = run_sync_sparse_avg(c, p, o);
  const RunTrace fed = run_fedavg(c, p, full_participation());
  for (std::size_t k = 0; k < 6; ++k) EXPECT_NEAR(sync.final_model[k], fed.final_model[k], 1e-12);
  for (const auto& m : sync.device_models) EXPECT_TRUE(m == sync.device_models.front());
}

TEST(run_sync_sparse_avg, empty_mask_leaves_devices_independent) {
  const Problem p = regression_problem(3, 4, 30, 31);
  const TrainConfig c = base_config(15, 1, 0, 31);
  SyncSparseOptions o;
  o.mask_override = [](std::size_t) { return std::vector<std::uint8_t>(4, 0); };
  const RunTrace tr = run_sync_sparse_avg(c, p, o);
  for (std::size_t i = 0; i < 3; ++i) {
    DenseVector theta = p.initial;
    for (std::size_t t = 1; t <= c.rounds; ++t) theta = sgd_step(theta, grad(p.loss, theta, p.shards[i].samples), 0.05);
    EXPECT_TRUE(tr.device_models[i] == theta) << "device " << i;
  }
}

TEST(run_sync_sparse_avg, every_coordinate_averaged_within_tau_max_rounds) {
  const Problem p = regression_problem(3, 10, 60, 32);
  const TrainConfig c = base_config(24, 1, 2, 32);
  SyncSparseOptions o;
  o.phi = 0.25;
  o.tau_max = 4;
  std::vector<std::vector<bool>> agreed;  // [round][coordinate]
  o.observer = [&](std::size_t, const std::vector<DenseVector>& m) {
    std::vector<bool> row(10);
    for (std::size_t k = 0; k < 10; ++k) {
      row[k] = true;
      for (const auto& x : m) row[k] = row[k] && x[k] == m.front()[k];
    }
    agreed.push_back(row);
  };
  run_sync_sparse_avg(c, p, o);
  ASSERT_EQ(agreed.size(), 24u);
  for (std::size_t k = 0; k < 10; ++k)
    for (std::size_t start = 0; start + 4 <= agreed.size(); ++start) {
      bool hit = false;
      for (std::size_t t = start; t < start + 4; ++t) hit = hit || agreed[t][k];
      EXPECT_TRUE(hit) << "coordinate " << k << " window " << start;
    }
}

TEST(run_slowmo, zero_updates_keep_model_constant) {
  const Problem p = zero_gradient_problem(3, 4);
  TrainConfig c = base_config(50, 2, 1, 33);
  c.slowmo_beta = 0.9;
  const RunTrace tr = run_slowmo(c, p, full_participation());
  EXPECT_TRUE(tr.final_model == p.initial);
}

TEST(run_slowmo, server_momentum_not_worse_than_fedavg_on_quadratic) {
  const Problem p = regression_problem(4, 10, 200, 34);
  TrainConfig c = base_config(200, 2, 4, 34);
  c.lr.eta0 = 0.01;
  const double fed = run_fedavg(c, p, full_participation()).records.back().train_loss;
  c.slowmo_beta = 0.9;
  const double sm = run_slowmo(c, p, full_participation()).records.back().train_loss;
  RecordProperty("fedavg_loss", std::to_string(fed));
  RecordProperty("slowmo_loss", std::to_string(sm));
  EXPECT_LE(sm, fed);
}

TEST(run_decentralized, identity_mixing_runs_independent_sgd) {
  const Problem p = regression_problem(3, 4, 30, 35);
  const TrainConfig c = base_config(20, 1, 0, 35);
  const RunTrace tr = run_decentralized(c, p, topology::WeightMatrix::identity(3));
  for (std::size_t i = 0; i < 3; ++i) {
    DenseVector theta = p.initial;
    for (std::size_t t = 1; t <= c.rounds; ++t) theta = sgd_step(theta, grad(p.loss, theta, p.shards[i].samples), 0.05);
    EXPECT_TRUE(tr.device_models[i] == theta) << "device " << i;
  }
}

TEST(run_decentralized, rejects_mismatched_weight_matrix) {
  const Problem p = regression_problem(3, 4, 30, 36);
  EXPECT_THROW(run_decentralized(base_config(1, 1, 0, 1), p, topology::WeightMatrix::identity(2)),
               ContractViolation);
}

TEST(run_hfl, clustered_training_tracks_fedavg_accuracy) {
  const Problem p = classification_problem(28, 1400, ShardMode::iid, 37);
  TrainConfig c = base_config(60, 2, 8, 37);
  c.lr.eta0 = 0.1;
  const double fed = run_fedavg(c, p, full_participation()).records.back().eval_metric;
  HflOptions h;
  for (std::size_t l = 0; l < 7; ++l) h.clusters.push_back({4 * l, 4 * l + 1, 4 * l + 2, 4 * l + 3});
  for (std::size_t period : {2u, 4u, 6u}) {
    c.sync_period = period;
    const double acc = run_hfl(c, p, h).records.back().eval_metric;
    EXPECT_GE(acc, fed - 0.02) << "H = " << period;
  }
}

TEST(run_hfl, rejects_bad_partitions) {
  const Problem p = regression_problem(3, 2, 30, 38);
  const TrainConfig c = base_config(1, 1, 1, 38);
  HflOptions h;
  h.clusters = {{0, 1}};
  EXPECT_THROW(run_hfl(c, p, h), ContractViolation);
  h.clusters = {{0, 1}, {1, 2}};
  EXPECT_THROW(run_hfl(c, p, h), ContractViolation);
  h.clusters = {{0, 1, 2}, {}};
  EXPECT_THROW(run_hfl(c, p, h), ContractViolation);
}

TEST(run_hfl, latency_callback_sees_sync_rounds) {
  const Problem p = regression_problem(4, 2, 40, 39);
  TrainConfig c = base_config(6, 1, 1, 39);
  c.sync_period = 3;
  HflOptions h;
  h.clusters = {{0, 1}, {2, 3}};
  h.latency = [](std::size_t, bool sync) { return sync ? 10.0 : 1.0; };
  const RunTrace tr = run_hfl(c, p, h);
  EXPECT_DOUBLE_EQ(tr.total_latency(), 4.0 + 20.0);
  EXPECT_GT(tr.records[2].uplink_bytes, tr.records[1].uplink_bytes);
}

TEST(trace_tsv, round_trips_and_formats_reals) {
  const Problem p = regression_problem(3, 3, 30, 40);
  const RunTrace tr = run_fedavg(base_config(5, 1, 1, 40), p, random_k(2, 3));
  const std::string text = trace_to_tsv(tr);
  EXPECT_EQ(text.substr(0, text.find('\n')), kTraceHeader);
  const auto back = trace_from_tsv(text);
  ASSERT_EQ(back.size(), tr.records.size());
  for (std::size_t t = 0; t < back.size(); ++t) {
    EXPECT_EQ(back[t].round, tr.records[t].round);
    EXPECT_EQ(format_real(back[t].train_loss), format_real(tr.records[t].train_loss));
    EXPECT_EQ(back[t].scheduled, tr.records[t].scheduled);
    EXPECT_EQ(back[t].uplink_bytes, tr.records[t].uplink_bytes);
    EXPECT_EQ(back[t].max_age, tr.records[t].max_age);
  }
  EXPECT_EQ(format_real(0.1), "0.1");
  EXPECT_EQ(format_real(1.0 / 3.0), "0.333333333");
}

TEST(trace_tsv, empty_schedule_serializes_as_dash) {
  RunTrace tr;
  tr.records.push_back(RoundRecord{});
  tr.records[0].round = 1;
  const std::string text = trace_to_tsv(tr);
  EXPECT_NE(text.find("\t-\t"), std::string::npos);
  EXPECT_TRUE(trace_from_tsv(text)[0].scheduled.empty());
}

TEST(trace_tsv, malformed_input_reports_line) {
  EXPECT_THROW(trace_from_tsv("bogus\n"), ContractViolation);
  const std::string bad = std::string(kTraceHeader) + "\n1\t0.5\t0.5\t-\t1\t1\t0\t0\n2\tx\t0\t-\t1\t1\t0\t0\n";
  try {
    trace_from_tsv(bad);
    FAIL() << "expected ContractViolation";
  } catch (const ContractViolation& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
}

TEST(trace_determinism, same_seed_same_bytes_other_seed_differs) {
  const Problem p = classification_problem(4, 200, ShardMode::iid, 41);
  const TrainConfig c = base_config(10, 2, 3, 41);
  const auto a = trace_to_tsv(run_fedavg(c, p, random_k(2, 41)));
  const auto b = trace_to_tsv(run_fedavg(c, p, random_k(2, 41)));
  EXPECT_EQ(a, b);
  TrainConfig other = c;
  other.seed = 42;
  EXPECT_NE(a, trace_to_tsv(run_fedavg(other, p, random_k(2, 41))));
}
