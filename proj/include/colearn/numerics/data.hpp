#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "colearn/numerics/rng.hpp"

namespace colearn {

struct Sample {
  std::size_t id = 0;  // position in the originating dataset
  std::vector<double> features;
  double label = 0.0;
};

using Dataset = std::vector<Sample>;

struct DataShard {
  std::size_t owner = 0;
  std::vector<Sample> samples;

  std::size_t size() const noexcept { return samples.size(); }
};

enum class ShardMode { iid, label_skew };

// Splits `dataset` into `num_devices` disjoint shards whose sizes differ by at
// most one. iid shuffles first; label_skew stable-sorts by label and cuts
// contiguous runs, so with as many devices as labels each shard is single-label.
std::vector<DataShard> make_shards(const Dataset& dataset, std::size_t num_devices,
                                   ShardMode mode, RngStream& rng);

struct TrainEvalSplit {
  Dataset train;
  Dataset eval;
};

// Random held-out split; ids are reassigned so each part is 0..n-1 indexed.
TrainEvalSplit split_holdout(Dataset dataset, double eval_fraction, RngStream& rng);

// Rows a_j ~ N(0, I), b_j = a_j . theta_true + noise * N(0, 1).
Dataset make_regression_data(std::size_t samples, std::size_t dim, double noise, RngStream& rng);

// Gaussian class clusters: mean_c ~ N(0, separation^2 I), x = mean_y + N(0, I),
// followed by a constant 1 feature (bias), so features have dim + 1 entries.
Dataset make_classification_data(std::size_t samples, std::size_t dim, std::size_t classes,
                                 double separation, RngStream& rng);

}  // namespace colearn
