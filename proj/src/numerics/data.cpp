#include "colearn/numerics/data.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "colearn/error.hpp"

namespace colearn {

std::vector<DataShard> make_shards(const Dataset& dataset, std::size_t num_devices,
                                   ShardMode mode, RngStream& rng) {
  COLEARN_REQUIRE(num_devices > 0, "make_shards: device count must be positive");
  COLEARN_REQUIRE(dataset.size() >= num_devices,
                  "make_shards: dataset has fewer samples than devices");

  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (mode == ShardMode::iid) {
    rng.shuffle(order);
  } else {
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return dataset[a].label < dataset[b].label;
    });
  }

  std::vector<DataShard> shards(num_devices);
  const std::size_t base = dataset.size() / num_devices;
  const std::size_t extra = dataset.size() % num_devices;
  std::size_t pos = 0;
  for (std::size_t k = 0; k < num_devices; ++k) {
    const std::size_t len = base + (k < extra ? 1 : 0);
    shards[k].owner = k;
    shards[k].samples.reserve(len);
    for (std::size_t j = 0; j < len; ++j) shards[k].samples.push_back(dataset[order[pos++]]);
  }
  return shards;
}

TrainEvalSplit split_holdout(Dataset dataset, double eval_fraction, RngStream& rng) {
  COLEARN_REQUIRE(eval_fraction >= 0.0 && eval_fraction < 1.0,
                  "split_holdout: eval fraction must be in [0, 1)");
  rng.shuffle(dataset);
  const auto n_eval = static_cast<std::size_t>(std::floor(eval_fraction * dataset.size()));
  TrainEvalSplit out;
  out.eval.assign(dataset.begin(), dataset.begin() + static_cast<std::ptrdiff_t>(n_eval));
  out.train.assign(dataset.begin() + static_cast<std::ptrdiff_t>(n_eval), dataset.end());
  for (std::size_t i = 0; i < out.train.size(); ++i) out.train[i].id = i;
  for (std::size_t i = 0; i < out.eval.size(); ++i) out.eval[i].id = i;
  return out;
}

Dataset make_regression_data(std::size_t samples, std::size_t dim, double noise, RngStream& rng) {
  COLEARN_REQUIRE(samples > 0 && dim > 0, "make_regression_data: empty problem");
  std::vector<double> truth(dim);
  for (double& t : truth) t = rng.normal();
  Dataset data(samples);
  for (std::size_t j = 0; j < samples; ++j) {
    data[j].id = j;
    data[j].features.resize(dim);
    double y = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      data[j].features[i] = rng.normal();
      y += data[j].features[i] * truth[i];
    }
    data[j].label = y + noise * rng.normal();
  }
  return data;
}

Dataset make_classification_data(std::size_t samples, std::size_t dim, std::size_t classes,
                                 double separation, RngStream& rng) {
  COLEARN_REQUIRE(samples > 0 && dim > 0 && classes >= 2,
                  "make_classification_data: need samples, dim and at least two classes");
  std::vector<std::vector<double>> means(classes, std::vector<double>(dim));
  for (auto& m : means)
    for (double& v : m) v = separation * rng.normal();

  Dataset data(samples);
  for (std::size_t j = 0; j < samples; ++j) {
    const std::size_t c = rng.uniform_index(classes);
    data[j].id = j;
    data[j].label = static_cast<double>(c);
    data[j].features.resize(dim + 1);
    for (std::size_t i = 0; i < dim; ++i) data[j].features[i] = means[c][i] + rng.normal();
    data[j].features[dim] = 1.0;
  }
  return data;
}

}  // namespace colearn
