#pragma once

#include <cstddef>
#include <span>

#include "colearn/numerics/data.hpp"
#include "colearn/numerics/dense_vector.hpp"
#include "colearn/numerics/rng.hpp"

namespace colearn {

enum class LossKind { quadratic, logistic, perceptron };

// Per-sample loss F(theta, (x, y)).
//  quadratic:  F = (scale / 2) (x . theta - y)^2. With scale equal to the
//              sample count, the dataset average is (1/2)||A theta - b||^2.
//  logistic:   two classes use a sigmoid on x . theta (labels 0/1); more than
//              two classes use softmax over a classes x input_dim weight
//              matrix stored row-major.
//  perceptron: tanh hidden layer then softmax output. Layout
//              [W1 (hidden x input), b1 (hidden), W2 (classes x hidden), b2 (classes)].
struct LossModel {
  LossKind kind = LossKind::quadratic;
  std::size_t input_dim = 0;
  std::size_t classes = 2;
  std::size_t hidden = 0;
  double scale = 1.0;

  static LossModel quadratic(std::size_t input_dim, double scale = 1.0);
  static LossModel logistic(std::size_t input_dim, std::size_t classes = 2);
  static LossModel perceptron(std::size_t input_dim, std::size_t hidden, std::size_t classes);

  std::size_t param_dim() const;
  bool is_classifier() const noexcept { return kind != LossKind::quadratic; }
};

// Average loss over the batch.
double loss(const LossModel& model, const DenseVector& theta, std::span<const Sample> batch);

// Average gradient over the batch.
DenseVector grad(const LossModel& model, const DenseVector& theta, std::span<const Sample> batch);

// Central differences (F(theta + h e_i) - F(theta - h e_i)) / 2h.
DenseVector finite_diff_grad(const LossModel& model, const DenseVector& theta,
                             std::span<const Sample> batch, double h);

// Predicted class index; quadratic models return the regression output.
double predict(const LossModel& model, const DenseVector& theta, const Sample& sample);

// Classification accuracy for classifiers, average loss for quadratic models.
double eval_metric(const LossModel& model, const DenseVector& theta, std::span<const Sample> data);

// Zero for convex models; small random weights for the perceptron.
DenseVector initial_params(const LossModel& model, RngStream& rng);

DenseVector sgd_step(const DenseVector& theta, const DenseVector& g, double eta);

}  // namespace colearn
