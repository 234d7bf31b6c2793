#include "colearn/numerics/loss.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "colearn/error.hpp"

namespace colearn {

namespace {

double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

std::size_t class_of(const LossModel& model, const Sample& s) {
  const double y = s.label;
  const auto c = static_cast<std::size_t>(y);
  if (y < 0.0 || static_cast<double>(c) != y || c >= model.classes) {
    throw ContractViolation("loss: label " + std::to_string(y) + " is not a class index below " +
                            std::to_string(model.classes));
  }
  return c;
}

void check_inputs(const LossModel& model, const DenseVector& theta, std::span<const Sample> batch) {
  COLEARN_REQUIRE(!batch.empty(), "loss: batch must be non-empty");
  if (theta.dim() != model.param_dim()) {
    throw ContractViolation("loss: parameter dimension " + std::to_string(theta.dim()) +
                            " does not match model dimension " + std::to_string(model.param_dim()));
  }
  for (const Sample& s : batch) {
    if (s.features.size() != model.input_dim) {
      throw ContractViolation("loss: sample feature dimension " + std::to_string(s.features.size()) +
                              " does not match model input dimension " +
                              std::to_string(model.input_dim));
    }
  }
}

// Logits z = W x for a row-major (rows x cols) block starting at offset.
void affine(const DenseVector& theta, std::size_t offset, std::size_t rows, std::size_t cols,
            const double* x, std::vector<double>& out) {
  out.assign(rows, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    double s = 0.0;
    const std::size_t base = offset + r * cols;
    for (std::size_t c = 0; c < cols; ++c) s += theta[base + c] * x[c];
    out[r] = s;
  }
}

// Softmax in place; returns log-sum-exp.
double softmax(std::vector<double>& z) {
  const double zmax = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double& v : z) {
    v = std::exp(v - zmax);
    sum += v;
  }
  for (double& v : z) v /= sum;
  return zmax + std::log(sum);
}

struct PerceptronPass {
  std::vector<double> hidden;  // tanh activations
  std::vector<double> probs;
  double sample_loss = 0.0;
};

PerceptronPass perceptron_forward(const LossModel& m, const DenseVector& theta, const Sample& s,
                                  bool need_loss) {
  const std::size_t p = m.input_dim, h = m.hidden, c = m.classes;
  const std::size_t b1 = h * p, w2 = b1 + h, b2 = w2 + c * h;
  PerceptronPass pass;
  affine(theta, 0, h, p, s.features.data(), pass.hidden);
  for (std::size_t j = 0; j < h; ++j) pass.hidden[j] = std::tanh(pass.hidden[j] + theta[b1 + j]);
  affine(theta, w2, c, h, pass.hidden.data(), pass.probs);
  for (std::size_t k = 0; k < c; ++k) pass.probs[k] += theta[b2 + k];
  std::vector<double> logits = pass.probs;
  const double lse = softmax(pass.probs);
  if (need_loss) pass.sample_loss = lse - logits[class_of(m, s)];
  return pass;
}

double sample_loss(const LossModel& m, const DenseVector& theta, const Sample& s) {
  const double* x = s.features.data();
  switch (m.kind) {
    case LossKind::quadratic: {
      double r = -s.label;
      for (std::size_t i = 0; i < m.input_dim; ++i) r += theta[i] * x[i];
      return 0.5 * m.scale * r * r;
    }
    case LossKind::logistic: {
      if (m.classes == 2) {
        double z = 0.0;
        for (std::size_t i = 0; i < m.input_dim; ++i) z += theta[i] * x[i];
        return softplus(z) - static_cast<double>(class_of(m, s)) * z;
      }
      std::vector<double> z;
      affine(theta, 0, m.classes, m.input_dim, x, z);
      const double target = z[class_of(m, s)];
      return softmax(z) - target;
    }
    case LossKind::perceptron:
      return perceptron_forward(m, theta, s, true).sample_loss;
  }
  return 0.0;
}

void accumulate_grad(const LossModel& m, const DenseVector& theta, const Sample& s,
                     DenseVector& g) {
  const double* x = s.features.data();
  const std::size_t p = m.input_dim;
  switch (m.kind) {
    case LossKind::quadratic: {
      double r = -s.label;
      for (std::size_t i = 0; i < p; ++i) r += theta[i] * x[i];
      const double coef = m.scale * r;
      for (std::size_t i = 0; i < p; ++i) g[i] += coef * x[i];
      return;
    }
    case LossKind::logistic: {
      if (m.classes == 2) {
        double z = 0.0;
        for (std::size_t i = 0; i < p; ++i) z += theta[i] * x[i];
        const double coef = sigmoid(z) - static_cast<double>(class_of(m, s));
        for (std::size_t i = 0; i < p; ++i) g[i] += coef * x[i];
        return;
      }
      std::vector<double> z;
      affine(theta, 0, m.classes, p, x, z);
      softmax(z);
      z[class_of(m, s)] -= 1.0;
      for (std::size_t k = 0; k < m.classes; ++k)
        for (std::size_t i = 0; i < p; ++i) g[k * p + i] += z[k] * x[i];
      return;
    }
    case LossKind::perceptron: {
      const std::size_t h = m.hidden, c = m.classes;
      const std::size_t b1 = h * p, w2 = b1 + h, b2 = w2 + c * h;
      PerceptronPass pass = perceptron_forward(m, theta, s, false);
      std::vector<double>& delta_out = pass.probs;
      delta_out[class_of(m, s)] -= 1.0;
      std::vector<double> delta_hidden(h, 0.0);
      for (std::size_t k = 0; k < c; ++k) {
        g[b2 + k] += delta_out[k];
        for (std::size_t j = 0; j < h; ++j) {
          g[w2 + k * h + j] += delta_out[k] * pass.hidden[j];
          delta_hidden[j] += delta_out[k] * theta[w2 + k * h + j];
        }
      }
      for (std::size_t j = 0; j < h; ++j) {
        const double dj = delta_hidden[j] * (1.0 - pass.hidden[j] * pass.hidden[j]);
        g[b1 + j] += dj;
        for (std::size_t i = 0; i < p; ++i) g[j * p + i] += dj * x[i];
      }
      return;
    }
  }
}

}  // namespace

LossModel LossModel::quadratic(std::size_t input_dim, double scale) {
  COLEARN_REQUIRE(input_dim > 0, "LossModel: input dimension must be positive");
  COLEARN_REQUIRE(scale > 0.0, "LossModel: quadratic scale must be positive");
  LossModel m;
  m.kind = LossKind::quadratic;
  m.input_dim = input_dim;
  m.classes = 0;
  m.scale = scale;
  return m;
}

LossModel LossModel::logistic(std::size_t input_dim, std::size_t classes) {
  COLEARN_REQUIRE(input_dim > 0, "LossModel: input dimension must be positive");
  COLEARN_REQUIRE(classes >= 2, "LossModel: logistic needs at least two classes");
  LossModel m;
  m.kind = LossKind::logistic;
  m.input_dim = input_dim;
  m.classes = classes;
  return m;
}

LossModel LossModel::perceptron(std::size_t input_dim, std::size_t hidden, std::size_t classes) {
  COLEARN_REQUIRE(input_dim > 0, "LossModel: input dimension must be positive");
  COLEARN_REQUIRE(hidden >= 1 && hidden <= 32, "LossModel: hidden width must be in [1, 32]");
  COLEARN_REQUIRE(classes >= 2, "LossModel: perceptron needs at least two classes");
  LossModel m;
  m.kind = LossKind::perceptron;
  m.input_dim = input_dim;
  m.hidden = hidden;
  m.classes = classes;
  return m;
}

std::size_t LossModel::param_dim() const {
  switch (kind) {
    case LossKind::quadratic:
      return input_dim;
    case LossKind::logistic:
      return classes == 2 ? input_dim : classes * input_dim;
    case LossKind::perceptron:
      return hidden * input_dim + hidden + classes * hidden + classes;
  }
  return 0;
}

double loss(const LossModel& model, const DenseVector& theta, std::span<const Sample> batch) {
  check_inputs(model, theta, batch);
  double total = 0.0;
  for (const Sample& s : batch) total += sample_loss(model, theta, s);
  return total / static_cast<double>(batch.size());
}

DenseVector grad(const LossModel& model, const DenseVector& theta, std::span<const Sample> batch) {
  check_inputs(model, theta, batch);
  DenseVector g(theta.dim());
  for (const Sample& s : batch) accumulate_grad(model, theta, s, g);
  g *= 1.0 / static_cast<double>(batch.size());
  return g;
}

DenseVector finite_diff_grad(const LossModel& model, const DenseVector& theta,
                             std::span<const Sample> batch, double h) {
  COLEARN_REQUIRE(h > 0.0, "finite_diff_grad: step must be positive");
  check_inputs(model, theta, batch);
  DenseVector g(theta.dim());
  DenseVector probe = theta;
  for (std::size_t i = 0; i < theta.dim(); ++i) {
    probe[i] = theta[i] + h;
    const double up = loss(model, probe, batch);
    probe[i] = theta[i] - h;
    const double down = loss(model, probe, batch);
    probe[i] = theta[i];
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

double predict(const LossModel& model, const DenseVector& theta, const Sample& sample) {
  const Sample* s = &sample;
  check_inputs(model, theta, std::span<const Sample>(s, 1));
  const double* x = sample.features.data();
  switch (model.kind) {
    case LossKind::quadratic: {
      double r = 0.0;
      for (std::size_t i = 0; i < model.input_dim; ++i) r += theta[i] * x[i];
      return r;
    }
    case LossKind::logistic: {
      if (model.classes == 2) {
        double z = 0.0;
        for (std::size_t i = 0; i < model.input_dim; ++i) z += theta[i] * x[i];
        return z > 0.0 ? 1.0 : 0.0;
      }
      std::vector<double> z;
      affine(theta, 0, model.classes, model.input_dim, x, z);
      return static_cast<double>(std::max_element(z.begin(), z.end()) - z.begin());
    }
    case LossKind::perceptron: {
      const PerceptronPass pass = perceptron_forward(model, theta, sample, false);
      return static_cast<double>(std::max_element(pass.probs.begin(), pass.probs.end()) -
                                 pass.probs.begin());
    }
  }
  return 0.0;
}

double eval_metric(const LossModel& model, const DenseVector& theta, std::span<const Sample> data) {
  if (!model.is_classifier()) return loss(model, theta, data);
  check_inputs(model, theta, data);
  std::size_t correct = 0;
  for (const Sample& s : data)
    if (predict(model, theta, s) == s.label) ++correct;
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

DenseVector initial_params(const LossModel& model, RngStream& rng) {
  DenseVector theta(model.param_dim());
  if (model.kind != LossKind::perceptron) return theta;
  const double s1 = 1.0 / std::sqrt(static_cast<double>(model.input_dim));
  const double s2 = 1.0 / std::sqrt(static_cast<double>(model.hidden));
  const std::size_t b1 = model.hidden * model.input_dim;
  const std::size_t w2 = b1 + model.hidden;
  const std::size_t b2 = w2 + model.classes * model.hidden;
  for (std::size_t i = 0; i < b1; ++i) theta[i] = s1 * rng.normal();
  for (std::size_t i = w2; i < b2; ++i) theta[i] = s2 * rng.normal();
  return theta;
}

DenseVector sgd_step(const DenseVector& theta, const DenseVector& g, double eta) {
  COLEARN_REQUIRE(eta > 0.0, "sgd_step: step size must be positive");
  require_same_dim(theta, g, "sgd_step");
  DenseVector out = theta;
  out.axpy(-eta, g);
  return out;
}

}  // namespace colearn
