#include "qttt/policy.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace qttt {

namespace {

DenseLayer make_layer(int out, int in, double stddev, RngStream& rng) {
  DenseLayer layer{Eigen::MatrixXd(out, in), Eigen::VectorXd::Zero(out)};
  for (int r = 0; r < out; ++r) {
    for (int c = 0; c < in; ++c) layer.weight(r, c) = rng.normal(0.0, stddev);
  }
  return layer;
}

DenseLayer zero_layer(const DenseLayer& like) {
  return {Eigen::MatrixXd::Zero(like.weight.rows(), like.weight.cols()), Eigen::VectorXd::Zero(like.bias.size())};
}

template <typename Fn>
void for_each_layer(const PolicyParams& p, Fn&& fn) {
  for (const auto& layer : p.trunk) fn(layer);
  fn(p.policy_head);
  fn(p.value_head);
}

template <typename Fn>
void for_each_layer(PolicyParams& p, Fn&& fn) {
  for (auto& layer : p.trunk) fn(layer);
  fn(p.policy_head);
  fn(p.value_head);
}

}  // namespace

PolicyParams PolicyParams::initialize(int input_dim, const std::vector<int>& hidden, RngStream& rng) {
  if (input_dim < 1) throw std::invalid_argument("input dimension must be positive");
  PolicyParams p;
  p.input_dim = input_dim;
  p.hidden = hidden;
  int fan_in = input_dim;
  for (int width : hidden) {
    if (width < 1) throw std::invalid_argument("hidden layer widths must be positive");
    p.trunk.push_back(make_layer(width, fan_in, 1.0 / std::sqrt(fan_in), rng));
    fan_in = width;
  }
  // Near-uniform initial policy.
  p.policy_head = make_layer(kActionCount, fan_in, 0.01 / std::sqrt(fan_in), rng);
  p.value_head = make_layer(1, fan_in, 1.0 / std::sqrt(fan_in), rng);
  return p;
}

PolicyParams PolicyParams::zeros_like(const PolicyParams& other) {
  PolicyParams p;
  p.input_dim = other.input_dim;
  p.hidden = other.hidden;
  for (const auto& layer : other.trunk) p.trunk.push_back(zero_layer(layer));
  p.policy_head = zero_layer(other.policy_head);
  p.value_head = zero_layer(other.value_head);
  return p;
}

std::size_t PolicyParams::parameter_count() const {
  std::size_t n = 0;
  for_each_layer(*this, [&](const DenseLayer& l) { n += l.weight.size() + l.bias.size(); });
  return n;
}

std::vector<double> PolicyParams::flatten() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  for_each_layer(*this, [&](const DenseLayer& l) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) flat.push_back(l.weight(r, c));
    }
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) flat.push_back(l.bias(r));
  });
  return flat;
}

void PolicyParams::assign(std::span<const double> flat) {
  if (flat.size() != parameter_count()) throw std::invalid_argument("flat parameter vector has the wrong length");
  std::size_t k = 0;
  for_each_layer(*this, [&](DenseLayer& l) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) l.weight(r, c) = flat[k++];
    }
    for (Eigen::Index r = 0; r < l.bias.size(); ++r) l.bias(r) = flat[k++];
  });
}

bool PolicyParams::all_finite() const {
  bool ok = true;
  for_each_layer(*this, [&](const DenseLayer& l) { ok = ok && l.weight.allFinite() && l.bias.allFinite(); });
  return ok;
}

double masked_softmax(const double* logits, const ActionMask& mask, double* probs) {
  double max_logit = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < kActionCount; ++k) {
    if (mask[k] && logits[k] > max_logit) max_logit = logits[k];
  }
  if (max_logit == -std::numeric_limits<double>::infinity()) {
    throw std::invalid_argument("action mask has no legal entry");
  }
  double total = 0.0;
  for (int k = 0; k < kActionCount; ++k) {
    probs[k] = mask[k] ? std::exp(logits[k] - max_logit) : 0.0;
    total += probs[k];
  }
  for (int k = 0; k < kActionCount; ++k) probs[k] /= total;
  return max_logit + std::log(total);
}

PolicyOutput forward(const PolicyParams& params, std::span<const double> obs, const ActionMask& mask) {
  if (static_cast<int>(obs.size()) != params.input_dim) {
    throw std::invalid_argument("observation length " + std::to_string(obs.size()) + " does not match network input " +
                                std::to_string(params.input_dim));
  }
  Eigen::VectorXd h = Eigen::Map<const Eigen::VectorXd>(obs.data(), static_cast<Eigen::Index>(obs.size()));
  for (const auto& layer : params.trunk) h = (layer.weight * h + layer.bias).array().tanh().matrix();
  const Eigen::VectorXd logits = params.policy_head.weight * h + params.policy_head.bias;
  PolicyOutput out;
  masked_softmax(logits.data(), mask, out.probs.data());
  out.value = (params.value_head.weight * h + params.value_head.bias)(0);
  return out;
}

BatchActivations forward_batch(const PolicyParams& params, const Eigen::MatrixXd& obs) {
  if (obs.rows() != params.input_dim) throw std::invalid_argument("batch rows do not match network input");
  BatchActivations acts;
  acts.layers.reserve(params.trunk.size() + 1);
  acts.layers.push_back(obs);
  for (const auto& layer : params.trunk) {
    Eigen::MatrixXd z = layer.weight * acts.layers.back();
    z.colwise() += layer.bias;
    acts.layers.push_back(z.array().tanh().matrix());
  }
  const Eigen::MatrixXd& top = acts.layers.back();
  acts.logits = params.policy_head.weight * top;
  acts.logits.colwise() += params.policy_head.bias;
  acts.values = (params.value_head.weight * top).array() + params.value_head.bias(0);
  return acts;
}

void backward_batch(const PolicyParams& params, const BatchActivations& acts, const Eigen::MatrixXd& dlogits,
                    const Eigen::RowVectorXd& dvalues, PolicyParams& grad) {
  const Eigen::MatrixXd& top = acts.layers.back();
  grad.policy_head.weight.noalias() += dlogits * top.transpose();
  grad.policy_head.bias += dlogits.rowwise().sum();
  grad.value_head.weight.noalias() += dvalues * top.transpose();
  grad.value_head.bias(0) += dvalues.sum();

  Eigen::MatrixXd dh = params.policy_head.weight.transpose() * dlogits;
  dh.noalias() += params.value_head.weight.transpose() * dvalues;
  for (std::size_t l = params.trunk.size(); l-- > 0;) {
    const Eigen::MatrixXd& out = acts.layers[l + 1];
    const Eigen::MatrixXd dz = (dh.array() * (1.0 - out.array().square())).matrix();
    grad.trunk[l].weight.noalias() += dz * acts.layers[l].transpose();
    grad.trunk[l].bias += dz.rowwise().sum();
    if (l > 0) dh = params.trunk[l].weight.transpose() * dz;
  }
}

AdamOptimizer::AdamOptimizer(std::size_t parameter_count, double beta1, double beta2, double eps)
    : m_(parameter_count, 0.0), v_(parameter_count, 0.0), beta1_(beta1), beta2_(beta2), eps_(eps) {}

void AdamOptimizer::step(PolicyParams& params, const PolicyParams& grad, double learning_rate) {
  std::vector<double> p = params.flatten();
  const std::vector<double> g = grad.flatten();
  if (p.size() != m_.size() || g.size() != m_.size()) throw std::invalid_argument("optimizer shape mismatch");
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t k = 0; k < p.size(); ++k) {
    m_[k] = beta1_ * m_[k] + (1.0 - beta1_) * g[k];
    v_[k] = beta2_ * v_[k] + (1.0 - beta2_) * g[k] * g[k];
    p[k] -= learning_rate * (m_[k] / c1) / (std::sqrt(v_[k] / c2) + eps_);
  }
  params.assign(p);
}

}  // namespace qttt
