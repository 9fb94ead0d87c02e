#pragma once

#include <array>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qttt/game.hpp"
#include "qttt/rng.hpp"

namespace qttt {

struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;
};

/// Tanh MLP trunk feeding a 45-way policy head and a scalar value head.
struct PolicyParams {
  int input_dim = 0;
  std::vector<int> hidden;
  std::vector<DenseLayer> trunk;
  DenseLayer policy_head;
  DenseLayer value_head;

  static PolicyParams initialize(int input_dim, const std::vector<int>& hidden, RngStream& rng);
  static PolicyParams zeros_like(const PolicyParams& other);

  std::size_t parameter_count() const;
  /// Trunk layers in order, then policy head, then value head; weights
  /// row-major followed by the bias.
  std::vector<double> flatten() const;
  void assign(std::span<const double> flat);
  bool all_finite() const;
};

struct PolicyOutput {
  std::array<double, kActionCount> probs{};
  double value = 0.0;
};

/// Masked softmax: illegal logits are excluded before normalization, so
/// illegal probabilities are exactly zero. Throws std::invalid_argument on an
/// all-false mask or a mismatched observation length.
PolicyOutput forward(const PolicyParams& params, std::span<const double> obs, const ActionMask& mask);

/// Writes masked probabilities of a logit column into `probs` (length 45)
/// and returns log-sum-exp over the legal entries.
double masked_softmax(const double* logits, const ActionMask& mask, double* probs);

struct BatchActivations {
  std::vector<Eigen::MatrixXd> layers;  // layers[0] is the input batch
  Eigen::MatrixXd logits;               // 45 x B
  Eigen::RowVectorXd values;            // 1 x B
};

/// Column-per-sample batch forward pass.
BatchActivations forward_batch(const PolicyParams& params, const Eigen::MatrixXd& obs);

/// Accumulates parameter gradients for upstream gradients on the logits and
/// values into `grad` (which must have the shape of `params`).
void backward_batch(const PolicyParams& params, const BatchActivations& acts, const Eigen::MatrixXd& dlogits,
                    const Eigen::RowVectorXd& dvalues, PolicyParams& grad);

class AdamOptimizer {
 public:
  explicit AdamOptimizer(std::size_t parameter_count, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

  void step(PolicyParams& params, const PolicyParams& grad, double learning_rate);

 private:
  std::vector<double> m_;
  std::vector<double> v_;
  double beta1_;
  double beta2_;
  double eps_;
  long t_ = 0;
};

}  // namespace qttt
