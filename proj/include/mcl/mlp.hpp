#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mcl/model.hpp"
#include "mcl/rng.hpp"

namespace mcl {

struct MlpArchitecture {
  int input_dim = 0;
  std::vector<int> hidden{128, 64, 64};
  int output_dim = 0;

  void validate() const;
  [[nodiscard]] int layers() const { return static_cast<int>(hidden.size()) + 1; }
  friend bool operator==(const MlpArchitecture&, const MlpArchitecture&) = default;
};

/// theta = {A^1, b^1, ..., A^L, b^L}; ReLU on hidden layers, identity output.
struct MlpParameters {
  MlpArchitecture arch;
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;

  /// All-zero parameters with the given shapes.
  static MlpParameters zeros(const MlpArchitecture& arch);
  /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for every weight and bias;
  /// layer l draws row-major from stream 0 of key.derive(l).
  static MlpParameters init(const MlpArchitecture& arch, RngKey key);

  [[nodiscard]] std::size_t parameter_count() const;
  friend bool operator==(const MlpParameters& a, const MlpParameters& b);
};

/// N_theta(x). Throws DimensionMismatch.
Eigen::VectorXd forward(const MlpParameters& params, const Eigen::VectorXd& x);

/// Index 0-based score k belongs to action k + 1.
/// argmax over `allowed` of the scores, ties to the smallest action.
Action masked_argmax(const Eigen::VectorXd& scores, std::span<const Action> allowed);

/// -log softmax_label over `allowed`, max-subtracted. Throws ActionNotAllowed
/// if the label is not in `allowed`. When `dscores` is given it receives the
/// gradient with respect to the score vector (exactly 0 off the mask).
double masked_loss_from_scores(const Eigen::VectorXd& scores, Action label,
                               std::span<const Action> allowed, Eigen::VectorXd* dscores = nullptr);

double masked_loss(const MlpParameters& params, const Eigen::VectorXd& x, Action label,
                   std::span<const Action> allowed);

/// Training data in network coordinates: one column per sample.
struct Batch {
  Eigen::MatrixXd x;
  std::vector<Action> labels;
  std::vector<std::vector<Action>> allowed;
};

struct Gradients {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
};

/// Mean masked loss over the columns of `batch` and, if `grads` is given,
/// its gradient by backpropagation.
double batch_loss(const MlpParameters& params, const Batch& batch, Gradients* grads = nullptr);

/// Adam with bias correction.
struct AdamConfig {
  double step_size = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class Adam {
 public:
  Adam(const MlpParameters& shape, AdamConfig cfg);
  void step(MlpParameters& params, const Gradients& grads);

 private:
  AdamConfig cfg_;
  long t_ = 0;
  Gradients m_;
  Gradients v_;
};

/// A trained classifier policy together with its input standardization.
struct NeuralPolicyArtifact {
  MlpParameters params;
  Eigen::VectorXd shift;
  Eigen::VectorXd scale;
  std::string instance_hash;
  int generation = 0;
  RngKey train_key;

  [[nodiscard]] Eigen::VectorXd normalize(std::span<const double> s) const;
  [[nodiscard]] Eigen::VectorXd scores(std::span<const double> s) const;
  friend bool operator==(const NeuralPolicyArtifact& a, const NeuralPolicyArtifact& b);
};

/// pi_theta(s) restricted to `allowed`.
Action act(const NeuralPolicyArtifact& artifact, std::span<const double> s,
           std::span<const Action> allowed);

std::string write_artifact(const NeuralPolicyArtifact& artifact);
NeuralPolicyArtifact read_artifact(const std::string& text);

}  // namespace mcl
