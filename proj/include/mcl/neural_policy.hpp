#pragma once

#include <memory>

#include "mcl/mlp.hpp"
#include "mcl/model.hpp"

namespace mcl {

/// pi_theta over a model's allowed-action sets. Pure; safe to share between
/// threads.
class NeuralPolicy final : public Policy {
 public:
  NeuralPolicy(const ExogenousModel& model, std::shared_ptr<const NeuralPolicyArtifact> artifact);

  [[nodiscard]] Action act(std::span<const double> s) const override;
  [[nodiscard]] const NeuralPolicyArtifact& artifact() const { return *artifact_; }

 private:
  const ExogenousModel& model_;
  std::shared_ptr<const NeuralPolicyArtifact> artifact_;
};

}  // namespace mcl
