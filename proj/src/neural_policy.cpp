#include "mcl/neural_policy.hpp"

#include "mcl/error.hpp"

namespace mcl {

NeuralPolicy::NeuralPolicy(const ExogenousModel& model,
                           std::shared_ptr<const NeuralPolicyArtifact> artifact)
    : model_(model), artifact_(std::move(artifact)) {
  if (!artifact_) {
    throw ValidationError("neural policy: missing artifact");
  }
  if (artifact_->params.arch.input_dim != model.state_dim() ||
      artifact_->params.arch.output_dim != model.action_count()) {
    throw DimensionMismatch("neural policy: network shape does not fit the model");
  }
}

Action NeuralPolicy::act(std::span<const double> s) const {
  const auto allowed = model_.allowed_actions(s);
  return mcl::act(*artifact_, s, allowed);
}

}  // namespace mcl
