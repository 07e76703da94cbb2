#pragma once

#include <span>
#include <vector>

#include "mcl/rng.hpp"

namespace mcl {

/// States are fixed-length real vectors.
using State = std::vector<double>;

/// Actions are integers 1..action_count().
using Action = int;

/// An MDP whose randomness enters only through an i.i.d. exogenous value w:
/// taking action a in state s moves to f(s, a, w) at cost g(s, a, w).
///
/// Implementations must be immutable after construction; every member is
/// called concurrently from rollout workers.
class ExogenousModel {
 public:
  virtual ~ExogenousModel() = default;

  [[nodiscard]] virtual int state_dim() const = 0;
  [[nodiscard]] virtual int action_count() const = 0;
  [[nodiscard]] virtual double discount() const = 0;

  /// Nonempty, ascending subset of 1..action_count().
  [[nodiscard]] virtual std::vector<Action> allowed_actions(std::span<const double> s) const = 0;
  [[nodiscard]] virtual bool is_allowed(std::span<const double> s, Action a) const;

  /// Draws w from the stream. Pure in the stream's (key, id, position).
  virtual double sample_w(RngStream& stream) const = 0;

  /// Writes f(s, a, w) into `next` (size state_dim(); may not alias s).
  virtual void transition(std::span<const double> s, Action a, double w,
                          std::span<double> next) const = 0;
  [[nodiscard]] virtual double cost(std::span<const double> s, Action a, double w) const = 0;

  [[nodiscard]] virtual State initial_state() const = 0;
};

/// Deterministic stationary policy.
class Policy {
 public:
  virtual ~Policy() = default;
  /// Returns an action in the model's allowed_actions(s).
  [[nodiscard]] virtual Action act(std::span<const double> s) const = 0;
};

/// pi_0: always the largest allowed action.
class LargestActionPolicy final : public Policy {
 public:
  explicit LargestActionPolicy(const ExogenousModel& model) : model_(model) {}
  [[nodiscard]] Action act(std::span<const double> s) const override;

 private:
  const ExogenousModel& model_;
};

}  // namespace mcl
