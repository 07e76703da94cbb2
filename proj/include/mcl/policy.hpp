#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "mcl/model.hpp"

namespace mcl {

/// Caches act(s) of a deterministic policy keyed on the exact bit pattern of s.
///
/// Not thread-safe: each worker owns one. Used to make neural base policies
/// cheap inside rollouts, where discrete models revisit the same states.
class MemoizedPolicy final : public Policy {
 public:
  explicit MemoizedPolicy(const Policy& inner) : inner_(inner) {}

  [[nodiscard]] Action act(std::span<const double> s) const override;
  [[nodiscard]] std::size_t cache_size() const { return cache_.size(); }

 private:
  struct KeyHash {
    std::size_t operator()(const std::vector<double>& v) const noexcept;
  };

  const Policy& inner_;
  mutable std::unordered_map<std::vector<double>, Action, KeyHash> cache_;
  mutable std::vector<double> probe_;
};

}  // namespace mcl
