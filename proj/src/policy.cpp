#include "mcl/policy.hpp"

#include <algorithm>
#include <bit>

namespace mcl {

bool ExogenousModel::is_allowed(std::span<const double> s, Action a) const {
  const auto allowed = allowed_actions(s);
  return std::binary_search(allowed.begin(), allowed.end(), a);
}

Action LargestActionPolicy::act(std::span<const double> s) const {
  return model_.allowed_actions(s).back();
}

std::size_t MemoizedPolicy::KeyHash::operator()(const std::vector<double>& v) const noexcept {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (double x : v) {
    h ^= std::bit_cast<std::uint64_t>(x);
    h *= 0x100000001b3ull;
    h ^= h >> 29;
  }
  return static_cast<std::size_t>(h);
}

Action MemoizedPolicy::act(std::span<const double> s) const {
  probe_.assign(s.begin(), s.end());
  if (auto it = cache_.find(probe_); it != cache_.end()) {
    return it->second;
  }
  const Action a = inner_.act(s);
  cache_.emplace(probe_, a);
  return a;
}

}  // namespace mcl
