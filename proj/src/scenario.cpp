#include "mcl/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mcl/error.hpp"

namespace mcl {

int geometric_horizon(double u, double alpha) {
  // P(T >= k) = P(1 - u <= alpha^(k-1)).
  const double periods = std::floor(std::log1p(-u) / std::log(alpha));
  if (!(periods < static_cast<double>(std::numeric_limits<int>::max() - 1))) {
    return std::numeric_limits<int>::max() - 1;
  }
  return 1 + static_cast<int>(periods);
}

Scenario::Scenario(const ExogenousModel& model, RngKey key) : model_(&model), key_(key) {
  RngStream horizon_stream(key, 0);
  horizon_ = geometric_horizon(horizon_stream.uniform(), model.discount());
}

double Scenario::w_at(int t) const {
  if (t < 1 || t > horizon_) {
    throw ValidationError("scenario period out of range");
  }
  const auto i = static_cast<std::size_t>(t - 1);
  if (i >= w_.size()) {
    // Grow geometrically; horizons are usually short relative to their cap.
    const std::size_t size = std::min<std::size_t>(std::max<std::size_t>(2 * w_.size(), i + 1),
                                                   static_cast<std::size_t>(horizon_));
    w_.resize(size);
    ready_.resize(size, 0);
  }
  if (!ready_[i]) {
    RngStream stream(key_, static_cast<std::uint64_t>(t));
    w_[i] = model_->sample_w(stream);
    ready_[i] = 1;
  }
  return w_[i];
}

void Scenario::materialize() const {
  for (int t = 1; t <= horizon_; ++t) {
    (void)w_at(t);
  }
}

Scenario draw_scenario(const ExogenousModel& model, RngKey key) { return Scenario(model, key); }

}  // namespace mcl
