#include "horen/adaptor.hpp"

#include <cmath>
#include <limits>

namespace horen {

void AdaptorConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw InvalidConfigError("learning_rate must be finite and > 0");
  }
  if (max_steps < 1) {
    throw InvalidConfigError("max_steps must be >= 1");
  }
  if (!(loss_threshold >= 0.0)) {
    throw InvalidConfigError("loss_threshold must be >= 0");
  }
  if (patience < 1) {
    throw InvalidConfigError("patience must be >= 1");
  }
}

Payload train_payload(Payload init, const EditTarget& target,
                      const AdaptorConfig& config) {
  config.validate();
  if (init.value.size() != target.target_vector.size()) {
    throw DimensionMismatchError("payload is " +
                                 std::to_string(init.value.size()) +
                                 "-dimensional, target is " +
                                 std::to_string(target.target_vector.size()));
  }
  Payload p = std::move(init);
  Scalar best = std::numeric_limits<Scalar>::infinity();
  Scalar loss = 0.0;
  int stalled = 0;
  p.steps_used = 0;
  for (int step = 1; step <= config.max_steps; ++step) {
    p.value -= config.learning_rate * (p.value - target.target_vector);
    loss = 0.5 * (p.value - target.target_vector).squaredNorm();
    p.steps_used = step;
    if (!std::isfinite(loss)) {
      throw NonFiniteLossError("loss diverged at step " +
                               std::to_string(step) +
                               "; lower the learning rate");
    }
    if (loss <= config.loss_threshold) {
      break;
    }
    if (loss < best) {
      best = loss;
      stalled = 0;
    } else if (++stalled >= config.patience) {
      break;
    }
  }
  p.final_loss = loss;
  p.trained = loss <= config.loss_threshold;
  return p;
}

Scalar evaluate_payload(const Payload& payload, const EditTarget& target) {
  if (payload.value.size() != target.target_vector.size()) {
    throw DimensionMismatchError("payload is " +
                                 std::to_string(payload.value.size()) +
                                 "-dimensional, target is " +
                                 std::to_string(target.target_vector.size()));
  }
  return 0.5 * (payload.value - target.target_vector).squaredNorm();
}

}  // namespace horen
