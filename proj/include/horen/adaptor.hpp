#pragma once

#include "horen/types.hpp"

namespace horen {

/// Gradient-descent settings for payload fitting. Plain constant-rate descent
/// on a quadratic; the contraction factor per step is |1 - learning_rate|.
struct AdaptorConfig {
  Scalar learning_rate = 0.1;
  int max_steps = 50;
  Scalar loss_threshold = 1e-2;
  int patience = 3;  // consecutive non-improving steps tolerated

  void validate() const;
};

/// What an edit asks for: an identifying label plus the value the payload
/// should reproduce.
struct EditTarget {
  EntryLabel label;
  VectorX target_vector;
};

/// Trainable value attached to a codebook entry.
struct Payload {
  VectorX value;
  bool trained = false;     // reached the loss threshold
  Scalar final_loss = 0.0;  // loss at the last training step
  int steps_used = 0;       // steps consumed by the last training call

  /// Zero-initialized payload of the given dimension.
  static Payload cold(Index dim) {
    Payload p;
    p.value = VectorX::Zero(dim);
    return p;
  }
};

/// Fits the payload to the target by gradient steps
///   v <- v - learning_rate * (v - target)
/// on the loss 0.5 ||v - target||^2, starting from the value already in
/// `init` (so repeat edits refine rather than restart). Stops as soon as the
/// post-step loss reaches loss_threshold, when `patience` consecutive steps
/// fail to improve the best loss seen, or when max_steps is exhausted.
/// Throws NonFiniteLossError if the loss leaves the finite range.
Payload train_payload(Payload init, const EditTarget& target,
                      const AdaptorConfig& config);

/// Loss of a payload against a target: 0.5 ||value - target||^2.
Scalar evaluate_payload(const Payload& payload, const EditTarget& target);

}  // namespace horen
