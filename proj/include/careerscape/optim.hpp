#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "careerscape/autodiff.hpp"

namespace careerscape::ad {

struct AdamState {
  double lr = 0.005;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::int64_t step = 0;
  std::vector<Matrix> m;
  std::vector<Matrix> v;
};

/// One bias-corrected Adam update of every parameter from its `grad` slot.
void adam_step(std::span<Parameter* const> params, AdamState& state);

/// Multiplies the learning rate by `factor` when the monitored loss has not improved for
/// `patience` consecutive observations; never goes below `floor`.
class PlateauScheduler {
 public:
  PlateauScheduler(double factor = 0.5, int patience = 5, double floor = 1e-5)
      : factor_(factor), patience_(patience), floor_(floor) {}

  /// Returns true when the rate was reduced.
  bool observe(double loss, AdamState& state);

 private:
  double factor_;
  int patience_;
  double floor_;
  double best_ = 0.0;
  bool seen_ = false;
  int bad_ = 0;
};

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  std::size_t worst_index = 0;
  std::size_t checked = 0;
};

/// Builds the loss on a fresh tape. Must be deterministic (dropout off).
using LossFn = std::function<Var(Tape&)>;

/// Compares reverse-mode gradients with central differences, at most `max_coords` evenly
/// strided coordinates per parameter. Error per coordinate:
/// |g_ad - g_fd| / max(1e-8, |g_ad| + |g_fd|).
GradCheckResult grad_check(const LossFn& loss_fn, std::span<Parameter* const> params, double epsilon = 1e-5,
                           std::size_t max_coords = 200);

}  // namespace careerscape::ad
