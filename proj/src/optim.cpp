#include "careerscape/optim.hpp"

#include <algorithm>
#include <cmath>

#include "careerscape/error.hpp"

namespace careerscape::ad {

void adam_step(std::span<Parameter* const> params, AdamState& state) {
  if (state.m.size() != params.size()) {
    state.m.clear();
    state.v.clear();
    for (const auto* p : params) {
      state.m.emplace_back(p->value.rows, p->value.cols);
      state.v.emplace_back(p->value.rows, p->value.cols);
    }
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto& p = *params[k];
    auto& m = state.m[k];
    auto& v = state.v[k];
    if (!m.same_shape(p.value) || !p.grad.same_shape(p.value))
      throw DataError("adam_step: shape mismatch for parameter " + p.name);
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad.data[i];
      if (!std::isfinite(g)) throw NumericError("adam_step: non-finite gradient in " + p.name);
      m.data[i] = state.beta1 * m.data[i] + (1.0 - state.beta1) * g;
      v.data[i] = state.beta2 * v.data[i] + (1.0 - state.beta2) * g * g;
      const double update = state.lr * (m.data[i] / c1) / (std::sqrt(v.data[i] / c2) + state.epsilon);
      if (!std::isfinite(update)) throw NumericError("adam_step: non-finite update in " + p.name);
      p.value.data[i] -= update;
    }
  }
}

bool PlateauScheduler::observe(double loss, AdamState& state) {
  if (!seen_ || loss < best_) {
    best_ = loss;
    seen_ = true;
    bad_ = 0;
    return false;
  }
  if (++bad_ < patience_) return false;
  bad_ = 0;
  const double next = std::max(floor_, state.lr * factor_);
  const bool changed = next < state.lr;
  state.lr = next;
  return changed;
}

namespace {

double evaluate(const LossFn& loss_fn) {
  Tape tape;
  return loss_fn(tape).scalar();
}

}  // namespace

GradCheckResult grad_check(const LossFn& loss_fn, std::span<Parameter* const> params, double epsilon,
                           std::size_t max_coords) {
  for (auto* p : params) p->zero_grad();
  double base = 0.0;
  {
    Tape tape;
    auto loss = loss_fn(tape);
    base = loss.scalar();
    tape.backward(loss);
    accumulate_gradients(tape, params);
  }
  if (evaluate(loss_fn) != base) throw NumericError("grad_check: loss function is not deterministic");

  GradCheckResult result;
  for (auto* p : params) {
    const Matrix analytic = p->grad;
    const std::size_t n = p->value.size();
    const std::size_t stride = std::max<std::size_t>(1, (n + max_coords - 1) / max_coords);
    for (std::size_t i = 0; i < n; i += stride) {
      const double saved = p->value.data[i];
      p->value.data[i] = saved + epsilon;
      const double up = evaluate(loss_fn);
      p->value.data[i] = saved - epsilon;
      const double down = evaluate(loss_fn);
      p->value.data[i] = saved;
      const double numeric = (up - down) / (2.0 * epsilon);
      const double ad = analytic.data[i];
      const double err = std::abs(ad - numeric) / std::max(1e-8, std::abs(ad) + std::abs(numeric));
      ++result.checked;
      if (err > result.max_relative_error) {
        result.max_relative_error = err;
        result.worst_parameter = p->name;
        result.worst_index = i;
      }
    }
  }
  return result;
}

}  // namespace careerscape::ad
