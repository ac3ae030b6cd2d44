#pragma once

// Dense 64-bit matrices with a reverse-mode operation tape.

#include <cstdint>
#include <deque>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "careerscape/kernels.hpp"

namespace careerscape::ad {

/// Row-major dense matrix. Vectors are 1 x n (row) or n x 1 (column).
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c, double fill = 0.0)
      : rows(r), cols(c), data(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), fill) {}
  static Matrix from(int r, int c, std::initializer_list<double> values);

  double& operator()(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
  std::size_t size() const noexcept { return data.size(); }
  bool same_shape(const Matrix& o) const noexcept { return rows == o.rows && cols == o.cols; }
  double* row(int r) { return data.data() + static_cast<std::size_t>(r) * cols; }
  const double* row(int r) const { return data.data() + static_cast<std::size_t>(r) * cols; }

  friend bool operator==(const Matrix&, const Matrix&) = default;
};

/// A trainable tensor and its gradient accumulator.
struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;

  Parameter() = default;
  Parameter(std::string n, Matrix v) : name(std::move(n)), value(std::move(v)), grad(value.rows, value.cols) {}
  void zero_grad() { std::fill(grad.data.begin(), grad.data.end(), 0.0); }
};

class Tape;

/// Handle to a value recorded on a tape.
struct Var {
  Tape* tape = nullptr;
  int id = -1;

  const Matrix& value() const;
  int rows() const { return value().rows; }
  int cols() const { return value().cols; }
  double scalar() const;
};

class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, int self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix m);
  /// Trainable leaf referring to `p.value` without copying; `p` must outlive the tape.
  Var parameter(const Parameter& p);
  Var record(Matrix value, bool requires_grad, BackwardFn backward);

  const Matrix& value(int id) const {
    const auto& n = nodes_[static_cast<std::size_t>(id)];
    return n.external ? *n.external : n.value;
  }
  bool requires_grad(int id) const { return nodes_[static_cast<std::size_t>(id)].requires_grad; }
  /// Gradient slot of a node, allocated (zeroed) on first access.
  Matrix& grad(int id);
  bool has_grad(int id) const { return !nodes_[static_cast<std::size_t>(id)].grad.data.empty(); }

  /// Reverse sweep from a 1 x 1 output. Gradients accumulate additively across uses.
  void backward(Var output);

  /// Gradient of every parameter leaf after backward(); a parameter used k times appears k times.
  std::vector<std::pair<const Parameter*, const Matrix*>> parameter_gradients() const;

  std::size_t size() const noexcept { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    const Parameter* param = nullptr;
    const Matrix* external = nullptr;
    BackwardFn backward;
  };
  std::deque<Node> nodes_;
};

// ---------------------------------------------------------------------------
// Operations. All throw NumericError on a non-finite result and DataError on shape mismatch.

Var matmul(Var a, Var b);     // (m x k)(k x n)
Var matmul_nt(Var a, Var b);  // (m x k)(n x k)^T
Var add(Var a, Var b);
Var add_row(Var a, Var row);  // broadcast 1 x n over rows
Var mul_row(Var a, Var row);  // elementwise by a broadcast 1 x n row
Var scale(Var a, double s);
Var concat_cols(Var a, Var b);
Var slice_cols(Var a, int begin, int count);
Var mean_rows(Var a);  // 1 x n column means
Var relu(Var a);
Var sigmoid(Var a);
Var log_value(Var a);
Var softmax_rows(Var a);
Var layer_norm_rows(Var a, double eps = 1e-9);
/// Train mode zeroes each element with probability p and scales survivors by 1/(1-p);
/// eval mode (train == false) is the identity. The mask depends only on (seed, element).
Var dropout(Var a, double p, bool train, std::uint64_t seed);
Var gather_rows(Var a, std::vector<std::int32_t> rows);
/// S * a with a constant sparse S.
Var spmm(std::shared_ptr<const kernels::CsrMatrix> s, Var a);
Var sum_all(Var a);
/// Mean binary cross-entropy of probabilities (n x 1) against 0/1 labels. Probabilities are
/// clamped to [1e-7, 1 - 1e-7] before the log.
Var bce(Var probabilities, std::span<const double> labels);

inline constexpr double kProbabilityClamp = 1e-7;

/// Adds the tape's parameter-leaf gradients into the matching `grad` slots of `params`
/// (matched by identity); leaves of other parameters are ignored.
void accumulate_gradients(const Tape& tape, std::span<Parameter* const> params);

/// Throws NumericError if any value is NaN or infinite.
void check_finite(const Matrix& m, const char* what);

}  // namespace careerscape::ad
