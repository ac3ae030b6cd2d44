#include "careerscape/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "careerscape/error.hpp"
#include "careerscape/hashing.hpp"

namespace careerscape::ad {

Matrix Matrix::from(int r, int c, std::initializer_list<double> values) {
  Matrix m(r, c);
  if (values.size() != m.size()) throw DataError("Matrix::from: value count does not match shape");
  std::copy(values.begin(), values.end(), m.data.begin());
  return m;
}

const Matrix& Var::value() const { return tape->value(id); }

double Var::scalar() const {
  const auto& v = value();
  if (v.size() != 1) throw DataError("scalar() on a non-scalar value");
  return v.data[0];
}

void check_finite(const Matrix& m, const char* what) {
  // x * 0 is NaN exactly when x is NaN or infinite, so one reduction covers every entry.
  double probe = 0.0;
  const double* d = m.data.data();
  const std::size_t n = m.data.size();
#pragma omp simd reduction(+ : probe)
  for (std::size_t i = 0; i < n; ++i) probe += d[i] * 0.0;
  if (!std::isfinite(probe)) throw NumericError(std::string("non-finite value produced by ") + what);
}

Var Tape::constant(Matrix m) {
  check_finite(m, "constant");
  nodes_.push_back({std::move(m), {}, false, nullptr, nullptr, {}});
  return {this, static_cast<int>(nodes_.size() - 1)};
}

Var Tape::parameter(const Parameter& p) {
  check_finite(p.value, p.name.c_str());
  nodes_.push_back({{}, {}, true, &p, &p.value, {}});
  return {this, static_cast<int>(nodes_.size() - 1)};
}

Var Tape::record(Matrix value, bool requires_grad, BackwardFn backward) {
  nodes_.push_back(
      {std::move(value), {}, requires_grad, nullptr, nullptr, requires_grad ? std::move(backward) : BackwardFn{}});
  return {this, static_cast<int>(nodes_.size() - 1)};
}

Matrix& Tape::grad(int id) {
  auto& n = nodes_[static_cast<std::size_t>(id)];
  if (n.grad.data.empty()) {
    const auto& v = value(id);
    n.grad = Matrix(v.rows, v.cols);
  }
  return n.grad;
}

std::vector<std::pair<const Parameter*, const Matrix*>> Tape::parameter_gradients() const {
  std::vector<std::pair<const Parameter*, const Matrix*>> out;
  for (const auto& n : nodes_)
    if (n.param && !n.grad.data.empty()) out.emplace_back(n.param, &n.grad);
  return out;
}

void accumulate_gradients(const Tape& tape, std::span<Parameter* const> params) {
  for (auto [param, grad] : tape.parameter_gradients()) {
    auto it = std::find(params.begin(), params.end(), param);
    if (it == params.end()) continue;
    auto& dst = (*it)->grad;
    if (!dst.same_shape(*grad)) dst = Matrix(grad->rows, grad->cols);
    for (std::size_t i = 0; i < grad->size(); ++i) dst.data[i] += grad->data[i];
  }
}

void Tape::backward(Var output) {
  if (output.tape != this) throw DataError("backward: variable belongs to another tape");
  const auto& out = value(output.id);
  if (out.rows != 1 || out.cols != 1) throw DataError("backward requires a scalar output");
  if (!requires_grad(output.id)) return;
  grad(output.id).data[0] += 1.0;
  for (int id = output.id; id >= 0; --id) {
    auto& n = nodes_[static_cast<std::size_t>(id)];
    if (!n.requires_grad || n.grad.data.empty()) continue;
    if (n.backward) n.backward(*this, id);
  }
}

// ---------------------------------------------------------------------------

namespace {

[[noreturn]] void shape_error(const char* op, const Matrix& a, const Matrix& b) {
  throw DataError(std::string(op) + ": shape mismatch " + std::to_string(a.rows) + "x" + std::to_string(a.cols) +
                  " vs " + std::to_string(b.rows) + "x" + std::to_string(b.cols));
}

Var finish(Tape& t, Matrix value, const char* op, bool requires_grad, Tape::BackwardFn fn) {
  check_finite(value, op);
  return t.record(std::move(value), requires_grad, std::move(fn));
}

bool needs(Tape& t, Var v) { return t.requires_grad(v.id); }

void accumulate(Matrix& into, const Matrix& from) {
  for (std::size_t i = 0; i < from.size(); ++i) into.data[i] += from.data[i];
}

template <typename F>
Var unary(Var a, const char* op, F f, std::function<void(const Matrix& x, const Matrix& y, const Matrix& dy, Matrix& dx)> df) {
  Tape& t = *a.tape;
  const auto& x = t.value(a.id);
  Matrix y(x.rows, x.cols);
  for (std::size_t i = 0; i < x.size(); ++i) y.data[i] = f(x.data[i]);
  const int ai = a.id;
  return finish(t, std::move(y), op, needs(t, a), [ai, df](Tape& tp, int self) {
    df(tp.value(ai), tp.value(self), tp.grad(self), tp.grad(ai));
  });
}

}  // namespace

Var matmul(Var a, Var b) {
  Tape& t = *a.tape;
  const auto& A = t.value(a.id);
  const auto& B = t.value(b.id);
  if (A.cols != B.rows) shape_error("matmul", A, B);
  Matrix C(A.rows, B.cols);
  kernels::gemm_nn(A.rows, B.cols, A.cols, A.data.data(), B.data.data(), C.data.data(), false);
  const int ai = a.id, bi = b.id;
  return finish(t, std::move(C), "matmul", needs(t, a) || needs(t, b), [ai, bi](Tape& tp, int self) {
    const auto& A = tp.value(ai);
    const auto& B = tp.value(bi);
    const auto& dC = tp.grad(self);
    if (tp.requires_grad(ai))
      kernels::gemm_nt(A.rows, A.cols, B.cols, dC.data.data(), B.data.data(), tp.grad(ai).data.data(), true);
    if (tp.requires_grad(bi))
      kernels::gemm_tn(B.rows, B.cols, A.rows, A.data.data(), dC.data.data(), tp.grad(bi).data.data(), true);
  });
}

Var matmul_nt(Var a, Var b) {
  Tape& t = *a.tape;
  const auto& A = t.value(a.id);
  const auto& B = t.value(b.id);
  if (A.cols != B.cols) shape_error("matmul_nt", A, B);
  Matrix C(A.rows, B.rows);
  kernels::gemm_nt(A.rows, B.rows, A.cols, A.data.data(), B.data.data(), C.data.data(), false);
  const int ai = a.id, bi = b.id;
  return finish(t, std::move(C), "matmul_nt", needs(t, a) || needs(t, b), [ai, bi](Tape& tp, int self) {
    const auto& A = tp.value(ai);
    const auto& B = tp.value(bi);
    const auto& dC = tp.grad(self);
    // dA = dC * B, dB = dC^T * A
    if (tp.requires_grad(ai))
      kernels::gemm_nn(A.rows, A.cols, B.rows, dC.data.data(), B.data.data(), tp.grad(ai).data.data(), true);
    if (tp.requires_grad(bi))
      kernels::gemm_tn(B.rows, B.cols, A.rows, dC.data.data(), A.data.data(), tp.grad(bi).data.data(), true);
  });
}

Var add(Var a, Var b) {
  Tape& t = *a.tape;
  const auto& A = t.value(a.id);
  const auto& B = t.value(b.id);
  if (!A.same_shape(B)) shape_error("add", A, B);
  Matrix C = A;
  accumulate(C, B);
  const int ai = a.id, bi = b.id;
  return finish(t, std::move(C), "add", needs(t, a) || needs(t, b), [ai, bi](Tape& tp, int self) {
    const auto& dC = tp.grad(self);
    if (tp.requires_grad(ai)) accumulate(tp.grad(ai), dC);
    if (tp.requires_grad(bi)) accumulate(tp.grad(bi), dC);
  });
}

Var add_row(Var a, Var row) {
  Tape& t = *a.tape;
  const auto& A = t.value(a.id);
  const auto& R = t.value(row.id);
  if (R.rows != 1 || R.cols != A.cols) shape_error("add_row", A, R);
  Matrix C = A;
  for (int i = 0; i < C.rows; ++i)
    for (int j = 0; j < C.cols; ++j) C(i, j) += R.data[j];
  const int ai = a.id, ri = row.id;
  return finish(t, std::move(C), "add_row", needs(t, a) || needs(t, row), [ai, ri](Tape& tp, int self) {
    const auto& dC = tp.grad(self);
    if (tp.requires_grad(ai)) accumulate(tp.grad(ai), dC);
    if (tp.requires_grad(ri)) {
      auto& dR = tp.grad(ri);
      for (int i = 0; i < dC.rows; ++i)
        for (int j = 0; j < dC.cols; ++j) dR.data[j] += dC(i, j);
    }
  });
}

Var mul_row(Var a, Var row) {
  Tape& t = *a.tape;
  const auto& A = t.value(a.id);
  const auto& R = t.value(row.id);
  if (R.rows != 1 || R.cols != A.cols) shape_error("mul_row", A, R);
  Matrix C = A;
  for (int i = 0; i < C.rows; ++i)
    for (int j = 0; j < C.cols; ++j) C(i, j) *= R.data[j];
  const int ai = a.id, ri = row.id;
  return finish(t, std::move(C), "mul_row", needs(t, a) || needs(t, row), [ai, ri](Tape& tp, int self) {
    const auto& A = tp.value(ai);
    const auto& R = tp.value(ri);
    const auto& dC = tp.grad(self);
    if (tp.requires_grad(ai)) {
      auto& dA = tp.grad(ai);
      for (int i = 0; i < dC.rows; ++i)
        for (int j = 0; j < dC.cols; ++j) dA(i, j) += dC(i, j) * R.data[j];
    }
    if (tp.requires_grad(ri)) {
      auto& dR = tp.grad(ri);
      for (int i = 0; i < dC.rows; ++i)
        for (int j = 0; j < dC.cols; ++j) dR.data[j] += dC(i, j) * A(i, j);
    }
  });
}

Var scale(Var a, double s) {
  return unary(
      a, "scale", [s](double x) { return s * x; },
      [s](const Matrix&, const Matrix&, const Matrix& dy, Matrix& dx) {
        for (std::size_t i = 0; i < dy.size(); ++i) dx.data[i] += s * dy.data[i];
      });
}

Var concat_cols(Var a, Var b) {
  Tape& t = *a.tape;
  const auto& A = t.value(a.id);
  const auto& B = t.value(b.id);
  if (A.rows != B.rows) shape_error("concat_cols", A, B);
  Matrix C(A.rows, A.cols + B.cols);
  for (int i = 0; i < A.rows; ++i) {
    std::copy(A.row(i), A.row(i) + A.cols, C.row(i));
    std::copy(B.row(i), B.row(i) + B.cols, C.row(i) + A.cols);
  }
  const int ai = a.id, bi = b.id;
  return finish(t, std::move(C), "concat_cols", needs(t, a) || needs(t, b), [ai, bi](Tape& tp, int self) {
    const auto& dC = tp.grad(self);
    const int ac = tp.value(ai).cols;
    const int bc = tp.value(bi).cols;
    if (tp.requires_grad(ai)) {
      auto& dA = tp.grad(ai);
      for (int i = 0; i < dC.rows; ++i)
        for (int j = 0; j < ac; ++j) dA(i, j) += dC(i, j);
    }
    if (tp.requires_grad(bi)) {
      auto& dB = tp.grad(bi);
      for (int i = 0; i < dC.rows; ++i)
        for (int j = 0; j < bc; ++j) dB(i, j) += dC(i, ac + j);
    }
  });
}

Var slice_cols(Var a, int begin, int count) {
  Tape& t = *a.tape;
  const auto& A = t.value(a.id);
  if (begin < 0 || count < 0 || begin + count > A.cols) throw DataError("slice_cols: range out of bounds");
  Matrix C(A.rows, count);
  for (int i = 0; i < A.rows; ++i) std::copy(A.row(i) + begin, A.row(i) + begin + count, C.row(i));
  const int ai = a.id;
  return finish(t, std::move(C), "slice_cols", needs(t, a), [ai, begin, count](Tape& tp, int self) {
    const auto& dC = tp.grad(self);
    auto& dA = tp.grad(ai);
    for (int i = 0; i < dC.rows; ++i)
      for (int j = 0; j < count; ++j) dA(i, begin + j) += dC(i, j);
  });
}

Var mean_rows(Var a) {
  Tape& t = *a.tape;
  const auto& A = t.value(a.id);
  if (A.rows == 0) throw DataError("mean_rows of an empty matrix");
  Matrix C(1, A.cols);
  for (int i = 0; i < A.rows; ++i)
    for (int j = 0; j < A.cols; ++j) C.data[j] += A(i, j);
  const double inv = 1.0 / A.rows;
  for (double& x : C.data) x *= inv;
  const int ai = a.id;
  return finish(t, std::move(C), "mean_rows", needs(t, a), [ai](Tape& tp, int self) {
    const auto& dC = tp.grad(self);
    auto& dA = tp.grad(ai);
    const double inv = 1.0 / dA.rows;
    for (int i = 0; i < dA.rows; ++i)
      for (int j = 0; j < dA.cols; ++j) dA(i, j) += dC.data[j] * inv;
  });
}

Var relu(Var a) {
  return unary(
      a, "relu", [](double x) { return x > 0.0 ? x : 0.0; },
      [](const Matrix& x, const Matrix&, const Matrix& dy, Matrix& dx) {
        for (std::size_t i = 0; i < dy.size(); ++i)
          if (x.data[i] > 0.0) dx.data[i] += dy.data[i];
      });
}

Var sigmoid(Var a) {
  return unary(
      a, "sigmoid",
      [](double x) { return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); },
      [](const Matrix&, const Matrix& y, const Matrix& dy, Matrix& dx) {
        for (std::size_t i = 0; i < dy.size(); ++i) dx.data[i] += dy.data[i] * y.data[i] * (1.0 - y.data[i]);
      });
}

Var log_value(Var a) {
  return unary(
      a, "log", [](double x) { return std::log(x); },
      [](const Matrix& x, const Matrix&, const Matrix& dy, Matrix& dx) {
        for (std::size_t i = 0; i < dy.size(); ++i) dx.data[i] += dy.data[i] / x.data[i];
      });
}

Var softmax_rows(Var a) {
  Tape& t = *a.tape;
  const auto& A = t.value(a.id);
  Matrix Y(A.rows, A.cols);
  for (int i = 0; i < A.rows; ++i) {
    const double* x = A.row(i);
    double* y = Y.row(i);
    const double mx = *std::max_element(x, x + A.cols);
    double s = 0.0;
    for (int j = 0; j < A.cols; ++j) s += (y[j] = std::exp(x[j] - mx));
    for (int j = 0; j < A.cols; ++j) y[j] /= s;
  }
  const int ai = a.id;
  return finish(t, std::move(Y), "softmax_rows", needs(t, a), [ai](Tape& tp, int self) {
    const auto& Y = tp.value(self);
    const auto& dY = tp.grad(self);
    auto& dA = tp.grad(ai);
    for (int i = 0; i < Y.rows; ++i) {
      double dot = 0.0;
      for (int j = 0; j < Y.cols; ++j) dot += dY(i, j) * Y(i, j);
      for (int j = 0; j < Y.cols; ++j) dA(i, j) += Y(i, j) * (dY(i, j) - dot);
    }
  });
}

Var layer_norm_rows(Var a, double eps) {
  Tape& t = *a.tape;
  const auto& A = t.value(a.id);
  const int n = A.cols;
  Matrix Y(A.rows, n);
  std::vector<double> inv_std(static_cast<std::size_t>(A.rows));
  for (int i = 0; i < A.rows; ++i) {
    const double* x = A.row(i);
    double mean = 0.0;
    for (int j = 0; j < n; ++j) mean += x[j];
    mean /= n;
    double var = 0.0;
    for (int j = 0; j < n; ++j) var += (x[j] - mean) * (x[j] - mean);
    var /= n;
    inv_std[i] = 1.0 / std::sqrt(var + eps);
    for (int j = 0; j < n; ++j) Y(i, j) = (x[j] - mean) * inv_std[i];
  }
  const int ai = a.id;
  return finish(t, std::move(Y), "layer_norm_rows", needs(t, a), [ai, inv_std = std::move(inv_std)](Tape& tp, int self) {
    const auto& Y = tp.value(self);
    const auto& dY = tp.grad(self);
    auto& dA = tp.grad(ai);
    const int n = Y.cols;
    for (int i = 0; i < Y.rows; ++i) {
      double mean_dy = 0.0, mean_dy_y = 0.0;
      for (int j = 0; j < n; ++j) {
        mean_dy += dY(i, j);
        mean_dy_y += dY(i, j) * Y(i, j);
      }
      mean_dy /= n;
      mean_dy_y /= n;
      for (int j = 0; j < n; ++j) dA(i, j) += inv_std[i] * (dY(i, j) - mean_dy - Y(i, j) * mean_dy_y);
    }
  });
}

Var dropout(Var a, double p, bool train, std::uint64_t seed) {
  if (!(p >= 0.0 && p < 1.0)) throw DataError("dropout probability must be in [0, 1)");
  if (!train || p == 0.0) return a;
  Tape& t = *a.tape;
  const auto& A = t.value(a.id);
  const CounterRng rng(seed);
  const double keep_scale = 1.0 / (1.0 - p);
  std::vector<double> mask(A.size());
  Matrix Y(A.rows, A.cols);
  for (std::size_t i = 0; i < A.size(); ++i) {
    mask[i] = rng.uniform(i) < p ? 0.0 : keep_scale;
    Y.data[i] = A.data[i] * mask[i];
  }
  const int ai = a.id;
  return finish(t, std::move(Y), "dropout", needs(t, a), [ai, mask = std::move(mask)](Tape& tp, int self) {
    const auto& dY = tp.grad(self);
    auto& dA = tp.grad(ai);
    for (std::size_t i = 0; i < dY.size(); ++i) dA.data[i] += dY.data[i] * mask[i];
  });
}

Var gather_rows(Var a, std::vector<std::int32_t> rows) {
  Tape& t = *a.tape;
  const auto& A = t.value(a.id);
  Matrix Y(static_cast<int>(rows.size()), A.cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= A.rows) throw DataError("gather_rows: row index out of range");
    std::copy(A.row(rows[i]), A.row(rows[i]) + A.cols, Y.row(static_cast<int>(i)));
  }
  const int ai = a.id;
  return finish(t, std::move(Y), "gather_rows", needs(t, a), [ai, rows = std::move(rows)](Tape& tp, int self) {
    const auto& dY = tp.grad(self);
    auto& dA = tp.grad(ai);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const double* src = dY.row(static_cast<int>(i));
      double* dst = dA.row(rows[i]);
      for (int j = 0; j < dA.cols; ++j) dst[j] += src[j];
    }
  });
}

Var spmm(std::shared_ptr<const kernels::CsrMatrix> s, Var a) {
  Tape& t = *a.tape;
  const auto& A = t.value(a.id);
  if (s->cols != A.rows) throw DataError("spmm: sparse matrix columns do not match input rows");
  Matrix Y(s->rows, A.cols);
  kernels::spmm(*s, A.cols, A.data.data(), Y.data.data(), false);
  const int ai = a.id;
  return finish(t, std::move(Y), "spmm", needs(t, a), [ai, s = std::move(s)](Tape& tp, int self) {
    const auto& dY = tp.grad(self);
    kernels::spmm_transposed(*s, dY.cols, dY.data.data(), tp.grad(ai).data.data());
  });
}

Var sum_all(Var a) {
  Tape& t = *a.tape;
  const auto& A = t.value(a.id);
  Matrix Y(1, 1);
  for (double x : A.data) Y.data[0] += x;
  const int ai = a.id;
  return finish(t, std::move(Y), "sum_all", needs(t, a), [ai](Tape& tp, int self) {
    const double g = tp.grad(self).data[0];
    for (double& x : tp.grad(ai).data) x += g;
  });
}

Var bce(Var probabilities, std::span<const double> labels) {
  Tape& t = *probabilities.tape;
  const auto& P = t.value(probabilities.id);
  if (P.size() != labels.size()) throw DataError("bce: prediction/label length mismatch");
  if (labels.empty()) throw DataError("bce: empty batch");
  std::vector<double> y(labels.begin(), labels.end());
  Matrix L(1, 1);
  const double n = static_cast<double>(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double p = std::clamp(P.data[i], kProbabilityClamp, 1.0 - kProbabilityClamp);
    L.data[0] -= (y[i] * std::log(p) + (1.0 - y[i]) * std::log(1.0 - p)) / n;
  }
  const int pi = probabilities.id;
  return finish(t, std::move(L), "bce", needs(t, probabilities), [pi, y = std::move(y)](Tape& tp, int self) {
    const auto& P = tp.value(pi);
    const double g = tp.grad(self).data[0];
    auto& dP = tp.grad(pi);
    const double n = static_cast<double>(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double raw = P.data[i];
      if (raw < kProbabilityClamp || raw > 1.0 - kProbabilityClamp) continue;  // flat outside the clamp
      dP.data[i] += g * (-(y[i] / raw) + (1.0 - y[i]) / (1.0 - raw)) / n;
    }
  });
}

}  // namespace careerscape::ad
