#include "gpd/nn/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <numbers>

namespace gpd::nn {

namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapMat = Eigen::Map<RowMat<T>>;
template <typename T>
using CMapMat = Eigen::Map<const RowMat<T>>;

template <typename T>
CMapMat<T> as_mat(const Tensor<T>& t, std::size_t rows, std::size_t cols) {
  return CMapMat<T>(t.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}
template <typename T>
MapMat<T> as_mat(Tensor<T>& t, std::size_t rows, std::size_t cols) {
  return MapMat<T>(t.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
}

template <typename T>
void require_2d(const char* op, const Tensor<T>& t) {
  if (t.rank() != 2) throw ShapeError(std::string(op) + " expects a matrix, got " + shape_str(t.shape()));
}

template <typename T>
void require_same(const char* op, const Var<T>& a, const Var<T>& b) {
  if (a.shape() != b.shape()) throw ShapeError(op, a.shape(), b.shape());
  if (&a.tape() != &b.tape()) throw std::invalid_argument(std::string(op) + ": operands on different tapes");
}

// Elementwise unary op: forward f(x), derivative df(x, y).
template <typename T, typename F, typename DF>
Var<T> unary(const Var<T>& a, F f, DF df) {
  const Tensor<T>& x = a.value();
  Tensor<T> y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = f(x[i]);
  const std::size_t ia = a.id();
  return a.tape().record(std::move(y), {ia}, [ia, df](Tape<T>& tp, std::size_t self) {
    if (!tp.requires_grad(ia)) return;
    const Tensor<T>& x = tp.value(ia);
    const Tensor<T>& y = tp.value(self);
    const Tensor<T>& g = tp.grad(self);
    Tensor<T>& ga = tp.grad(ia);
    for (std::size_t i = 0; i < x.size(); ++i) ga[i] += g[i] * df(x[i], y[i]);
  });
}

}  // namespace

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b) {
  require_same("add", a, b);
  Tensor<T> y = a.value();
  const Tensor<T>& bv = b.value();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += bv[i];
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape().record(std::move(y), {ia, ib}, [ia, ib](Tape<T>& tp, std::size_t self) {
    const Tensor<T>& g = tp.grad(self);
    for (std::size_t in : {ia, ib}) {
      if (!tp.requires_grad(in)) continue;
      Tensor<T>& gi = tp.grad(in);
      for (std::size_t i = 0; i < g.size(); ++i) gi[i] += g[i];
    }
  });
}

template <typename T>
Var<T> sub(const Var<T>& a, const Var<T>& b) {
  require_same("sub", a, b);
  Tensor<T> y = a.value();
  const Tensor<T>& bv = b.value();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] -= bv[i];
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape().record(std::move(y), {ia, ib}, [ia, ib](Tape<T>& tp, std::size_t self) {
    const Tensor<T>& g = tp.grad(self);
    if (tp.requires_grad(ia)) {
      Tensor<T>& ga = tp.grad(ia);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    }
    if (tp.requires_grad(ib)) {
      Tensor<T>& gb = tp.grad(ib);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
    }
  });
}

template <typename T>
Var<T> mul(const Var<T>& a, const Var<T>& b) {
  require_same("mul", a, b);
  Tensor<T> y = a.value();
  const Tensor<T>& bv = b.value();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] *= bv[i];
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape().record(std::move(y), {ia, ib}, [ia, ib](Tape<T>& tp, std::size_t self) {
    const Tensor<T>& g = tp.grad(self);
    if (tp.requires_grad(ia)) {
      Tensor<T>& ga = tp.grad(ia);
      const Tensor<T>& bv = tp.value(ib);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * bv[i];
    }
    if (tp.requires_grad(ib)) {
      Tensor<T>& gb = tp.grad(ib);
      const Tensor<T>& av = tp.value(ia);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * av[i];
    }
  });
}

template <typename T>
Var<T> scale(const Var<T>& a, T s) {
  return unary(a, [s](T x) { return s * x; }, [s](T, T) { return s; });
}

template <typename T>
Var<T> relu(const Var<T>& a) {
  return unary(a, [](T x) { return x > T(0) ? x : T(0); }, [](T x, T) { return x > T(0) ? T(1) : T(0); });
}

template <typename T>
Var<T> gelu(const Var<T>& a) {
  const T inv_sqrt2 = T(1) / std::sqrt(T(2));
  const T inv_sqrt2pi = T(1) / std::sqrt(T(2) * std::numbers::pi_v<T>);
  return unary(
      a, [inv_sqrt2](T x) { return T(0.5) * x * (T(1) + std::erf(x * inv_sqrt2)); },
      [inv_sqrt2, inv_sqrt2pi](T x, T) {
        return T(0.5) * (T(1) + std::erf(x * inv_sqrt2)) + x * inv_sqrt2pi * std::exp(T(-0.5) * x * x);
      });
}

template <typename T>
Var<T> tanh(const Var<T>& a) {
  return unary(a, [](T x) { return std::tanh(x); }, [](T, T y) { return T(1) - y * y; });
}

template <typename T>
Var<T> sigmoid(const Var<T>& a) {
  return unary(
      a, [](T x) { return x >= T(0) ? T(1) / (T(1) + std::exp(-x)) : std::exp(x) / (T(1) + std::exp(x)); },
      [](T, T y) { return y * (T(1) - y); });
}

template <typename T>
Var<T> square(const Var<T>& a) {
  return unary(a, [](T x) { return x * x; }, [](T x, T) { return T(2) * x; });
}

template <typename T>
Var<T> abs(const Var<T>& a) {
  return unary(a, [](T x) { return std::abs(x); }, [](T x, T) { return x > T(0) ? T(1) : (x < T(0) ? T(-1) : T(0)); });
}

template <typename T>
Var<T> smooth_l1(const Var<T>& a, T delta) {
  return unary(
      a,
      [delta](T x) {
        const T ax = std::abs(x);
        return ax < delta ? T(0.5) * x * x / delta : ax - T(0.5) * delta;
      },
      [delta](T x, T) {
        if (std::abs(x) < delta) return x / delta;
        return x > T(0) ? T(1) : T(-1);
      });
}

template <typename T>
Var<T> add_row(const Var<T>& a, const Var<T>& b) {
  const std::size_t cols = a.value().cols();
  if (b.value().size() != cols) throw ShapeError("add_row", a.shape(), b.shape());
  Tensor<T> y = a.value();
  const Tensor<T>& bv = b.value();
  const std::size_t rows = y.rows();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) y[r * cols + c] += bv[c];
  }
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape().record(std::move(y), {ia, ib}, [ia, ib, rows, cols](Tape<T>& tp, std::size_t self) {
    const Tensor<T>& g = tp.grad(self);
    if (tp.requires_grad(ia)) {
      Tensor<T>& ga = tp.grad(ia);
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    }
    if (tp.requires_grad(ib)) {
      Tensor<T>& gb = tp.grad(ib);
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) gb[c] += g[r * cols + c];
      }
    }
  });
}

template <typename T>
Var<T> matmul(const Var<T>& a, const Var<T>& b) {
  require_2d("matmul", a.value());
  require_2d("matmul", b.value());
  const std::size_t m = a.value().dim(0), k = a.value().dim(1), n = b.value().dim(1);
  if (b.value().dim(0) != k) throw ShapeError("matmul", a.shape(), b.shape());
  Tensor<T> y(Shape{m, n});
  as_mat(y, m, n).noalias() = as_mat(a.value(), m, k) * as_mat(b.value(), k, n);
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape().record(std::move(y), {ia, ib}, [ia, ib, m, k, n](Tape<T>& tp, std::size_t self) {
    const auto g = as_mat(tp.grad(self), m, n);
    if (tp.requires_grad(ia)) as_mat(tp.grad(ia), m, k).noalias() += g * as_mat(tp.value(ib), k, n).transpose();
    if (tp.requires_grad(ib)) as_mat(tp.grad(ib), k, n).noalias() += as_mat(tp.value(ia), m, k).transpose() * g;
  });
}

template <typename T>
Var<T> matmul_nt(const Var<T>& a, const Var<T>& b) {
  require_2d("matmul_nt", a.value());
  require_2d("matmul_nt", b.value());
  const std::size_t m = a.value().dim(0), k = a.value().dim(1), n = b.value().dim(0);
  if (b.value().dim(1) != k) throw ShapeError("matmul_nt", a.shape(), b.shape());
  Tensor<T> y(Shape{m, n});
  as_mat(y, m, n).noalias() = as_mat(a.value(), m, k) * as_mat(b.value(), n, k).transpose();
  const std::size_t ia = a.id(), ib = b.id();
  return a.tape().record(std::move(y), {ia, ib}, [ia, ib, m, k, n](Tape<T>& tp, std::size_t self) {
    const auto g = as_mat(tp.grad(self), m, n);
    if (tp.requires_grad(ia)) as_mat(tp.grad(ia), m, k).noalias() += g * as_mat(tp.value(ib), n, k);
    if (tp.requires_grad(ib)) as_mat(tp.grad(ib), n, k).noalias() += g.transpose() * as_mat(tp.value(ia), m, k);
  });
}

template <typename T>
Var<T> transpose(const Var<T>& a) {
  require_2d("transpose", a.value());
  const std::size_t m = a.value().dim(0), n = a.value().dim(1);
  Tensor<T> y(Shape{n, m});
  as_mat(y, n, m) = as_mat(a.value(), m, n).transpose();
  const std::size_t ia = a.id();
  return a.tape().record(std::move(y), {ia}, [ia, m, n](Tape<T>& tp, std::size_t self) {
    if (tp.requires_grad(ia)) as_mat(tp.grad(ia), m, n) += as_mat(tp.grad(self), n, m).transpose();
  });
}

template <typename T>
Var<T> softmax_rows(const Var<T>& a, const MaskPtr& mask) {
  const Tensor<T>& x = a.value();
  const std::size_t rows = x.rows(), cols = x.cols();
  if (mask && (mask->rows != rows || mask->cols != cols)) {
    throw ShapeError("softmax mask", x.shape(), Shape{mask->rows, mask->cols});
  }
  Tensor<T> y(x.shape(), T(0));
  for (std::size_t r = 0; r < rows; ++r) {
    const T* xr = x.data() + r * cols;
    T* yr = y.data() + r * cols;
    T mx = -std::numeric_limits<T>::infinity();
    bool any = false;
    for (std::size_t c = 0; c < cols; ++c) {
      if (!mask || (*mask)(r, c)) {
        mx = any ? std::max(mx, xr[c]) : xr[c];
        any = true;
      }
    }
    if (!any) throw std::invalid_argument("softmax_rows: row " + std::to_string(r) + " fully masked");
    T total = T(0);
    for (std::size_t c = 0; c < cols; ++c) {
      if (!mask || (*mask)(r, c)) {
        yr[c] = std::exp(xr[c] - mx);
        total += yr[c];
      }
    }
    for (std::size_t c = 0; c < cols; ++c) yr[c] /= total;
  }
  const std::size_t ia = a.id();
  return a.tape().record(std::move(y), {ia}, [ia, rows, cols](Tape<T>& tp, std::size_t self) {
    if (!tp.requires_grad(ia)) return;
    const Tensor<T>& y = tp.value(self);
    const Tensor<T>& g = tp.grad(self);
    Tensor<T>& ga = tp.grad(ia);
    for (std::size_t r = 0; r < rows; ++r) {
      const std::size_t o = r * cols;
      T dot = T(0);
      for (std::size_t c = 0; c < cols; ++c) dot += g[o + c] * y[o + c];
      for (std::size_t c = 0; c < cols; ++c) ga[o + c] += y[o + c] * (g[o + c] - dot);
    }
  });
}

template <typename T>
Var<T> layer_norm(const Var<T>& x, const Var<T>& gamma, const Var<T>& beta, T eps) {
  const Tensor<T>& xv = x.value();
  const std::size_t rows = xv.rows(), cols = xv.cols();
  if (gamma.value().size() != cols || beta.value().size() != cols) throw ShapeError("layer_norm", xv.shape(), gamma.shape());
  Tensor<T> y(xv.shape());
  auto xhat = std::make_shared<std::vector<T>>(xv.size());
  auto inv_std = std::make_shared<std::vector<T>>(rows);
  const Tensor<T>& gv = gamma.value();
  const Tensor<T>& bv = beta.value();
  for (std::size_t r = 0; r < rows; ++r) {
    const T* xr = xv.data() + r * cols;
    T mu = T(0);
    for (std::size_t c = 0; c < cols; ++c) mu += xr[c];
    mu /= T(cols);
    T var = T(0);
    for (std::size_t c = 0; c < cols; ++c) var += (xr[c] - mu) * (xr[c] - mu);
    var /= T(cols);
    const T is = T(1) / std::sqrt(var + eps);
    (*inv_std)[r] = is;
    for (std::size_t c = 0; c < cols; ++c) {
      const T h = (xr[c] - mu) * is;
      (*xhat)[r * cols + c] = h;
      y[r * cols + c] = h * gv[c] + bv[c];
    }
  }
  const std::size_t ix = x.id(), ig = gamma.id(), ib = beta.id();
  return x.tape().record(std::move(y), {ix, ig, ib}, [=](Tape<T>& tp, std::size_t self) {
    const Tensor<T>& g = tp.grad(self);
    const Tensor<T>& gv = tp.value(ig);
    if (tp.requires_grad(ig)) {
      Tensor<T>& gg = tp.grad(ig);
      for (std::size_t i = 0; i < g.size(); ++i) gg[i % cols] += g[i] * (*xhat)[i];
    }
    if (tp.requires_grad(ib)) {
      Tensor<T>& gb = tp.grad(ib);
      for (std::size_t i = 0; i < g.size(); ++i) gb[i % cols] += g[i];
    }
    if (tp.requires_grad(ix)) {
      Tensor<T>& gx = tp.grad(ix);
      std::vector<T> dh(cols);
      for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t o = r * cols;
        T mean_dh = T(0), mean_dh_h = T(0);
        for (std::size_t c = 0; c < cols; ++c) {
          dh[c] = g[o + c] * gv[c];
          mean_dh += dh[c];
          mean_dh_h += dh[c] * (*xhat)[o + c];
        }
        mean_dh /= T(cols);
        mean_dh_h /= T(cols);
        for (std::size_t c = 0; c < cols; ++c) {
          gx[o + c] += (*inv_std)[r] * (dh[c] - mean_dh - (*xhat)[o + c] * mean_dh_h);
        }
      }
    }
  });
}

template <typename T>
Var<T> slice_cols(const Var<T>& a, std::size_t start, std::size_t len) {
  const Tensor<T>& x = a.value();
  const std::size_t rows = x.rows(), cols = x.cols();
  if (start + len > cols) throw ShapeError("slice_cols out of range for " + shape_str(x.shape()));
  Tensor<T> y(Shape{rows, len});
  for (std::size_t r = 0; r < rows; ++r) std::copy_n(x.data() + r * cols + start, len, y.data() + r * len);
  const std::size_t ia = a.id();
  return a.tape().record(std::move(y), {ia}, [=](Tape<T>& tp, std::size_t self) {
    if (!tp.requires_grad(ia)) return;
    const Tensor<T>& g = tp.grad(self);
    Tensor<T>& ga = tp.grad(ia);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < len; ++c) ga[r * cols + start + c] += g[r * len + c];
    }
  });
}

template <typename T>
Var<T> slice_rows(const Var<T>& a, std::size_t start, std::size_t len) {
  const Tensor<T>& x = a.value();
  const std::size_t rows = x.rows(), cols = x.cols();
  if (start + len > rows) throw ShapeError("slice_rows out of range for " + shape_str(x.shape()));
  Tensor<T> y(Shape{len, cols});
  std::copy_n(x.data() + start * cols, len * cols, y.data());
  const std::size_t ia = a.id();
  return a.tape().record(std::move(y), {ia}, [=](Tape<T>& tp, std::size_t self) {
    if (!tp.requires_grad(ia)) return;
    const Tensor<T>& g = tp.grad(self);
    Tensor<T>& ga = tp.grad(ia);
    for (std::size_t i = 0; i < len * cols; ++i) ga[start * cols + i] += g[i];
  });
}

template <typename T>
Var<T> concat_cols(std::span<const Var<T>> parts) {
  if (parts.empty()) throw ShapeError("concat_cols of nothing");
  const std::size_t rows = parts[0].value().rows();
  std::vector<std::size_t> ids, widths;
  std::size_t total = 0;
  for (const auto& p : parts) {
    if (p.value().rows() != rows) throw ShapeError("concat_cols", parts[0].shape(), p.shape());
    ids.push_back(p.id());
    widths.push_back(p.value().cols());
    total += p.value().cols();
  }
  Tensor<T> y(Shape{rows, total});
  std::size_t off = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const Tensor<T>& x = parts[k].value();
    for (std::size_t r = 0; r < rows; ++r) std::copy_n(x.data() + r * widths[k], widths[k], y.data() + r * total + off);
    off += widths[k];
  }
  return parts[0].tape().record(std::move(y), ids, [=](Tape<T>& tp, std::size_t self) {
    const Tensor<T>& g = tp.grad(self);
    std::size_t off = 0;
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (tp.requires_grad(ids[k])) {
        Tensor<T>& gk = tp.grad(ids[k]);
        for (std::size_t r = 0; r < rows; ++r) {
          for (std::size_t c = 0; c < widths[k]; ++c) gk[r * widths[k] + c] += g[r * total + off + c];
        }
      }
      off += widths[k];
    }
  });
}

template <typename T>
Var<T> concat_rows(std::span<const Var<T>> parts) {
  if (parts.empty()) throw ShapeError("concat_rows of nothing");
  const std::size_t cols = parts[0].value().cols();
  std::vector<std::size_t> ids, counts;
  std::size_t total = 0;
  for (const auto& p : parts) {
    if (p.value().cols() != cols) throw ShapeError("concat_rows", parts[0].shape(), p.shape());
    ids.push_back(p.id());
    counts.push_back(p.value().size());
    total += p.value().rows();
  }
  Tensor<T> y(Shape{total, cols});
  std::size_t off = 0;
  for (const auto& p : parts) {
    std::copy_n(p.value().data(), p.value().size(), y.data() + off);
    off += p.value().size();
  }
  return parts[0].tape().record(std::move(y), ids, [=](Tape<T>& tp, std::size_t self) {
    const Tensor<T>& g = tp.grad(self);
    std::size_t off = 0;
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (tp.requires_grad(ids[k])) {
        Tensor<T>& gk = tp.grad(ids[k]);
        for (std::size_t i = 0; i < counts[k]; ++i) gk[i] += g[off + i];
      }
      off += counts[k];
    }
  });
}

template <typename T>
Var<T> gather_rows(const Var<T>& table, std::span<const std::size_t> index) {
  const Tensor<T>& tv = table.value();
  const std::size_t cols = tv.cols(), rows = tv.rows();
  std::vector<std::size_t> idx(index.begin(), index.end());
  Tensor<T> y(Shape{idx.size(), cols});
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] >= rows) throw ShapeError("gather_rows index " + std::to_string(idx[i]) + " out of " + shape_str(tv.shape()));
    std::copy_n(tv.data() + idx[i] * cols, cols, y.data() + i * cols);
  }
  const std::size_t it = table.id();
  return table.tape().record(std::move(y), {it}, [it, idx, cols](Tape<T>& tp, std::size_t self) {
    if (!tp.requires_grad(it)) return;
    const Tensor<T>& g = tp.grad(self);
    Tensor<T>& gt = tp.grad(it);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      for (std::size_t c = 0; c < cols; ++c) gt[idx[i] * cols + c] += g[i * cols + c];
    }
  });
}

template <typename T>
Var<T> reshape(const Var<T>& a, Shape shape) {
  Tensor<T> y = a.value().reshaped(std::move(shape));
  const std::size_t ia = a.id();
  return a.tape().record(std::move(y), {ia}, [ia](Tape<T>& tp, std::size_t self) {
    if (!tp.requires_grad(ia)) return;
    const Tensor<T>& g = tp.grad(self);
    Tensor<T>& ga = tp.grad(ia);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
  });
}

template <typename T>
Var<T> sum(const Var<T>& a) {
  T total = T(0);
  for (T v : a.value().values()) total += v;
  const std::size_t ia = a.id();
  return a.tape().record(Tensor<T>::scalar(total), {ia}, [ia](Tape<T>& tp, std::size_t self) {
    if (!tp.requires_grad(ia)) return;
    const T g = tp.grad(self)[0];
    Tensor<T>& ga = tp.grad(ia);
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g;
  });
}

template <typename T>
Var<T> mean(const Var<T>& a) {
  const std::size_t n = a.value().size();
  if (n == 0) throw ShapeError("mean of an empty tensor");
  return scale(sum(a), T(1) / T(n));
}

template <typename T>
Var<T> detach(const Var<T>& a) {
  return a.tape().constant(a.value());
}

template <typename T>
Var<T> cross_entropy(const Var<T>& logits, std::span<const std::size_t> targets) {
  const Tensor<T>& x = logits.value();
  const std::size_t rows = x.rows(), cols = x.cols();
  if (targets.size() != rows) throw ShapeError("cross_entropy", x.shape(), Shape{targets.size()});
  auto probs = std::make_shared<std::vector<T>>(x.size());
  std::vector<std::size_t> tgt(targets.begin(), targets.end());
  T loss = T(0);
  for (std::size_t r = 0; r < rows; ++r) {
    if (tgt[r] >= cols) throw ShapeError("cross_entropy target out of range");
    const T* xr = x.data() + r * cols;
    const T mx = *std::max_element(xr, xr + cols);
    T total = T(0);
    for (std::size_t c = 0; c < cols; ++c) {
      (*probs)[r * cols + c] = std::exp(xr[c] - mx);
      total += (*probs)[r * cols + c];
    }
    for (std::size_t c = 0; c < cols; ++c) (*probs)[r * cols + c] /= total;
    loss += std::log(total) + mx - xr[tgt[r]];
  }
  loss /= T(rows);
  const std::size_t ia = logits.id();
  return logits.tape().record(Tensor<T>::scalar(loss), {ia}, [=](Tape<T>& tp, std::size_t self) {
    if (!tp.requires_grad(ia)) return;
    const T g = tp.grad(self)[0] / T(rows);
    Tensor<T>& ga = tp.grad(ia);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) {
        ga[r * cols + c] += g * ((*probs)[r * cols + c] - (c == tgt[r] ? T(1) : T(0)));
      }
    }
  });
}

template <typename T>
Var<T> bce_with_logits(const Var<T>& logits, std::span<const T> targets) {
  const Tensor<T>& x = logits.value();
  const std::size_t n = x.size();
  if (targets.size() != n) throw ShapeError("bce_with_logits", x.shape(), Shape{targets.size()});
  std::vector<T> tgt(targets.begin(), targets.end());
  T loss = T(0);
  for (std::size_t i = 0; i < n; ++i) {
    loss += std::max(x[i], T(0)) - x[i] * tgt[i] + std::log1p(std::exp(-std::abs(x[i])));
  }
  loss /= T(n);
  const std::size_t ia = logits.id();
  return logits.tape().record(Tensor<T>::scalar(loss), {ia}, [=](Tape<T>& tp, std::size_t self) {
    if (!tp.requires_grad(ia)) return;
    const T g = tp.grad(self)[0] / T(n);
    const Tensor<T>& x = tp.value(ia);
    Tensor<T>& ga = tp.grad(ia);
    for (std::size_t i = 0; i < n; ++i) {
      const T s = x[i] >= T(0) ? T(1) / (T(1) + std::exp(-x[i])) : std::exp(x[i]) / (T(1) + std::exp(x[i]));
      ga[i] += g * (s - tgt[i]);
    }
  });
}

template <typename T>
Var<T> conv2d(const Var<T>& x, const Var<T>& w, const Var<T>& b, std::size_t kernel, std::size_t stride,
              std::size_t pad) {
  const Tensor<T>& xv = x.value();
  if (xv.rank() != 3) throw ShapeError("conv2d expects [C x H x W], got " + shape_str(xv.shape()));
  const std::size_t C = xv.dim(0), H = xv.dim(1), W = xv.dim(2);
  const std::size_t O = w.value().dim(0);
  const std::size_t ckk = C * kernel * kernel;
  if (w.value().rank() != 2 || w.value().dim(1) != ckk) throw ShapeError("conv2d weight", xv.shape(), w.shape());
  if (b.value().size() != O) throw ShapeError("conv2d bias", w.shape(), b.shape());
  if (H + 2 * pad < kernel || W + 2 * pad < kernel) throw ShapeError("conv2d input smaller than kernel");
  const std::size_t Ho = (H + 2 * pad - kernel) / stride + 1;
  const std::size_t Wo = (W + 2 * pad - kernel) / stride + 1;
  const std::size_t P = Ho * Wo;

  // im2col: [C*k*k x P]
  auto cols = std::make_shared<Tensor<T>>(Shape{ckk, P}, T(0));
  for (std::size_t c = 0; c < C; ++c) {
    for (std::size_t ky = 0; ky < kernel; ++ky) {
      for (std::size_t kx = 0; kx < kernel; ++kx) {
        T* row = cols->data() + ((c * kernel + ky) * kernel + kx) * P;
        for (std::size_t oy = 0; oy < Ho; ++oy) {
          const long iy = static_cast<long>(oy * stride + ky) - static_cast<long>(pad);
          if (iy < 0 || iy >= static_cast<long>(H)) continue;
          const T* src = xv.data() + (c * H + static_cast<std::size_t>(iy)) * W;
          for (std::size_t ox = 0; ox < Wo; ++ox) {
            const long ix = static_cast<long>(ox * stride + kx) - static_cast<long>(pad);
            if (ix >= 0 && ix < static_cast<long>(W)) row[oy * Wo + ox] = src[ix];
          }
        }
      }
    }
  }
  Tensor<T> y(Shape{O, Ho, Wo});
  auto ym = as_mat(y, O, P);
  ym.noalias() = as_mat(w.value(), O, ckk) * as_mat(*cols, ckk, P);
  const Tensor<T>& bv = b.value();
  for (std::size_t o = 0; o < O; ++o) ym.row(static_cast<Eigen::Index>(o)).array() += bv[o];

  const std::size_t ixd = x.id(), iw = w.id(), ib = b.id();
  return x.tape().record(std::move(y), {ixd, iw, ib}, [=](Tape<T>& tp, std::size_t self) {
    const auto g = as_mat(tp.grad(self), O, P);
    if (tp.requires_grad(iw)) as_mat(tp.grad(iw), O, ckk).noalias() += g * as_mat(*cols, ckk, P).transpose();
    if (tp.requires_grad(ib)) {
      Tensor<T>& gb = tp.grad(ib);
      for (std::size_t o = 0; o < O; ++o) gb[o] += g.row(static_cast<Eigen::Index>(o)).sum();
    }
    if (tp.requires_grad(ixd)) {
      RowMat<T> dcols = as_mat(tp.value(iw), O, ckk).transpose() * g;
      Tensor<T>& gx = tp.grad(ixd);
      for (std::size_t c = 0; c < C; ++c) {
        for (std::size_t ky = 0; ky < kernel; ++ky) {
          for (std::size_t kx = 0; kx < kernel; ++kx) {
            const T* row = dcols.data() + ((c * kernel + ky) * kernel + kx) * P;
            for (std::size_t oy = 0; oy < Ho; ++oy) {
              const long iy = static_cast<long>(oy * stride + ky) - static_cast<long>(pad);
              if (iy < 0 || iy >= static_cast<long>(H)) continue;
              T* dst = gx.data() + (c * H + static_cast<std::size_t>(iy)) * W;
              for (std::size_t ox = 0; ox < Wo; ++ox) {
                const long ix = static_cast<long>(ox * stride + kx) - static_cast<long>(pad);
                if (ix >= 0 && ix < static_cast<long>(W)) dst[ix] += row[oy * Wo + ox];
              }
            }
          }
        }
      }
    }
  });
}

#define GPD_INSTANTIATE_OPS(T)                                                                              \
  template Var<T> add(const Var<T>&, const Var<T>&);                                                        \
  template Var<T> sub(const Var<T>&, const Var<T>&);                                                        \
  template Var<T> mul(const Var<T>&, const Var<T>&);                                                        \
  template Var<T> scale(const Var<T>&, T);                                                                  \
  template Var<T> relu(const Var<T>&);                                                                      \
  template Var<T> gelu(const Var<T>&);                                                                      \
  template Var<T> tanh(const Var<T>&);                                                                      \
  template Var<T> sigmoid(const Var<T>&);                                                                   \
  template Var<T> square(const Var<T>&);                                                                    \
  template Var<T> abs(const Var<T>&);                                                                       \
  template Var<T> smooth_l1(const Var<T>&, T);                                                              \
  template Var<T> add_row(const Var<T>&, const Var<T>&);                                                    \
  template Var<T> matmul(const Var<T>&, const Var<T>&);                                                     \
  template Var<T> matmul_nt(const Var<T>&, const Var<T>&);                                                  \
  template Var<T> transpose(const Var<T>&);                                                                 \
  template Var<T> softmax_rows(const Var<T>&, const MaskPtr&);                                              \
  template Var<T> layer_norm(const Var<T>&, const Var<T>&, const Var<T>&, T);                               \
  template Var<T> slice_cols(const Var<T>&, std::size_t, std::size_t);                                      \
  template Var<T> slice_rows(const Var<T>&, std::size_t, std::size_t);                                      \
  template Var<T> concat_cols(std::span<const Var<T>>);                                                     \
  template Var<T> concat_rows(std::span<const Var<T>>);                                                     \
  template Var<T> gather_rows(const Var<T>&, std::span<const std::size_t>);                                 \
  template Var<T> reshape(const Var<T>&, Shape);                                                            \
  template Var<T> sum(const Var<T>&);                                                                       \
  template Var<T> mean(const Var<T>&);                                                                      \
  template Var<T> detach(const Var<T>&);                                                                    \
  template Var<T> cross_entropy(const Var<T>&, std::span<const std::size_t>);                               \
  template Var<T> bce_with_logits(const Var<T>&, std::span<const T>);                                       \
  template Var<T> conv2d(const Var<T>&, const Var<T>&, const Var<T>&, std::size_t, std::size_t, std::size_t);

GPD_INSTANTIATE_OPS(float)
GPD_INSTANTIATE_OPS(double)

}  // namespace gpd::nn
