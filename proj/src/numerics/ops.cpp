//
// Project dualretro - Copyright 2026 The dualretro Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "dualretro/numerics/ops.h"

#include <algorithm>
#include <cmath>
#include <string>

namespace dualretro {
namespace {
Tape &tape_of(Var a) {
  if (!a.valid())
    throw std::invalid_argument("operation on an unbound Var");
  return *a.tape();
}

Tape &tape_of(Var a, Var b) {
  Tape &t = tape_of(a);
  if (b.tape() != &t)
    throw std::invalid_argument("operands recorded on different tapes");
  return t;
}

void require_matrix(const Tensor &t, const char *op) {
  if (t.ndim() != 2)
    throw ShapeMismatch(std::string(op) + ": expected a matrix, got "
                        + t.shape_string());
}

void require_same(const Tensor &a, const Tensor &b, const char *op) {
  if (!a.same_shape(b))
    throw ShapeMismatch(std::string(op) + ": " + a.shape_string() + " vs "
                        + b.shape_string());
}

// c += a * b, a (m x k), b (k x n)
void gemm_nn(const double *a, const double *b, double *c, int m, int k,
             int n) {
  for (int i = 0; i < m; ++i) {
    double *ci = c + static_cast<std::size_t>(i) * n;
    const double *ai = a + static_cast<std::size_t>(i) * k;
    for (int p = 0; p < k; ++p) {
      const double av = ai[p];
      if (av == 0.0)
        continue;
      const double *bp = b + static_cast<std::size_t>(p) * n;
      for (int j = 0; j < n; ++j)
        ci[j] += av * bp[j];
    }
  }
}

// c += a * b^T, a (m x n), b (k x n), c (m x k)
void gemm_nt(const double *a, const double *b, double *c, int m, int n,
             int k) {
  for (int i = 0; i < m; ++i) {
    const double *ai = a + static_cast<std::size_t>(i) * n;
    double *ci = c + static_cast<std::size_t>(i) * k;
    for (int p = 0; p < k; ++p) {
      const double *bp = b + static_cast<std::size_t>(p) * n;
      double acc = 0.0;
      for (int j = 0; j < n; ++j)
        acc += ai[j] * bp[j];
      ci[p] += acc;
    }
  }
}

// c += a^T * b, a (m x k), b (m x n), c (k x n)
void gemm_tn(const double *a, const double *b, double *c, int m, int k,
             int n) {
  for (int i = 0; i < m; ++i) {
    const double *ai = a + static_cast<std::size_t>(i) * k;
    const double *bi = b + static_cast<std::size_t>(i) * n;
    for (int p = 0; p < k; ++p) {
      const double av = ai[p];
      if (av == 0.0)
        continue;
      double *cp = c + static_cast<std::size_t>(p) * n;
      for (int j = 0; j < n; ++j)
        cp[j] += av * bi[j];
    }
  }
}

template <class Fwd, class Deriv>
Var unary(Var a, Fwd fwd, Deriv deriv) {
  Tape &t = tape_of(a);
  const Tensor &x = a.value();
  Tensor out(x.shape());
  for (std::size_t k = 0; k < x.size(); ++k)
    out[k] = fwd(x[k]);

  const int ia = a.id();
  return t.record(std::move(out), { a }, [ia, deriv](Tape &tp, int self) {
    if (!tp.requires_grad(ia))
      return;
    const Tensor &g = tp.grad(self);
    const Tensor &x = tp.value(ia);
    const Tensor &y = tp.value(self);
    Tensor &ga = tp.grad(ia);
    for (std::size_t k = 0; k < g.size(); ++k)
      ga[k] += g[k] * deriv(x[k], y[k]);
  });
}

void accumulate(Tape &tp, int id, const Tensor &g) {
  if (!tp.requires_grad(id))
    return;
  Tensor &ga = tp.grad(id);
  for (std::size_t k = 0; k < g.size(); ++k)
    ga[k] += g[k];
}

double stable_sigmoid(double x) {
  if (x >= 0) {
    const double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}
}  // namespace

Var matmul(Var a, Var b) {
  Tape &t = tape_of(a, b);
  const Tensor &x = a.value(), &y = b.value();
  require_matrix(x, "matmul");
  require_matrix(y, "matmul");
  if (x.cols() != y.rows())
    throw ShapeMismatch("matmul: " + x.shape_string() + " x "
                        + y.shape_string());

  const int m = x.rows(), k = x.cols(), n = y.cols();
  Tensor out = Tensor::matrix(m, n);
  gemm_nn(x.data(), y.data(), out.data(), m, k, n);

  const int ia = a.id(), ib = b.id();
  return t.record(std::move(out), { a, b },
                  [ia, ib, m, k, n](Tape &tp, int self) {
                    const Tensor &g = tp.grad(self);
                    if (tp.requires_grad(ia))
                      gemm_nt(g.data(), tp.value(ib).data(),
                              tp.grad(ia).data(), m, n, k);
                    if (tp.requires_grad(ib))
                      gemm_tn(tp.value(ia).data(), g.data(),
                              tp.grad(ib).data(), m, k, n);
                  });
}

Var add(Var a, Var b) {
  Tape &t = tape_of(a, b);
  require_same(a.value(), b.value(), "add");
  Tensor out = a.value();
  const Tensor &y = b.value();
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] += y[k];

  const int ia = a.id(), ib = b.id();
  return t.record(std::move(out), { a, b }, [ia, ib](Tape &tp, int self) {
    const Tensor &g = tp.grad(self);
    accumulate(tp, ia, g);
    accumulate(tp, ib, g);
  });
}

Var sub(Var a, Var b) {
  Tape &t = tape_of(a, b);
  require_same(a.value(), b.value(), "sub");
  Tensor out = a.value();
  const Tensor &y = b.value();
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] -= y[k];

  const int ia = a.id(), ib = b.id();
  return t.record(std::move(out), { a, b }, [ia, ib](Tape &tp, int self) {
    const Tensor &g = tp.grad(self);
    accumulate(tp, ia, g);
    if (tp.requires_grad(ib)) {
      Tensor &gb = tp.grad(ib);
      for (std::size_t k = 0; k < g.size(); ++k)
        gb[k] -= g[k];
    }
  });
}

Var mul(Var a, Var b) {
  Tape &t = tape_of(a, b);
  require_same(a.value(), b.value(), "mul");
  Tensor out = a.value();
  const Tensor &y = b.value();
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] *= y[k];

  const int ia = a.id(), ib = b.id();
  return t.record(std::move(out), { a, b }, [ia, ib](Tape &tp, int self) {
    const Tensor &g = tp.grad(self);
    if (tp.requires_grad(ia)) {
      Tensor &ga = tp.grad(ia);
      const Tensor &y = tp.value(ib);
      for (std::size_t k = 0; k < g.size(); ++k)
        ga[k] += g[k] * y[k];
    }
    if (tp.requires_grad(ib)) {
      Tensor &gb = tp.grad(ib);
      const Tensor &x = tp.value(ia);
      for (std::size_t k = 0; k < g.size(); ++k)
        gb[k] += g[k] * x[k];
    }
  });
}

Var scale(Var a, double factor) {
  return unary(
      a, [factor](double x) { return factor * x; },
      [factor](double, double) { return factor; });
}

Var add_scalar(Var a, double value) {
  return unary(
      a, [value](double x) { return x + value; },
      [](double, double) { return 1.0; });
}

Var add_row(Var a, Var b) {
  Tape &t = tape_of(a, b);
  const Tensor &x = a.value(), &y = b.value();
  require_matrix(x, "add_row");
  if (static_cast<int>(y.size()) != x.cols())
    throw ShapeMismatch("add_row: " + x.shape_string() + " + "
                        + y.shape_string());

  Tensor out = x;
  const int m = x.rows(), n = x.cols();
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j)
      out(i, j) += y[j];

  const int ia = a.id(), ib = b.id();
  return t.record(std::move(out), { a, b },
                  [ia, ib, m, n](Tape &tp, int self) {
                    const Tensor &g = tp.grad(self);
                    accumulate(tp, ia, g);
                    if (tp.requires_grad(ib)) {
                      Tensor &gb = tp.grad(ib);
                      for (int i = 0; i < m; ++i)
                        for (int j = 0; j < n; ++j)
                          gb[j] += g(i, j);
                    }
                  });
}

Var mul_col(Var a, Var s) {
  Tape &t = tape_of(a, s);
  const Tensor &x = a.value(), &y = s.value();
  require_matrix(x, "mul_col");
  if (static_cast<int>(y.size()) != x.rows())
    throw ShapeMismatch("mul_col: " + x.shape_string() + " * "
                        + y.shape_string());

  const int m = x.rows(), n = x.cols();
  Tensor out = x;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j)
      out(i, j) *= y[i];

  const int ia = a.id(), is = s.id();
  return t.record(std::move(out), { a, s },
                  [ia, is, m, n](Tape &tp, int self) {
                    const Tensor &g = tp.grad(self);
                    if (tp.requires_grad(ia)) {
                      Tensor &ga = tp.grad(ia);
                      const Tensor &y = tp.value(is);
                      for (int i = 0; i < m; ++i)
                        for (int j = 0; j < n; ++j)
                          ga(i, j) += g(i, j) * y[i];
                    }
                    if (tp.requires_grad(is)) {
                      Tensor &gs = tp.grad(is);
                      const Tensor &x = tp.value(ia);
                      for (int i = 0; i < m; ++i) {
                        double acc = 0.0;
                        for (int j = 0; j < n; ++j)
                          acc += g(i, j) * x(i, j);
                        gs[i] += acc;
                      }
                    }
                  });
}

Var concat_cols(const std::vector<Var> &parts) {
  if (parts.empty())
    throw ShapeMismatch("concat_cols: no inputs");

  Tape &t = tape_of(parts.front());
  const int m = parts.front().value().rows();
  std::vector<int> widths, ids;
  int n = 0;
  for (Var p: parts) {
    tape_of(parts.front(), p);
    const Tensor &v = p.value();
    require_matrix(v, "concat_cols");
    if (v.rows() != m)
      throw ShapeMismatch("concat_cols: row count " + std::to_string(v.rows())
                          + " vs " + std::to_string(m));
    widths.push_back(v.cols());
    ids.push_back(p.id());
    n += v.cols();
  }

  Tensor out = Tensor::matrix(m, n);
  int offset = 0;
  for (Var p: parts) {
    const Tensor &v = p.value();
    for (int i = 0; i < m; ++i)
      std::copy_n(v.data() + static_cast<std::size_t>(i) * v.cols(),
                  v.cols(), out.data() + static_cast<std::size_t>(i) * n
                                + offset);
    offset += v.cols();
  }

  return t.record(std::move(out), parts,
                  [ids, widths, m, n](Tape &tp, int self) {
                    const Tensor &g = tp.grad(self);
                    int off = 0;
                    for (std::size_t p = 0; p < ids.size(); ++p) {
                      const int w = widths[p];
                      if (tp.requires_grad(ids[p])) {
                        Tensor &gp = tp.grad(ids[p]);
                        for (int i = 0; i < m; ++i)
                          for (int j = 0; j < w; ++j)
                            gp(i, j) += g(i, off + j);
                      }
                      off += w;
                    }
                  });
}

Var sigmoid(Var a) {
  return unary(
      a, [](double x) { return stable_sigmoid(x); },
      [](double, double y) { return y * (1.0 - y); });
}

Var relu(Var a) {
  return unary(
      a, [](double x) { return x > 0 ? x : 0.0; },
      [](double x, double) { return x > 0 ? 1.0 : 0.0; });
}

Var silu(Var a) {
  return unary(
      a, [](double x) { return x * stable_sigmoid(x); },
      [](double x, double) {
        const double s = stable_sigmoid(x);
        return s * (1.0 + x * (1.0 - s));
      });
}

Var log(Var a) {
  return unary(
      a, [](double x) { return std::log(x); },
      [](double x, double) { return 1.0 / x; });
}

Var reciprocal(Var a) {
  return unary(
      a, [](double x) { return 1.0 / x; },
      [](double, double y) { return -y * y; });
}

Var softmax_rows(Var a) {
  Tape &t = tape_of(a);
  const Tensor &x = a.value();
  require_matrix(x, "softmax_rows");
  const int m = x.rows(), n = x.cols();
  Tensor out = Tensor::matrix(m, n);
  for (int i = 0; i < m; ++i) {
    double mx = -INFINITY;
    for (int j = 0; j < n; ++j)
      mx = std::max(mx, x(i, j));
    double z = 0.0;
    for (int j = 0; j < n; ++j)
      z += (out(i, j) = std::exp(x(i, j) - mx));
    for (int j = 0; j < n; ++j)
      out(i, j) /= z;
  }

  const int ia = a.id();
  return t.record(std::move(out), { a }, [ia, m, n](Tape &tp, int self) {
    if (!tp.requires_grad(ia))
      return;
    const Tensor &g = tp.grad(self);
    const Tensor &y = tp.value(self);
    Tensor &ga = tp.grad(ia);
    for (int i = 0; i < m; ++i) {
      double dot = 0.0;
      for (int j = 0; j < n; ++j)
        dot += g(i, j) * y(i, j);
      for (int j = 0; j < n; ++j)
        ga(i, j) += y(i, j) * (g(i, j) - dot);
    }
  });
}

Var log_softmax_rows(Var a) {
  Tape &t = tape_of(a);
  const Tensor &x = a.value();
  require_matrix(x, "log_softmax_rows");
  const int m = x.rows(), n = x.cols();
  Tensor out = Tensor::matrix(m, n);
  for (int i = 0; i < m; ++i) {
    double mx = -INFINITY;
    for (int j = 0; j < n; ++j)
      mx = std::max(mx, x(i, j));
    double z = 0.0;
    for (int j = 0; j < n; ++j)
      z += std::exp(x(i, j) - mx);
    const double lz = mx + std::log(z);
    for (int j = 0; j < n; ++j)
      out(i, j) = x(i, j) - lz;
  }

  const int ia = a.id();
  return t.record(std::move(out), { a }, [ia, m, n](Tape &tp, int self) {
    if (!tp.requires_grad(ia))
      return;
    const Tensor &g = tp.grad(self);
    const Tensor &y = tp.value(self);
    Tensor &ga = tp.grad(ia);
    for (int i = 0; i < m; ++i) {
      double gs = 0.0;
      for (int j = 0; j < n; ++j)
        gs += g(i, j);
      for (int j = 0; j < n; ++j)
        ga(i, j) += g(i, j) - std::exp(y(i, j)) * gs;
    }
  });
}

Var sum_rows(Var a) {
  Tape &t = tape_of(a);
  const Tensor &x = a.value();
  require_matrix(x, "sum_rows");
  const int m = x.rows(), n = x.cols();
  Tensor out = Tensor::matrix(1, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j)
      out[j] += x(i, j);

  const int ia = a.id();
  return t.record(std::move(out), { a }, [ia, m, n](Tape &tp, int self) {
    if (!tp.requires_grad(ia))
      return;
    const Tensor &g = tp.grad(self);
    Tensor &ga = tp.grad(ia);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j)
        ga(i, j) += g[j];
  });
}

Var mean_rows(Var a) {
  const int m = a.value().rows();
  if (m == 0)
    throw ShapeMismatch("mean_rows: empty matrix");
  return scale(sum_rows(a), 1.0 / m);
}

Var sum(Var a) {
  Tape &t = tape_of(a);
  const Tensor &x = a.value();
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k)
    s += x[k];

  const int ia = a.id();
  return t.record(Tensor::scalar(s), { a }, [ia](Tape &tp, int self) {
    if (!tp.requires_grad(ia))
      return;
    const double g = tp.grad(self)[0];
    Tensor &ga = tp.grad(ia);
    for (std::size_t k = 0; k < ga.size(); ++k)
      ga[k] += g;
  });
}

Var mean(Var a) {
  const std::size_t n = a.value().size();
  if (n == 0)
    throw ShapeMismatch("mean: empty tensor");
  return scale(sum(a), 1.0 / static_cast<double>(n));
}

Var gather_rows(Var a, std::span<const int> index) {
  Tape &t = tape_of(a);
  const Tensor &x = a.value();
  require_matrix(x, "gather_rows");
  const int m = x.rows(), n = x.cols();
  const int k = static_cast<int>(index.size());
  Tensor out = Tensor::matrix(k, n);
  for (int r = 0; r < k; ++r) {
    const int src = index[r];
    if (src < 0 || src >= m)
      throw std::out_of_range("gather_rows: index " + std::to_string(src)
                              + " outside " + std::to_string(m) + " rows");
    std::copy_n(x.data() + static_cast<std::size_t>(src) * n, n,
                out.data() + static_cast<std::size_t>(r) * n);
  }

  const int ia = a.id();
  std::vector<int> idx(index.begin(), index.end());
  return t.record(std::move(out), { a },
                  [ia, idx = std::move(idx), n](Tape &tp, int self) {
                    if (!tp.requires_grad(ia))
                      return;
                    const Tensor &g = tp.grad(self);
                    Tensor &ga = tp.grad(ia);
                    for (std::size_t r = 0; r < idx.size(); ++r) {
                      double *dst =
                          ga.data() + static_cast<std::size_t>(idx[r]) * n;
                      const double *src = g.data() + r * n;
                      for (int j = 0; j < n; ++j)
                        dst[j] += src[j];
                    }
                  });
}

Var select_rows(Var keep, Var update, std::span<const char> take_update) {
  Tape &t = tape_of(keep, update);
  const Tensor &a = keep.value();
  const Tensor &b = update.value();
  require_same(a, b, "select_rows");
  const int m = a.rows(), n = a.cols();
  if (static_cast<int>(take_update.size()) != m)
    throw std::invalid_argument("select_rows: mask has "
                                + std::to_string(take_update.size())
                                + " entries for " + std::to_string(m)
                                + " rows");
  Tensor out = a;
  for (int r = 0; r < m; ++r)
    if (take_update[r])
      std::copy_n(b.data() + static_cast<std::size_t>(r) * n, n,
                  out.data() + static_cast<std::size_t>(r) * n);

  const int ia = keep.id(), ib = update.id();
  std::vector<char> mask(take_update.begin(), take_update.end());
  return t.record(std::move(out), { keep, update },
                  [ia, ib, mask = std::move(mask), n](Tape &tp, int self) {
                    const Tensor &g = tp.grad(self);
                    for (int src: { ia, ib }) {
                      if (!tp.requires_grad(src))
                        continue;
                      const bool want = src == ib;
                      Tensor &gs = tp.grad(src);
                      for (std::size_t r = 0; r < mask.size(); ++r) {
                        if (static_cast<bool>(mask[r]) != want)
                          continue;
                        for (int j = 0; j < n; ++j)
                          gs[r * n + j] += g[r * n + j];
                      }
                    }
                  });
}

Var scatter_add_rows(Var a, std::span<const int> index, int rows) {
  Tape &t = tape_of(a);
  const Tensor &x = a.value();
  require_matrix(x, "scatter_add_rows");
  const int n = x.cols();
  if (static_cast<int>(index.size()) != x.rows())
    throw ShapeMismatch("scatter_add_rows: " + std::to_string(index.size())
                        + " indices for " + x.shape_string());

  Tensor out = Tensor::matrix(rows, n);
  for (std::size_t r = 0; r < index.size(); ++r) {
    const int dst = index[r];
    if (dst < 0 || dst >= rows)
      throw std::out_of_range("scatter_add_rows: index " + std::to_string(dst)
                              + " outside " + std::to_string(rows) + " rows");
    double *o = out.data() + static_cast<std::size_t>(dst) * n;
    const double *s = x.data() + r * n;
    for (int j = 0; j < n; ++j)
      o[j] += s[j];
  }

  const int ia = a.id();
  std::vector<int> idx(index.begin(), index.end());
  return t.record(std::move(out), { a },
                  [ia, idx = std::move(idx), n](Tape &tp, int self) {
                    if (!tp.requires_grad(ia))
                      return;
                    const Tensor &g = tp.grad(self);
                    Tensor &ga = tp.grad(ia);
                    for (std::size_t r = 0; r < idx.size(); ++r) {
                      const double *src =
                          g.data() + static_cast<std::size_t>(idx[r]) * n;
                      double *dst = ga.data() + r * n;
                      for (int j = 0; j < n; ++j)
                        dst[j] += src[j];
                    }
                  });
}

Var row_sqnorm(Var a) {
  Tape &t = tape_of(a);
  const Tensor &x = a.value();
  require_matrix(x, "row_sqnorm");
  const int m = x.rows(), n = x.cols();
  Tensor out = Tensor::matrix(m, 1);
  for (int i = 0; i < m; ++i) {
    double s = 0.0;
    for (int j = 0; j < n; ++j)
      s += x(i, j) * x(i, j);
    out[i] = s;
  }

  const int ia = a.id();
  return t.record(std::move(out), { a }, [ia, m, n](Tape &tp, int self) {
    if (!tp.requires_grad(ia))
      return;
    const Tensor &g = tp.grad(self);
    const Tensor &x = tp.value(ia);
    Tensor &ga = tp.grad(ia);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j)
        ga(i, j) += 2.0 * g[i] * x(i, j);
  });
}

Var repeat_rows(Var a, int rows) {
  Tape &t = tape_of(a);
  const Tensor &x = a.value();
  const int n = static_cast<int>(x.size());
  Tensor out = Tensor::matrix(rows, n);
  for (int i = 0; i < rows; ++i)
    std::copy_n(x.data(), n, out.data() + static_cast<std::size_t>(i) * n);

  const int ia = a.id();
  return t.record(std::move(out), { a }, [ia, rows, n](Tape &tp, int self) {
    if (!tp.requires_grad(ia))
      return;
    const Tensor &g = tp.grad(self);
    Tensor &ga = tp.grad(ia);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < n; ++j)
        ga[j] += g(i, j);
  });
}

Var select_cols(Var a, std::span<const int> column) {
  Tape &t = tape_of(a);
  const Tensor &x = a.value();
  require_matrix(x, "select_cols");
  const int m = x.rows(), n = x.cols();
  if (static_cast<int>(column.size()) != m)
    throw ShapeMismatch("select_cols: " + std::to_string(column.size())
                        + " columns for " + x.shape_string());

  Tensor out = Tensor::matrix(m, 1);
  for (int i = 0; i < m; ++i) {
    if (column[i] < 0 || column[i] >= n)
      throw std::out_of_range("select_cols: column out of range");
    out[i] = x(i, column[i]);
  }

  const int ia = a.id();
  std::vector<int> cols(column.begin(), column.end());
  return t.record(std::move(out), { a },
                  [ia, cols = std::move(cols)](Tape &tp, int self) {
                    if (!tp.requires_grad(ia))
                      return;
                    const Tensor &g = tp.grad(self);
                    Tensor &ga = tp.grad(ia);
                    for (std::size_t i = 0; i < cols.size(); ++i)
                      ga(static_cast<int>(i), cols[i]) += g[i];
                  });
}

}  // namespace dualretro
