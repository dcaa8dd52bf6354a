#include "trend/nn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace trend::nn {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_same_tape(Var a, Var b) {
  if (a.tape != b.tape) throw InternalError("ops require vars from the same tape");
}
}  // namespace

void fill_normal(Mat& m, Rng& rng, double stddev) {
  for (double& v : m.a) v = rng.normal() * stddev;
}

// --- ParamStore -------------------------------------------------------------

Param& ParamStore::create(const std::string& name, int rows, int cols) {
  auto [it, inserted] = params_.emplace(name, std::make_unique<Param>(name, rows, cols));
  if (!inserted) throw InternalError("duplicate parameter: " + name);
  return *it->second;
}

Param& ParamStore::at(const std::string& name) {
  auto it = params_.find(name);
  if (it == params_.end()) throw InternalError("unknown parameter: " + name);
  return *it->second;
}

const Param& ParamStore::at(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw InternalError("unknown parameter: " + name);
  return *it->second;
}

Param* ParamStore::find(const std::string& name) {
  auto it = params_.find(name);
  return it == params_.end() ? nullptr : it->second.get();
}

bool ParamStore::erase(const std::string& name) { return params_.erase(name) > 0; }

void ParamStore::zero_grad() {
  for (auto& [_, p] : params_) p->zero_grad();
}

std::vector<Param*> ParamStore::all() {
  std::vector<Param*> out;
  out.reserve(params_.size());
  for (auto& [_, p] : params_) out.push_back(p.get());
  return out;
}

std::vector<const Param*> ParamStore::all() const {
  std::vector<const Param*> out;
  out.reserve(params_.size());
  for (auto& [_, p] : params_) out.push_back(p.get());
  return out;
}

uint64_t ParamStore::checksum(const std::string& name) const {
  const Param& p = at(name);
  return fnv1a64(p.value.a.data(), p.value.a.size() * sizeof(double));
}

std::unique_ptr<ParamStore> ParamStore::clone() const {
  auto out = std::make_unique<ParamStore>();
  for (auto& [name, p] : params_) {
    Param& q = out->create(name, p->value.rows, p->value.cols);
    q.value = p->value;
    q.trainable = p->trainable;
  }
  return out;
}

// --- Tape -------------------------------------------------------------------

const Mat& Var::val() const {
  if (!valid()) throw InternalError("use of invalid Var");
  return tape->val(*this);
}

double Var::scalar() const {
  const Mat& m = val();
  if (m.rows != 1 || m.cols != 1) throw InternalError("scalar() on non-1x1 var");
  return m.a[0];
}

Var make_node(Tape& t, Mat value, std::function<void(Tape&, int)> back) {
  Tape::Node n;
  n.grad = Mat(value.rows, value.cols);
  n.val = std::move(value);
  n.back = std::move(back);
  t.nodes_.push_back(std::move(n));
  return Var{static_cast<int>(t.nodes_.size()) - 1, &t};
}

Var Tape::leaf(Param& p) {
  auto it = leaf_cache_.find(&p);
  if (it != leaf_cache_.end()) return Var{it->second, this};
  Var v = make_node(*this, p.value, nullptr);
  nodes_[v.idx].param = &p;
  leaf_cache_.emplace(&p, v.idx);
  return v;
}

Var Tape::constant(Mat value) { return make_node(*this, std::move(value), nullptr); }

const Mat& Tape::val(Var v) const { return nodes_[v.idx].val; }
const Mat& Tape::grad(Var v) const { return nodes_[v.idx].grad; }

void Tape::backward(Var loss) {
  if (loss.tape != this) throw InternalError("backward: var from another tape");
  const Mat& lv = nodes_[loss.idx].val;
  if (lv.rows != 1 || lv.cols != 1) throw InternalError("backward: loss must be scalar");
  nodes_[loss.idx].grad(0, 0) += 1.0;
  for (int i = loss.idx; i >= 0; --i) {
    Node& n = nodes_[i];
    if (n.back) n.back(*this, i);
    if (n.param != nullptr) {
      Mat& g = n.param->grad;
      for (size_t k = 0; k < g.size(); ++k) g.a[k] += n.grad.a[k];
    }
  }
}

// --- ops --------------------------------------------------------------------

Var rows(Var table, const std::vector<int>& ids) {
  const Mat& t = table.val();
  Mat out(static_cast<int>(ids.size()), t.cols);
  for (size_t i = 0; i < ids.size(); ++i) {
    int r = ids[i];
    if (r < 0 || r >= t.rows) throw InternalError("rows: index out of range");
    std::copy_n(&t.a[static_cast<size_t>(r) * t.cols], t.cols, &out.a[i * t.cols]);
  }
  int src = table.idx;
  auto ids_copy = ids;
  return make_node(*table.tape, std::move(out), [src, ids_copy](Tape& tp, int self) {
    const Mat& g = tp.grad(Var{self, &tp});
    Mat& gt = tp.grad_mut(src);
    for (size_t i = 0; i < ids_copy.size(); ++i) {
      double* dst = &gt.a[static_cast<size_t>(ids_copy[i]) * gt.cols];
      const double* s = &g.a[i * g.cols];
      for (int c = 0; c < g.cols; ++c) dst[c] += s[c];
    }
  });
}

Var add(Var a, Var b) {
  check_same_tape(a, b);
  const Mat& av = a.val();
  const Mat& bv = b.val();
  if (!av.same_shape(bv)) throw InternalError("add: shape mismatch");
  Mat out = av;
  for (size_t i = 0; i < out.size(); ++i) out.a[i] += bv.a[i];
  int ai = a.idx, bi = b.idx;
  return make_node(*a.tape, std::move(out), [ai, bi](Tape& tp, int self) {
    const Mat& g = tp.grad(Var{self, &tp});
    Mat& ga = tp.grad_mut(ai);
    Mat& gb = tp.grad_mut(bi);
    for (size_t i = 0; i < g.size(); ++i) {
      ga.a[i] += g.a[i];
      gb.a[i] += g.a[i];
    }
  });
}

Var add_rowvec(Var a, Var b) {
  check_same_tape(a, b);
  const Mat& av = a.val();
  const Mat& bv = b.val();
  if (bv.rows != 1 || bv.cols != av.cols) throw InternalError("add_rowvec: shape mismatch");
  Mat out = av;
  for (int r = 0; r < av.rows; ++r)
    for (int c = 0; c < av.cols; ++c) out(r, c) += bv(0, c);
  int ai = a.idx, bi = b.idx;
  return make_node(*a.tape, std::move(out), [ai, bi](Tape& tp, int self) {
    const Mat& g = tp.grad(Var{self, &tp});
    Mat& ga = tp.grad_mut(ai);
    Mat& gb = tp.grad_mut(bi);
    for (int r = 0; r < g.rows; ++r)
      for (int c = 0; c < g.cols; ++c) {
        ga(r, c) += g(r, c);
        gb(0, c) += g(r, c);
      }
  });
}

Var scale(Var a, double s) {
  Mat out = a.val();
  for (double& v : out.a) v *= s;
  int ai = a.idx;
  return make_node(*a.tape, std::move(out), [ai, s](Tape& tp, int self) {
    const Mat& g = tp.grad(Var{self, &tp});
    Mat& ga = tp.grad_mut(ai);
    for (size_t i = 0; i < g.size(); ++i) ga.a[i] += s * g.a[i];
  });
}

Var matmul(Var a, Var b) {
  check_same_tape(a, b);
  const Mat& av = a.val();
  const Mat& bv = b.val();
  if (av.cols != bv.rows) throw InternalError("matmul: shape mismatch");
  Mat out(av.rows, bv.cols);
  for (int i = 0; i < av.rows; ++i)
    for (int k = 0; k < av.cols; ++k) {
      double x = av(i, k);
      if (x == 0.0) continue;
      for (int j = 0; j < bv.cols; ++j) out(i, j) += x * bv(k, j);
    }
  int ai = a.idx, bi = b.idx;
  return make_node(*a.tape, std::move(out), [ai, bi](Tape& tp, int self) {
    const Mat& g = tp.grad(Var{self, &tp});
    const Mat& av2 = tp.val(Var{ai, &tp});
    const Mat& bv2 = tp.val(Var{bi, &tp});
    Mat& ga = tp.grad_mut(ai);
    Mat& gb = tp.grad_mut(bi);
    // dA += dC * B^T
    for (int i = 0; i < ga.rows; ++i)
      for (int j = 0; j < g.cols; ++j) {
        double gv = g(i, j);
        if (gv == 0.0) continue;
        for (int k = 0; k < ga.cols; ++k) ga(i, k) += gv * bv2(k, j);
      }
    // dB += A^T * dC
    for (int i = 0; i < av2.rows; ++i)
      for (int k = 0; k < av2.cols; ++k) {
        double x = av2(i, k);
        if (x == 0.0) continue;
        for (int j = 0; j < g.cols; ++j) gb(k, j) += x * g(i, j);
      }
  });
}

Var matmul_nt(Var a, Var b) {
  check_same_tape(a, b);
  const Mat& av = a.val();
  const Mat& bv = b.val();
  if (av.cols != bv.cols) throw InternalError("matmul_nt: shape mismatch");
  Mat out(av.rows, bv.rows);
  for (int i = 0; i < av.rows; ++i)
    for (int j = 0; j < bv.rows; ++j) {
      double s = 0.0;
      for (int k = 0; k < av.cols; ++k) s += av(i, k) * bv(j, k);
      out(i, j) = s;
    }
  int ai = a.idx, bi = b.idx;
  return make_node(*a.tape, std::move(out), [ai, bi](Tape& tp, int self) {
    const Mat& g = tp.grad(Var{self, &tp});
    const Mat& av2 = tp.val(Var{ai, &tp});
    const Mat& bv2 = tp.val(Var{bi, &tp});
    Mat& ga = tp.grad_mut(ai);
    Mat& gb = tp.grad_mut(bi);
    // C = A B^T: dA += dC * B ; dB += dC^T * A
    for (int i = 0; i < ga.rows; ++i)
      for (int j = 0; j < g.cols; ++j) {
        double gv = g(i, j);
        if (gv == 0.0) continue;
        for (int k = 0; k < ga.cols; ++k) ga(i, k) += gv * bv2(j, k);
      }
    for (int j = 0; j < gb.rows; ++j)
      for (int i = 0; i < g.rows; ++i) {
        double gv = g(i, j);
        if (gv == 0.0) continue;
        for (int k = 0; k < gb.cols; ++k) gb(j, k) += gv * av2(i, k);
      }
  });
}

Var matmul_tn(Var a, Var b) {
  check_same_tape(a, b);
  const Mat& av = a.val();
  const Mat& bv = b.val();
  if (av.rows != bv.rows) throw InternalError("matmul_tn: shape mismatch");
  Mat out(av.cols, bv.cols);
  for (int k = 0; k < av.rows; ++k)
    for (int i = 0; i < av.cols; ++i) {
      double x = av(k, i);
      if (x == 0.0) continue;
      for (int j = 0; j < bv.cols; ++j) out(i, j) += x * bv(k, j);
    }
  int ai = a.idx, bi = b.idx;
  return make_node(*a.tape, std::move(out), [ai, bi](Tape& tp, int self) {
    const Mat& g = tp.grad(Var{self, &tp});
    const Mat& av2 = tp.val(Var{ai, &tp});
    const Mat& bv2 = tp.val(Var{bi, &tp});
    Mat& ga = tp.grad_mut(ai);
    Mat& gb = tp.grad_mut(bi);
    // C = A^T B: dA += B * dC^T ; dB += A * dC
    for (int k = 0; k < ga.rows; ++k)
      for (int i = 0; i < ga.cols; ++i) {
        double s = 0.0;
        for (int j = 0; j < g.cols; ++j) s += bv2(k, j) * g(i, j);
        ga(k, i) += s;
      }
    for (int k = 0; k < gb.rows; ++k)
      for (int j = 0; j < gb.cols; ++j) {
        double s = 0.0;
        for (int i = 0; i < g.rows; ++i) s += av2(k, i) * g(i, j);
        gb(k, j) += s;
      }
  });
}

Var slice_rows(Var a, int row0, int n) {
  const Mat& av = a.val();
  if (row0 < 0 || n < 0 || row0 + n > av.rows) throw InternalError("slice_rows: out of range");
  Mat out(n, av.cols);
  std::copy_n(&av.a[static_cast<size_t>(row0) * av.cols], static_cast<size_t>(n) * av.cols,
              out.a.begin());
  int ai = a.idx;
  return make_node(*a.tape, std::move(out), [ai, row0](Tape& tp, int self) {
    const Mat& g = tp.grad(Var{self, &tp});
    Mat& ga = tp.grad_mut(ai);
    for (int r = 0; r < g.rows; ++r)
      for (int c = 0; c < g.cols; ++c) ga(row0 + r, c) += g(r, c);
  });
}

Var slice_cols(Var a, int col0, int n) {
  const Mat& av = a.val();
  if (col0 < 0 || n < 0 || col0 + n > av.cols) throw InternalError("slice_cols: out of range");
  Mat out(av.rows, n);
  for (int r = 0; r < av.rows; ++r)
    for (int c = 0; c < n; ++c) out(r, c) = av(r, col0 + c);
  int ai = a.idx;
  return make_node(*a.tape, std::move(out), [ai, col0](Tape& tp, int self) {
    const Mat& g = tp.grad(Var{self, &tp});
    Mat& ga = tp.grad_mut(ai);
    for (int r = 0; r < g.rows; ++r)
      for (int c = 0; c < g.cols; ++c) ga(r, col0 + c) += g(r, c);
  });
}

Var row(Var a, int i) { return slice_rows(a, i, 1); }

Var concat_cols(Var a, Var b) {
  check_same_tape(a, b);
  const Mat& av = a.val();
  const Mat& bv = b.val();
  if (av.rows != bv.rows) throw InternalError("concat_cols: row mismatch");
  Mat out(av.rows, av.cols + bv.cols);
  for (int r = 0; r < av.rows; ++r) {
    for (int c = 0; c < av.cols; ++c) out(r, c) = av(r, c);
    for (int c = 0; c < bv.cols; ++c) out(r, av.cols + c) = bv(r, c);
  }
  int ai = a.idx, bi = b.idx, ac = av.cols;
  return make_node(*a.tape, std::move(out), [ai, bi, ac](Tape& tp, int self) {
    const Mat& g = tp.grad(Var{self, &tp});
    Mat& ga = tp.grad_mut(ai);
    Mat& gb = tp.grad_mut(bi);
    for (int r = 0; r < g.rows; ++r) {
      for (int c = 0; c < ga.cols; ++c) ga(r, c) += g(r, c);
      for (int c = 0; c < gb.cols; ++c) gb(r, c) += g(r, ac + c);
    }
  });
}

Var layer_norm(Var x, Var gamma, Var beta, double eps) {
  check_same_tape(x, gamma);
  check_same_tape(x, beta);
  const Mat& xv = x.val();
  const Mat& gv = gamma.val();
  const Mat& bv = beta.val();
  if (gv.rows != 1 || gv.cols != xv.cols || bv.rows != 1 || bv.cols != xv.cols)
    throw InternalError("layer_norm: gamma/beta must be 1 x cols");
  int n = xv.cols;
  Mat out(xv.rows, n);
  std::vector<double> inv_sigma(xv.rows);
  for (int r = 0; r < xv.rows; ++r) {
    double mu = 0.0;
    for (int c = 0; c < n; ++c) mu += xv(r, c);
    mu /= n;
    double var = 0.0;
    for (int c = 0; c < n; ++c) {
      double d = xv(r, c) - mu;
      var += d * d;
    }
    var /= n;
    double is = 1.0 / std::sqrt(var + eps);
    inv_sigma[r] = is;
    for (int c = 0; c < n; ++c) out(r, c) = gv(0, c) * (xv(r, c) - mu) * is + bv(0, c);
  }
  int xi = x.idx, gi = gamma.idx, bi = beta.idx;
  return make_node(*x.tape, std::move(out),
                   [xi, gi, bi, inv_sigma, n](Tape& tp, int self) {
    const Mat& g = tp.grad(Var{self, &tp});
    const Mat& xv2 = tp.val(Var{xi, &tp});
    const Mat& gv2 = tp.val(Var{gi, &tp});
    Mat& gx = tp.grad_mut(xi);
    Mat& gg = tp.grad_mut(gi);
    Mat& gb = tp.grad_mut(bi);
    for (int r = 0; r < xv2.rows; ++r) {
      double mu = 0.0;
      for (int c = 0; c < n; ++c) mu += xv2(r, c);
      mu /= n;
      double is = inv_sigma[r];
      // xhat_c = (x - mu) * is ; a_c = gamma_c * dy_c
      double mean_a = 0.0, mean_ax = 0.0;
      for (int c = 0; c < n; ++c) {
        double xhat = (xv2(r, c) - mu) * is;
        double a = gv2(0, c) * g(r, c);
        mean_a += a;
        mean_ax += a * xhat;
        gg(0, c) += g(r, c) * xhat;
        gb(0, c) += g(r, c);
      }
      mean_a /= n;
      mean_ax /= n;
      for (int c = 0; c < n; ++c) {
        double xhat = (xv2(r, c) - mu) * is;
        double a = gv2(0, c) * g(r, c);
        gx(r, c) += is * (a - mean_a - xhat * mean_ax);
      }
    }
  });
}

Var gelu(Var x) {
  const Mat& xv = x.val();
  Mat out(xv.rows, xv.cols);
  for (size_t i = 0; i < xv.size(); ++i) {
    double v = xv.a[i];
    out.a[i] = 0.5 * v * (1.0 + std::erf(v * M_SQRT1_2));
  }
  int xi = x.idx;
  return make_node(*x.tape, std::move(out), [xi](Tape& tp, int self) {
    const Mat& g = tp.grad(Var{self, &tp});
    const Mat& xv2 = tp.val(Var{xi, &tp});
    Mat& gx = tp.grad_mut(xi);
    constexpr double inv_sqrt_2pi = 0.3989422804014327;
    for (size_t i = 0; i < g.size(); ++i) {
      double v = xv2.a[i];
      double cdf = 0.5 * (1.0 + std::erf(v * M_SQRT1_2));
      double pdf = inv_sqrt_2pi * std::exp(-0.5 * v * v);
      gx.a[i] += g.a[i] * (cdf + v * pdf);
    }
  });
}

namespace {
// Shared softmax backward: dx = y * (dy - sum(dy * y)) over one distribution.
void softmax_back_span(const double* y, const double* dy, double* dx, int n) {
  double dot = 0.0;
  for (int i = 0; i < n; ++i) dot += dy[i] * y[i];
  for (int i = 0; i < n; ++i) dx[i] += y[i] * (dy[i] - dot);
}
}  // namespace

Var softmax_rows(Var x) {
  const Mat& xv = x.val();
  Mat out(xv.rows, xv.cols);
  for (int r = 0; r < xv.rows; ++r) {
    double mx = kNegInf;
    for (int c = 0; c < xv.cols; ++c) mx = std::max(mx, xv(r, c));
    double z = 0.0;
    for (int c = 0; c < xv.cols; ++c) {
      double e = std::exp(xv(r, c) - mx);
      out(r, c) = e;
      z += e;
    }
    for (int c = 0; c < xv.cols; ++c) out(r, c) /= z;
  }
  int xi = x.idx;
  return make_node(*x.tape, std::move(out), [xi](Tape& tp, int self) {
    const Mat& g = tp.grad(Var{self, &tp});
    const Mat& y = tp.val(Var{self, &tp});
    Mat& gx = tp.grad_mut(xi);
    for (int r = 0; r < y.rows; ++r)
      softmax_back_span(&y.a[static_cast<size_t>(r) * y.cols],
                        &g.a[static_cast<size_t>(r) * y.cols],
                        &gx.a[static_cast<size_t>(r) * y.cols], y.cols);
  });
}

Var softmax_vec(Var x) {
  const Mat& xv = x.val();
  if (xv.cols != 1) throw InternalError("softmax_vec: expected n x 1");
  Mat out(xv.rows, 1);
  double mx = kNegInf;
  for (int r = 0; r < xv.rows; ++r) mx = std::max(mx, xv(r, 0));
  double z = 0.0;
  for (int r = 0; r < xv.rows; ++r) {
    double e = std::exp(xv(r, 0) - mx);
    out(r, 0) = e;
    z += e;
  }
  for (int r = 0; r < xv.rows; ++r) out(r, 0) /= z;
  int xi = x.idx;
  return make_node(*x.tape, std::move(out), [xi](Tape& tp, int self) {
    const Mat& g = tp.grad(Var{self, &tp});
    const Mat& y = tp.val(Var{self, &tp});
    Mat& gx = tp.grad_mut(xi);
    softmax_back_span(y.a.data(), g.a.data(), gx.a.data(), y.rows);
  });
}

Var masked_log_softmax_vec(Var x, const std::vector<uint8_t>& allowed) {
  const Mat& xv = x.val();
  if (xv.cols != 1) throw InternalError("masked_log_softmax_vec: expected n x 1");
  if (static_cast<int>(allowed.size()) != xv.rows)
    throw InternalError("masked_log_softmax_vec: mask length mismatch");
  double mx = kNegInf;
  for (int r = 0; r < xv.rows; ++r)
    if (allowed[r]) mx = std::max(mx, xv(r, 0));
  if (mx == kNegInf) throw InternalError("masked_log_softmax_vec: no allowed positions");
  double z = 0.0;
  for (int r = 0; r < xv.rows; ++r)
    if (allowed[r]) z += std::exp(xv(r, 0) - mx);
  double lse = mx + std::log(z);
  Mat out(xv.rows, 1);
  for (int r = 0; r < xv.rows; ++r) out(r, 0) = allowed[r] ? xv(r, 0) - lse : kNegInf;
  int xi = x.idx;
  auto mask = allowed;
  return make_node(*x.tape, std::move(out), [xi, mask](Tape& tp, int self) {
    const Mat& g = tp.grad(Var{self, &tp});
    const Mat& y = tp.val(Var{self, &tp});  // log-probs
    Mat& gx = tp.grad_mut(xi);
    double gsum = 0.0;
    for (int r = 0; r < y.rows; ++r)
      if (mask[r]) gsum += g(r, 0);
    for (int r = 0; r < y.rows; ++r) {
      if (!mask[r]) continue;
      gx(r, 0) += g(r, 0) - gsum * std::exp(y(r, 0));
    }
  });
}

Var log_softmax_row(Var x) {
  const Mat& xv = x.val();
  if (xv.rows != 1) throw InternalError("log_softmax_row: expected 1 x m");
  double mx = kNegInf;
  for (int c = 0; c < xv.cols; ++c) mx = std::max(mx, xv(0, c));
  double z = 0.0;
  for (int c = 0; c < xv.cols; ++c) z += std::exp(xv(0, c) - mx);
  double lse = mx + std::log(z);
  Mat out(1, xv.cols);
  for (int c = 0; c < xv.cols; ++c) out(0, c) = xv(0, c) - lse;
  int xi = x.idx;
  return make_node(*x.tape, std::move(out), [xi](Tape& tp, int self) {
    const Mat& g = tp.grad(Var{self, &tp});
    const Mat& y = tp.val(Var{self, &tp});
    Mat& gx = tp.grad_mut(xi);
    double gsum = 0.0;
    for (int c = 0; c < y.cols; ++c) gsum += g(0, c);
    for (int c = 0; c < y.cols; ++c) gx(0, c) += g(0, c) - gsum * std::exp(y(0, c));
  });
}

Var pick(Var x, int i, int j) {
  const Mat& xv = x.val();
  if (i < 0 || i >= xv.rows || j < 0 || j >= xv.cols) throw InternalError("pick: out of range");
  Mat out(1, 1);
  out(0, 0) = xv(i, j);
  int xi = x.idx;
  return make_node(*x.tape, std::move(out), [xi, i, j](Tape& tp, int self) {
    const Mat& g = tp.grad(Var{self, &tp});
    tp.grad_mut(xi)(i, j) += g(0, 0);
  });
}

Var bce_with_logits(Var logit, double target) {
  const Mat& lv = logit.val();
  if (lv.rows != 1 || lv.cols != 1) throw InternalError("bce_with_logits: expected 1x1");
  double l = lv(0, 0);
  // max(l,0) - l*t + log(1 + exp(-|l|)), numerically stable
  double loss = std::max(l, 0.0) - l * target + std::log1p(std::exp(-std::abs(l)));
  Mat out(1, 1);
  out(0, 0) = loss;
  int li = logit.idx;
  return make_node(*logit.tape, std::move(out), [li, target](Tape& tp, int self) {
    const Mat& g = tp.grad(Var{self, &tp});
    double l2 = tp.val(Var{li, &tp})(0, 0);
    double sig = 1.0 / (1.0 + std::exp(-l2));
    tp.grad_mut(li)(0, 0) += g(0, 0) * (sig - target);
  });
}

Var mean_scalars(const std::vector<Var>& xs) {
  if (xs.empty()) throw InternalError("mean_scalars: empty input; caller decides the empty case");
  Var acc = xs[0];
  for (size_t i = 1; i < xs.size(); ++i) acc = add(acc, xs[i]);
  return scale(acc, 1.0 / static_cast<double>(xs.size()));
}

// --- Adam -------------------------------------------------------------------

void Adam::step(ParamStore& params) {
  auto all = params.all();
  if (cfg_.clip_norm > 0.0) {
    double sq = 0.0;
    for (Param* p : all) {
      if (!p->trainable) continue;
      for (double g : p->grad.a) sq += g * g;
    }
    double norm = std::sqrt(sq);
    if (norm > cfg_.clip_norm) {
      double s = cfg_.clip_norm / norm;
      for (Param* p : all) {
        if (!p->trainable) continue;
        for (double& g : p->grad.a) g *= s;
      }
    }
  }
  ++t_;
  double bc1 = 1.0 - std::pow(cfg_.beta1, t_);
  double bc2 = 1.0 - std::pow(cfg_.beta2, t_);
  for (Param* p : all) {
    if (!p->trainable) continue;
    Slot& s = slots_[p->name];
    if (s.m.size() == 0) {
      s.m = Mat(p->value.rows, p->value.cols);
      s.v = Mat(p->value.rows, p->value.cols);
    }
    for (size_t i = 0; i < p->value.size(); ++i) {
      double g = p->grad.a[i];
      s.m.a[i] = cfg_.beta1 * s.m.a[i] + (1.0 - cfg_.beta1) * g;
      s.v.a[i] = cfg_.beta2 * s.v.a[i] + (1.0 - cfg_.beta2) * g * g;
      double mhat = s.m.a[i] / bc1;
      double vhat = s.v.a[i] / bc2;
      p->value.a[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
  }
}

}  // namespace trend::nn
