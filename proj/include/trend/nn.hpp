#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "trend/common.hpp"

namespace trend::nn {

// Row-major matrix of doubles. Scalars are 1x1, vectors are nx1 or 1xn.
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, 0.0) {}

  double& operator()(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
  double operator()(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }
  size_t size() const { return a.size(); }
  bool same_shape(const Mat& o) const { return rows == o.rows && cols == o.cols; }
  void fill(double v) { std::fill(a.begin(), a.end(), v); }
};

void fill_normal(Mat& m, Rng& rng, double stddev);

// Named trainable tensor. Gradients accumulate across Tape::backward calls
// until zero_grad.
struct Param {
  std::string name;
  Mat value;
  Mat grad;
  bool trainable = true;

  Param(std::string n, int r, int c) : name(std::move(n)), value(r, c), grad(r, c) {}
  void zero_grad() { grad.fill(0.0); }
};

// Ordered (by name) parameter registry. Canonical order makes optimizer
// steps, checkpoints, and checksums reproducible.
class ParamStore {
 public:
  Param& create(const std::string& name, int rows, int cols);
  Param& at(const std::string& name);
  const Param& at(const std::string& name) const;
  Param* find(const std::string& name);
  bool erase(const std::string& name);
  void zero_grad();

  std::vector<Param*> all();
  std::vector<const Param*> all() const;

  uint64_t checksum(const std::string& name) const;  // over value bytes

  std::unique_ptr<ParamStore> clone() const;

 private:
  std::map<std::string, std::unique_ptr<Param>> params_;
};

class Tape;

// Handle to a node on a tape. Values are computed eagerly at op creation;
// gradients flow on Tape::backward.
struct Var {
  int idx = -1;
  Tape* tape = nullptr;

  const Mat& val() const;
  int rows() const { return val().rows; }
  int cols() const { return val().cols; }
  double scalar() const;
  bool valid() const { return tape != nullptr && idx >= 0; }
};

// Reverse-mode tape. Nodes are created in topological order; backward walks
// them in reverse. Leaf nodes bound to Params push their gradient into
// Param::grad at the end of backward.
class Tape {
 public:
  Var leaf(Param& p);            // cached: one node per Param per tape
  Var constant(Mat value);       // input without upstream gradient

  void backward(Var loss);       // loss must be 1x1

  const Mat& val(Var v) const;
  const Mat& grad(Var v) const;  // valid after backward

  // For op backward closures: writable upstream gradient buffer.
  Mat& grad_mut(int idx) { return nodes_[idx].grad; }

  size_t node_count() const { return nodes_.size(); }

 private:
  friend Var make_node(Tape& t, Mat value, std::function<void(Tape&, int)> back);
  friend struct Var;

  struct Node {
    Mat val;
    Mat grad;
    std::function<void(Tape&, int)> back;  // (tape, own index)
    Param* param = nullptr;
  };

  std::vector<Node> nodes_;
  std::map<const Param*, int> leaf_cache_;
};

// --- ops ------------------------------------------------------------------

Var rows(Var table, const std::vector<int>& ids);   // gather rows
Var add(Var a, Var b);                              // same shape
Var add_rowvec(Var a, Var b);                       // b is 1 x cols, broadcast over rows
Var scale(Var a, double s);
Var matmul(Var a, Var b);                           // (n,k)x(k,m)
Var matmul_nt(Var a, Var b);                        // a * b^T : (n,k)x(m,k) -> (n,m)
Var matmul_tn(Var a, Var b);                        // a^T * b : (k,n)x(k,m) -> (n,m)
Var slice_rows(Var a, int row0, int n);
Var slice_cols(Var a, int col0, int n);
Var row(Var a, int i);
Var concat_cols(Var a, Var b);                      // same rows
Var layer_norm(Var x, Var gamma, Var beta, double eps);
Var gelu(Var x);
Var softmax_rows(Var x);                            // softmax per row
Var softmax_vec(Var x);                             // x is n x 1, one distribution
// Log-softmax over the allowed entries of a column vector; disallowed
// entries come out as -inf and carry no gradient.
Var masked_log_softmax_vec(Var x, const std::vector<uint8_t>& allowed);
Var log_softmax_row(Var x);                         // x is 1 x m
Var pick(Var x, int i, int j);                      // 1x1
Var bce_with_logits(Var logit, double target);      // logit 1x1 -> scalar loss
Var mean_scalars(const std::vector<Var>& xs);       // throws on empty

// --- optimizer --------------------------------------------------------------

struct AdamConfig {
  double lr = 3e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double clip_norm = 0.0;  // 0 disables clipping
};

class Adam {
 public:
  explicit Adam(AdamConfig cfg) : cfg_(cfg) {}

  // Applies one update from accumulated grads of trainable params, then
  // leaves grads untouched (caller zeroes them).
  void step(ParamStore& params);

  int steps_taken() const { return t_; }

 private:
  struct Slot {
    Mat m, v;
  };
  AdamConfig cfg_;
  std::map<std::string, Slot> slots_;
  int t_ = 0;
};

}  // namespace trend::nn
