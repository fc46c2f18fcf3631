#pragma once

// A small tensor-level reverse-mode tape. Values are row-major double
// matrices; parameters live outside the graph and receive their gradients by
// accumulation, so several graphs can contribute to one parameter update.

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace ficbo::nn {

struct Parameter {
  std::string name;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> value;
  std::vector<double> grad;

  Parameter() = default;
  Parameter(std::string n, std::size_t r, std::size_t c)
      : name(std::move(n)), rows(r), cols(c), value(r * c, 0.0), grad(r * c, 0.0) {}
  [[nodiscard]] std::size_t size() const { return value.size(); }
};

using Var = int;

class Graph {
 public:
  // With record == false no backward closures are kept (inference only).
  explicit Graph(bool record = true) : record_(record) {}

  Var constant(std::size_t rows, std::size_t cols, std::vector<double> data);

  [[nodiscard]] std::size_t rows(Var v) const { return nodes_[idx(v)].rows; }
  [[nodiscard]] std::size_t cols(Var v) const { return nodes_[idx(v)].cols; }
  [[nodiscard]] const std::vector<double>& value(Var v) const { return nodes_[idx(v)].val; }
  [[nodiscard]] double scalar(Var v) const { return nodes_[idx(v)].val.at(0); }
  [[nodiscard]] std::size_t size() const { return nodes_.size(); }

  // x W + b with W (in x out) and b (1 x out).
  Var linear(Var x, Parameter& w, Parameter& b);
  Var relu(Var x);
  Var add(Var a, Var b);
  // a with b added to its leading b.rows rows.
  Var add_prefix_rows(Var a, Var b);
  Var concat_cols(Var a, Var b);
  Var slice_rows(Var x, std::size_t begin, std::size_t count);
  Var layer_norm(Var x, Parameter& gamma, Parameter& beta, double eps = 1e-5);
  // qkv holds [Q | K | V] column blocks of width d each. Every row attends to
  // the first n_keys rows only.
  Var attention(Var qkv, std::size_t n_keys, std::size_t n_heads);
  // Column vector in, column vector of log-probabilities out.
  Var log_softmax(Var logits);
  Var pick(Var x, std::size_t row, std::size_t col = 0);
  // Rows are [logit_w | mean | raw_std] blocks of width k. Returns the mean
  // negative log-density of y under each row's mixture (1 x 1).
  Var gmm_nll(Var head, std::vector<double> y, std::size_t k, double std_floor);

  // Accumulates sum_i coef_i * d(seed_i) into every parameter gradient.
  void backward(std::span<const std::pair<Var, double>> seeds);

 private:
  struct Node {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> val;
    std::vector<double> grad;
    std::function<void(Graph&, std::size_t)> back;
  };

  [[nodiscard]] std::size_t idx(Var v) const;
  Var push(std::size_t rows, std::size_t cols, std::vector<double> val);

  bool record_;
  std::vector<Node> nodes_;
};

double softplus(double x);
double sigmoid(double x);

}  // namespace ficbo::nn
