// Copyright 2026 the cmaug authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CMAUG_TAPE_HPP
#define CMAUG_TAPE_HPP

#include <array>
#include <cstddef>
#include <functional>
#include <vector>

#include "cmaug/core.hpp"
#include "cmaug/mat.hpp"

namespace cmaug {

// Reverse-mode tape over dense double matrices. One forward pass records
// the graph; backward() sweeps it exactly once in reverse topological
// order (which is tape order, since ops only reference existing nodes).
class Tape {
 public:
  struct Var {
    std::size_t idx = static_cast<std::size_t>(-1);
    bool valid() const { return idx != static_cast<std::size_t>(-1); }
  };

  Var leaf(Mat value);

  const Mat& value(Var v) const { return nodes_[v.idx].value; }
  // Zero-size matrix when the node received no gradient.
  const Mat& grad(Var v) const;

  // loss must be 1x1. Throws std::logic_error on a second call.
  void backward(Var loss);

  // --- operations -------------------------------------------------------
  Var matmul(Var a, Var b);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);  // elementwise
  Var scale(Var a, double c);
  Var add_scalar(Var a, double c);
  // bias is 1 x cols, added to every row of m.
  Var add_bias(Var m, Var bias);
  Var tanh(Var a);
  Var logistic(Var a);
  Var slice_rows(Var a, std::size_t r0, std::size_t r1);
  Var concat_rows(const std::vector<Var>& parts);
  Var concat_cols(const std::vector<Var>& parts);
  // Temporal convolution over rows, zero "same" padding, stride 1.
  // kernel_taps are width matrices [in_dim x out_dim]; bias is 1 x out_dim.
  Var conv1d_same(Var x, const std::vector<Var>& kernel_taps, Var bias);
  // Max over adjacent row pairs, stride 2; odd trailing row dropped.
  // Gradient routes to the argmax row (first on ties).
  Var maxpool2_rows(Var x);
  Var log_softmax_rows(Var x);
  Var sum_all(Var x);
  Var hinge(Var x);  // 1x1 -> max(x, 0)
  Var weighted_sum(const std::vector<Var>& xs, const std::vector<double>& weights);
  // loss = -log p(label | x) with x a [T x (N+1)] log-prob matrix.
  Var ctc(Var x, GlossSequence label);
  // [Ta x d], [Tb x d] -> [Ta x Tb] cosine distance matrix.
  Var cosine_cost(Var a, Var b);
  // Soft-DTW value of a cost matrix node.
  Var soft_dtw(Var cost, double gamma);

 private:
  struct Node {
    Mat value;
    std::function<void(Tape&, std::size_t self)> backprop;  // null for leaves
  };

  Var push(Mat value, std::function<void(Tape&, std::size_t)> backprop);
  void accumulate(std::size_t idx, const Mat& g);
  Mat& grad_slot(std::size_t idx);

  std::vector<Node> nodes_;
  std::vector<Mat> grads_;
  bool backward_done_ = false;
};

}  // namespace cmaug

#endif  // CMAUG_TAPE_HPP
