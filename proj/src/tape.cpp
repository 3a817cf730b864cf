// Copyright 2026 the cmaug authors
// SPDX-License-Identifier: Apache-2.0

#include "cmaug/tape.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>
#include <utility>

#include "cmaug/ctc.hpp"
#include "cmaug/kernels.hpp"
#include "cmaug/softdtw.hpp"

namespace cmaug {
namespace {

const Mat kEmptyMat{};

void check_same_shape(const Mat& a, const Mat& b, const char* op) {
  if (!a.same_shape(b)) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch");
  }
}

void check_scalar(const Mat& a, const char* op) {
  if (a.rows() != 1 || a.cols() != 1) {
    throw std::invalid_argument(std::string(op) + ": expected a 1x1 value");
  }
}

}  // namespace

Tape::Var Tape::push(Mat value, std::function<void(Tape&, std::size_t)> backprop) {
  if (backward_done_) {
    throw std::logic_error("tape: cannot record ops after backward()");
  }
  nodes_.push_back(Node{std::move(value), std::move(backprop)});
  return Var{nodes_.size() - 1};
}

Tape::Var Tape::leaf(Mat value) { return push(std::move(value), nullptr); }

const Mat& Tape::grad(Var v) const {
  if (!backward_done_) {
    throw std::logic_error("tape: grad() requires backward() first");
  }
  if (v.idx >= grads_.size() || grads_[v.idx].size() == 0) {
    return kEmptyMat;
  }
  return grads_[v.idx];
}

Mat& Tape::grad_slot(std::size_t idx) {
  Mat& g = grads_[idx];
  if (g.size() == 0) {
    const Mat& v = nodes_[idx].value;
    g = Mat(v.rows(), v.cols());
  }
  return g;
}

void Tape::accumulate(std::size_t idx, const Mat& g) {
  Mat& slot = grad_slot(idx);
  kern::add(slot.flat(), g.flat(), slot.flat());
}

void Tape::backward(Var loss) {
  if (backward_done_) {
    throw std::logic_error("tape: backward() may run only once");
  }
  check_scalar(value(loss), "backward");
  grads_.assign(nodes_.size(), Mat{});
  grad_slot(loss.idx)(0, 0) = 1.0;
  backward_done_ = true;
  for (std::size_t i = nodes_.size(); i-- > 0;) {
    if (grads_[i].size() == 0 || !nodes_[i].backprop) {
      continue;
    }
    nodes_[i].backprop(*this, i);
  }
}

Tape::Var Tape::matmul(Var a, Var b) {
  const Mat& av = value(a);
  const Mat& bv = value(b);
  Mat out = cmaug::matmul(av, bv);
  return push(std::move(out), [a, b](Tape& t, std::size_t self) {
    const Mat& up = t.grads_[self];
    const Mat& av = t.value(a);
    const Mat& bv = t.value(b);
    Mat& ga = t.grad_slot(a.idx);
    for (std::size_t i = 0; i < av.rows(); ++i) {
      for (std::size_t l = 0; l < av.cols(); ++l) {
        ga(i, l) += kern::dot(up.row(i), bv.row(l));
      }
    }
    Mat& gb = t.grad_slot(b.idx);
    for (std::size_t i = 0; i < av.rows(); ++i) {
      for (std::size_t l = 0; l < av.cols(); ++l) {
        const double w = av(i, l);
        if (w != 0.0) {
          kern::axpy(w, up.row(i), gb.row(l));
        }
      }
    }
  });
}

Tape::Var Tape::add(Var a, Var b) {
  check_same_shape(value(a), value(b), "add");
  Mat out(value(a).rows(), value(a).cols());
  kern::add(value(a).flat(), value(b).flat(), out.flat());
  return push(std::move(out), [a, b](Tape& t, std::size_t self) {
    t.accumulate(a.idx, t.grads_[self]);
    t.accumulate(b.idx, t.grads_[self]);
  });
}

Tape::Var Tape::sub(Var a, Var b) {
  check_same_shape(value(a), value(b), "sub");
  Mat out(value(a).rows(), value(a).cols());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out.flat()[i] = value(a).flat()[i] - value(b).flat()[i];
  }
  return push(std::move(out), [a, b](Tape& t, std::size_t self) {
    const Mat& up = t.grads_[self];
    t.accumulate(a.idx, up);
    Mat& gb = t.grad_slot(b.idx);
    kern::axpy(-1.0, up.flat(), gb.flat());
  });
}

Tape::Var Tape::mul(Var a, Var b) {
  check_same_shape(value(a), value(b), "mul");
  Mat out(value(a).rows(), value(a).cols());
  kern::mul(value(a).flat(), value(b).flat(), out.flat());
  return push(std::move(out), [a, b](Tape& t, std::size_t self) {
    const Mat& up = t.grads_[self];
    Mat& ga = t.grad_slot(a.idx);
    Mat& gb = t.grad_slot(b.idx);
    const Mat& av = t.value(a);
    const Mat& bv = t.value(b);
    for (std::size_t i = 0; i < up.size(); ++i) {
      ga.flat()[i] += up.flat()[i] * bv.flat()[i];
      gb.flat()[i] += up.flat()[i] * av.flat()[i];
    }
  });
}

Tape::Var Tape::scale(Var a, double c) {
  Mat out(value(a).rows(), value(a).cols());
  kern::scale(value(a).flat(), c, out.flat());
  return push(std::move(out), [a, c](Tape& t, std::size_t self) {
    Mat& ga = t.grad_slot(a.idx);
    kern::axpy(c, t.grads_[self].flat(), ga.flat());
  });
}

Tape::Var Tape::add_scalar(Var a, double c) {
  Mat out(value(a).rows(), value(a).cols());
  kern::add_scalar(value(a).flat(), c, out.flat());
  return push(std::move(out), [a](Tape& t, std::size_t self) {
    t.accumulate(a.idx, t.grads_[self]);
  });
}

Tape::Var Tape::add_bias(Var m, Var bias) {
  const Mat& mv = value(m);
  const Mat& bv = value(bias);
  if (bv.rows() != 1 || bv.cols() != mv.cols()) {
    throw std::invalid_argument("add_bias: bias must be 1 x cols");
  }
  Mat out(mv.rows(), mv.cols());
  for (std::size_t r = 0; r < mv.rows(); ++r) {
    kern::add(mv.row(r), bv.row(0), out.row(r));
  }
  return push(std::move(out), [m, bias](Tape& t, std::size_t self) {
    const Mat& up = t.grads_[self];
    t.accumulate(m.idx, up);
    Mat& gb = t.grad_slot(bias.idx);
    for (std::size_t r = 0; r < up.rows(); ++r) {
      kern::add(gb.row(0), up.row(r), gb.row(0));
    }
  });
}

Tape::Var Tape::tanh(Var a) {
  Mat out(value(a).rows(), value(a).cols());
  kern::tanh_vec(value(a).flat(), out.flat());
  return push(std::move(out), [a](Tape& t, std::size_t self) {
    const Mat& up = t.grads_[self];
    const Mat& y = t.nodes_[self].value;
    Mat& ga = t.grad_slot(a.idx);
    for (std::size_t i = 0; i < up.size(); ++i) {
      const double yi = y.flat()[i];
      ga.flat()[i] += up.flat()[i] * (1.0 - yi * yi);
    }
  });
}

Tape::Var Tape::logistic(Var a) {
  Mat out(value(a).rows(), value(a).cols());
  kern::logistic_vec(value(a).flat(), out.flat());
  return push(std::move(out), [a](Tape& t, std::size_t self) {
    const Mat& up = t.grads_[self];
    const Mat& y = t.nodes_[self].value;
    Mat& ga = t.grad_slot(a.idx);
    for (std::size_t i = 0; i < up.size(); ++i) {
      const double yi = y.flat()[i];
      ga.flat()[i] += up.flat()[i] * yi * (1.0 - yi);
    }
  });
}

Tape::Var Tape::slice_rows(Var a, std::size_t r0, std::size_t r1) {
  const Mat& av = value(a);
  if (r0 >= r1 || r1 > av.rows()) {
    throw std::invalid_argument("slice_rows: bad row range");
  }
  Mat out(r1 - r0, av.cols());
  for (std::size_t r = r0; r < r1; ++r) {
    auto src = av.row(r);
    auto dst = out.row(r - r0);
    std::copy(src.begin(), src.end(), dst.begin());
  }
  return push(std::move(out), [a, r0](Tape& t, std::size_t self) {
    const Mat& up = t.grads_[self];
    Mat& ga = t.grad_slot(a.idx);
    for (std::size_t r = 0; r < up.rows(); ++r) {
      kern::add(ga.row(r0 + r), up.row(r), ga.row(r0 + r));
    }
  });
}

Tape::Var Tape::concat_rows(const std::vector<Var>& parts) {
  if (parts.empty()) {
    throw std::invalid_argument("concat_rows: no inputs");
  }
  const std::size_t cols = value(parts[0]).cols();
  std::size_t rows = 0;
  for (Var p : parts) {
    if (value(p).cols() != cols) {
      throw std::invalid_argument("concat_rows: column mismatch");
    }
    rows += value(p).rows();
  }
  Mat out(rows, cols);
  std::size_t at = 0;
  for (Var p : parts) {
    const Mat& pv = value(p);
    for (std::size_t r = 0; r < pv.rows(); ++r) {
      auto src = pv.row(r);
      std::copy(src.begin(), src.end(), out.row(at + r).begin());
    }
    at += pv.rows();
  }
  return push(std::move(out), [parts](Tape& t, std::size_t self) {
    const Mat& up = t.grads_[self];
    std::size_t at = 0;
    for (Var p : parts) {
      Mat& gp = t.grad_slot(p.idx);
      for (std::size_t r = 0; r < gp.rows(); ++r) {
        kern::add(gp.row(r), up.row(at + r), gp.row(r));
      }
      at += gp.rows();
    }
  });
}

Tape::Var Tape::concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) {
    throw std::invalid_argument("concat_cols: no inputs");
  }
  const std::size_t rows = value(parts[0]).rows();
  std::size_t cols = 0;
  for (Var p : parts) {
    if (value(p).rows() != rows) {
      throw std::invalid_argument("concat_cols: row mismatch");
    }
    cols += value(p).cols();
  }
  Mat out(rows, cols);
  std::size_t at = 0;
  for (Var p : parts) {
    const Mat& pv = value(p);
    for (std::size_t r = 0; r < rows; ++r) {
      auto src = pv.row(r);
      std::copy(src.begin(), src.end(), out.row(r).begin() + at);
    }
    at += pv.cols();
  }
  return push(std::move(out), [parts](Tape& t, std::size_t self) {
    const Mat& up = t.grads_[self];
    std::size_t at = 0;
    for (Var p : parts) {
      Mat& gp = t.grad_slot(p.idx);
      for (std::size_t r = 0; r < gp.rows(); ++r) {
        for (std::size_t c = 0; c < gp.cols(); ++c) {
          gp(r, c) += up(r, at + c);
        }
      }
      at += gp.cols();
    }
  });
}

Tape::Var Tape::conv1d_same(Var x, const std::vector<Var>& kernel_taps, Var bias) {
  const Mat& xv = value(x);
  const std::size_t width = kernel_taps.size();
  if (width == 0 || width % 2 == 0) {
    throw std::invalid_argument("conv1d_same: kernel width must be odd");
  }
  const std::size_t in_dim = xv.cols();
  const std::size_t out_dim = value(kernel_taps[0]).cols();
  for (Var k : kernel_taps) {
    if (value(k).rows() != in_dim || value(k).cols() != out_dim) {
      throw std::invalid_argument("conv1d_same: tap shape mismatch");
    }
  }
  if (value(bias).rows() != 1 || value(bias).cols() != out_dim) {
    throw std::invalid_argument("conv1d_same: bias must be 1 x out_dim");
  }
  const std::ptrdiff_t half = static_cast<std::ptrdiff_t>(width / 2);
  const std::ptrdiff_t rows = static_cast<std::ptrdiff_t>(xv.rows());
  Mat out(xv.rows(), out_dim);
  for (std::ptrdiff_t t = 0; t < rows; ++t) {
    auto dst = out.row(static_cast<std::size_t>(t));
    std::copy(value(bias).row(0).begin(), value(bias).row(0).end(), dst.begin());
    for (std::size_t w = 0; w < width; ++w) {
      const std::ptrdiff_t src = t + static_cast<std::ptrdiff_t>(w) - half;
      if (src < 0 || src >= rows) {
        continue;
      }
      const Mat& kv = value(kernel_taps[w]);
      auto xr = xv.row(static_cast<std::size_t>(src));
      for (std::size_t ci = 0; ci < in_dim; ++ci) {
        if (xr[ci] != 0.0) {
          kern::axpy(xr[ci], kv.row(ci), dst);
        }
      }
    }
  }
  return push(std::move(out),
              [x, kernel_taps, bias, half, rows](Tape& t, std::size_t self) {
                const Mat& up = t.grads_[self];
                const Mat& xv = t.value(x);
                const std::size_t in_dim = xv.cols();
                Mat& gx = t.grad_slot(x.idx);
                Mat& gb = t.grad_slot(bias.idx);
                for (std::ptrdiff_t r = 0; r < rows; ++r) {
                  auto ur = up.row(static_cast<std::size_t>(r));
                  kern::add(gb.row(0), ur, gb.row(0));
                  for (std::size_t w = 0; w < kernel_taps.size(); ++w) {
                    const std::ptrdiff_t src = r + static_cast<std::ptrdiff_t>(w) - half;
                    if (src < 0 || src >= rows) {
                      continue;
                    }
                    const Mat& kv = t.value(kernel_taps[w]);
                    Mat& gk = t.grad_slot(kernel_taps[w].idx);
                    auto xr = xv.row(static_cast<std::size_t>(src));
                    auto gxr = gx.row(static_cast<std::size_t>(src));
                    for (std::size_t ci = 0; ci < in_dim; ++ci) {
                      gxr[ci] += kern::dot(ur, kv.row(ci));
                      if (xr[ci] != 0.0) {
                        kern::axpy(xr[ci], ur, gk.row(ci));
                      }
                    }
                  }
                }
              });
}

Tape::Var Tape::maxpool2_rows(Var x) {
  const Mat& xv = value(x);
  if (xv.rows() < 2) {
    throw std::invalid_argument("maxpool2_rows: need at least two rows");
  }
  const std::size_t out_rows = xv.rows() / 2;
  Mat out(out_rows, xv.cols());
  auto arg = std::make_shared<std::vector<std::size_t>>(out_rows * xv.cols());
  for (std::size_t r = 0; r < out_rows; ++r) {
    for (std::size_t c = 0; c < xv.cols(); ++c) {
      const double a = xv(2 * r, c);
      const double b = xv(2 * r + 1, c);
      const std::size_t pick = (b > a) ? 2 * r + 1 : 2 * r;
      out(r, c) = xv(pick, c);
      (*arg)[r * xv.cols() + c] = pick;
    }
  }
  return push(std::move(out), [x, arg](Tape& t, std::size_t self) {
    const Mat& up = t.grads_[self];
    Mat& gx = t.grad_slot(x.idx);
    for (std::size_t r = 0; r < up.rows(); ++r) {
      for (std::size_t c = 0; c < up.cols(); ++c) {
        gx((*arg)[r * up.cols() + c], c) += up(r, c);
      }
    }
  });
}

Tape::Var Tape::log_softmax_rows(Var x) {
  const Mat& xv = value(x);
  Mat out(xv.rows(), xv.cols());
  for (std::size_t r = 0; r < xv.rows(); ++r) {
    const double lse = kern::logsumexp(xv.row(r));
    auto dst = out.row(r);
    auto src = xv.row(r);
    for (std::size_t c = 0; c < xv.cols(); ++c) {
      dst[c] = src[c] - lse;
    }
  }
  return push(std::move(out), [x](Tape& t, std::size_t self) {
    const Mat& up = t.grads_[self];
    const Mat& y = t.nodes_[self].value;
    Mat& gx = t.grad_slot(x.idx);
    for (std::size_t r = 0; r < up.rows(); ++r) {
      const double total = kern::sum(up.row(r));
      auto gr = gx.row(r);
      auto ur = up.row(r);
      auto yr = y.row(r);
      for (std::size_t c = 0; c < up.cols(); ++c) {
        gr[c] += ur[c] - std::exp(yr[c]) * total;
      }
    }
  });
}

Tape::Var Tape::sum_all(Var x) {
  Mat out(1, 1);
  out(0, 0) = kern::sum(value(x).flat());
  return push(std::move(out), [x](Tape& t, std::size_t self) {
    const double up = t.grads_[self](0, 0);
    Mat& gx = t.grad_slot(x.idx);
    kern::add_scalar(gx.flat(), up, gx.flat());
  });
}

Tape::Var Tape::hinge(Var x) {
  check_scalar(value(x), "hinge");
  const double v = value(x)(0, 0);
  Mat out(1, 1);
  out(0, 0) = v > 0.0 ? v : 0.0;
  return push(std::move(out), [x, v](Tape& t, std::size_t self) {
    if (v > 0.0) {
      t.grad_slot(x.idx)(0, 0) += t.grads_[self](0, 0);
    }
  });
}

Tape::Var Tape::weighted_sum(const std::vector<Var>& xs,
                             const std::vector<double>& weights) {
  if (xs.empty() || xs.size() != weights.size()) {
    throw std::invalid_argument("weighted_sum: inputs and weights must pair up");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    check_scalar(value(xs[i]), "weighted_sum");
    total += weights[i] * value(xs[i])(0, 0);
  }
  Mat out(1, 1);
  out(0, 0) = total;
  return push(std::move(out), [xs, weights](Tape& t, std::size_t self) {
    const double up = t.grads_[self](0, 0);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      t.grad_slot(xs[i].idx)(0, 0) += up * weights[i];
    }
  });
}

Tape::Var Tape::ctc(Var x, GlossSequence label) {
  const Mat& xv = value(x);
  if (xv.cols() < 2) {
    throw std::invalid_argument("ctc: need blank plus at least one class");
  }
  CtcLossResult res = ctc_loss_and_grad(LogProbMatrix(xv), label);
  Mat out(1, 1);
  out(0, 0) = res.loss;
  auto grad = std::make_shared<Mat>(std::move(res.grad));
  return push(std::move(out), [x, grad](Tape& t, std::size_t self) {
    const double up = t.grads_[self](0, 0);
    Mat& gx = t.grad_slot(x.idx);
    kern::axpy(up, grad->flat(), gx.flat());
  });
}

Tape::Var Tape::cosine_cost(Var a, Var b) {
  const Mat& av = value(a);
  const Mat& bv = value(b);
  CostMatrix cm = cmaug::cosine_cost(FeatureSequence(av, FeatureRole::sequential_feature),
                                     FeatureSequence(bv, FeatureRole::text_feature));
  auto norms_a = std::make_shared<std::vector<double>>(av.rows());
  auto norms_b = std::make_shared<std::vector<double>>(bv.rows());
  for (std::size_t i = 0; i < av.rows(); ++i) {
    (*norms_a)[i] = std::sqrt(kern::dot(av.row(i), av.row(i)));
  }
  for (std::size_t j = 0; j < bv.rows(); ++j) {
    (*norms_b)[j] = std::sqrt(kern::dot(bv.row(j), bv.row(j)));
  }
  return push(std::move(cm.entries),
              [a, b, norms_a, norms_b](Tape& t, std::size_t self) {
                const Mat& up = t.grads_[self];
                const Mat& d = t.nodes_[self].value;
                const Mat& av = t.value(a);
                const Mat& bv = t.value(b);
                Mat& ga = t.grad_slot(a.idx);
                Mat& gb = t.grad_slot(b.idx);
                for (std::size_t i = 0; i < av.rows(); ++i) {
                  const double na = (*norms_a)[i];
                  if (na == 0.0) {
                    continue;
                  }
                  double self_coeff = 0.0;
                  for (std::size_t j = 0; j < bv.rows(); ++j) {
                    const double nb = (*norms_b)[j];
                    if (nb == 0.0 || up(i, j) == 0.0) {
                      continue;
                    }
                    const double cos_ij = 1.0 - d(i, j);
                    const double u = up(i, j);
                    // d = 1 - cos; d/da = cos * a / |a|^2 - b / (|a||b|)
                    self_coeff += u * cos_ij;
                    kern::axpy(-u / (na * nb), bv.row(j), ga.row(i));
                    kern::axpy(u * cos_ij / (nb * nb), bv.row(j), gb.row(j));
                    kern::axpy(-u / (na * nb), av.row(i), gb.row(j));
                  }
                  if (self_coeff != 0.0) {
                    kern::axpy(self_coeff / (na * na), av.row(i), ga.row(i));
                  }
                }
              });
}

Tape::Var Tape::soft_dtw(Var cost, double gamma) {
  const Mat& cv = value(cost);
  CostMatrix cm;
  cm.entries = cv;
  cm.gamma = gamma;
  SoftDtwResult res = cmaug::soft_dtw(cm);
  Mat out(1, 1);
  out(0, 0) = res.value;
  auto table = std::make_shared<Mat>(std::move(res.table));
  return push(std::move(out), [cost, gamma, table](Tape& t, std::size_t self) {
    const double up = t.grads_[self](0, 0);
    CostMatrix cm;
    cm.entries = t.value(cost);
    cm.gamma = gamma;
    Mat e = soft_dtw_grad(cm, *table);
    Mat& gc = t.grad_slot(cost.idx);
    kern::axpy(up, e.flat(), gc.flat());
  });
}

}  // namespace cmaug
