// Copyright 2026 the cmaug authors
// SPDX-License-Identifier: Apache-2.0

#include "cmaug/gradcheck.hpp"

#include <cmath>
#include <vector>

#include "cmaug/ctc.hpp"
#include "cmaug/fd.hpp"
#include "cmaug/kernels.hpp"
#include "cmaug/model.hpp"
#include "cmaug/rng.hpp"
#include "cmaug/softdtw.hpp"
#include "cmaug/tape.hpp"

namespace cmaug {
namespace {

constexpr double kFdStep = 1e-5;
constexpr double kPerOpTol = 1e-4;
constexpr double kCompositeTol = 1e-3;
// Large enough that both composite hinges stay strictly active on toy
// sizes, keeping the objective smooth around the evaluation point.
constexpr double kCompositeMargin = 20.0;
constexpr double kCompositeLambda = 0.7;

Mat random_mat(std::size_t rows, std::size_t cols, rng::Engine& eng, double scale) {
  Mat m(rows, cols);
  for (double& v : m.flat()) {
    v = scale * rng::normal(eng);
  }
  return m;
}

LogProbMatrix random_log_probs(std::size_t steps, std::size_t classes,
                               rng::Engine& eng) {
  Mat m = random_mat(steps, classes, eng, 1.0);
  for (std::size_t t = 0; t < steps; ++t) {
    const double lse = kern::logsumexp(m.row(t));
    for (double& v : m.row(t)) {
      v -= lse;
    }
  }
  return LogProbMatrix(std::move(m));
}

GlossSequence random_feasible_label(std::size_t steps, int n, rng::Engine& eng) {
  while (true) {
    GlossSequence s;
    const std::size_t len = 1 + rng::uniform_index(eng, 3);
    for (std::size_t i = 0; i < len; ++i) {
      s.items.push_back(rng::uniform_int(eng, 1, n));
    }
    if (min_path_steps(s) <= steps) {
      return s;
    }
  }
}

GradCheckCase check_ctc(std::uint64_t seed, std::size_t instances) {
  GradCheckCase c{"ctc", instances, 0, 0.0, kPerOpTol, false};
  rng::Engine eng(rng::derive_seed(seed, "ctc"));
  for (std::size_t inst = 0; inst < instances; ++inst) {
    const std::size_t steps = 3 + rng::uniform_index(eng, 6);
    const int n = 2 + static_cast<int>(rng::uniform_index(eng, 2));
    LogProbMatrix p = random_log_probs(steps, static_cast<std::size_t>(n) + 1, eng);
    const GlossSequence label = random_feasible_label(steps, n, eng);
    const CtcLossResult res = ctc_loss_and_grad(p, label);
    Mat m = p.storage();
    for (double& slot : m.flat()) {
      const double fd = fd::central(slot, kFdStep, [&] {
        return -ctc_log_prob(LogProbMatrix(m), label);
      });
      const std::size_t k = static_cast<std::size_t>(&slot - m.flat().data());
      c.max_rel_error = std::max(c.max_rel_error, fd::rel_error(res.grad.flat()[k], fd));
      ++c.entries_checked;
    }
  }
  c.passed = c.max_rel_error < c.tolerance;
  return c;
}

GradCheckCase check_softdtw(std::uint64_t seed, std::size_t instances, double gamma) {
  GradCheckCase c{"softdtw_gamma_" + std::to_string(gamma).substr(0, 3), instances, 0,
                  0.0, kPerOpTol, false};
  rng::Engine eng(rng::derive_seed(seed, c.name));
  for (std::size_t inst = 0; inst < instances; ++inst) {
    CostMatrix cm;
    cm.gamma = gamma;
    cm.entries = Mat(2 + rng::uniform_index(eng, 5), 2 + rng::uniform_index(eng, 5));
    for (double& v : cm.entries.flat()) {
      v = rng::uniform_real(eng, 0.0, 2.0);
    }
    const SoftDtwResult res = soft_dtw(cm);
    const Mat grad = soft_dtw_grad(cm, res.table);
    for (std::size_t k = 0; k < cm.entries.size(); ++k) {
      const double fd = fd::central(cm.entries.flat()[k], kFdStep, [&] {
        return soft_dtw(cm).value;
      });
      c.max_rel_error = std::max(c.max_rel_error, fd::rel_error(grad.flat()[k], fd));
      ++c.entries_checked;
    }
  }
  c.passed = c.max_rel_error < c.tolerance;
  return c;
}

GradCheckCase check_cosine_chain(std::uint64_t seed, std::size_t instances) {
  GradCheckCase c{"cosine_chain", instances, 0, 0.0, kPerOpTol, false};
  rng::Engine eng(rng::derive_seed(seed, "cosine_chain"));
  for (std::size_t inst = 0; inst < instances; ++inst) {
    Mat a = random_mat(2 + rng::uniform_index(eng, 3), 3, eng, 1.0);
    Mat b = random_mat(2 + rng::uniform_index(eng, 3), 3, eng, 1.0);
    Tape tape;
    Tape::Var va = tape.leaf(a);
    Tape::Var vb = tape.leaf(b);
    Tape::Var loss = tape.soft_dtw(tape.cosine_cost(va, vb), 1.0);
    tape.backward(loss);
    const Mat ga = tape.grad(va);
    const Mat gb = tape.grad(vb);
    auto eval = [&] {
      return dtw_distance(FeatureSequence(a, FeatureRole::sequential_feature),
                          FeatureSequence(b, FeatureRole::text_feature), 1.0);
    };
    for (std::size_t k = 0; k < a.size(); ++k) {
      const double fd = fd::central(a.flat()[k], kFdStep, eval);
      c.max_rel_error = std::max(c.max_rel_error, fd::rel_error(ga.flat()[k], fd));
      ++c.entries_checked;
    }
    for (std::size_t k = 0; k < b.size(); ++k) {
      const double fd = fd::central(b.flat()[k], kFdStep, eval);
      c.max_rel_error = std::max(c.max_rel_error, fd::rel_error(gb.flat()[k], fd));
      ++c.entries_checked;
    }
  }
  c.passed = c.max_rel_error < c.tolerance;
  return c;
}

struct CompositeInstance {
  Mat real_frames;
  Mat pseudo_frames;
  GlossSequence real_label;
  GlossSequence pseudo_label;
};

double composite_loss(const ModelParams& params, const CompositeInstance& in,
                      Tape* out_tape, BoundParams* out_bound) {
  Tape local;
  Tape& tape = out_tape ? *out_tape : local;
  BoundParams bound = bind(tape, params);
  Tape::Var f_v = sequential_encode_node(tape, bound,
                                         visual_encode_node(tape, bound, in.real_frames));
  Tape::Var ctc_r = tape.ctc(classify_node(tape, bound, f_v), in.real_label);
  Tape::Var f_v_p = sequential_encode_node(
      tape, bound, visual_encode_node(tape, bound, in.pseudo_frames));
  Tape::Var ctc_p = tape.ctc(classify_node(tape, bound, f_v_p), in.pseudo_label);
  Tape::Var f_l = text_encode_node(tape, bound, in.real_label);
  Tape::Var f_l_p = text_encode_node(tape, bound, in.pseudo_label);
  Tape::Var d_rr = tape.soft_dtw(tape.cosine_cost(f_v, f_l), 1.0);
  Tape::Var d_rp = tape.soft_dtw(tape.cosine_cost(f_v, f_l_p), 1.0);
  Tape::Var d_lp = tape.soft_dtw(tape.cosine_cost(f_l, f_v_p), 1.0);
  Tape::Var disc_v = tape.hinge(tape.add_scalar(tape.sub(d_rr, d_rp), kCompositeMargin));
  Tape::Var disc_l = tape.hinge(tape.add_scalar(tape.sub(d_rr, d_lp), kCompositeMargin));
  Tape::Var align = tape.add(ctc_r, ctc_p);
  Tape::Var total = tape.weighted_sum(
      {align, disc_v, disc_l, d_rr},
      {kCompositeLambda, 1.0 - kCompositeLambda, 1.0 - kCompositeLambda,
       1.0 - kCompositeLambda});
  if (out_tape) {
    *out_bound = bound;
    out_tape->backward(total);
  }
  return tape.value(total)(0, 0);
}

GradCheckCase check_composite(std::uint64_t seed, std::size_t instances) {
  GradCheckCase c{"composite_objective", instances, 0, 0.0, kCompositeTol, false};
  rng::Engine eng(rng::derive_seed(seed, "composite"));
  for (std::size_t inst = 0; inst < instances; ++inst) {
    ModelConfig mc;
    mc.input_dim = 5;
    mc.embed_dim = 4;
    mc.rnn_hidden = 3;
    mc.vocab_size = 3;
    mc.init_seed = rng::derive_seed(seed, "params" + std::to_string(inst));
    ModelParams params(mc);

    CompositeInstance in;
    in.real_frames = random_mat(16 + rng::uniform_index(eng, 5), mc.input_dim, eng, 1.0);
    in.pseudo_frames =
        random_mat(16 + rng::uniform_index(eng, 5), mc.input_dim, eng, 1.0);
    in.real_label.items = {rng::uniform_int(eng, 1, 3), rng::uniform_int(eng, 1, 3)};
    in.pseudo_label = in.real_label;
    // One substitution, forced to differ.
    in.pseudo_label.items[0] = 1 + (in.pseudo_label.items[0] % 3);

    Tape tape;
    BoundParams bound;
    composite_loss(params, in, &tape, &bound);
    for (std::size_t ti = 0; ti < params.tensors().size(); ++ti) {
      const Mat& grad = tape.grad(bound.vars[ti]);
      Mat& w = params.tensors()[ti].value;
      for (std::size_t k = 0; k < w.size(); ++k) {
        const double fd = fd::central(w.flat()[k], kFdStep, [&] {
          return composite_loss(params, in, nullptr, nullptr);
        });
        const double got = grad.size() ? grad.flat()[k] : 0.0;
        c.max_rel_error = std::max(c.max_rel_error, fd::rel_error(got, fd));
        ++c.entries_checked;
      }
    }
  }
  c.passed = c.max_rel_error < c.tolerance;
  return c;
}

}  // namespace

std::vector<GradCheckCase> run_gradient_checks(std::uint64_t seed,
                                               std::size_t instances_per_case) {
  std::vector<GradCheckCase> cases;
  cases.push_back(check_ctc(seed, instances_per_case));
  cases.push_back(check_softdtw(seed, instances_per_case, 0.1));
  cases.push_back(check_softdtw(seed, instances_per_case, 1.0));
  cases.push_back(check_cosine_chain(seed, instances_per_case));
  cases.push_back(check_composite(seed, instances_per_case));
  return cases;
}

bool all_passed(const std::vector<GradCheckCase>& cases) {
  for (const GradCheckCase& c : cases) {
    if (!c.passed) {
      return false;
    }
  }
  return true;
}

}  // namespace cmaug
