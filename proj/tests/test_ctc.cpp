// Copyright 2026 the cmaug authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "cmaug/ctc.hpp"
#include "cmaug/fd.hpp"
#include "cmaug/kernels.hpp"
#include "cmaug/rng.hpp"
#include "doctest.h"
#include "oracle.hpp"

using namespace cmaug;

namespace {

LogProbMatrix random_log_probs(std::size_t classes, std::size_t steps, rng::Engine& eng) {
  LogProbMatrix p(classes, steps);
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t k = 0; k < classes; ++k) {
      p.at(static_cast<int>(k), t) = rng::normal(eng);
    }
    const double lse = kern::logsumexp(p.step(t));
    for (double& v : p.step(t)) v -= lse;
  }
  return p;
}

GlossSequence random_label(rng::Engine& eng, std::size_t max_len, int alphabet) {
  GlossSequence s;
  const std::size_t len = rng::uniform_index(eng, max_len + 1);
  for (std::size_t i = 0; i < len; ++i) {
    s.items.push_back(rng::uniform_int(eng, 1, alphabet));
  }
  return s;
}

// Log-prob matrix that deterministically emits the given path.
LogProbMatrix one_hot_path(const std::vector<int>& path, std::size_t classes) {
  const double ninf = -std::numeric_limits<double>::infinity();
  LogProbMatrix p(classes, path.size());
  for (std::size_t t = 0; t < path.size(); ++t) {
    for (std::size_t k = 0; k < classes; ++k) {
      p.at(static_cast<int>(k), t) = ninf;
    }
    p.at(path[t], t) = 0.0;
  }
  return p;
}

}  // namespace

TEST_CASE("min_path_steps: labels need one step each plus repeat separators") {
  CHECK(min_path_steps(GlossSequence{{}}) == 0);
  CHECK(min_path_steps(GlossSequence{{1}}) == 1);
  CHECK(min_path_steps(GlossSequence{{1, 2}}) == 2);
  CHECK(min_path_steps(GlossSequence{{1, 1}}) == 3);
  CHECK(min_path_steps(GlossSequence{{1, 1, 1}}) == 5);
  CHECK(min_path_steps(GlossSequence{{1, 2, 2, 1}}) == 5);
}

TEST_CASE("ctc_log_prob: equals log of exhaustive path sum on random instances") {
  rng::Engine eng(31);
  int checked = 0;
  while (checked < 200) {
    const std::size_t steps = 1 + rng::uniform_index(eng, 6);
    const int glosses = 1 + static_cast<int>(rng::uniform_index(eng, 3));
    const LogProbMatrix p = random_log_probs(static_cast<std::size_t>(glosses) + 1, steps, eng);
    const GlossSequence s = random_label(eng, std::min<std::size_t>(steps, 4), glosses);
    const double got = ctc_log_prob(p, s);
    const double want = oracle::ctc_path_sum(p, s.items);
    if (want == 0.0) {
      CHECK(got == -std::numeric_limits<double>::infinity());
    } else {
      CHECK(std::abs(got - std::log(want)) < 1e-9);
    }
    ++checked;
  }
}

TEST_CASE("ctc_log_prob: total probability over all labels is 1") {
  rng::Engine eng(32);
  for (int it = 0; it < 5; ++it) {
    const std::size_t steps = 1 + rng::uniform_index(eng, 5);
    const int glosses = 1 + static_cast<int>(rng::uniform_index(eng, 3));
    const LogProbMatrix p = random_log_probs(static_cast<std::size_t>(glosses) + 1, steps, eng);
    double total = 0.0;
    for (const auto& seq : oracle::all_sequences(glosses, steps)) {
      const double lp = ctc_log_prob(p, GlossSequence{seq});
      if (lp != -std::numeric_limits<double>::infinity()) total += std::exp(lp);
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-8));
  }
}

TEST_CASE("ctc_log_prob: deterministic one-path matrix scores that path at 0") {
  // Path (A, A, blank, B) collapses to (A, B) with probability 1.
  const LogProbMatrix p = one_hot_path({1, 1, 0, 2}, 3);
  CHECK(ctc_log_prob(p, GlossSequence{{1, 2}}) == doctest::Approx(0.0));
  CHECK(ctc_log_prob(p, GlossSequence{{2}}) ==
        -std::numeric_limits<double>::infinity());
}

TEST_CASE("ctc_log_prob: infeasible and invalid labels") {
  rng::Engine eng(33);
  const LogProbMatrix p = random_log_probs(3, 2, eng);
  // (A, A) needs three steps; only two available.
  CHECK(ctc_log_prob(p, GlossSequence{{1, 1}}) ==
        -std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(ctc_log_prob(p, GlossSequence{{0}}), std::invalid_argument);
  CHECK_THROWS_AS(ctc_log_prob(p, GlossSequence{{5}}), std::invalid_argument);
}

TEST_CASE("ctc_loss_and_grad: matches central finite differences") {
  rng::Engine eng(34);
  for (int it = 0; it < 25; ++it) {
    const std::size_t steps = 3 + rng::uniform_index(eng, 4);
    const int glosses = 1 + static_cast<int>(rng::uniform_index(eng, 3));
    LogProbMatrix p = random_log_probs(static_cast<std::size_t>(glosses) + 1, steps, eng);
    GlossSequence s;
    do {
      s = random_label(eng, 3, glosses);
    } while (s.empty() || min_path_steps(s) > steps);
    const CtcLossResult res = ctc_loss_and_grad(p, s);
    CHECK(res.loss == doctest::Approx(-ctc_log_prob(p, s)));
    REQUIRE(res.grad.rows() == steps);
    REQUIRE(res.grad.cols() == static_cast<std::size_t>(glosses) + 1);
    // The gradient treats every entry as a free variable, so the finite
    // difference probes entries without renormalizing rows.
    Mat probe = p.storage();
    LogProbMatrix view(probe);
    for (std::size_t k = 0; k < probe.size(); ++k) {
      const double fd = fd::central(probe.flat()[k], 1e-5, [&] {
        return -ctc_log_prob(LogProbMatrix(probe), s);
      });
      CHECK(fd::rel_error(res.grad.flat()[k], fd) < 1e-4);
    }
  }
}

TEST_CASE("ctc_loss_and_grad: probability-1 entries give zero loss and gradient") {
  const LogProbMatrix p = one_hot_path({1, 0, 2, 2}, 3);
  const GlossSequence s{{1, 2}};
  const CtcLossResult res = ctc_loss_and_grad(p, s);
  CHECK(res.loss == doctest::Approx(0.0));
  // Entries on the forced path have probability 1 and gradient -1 exactly
  // cancelled by... no: with log p = 0 the loss is flat in the on-path
  // entries only when their posterior equals their probability. Check the
  // on-path entries carry gradient -1 ( d(-log p)/d y = -posterior ) and
  // off-path -inf entries carry gradient 0.
  for (std::size_t t = 0; t < 4; ++t) {
    for (int k = 0; k < 3; ++k) {
      const double g = res.grad(t, static_cast<std::size_t>(k));
      if (p.at(k, t) == 0.0) {
        CHECK(g == doctest::Approx(-1.0));
      } else {
        CHECK(g == 0.0);
      }
    }
  }
}

TEST_CASE("ctc_loss_and_grad: infeasible label throws domain_error") {
  rng::Engine eng(35);
  const LogProbMatrix p = random_log_probs(3, 2, eng);
  CHECK_THROWS_AS(ctc_loss_and_grad(p, GlossSequence{{1, 1}}), std::domain_error);
  CHECK_THROWS_AS(ctc_loss_and_grad(p, GlossSequence{{1, 2, 1}}), std::domain_error);
}

TEST_CASE("beam_decode: exact argmax when the beam covers every sequence") {
  rng::Engine eng(36);
  for (int it = 0; it < 50; ++it) {
    const std::size_t steps = 1 + rng::uniform_index(eng, 4);
    const int glosses = 1 + static_cast<int>(rng::uniform_index(eng, 2));
    const LogProbMatrix p = random_log_probs(static_cast<std::size_t>(glosses) + 1, steps, eng);
    const auto sequences = oracle::all_sequences(glosses, steps);
    // Exhaustive argmax of the true marginal, with the decoder's tie-break.
    GlossSequence best;
    double best_lp = -std::numeric_limits<double>::infinity();
    for (const auto& seq : sequences) {
      const double lp = ctc_log_prob(p, GlossSequence{seq});
      const bool better =
          lp > best_lp ||
          (lp == best_lp && (seq.size() < best.items.size() ||
                             (seq.size() == best.items.size() && seq < best.items)));
      if (better) {
        best_lp = lp;
        best = GlossSequence{seq};
      }
    }
    const auto candidates = beam_decode(p, static_cast<int>(sequences.size()));
    REQUIRE_FALSE(candidates.empty());
    CHECK(candidates[0].sequence == best);
    CHECK(candidates[0].log_prob == doctest::Approx(best_lp).epsilon(1e-9));
  }
}

TEST_CASE("beam_decode: candidates are distinct, ordered, and at most width") {
  rng::Engine eng(37);
  const LogProbMatrix p = random_log_probs(4, 6, eng);
  for (const int width : {1, 3, 8}) {
    const auto cands = beam_decode(p, width);
    CHECK(cands.size() <= static_cast<std::size_t>(width));
    REQUIRE_FALSE(cands.empty());
    for (std::size_t i = 1; i < cands.size(); ++i) {
      CHECK(cands[i].log_prob <= cands[i - 1].log_prob);
      CHECK(cands[i].sequence.items != cands[i - 1].sequence.items);
    }
    // Wider beams never make the top candidate worse.
    if (width > 1) {
      const auto narrow = beam_decode(p, 1);
      CHECK(cands[0].log_prob >= narrow[0].log_prob - 1e-12);
    }
  }
  CHECK_THROWS_AS(beam_decode(p, 0), std::invalid_argument);
}

TEST_CASE("beam_decode: deterministic output") {
  rng::Engine eng(38);
  const LogProbMatrix p = random_log_probs(5, 7, eng);
  const auto a = beam_decode(p, 4);
  const auto b = beam_decode(p, 4);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].sequence == b[i].sequence);
    CHECK(a[i].log_prob == b[i].log_prob);
  }
}

TEST_CASE("forced_align: recovers the generating segmentation on one-hot input") {
  // Path (A, A, blank, B): the blank joins the following gloss B.
  const LogProbMatrix p = one_hot_path({1, 1, 0, 2}, 3);
  const ForcedAlignment fa = forced_align(p, GlossSequence{{1, 2}});
  REQUIRE(fa.segmentation.segments.size() == 2);
  CHECK(fa.segmentation.segments[0].gloss == 1);
  CHECK(fa.segmentation.segments[0].begin == 0);
  CHECK(fa.segmentation.segments[0].end == 2);
  CHECK(fa.segmentation.segments[1].gloss == 2);
  CHECK(fa.segmentation.segments[1].begin == 2);
  CHECK(fa.segmentation.segments[1].end == 4);
  CHECK(fa.log_path_prob == doctest::Approx(0.0));
}

TEST_CASE("forced_align: trailing blanks attach to the last gloss") {
  const LogProbMatrix p = one_hot_path({0, 1, 0, 0}, 3);
  const ForcedAlignment fa = forced_align(p, GlossSequence{{1}});
  REQUIRE(fa.segmentation.segments.size() == 1);
  CHECK(fa.segmentation.segments[0].begin == 0);
  CHECK(fa.segmentation.segments[0].end == 4);
}

TEST_CASE("forced_align: always yields a valid total segmentation") {
  rng::Engine eng(39);
  for (int it = 0; it < 100; ++it) {
    const std::size_t steps = 4 + rng::uniform_index(eng, 6);
    const int glosses = 1 + static_cast<int>(rng::uniform_index(eng, 3));
    const LogProbMatrix p = random_log_probs(static_cast<std::size_t>(glosses) + 1, steps, eng);
    GlossSequence s;
    do {
      s = random_label(eng, 4, glosses);
    } while (s.empty() || min_path_steps(s) > steps);
    const ForcedAlignment fa = forced_align(p, s);
    CHECK_NOTHROW(validate_total_segmentation(fa.segmentation, s, steps));
    // A single path can never beat the marginal over all paths.
    CHECK(fa.log_path_prob <= ctc_log_prob(p, s) + 1e-12);
  }
}

TEST_CASE("forced_align: best path probability matches exhaustive search") {
  rng::Engine eng(40);
  for (int it = 0; it < 30; ++it) {
    const std::size_t steps = 2 + rng::uniform_index(eng, 4);
    const int glosses = 1 + static_cast<int>(rng::uniform_index(eng, 2));
    const std::size_t classes = static_cast<std::size_t>(glosses) + 1;
    const LogProbMatrix p = random_log_probs(classes, steps, eng);
    GlossSequence s;
    do {
      s = random_label(eng, 3, glosses);
    } while (s.empty() || min_path_steps(s) > steps);
    // Exhaustive best single path that collapses to s.
    std::vector<int> path(steps, 0);
    double best = -std::numeric_limits<double>::infinity();
    while (true) {
      if (oracle::collapse(path) == s.items) {
        double lp = 0.0;
        for (std::size_t t = 0; t < steps; ++t) lp += p.at(path[t], t);
        best = std::max(best, lp);
      }
      std::size_t t = 0;
      while (t < steps && path[t] == static_cast<int>(classes) - 1) {
        path[t] = 0;
        ++t;
      }
      if (t == steps) break;
      ++path[t];
    }
    const ForcedAlignment fa = forced_align(p, s);
    CHECK(fa.log_path_prob == doctest::Approx(best).epsilon(1e-9));
  }
}

TEST_CASE("forced_align: error cases") {
  rng::Engine eng(41);
  const LogProbMatrix p = random_log_probs(3, 2, eng);
  CHECK_THROWS_AS(forced_align(p, GlossSequence{{}}), std::invalid_argument);
  CHECK_THROWS_AS(forced_align(p, GlossSequence{{1, 1}}), std::domain_error);
}
