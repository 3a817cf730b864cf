// Copyright 2026 the cmaug authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "cmaug/core.hpp"
#include "cmaug/rng.hpp"
#include "doctest.h"
#include "oracle.hpp"

using namespace cmaug;

namespace {

GlossVocabulary tiny_vocab() { return GlossVocabulary({"A", "B", "C"}); }

LogProbMatrix uniform_log_probs(std::size_t classes, std::size_t steps) {
  LogProbMatrix p(classes, steps);
  const double v = -std::log(static_cast<double>(classes));
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t k = 0; k < classes; ++k) p.at(static_cast<int>(k), t) = v;
  }
  return p;
}

}  // namespace

TEST_CASE("vocab: ids are 1-based and dense") {
  const GlossVocabulary v = tiny_vocab();
  CHECK(v.size() == 3);
  CHECK(v.num_classes() == 4);
  CHECK(v.id("A") == 1);
  CHECK(v.id("C") == 3);
  CHECK(v.name(1) == "A");
  CHECK(v.name(3) == "C");
  CHECK(v.valid_gloss_id(1));
  CHECK(v.valid_gloss_id(3));
  CHECK_FALSE(v.valid_gloss_id(kBlankId));
  CHECK_FALSE(v.valid_gloss_id(4));
  CHECK_FALSE(v.valid_gloss_id(-1));
}

TEST_CASE("vocab: rejects duplicates, empties, and unknown lookups") {
  CHECK_THROWS_AS(GlossVocabulary({"A", "A"}), std::invalid_argument);
  CHECK_THROWS_AS(GlossVocabulary({""}), std::invalid_argument);
  CHECK_THROWS_AS(GlossVocabulary({}), std::invalid_argument);
  const GlossVocabulary v = tiny_vocab();
  CHECK_THROWS_AS(v.id("missing"), std::invalid_argument);
  CHECK_THROWS_AS(v.name(0), std::invalid_argument);
  CHECK_THROWS_AS(v.name(4), std::invalid_argument);
}

TEST_CASE("validate_sequence: blank and out-of-range ids rejected") {
  const GlossVocabulary v = tiny_vocab();
  CHECK_NOTHROW(validate_sequence(GlossSequence{{1, 2, 3, 1}}, v));
  CHECK_NOTHROW(validate_sequence(GlossSequence{{}}, v));
  CHECK_THROWS_AS(validate_sequence(GlossSequence{{0}}, v), std::invalid_argument);
  CHECK_THROWS_AS(validate_sequence(GlossSequence{{4}}, v), std::invalid_argument);
  CHECK_THROWS_AS(validate_sequence(GlossSequence{{1, -2}}, v), std::invalid_argument);
}

TEST_CASE("collapse_path: worked examples") {
  const int nc = 4;  // blank + A,B,C
  // (A, blank, A) keeps both copies: the blank separates the run.
  CHECK(collapse_path(CtcPath{{1, 0, 1}}, nc) == GlossSequence{{1, 1}});
  // (A, A) merges into one.
  CHECK(collapse_path(CtcPath{{1, 1}}, nc) == GlossSequence{{1}});
  CHECK(collapse_path(CtcPath{{0, 0, 0}}, nc) == GlossSequence{{}});
  CHECK(collapse_path(CtcPath{{}}, nc) == GlossSequence{{}});
  CHECK(collapse_path(CtcPath{{0, 1, 1, 0, 2, 2, 2, 0, 0, 1}}, nc) ==
        GlossSequence{{1, 2, 1}});
  // Merging happens before blank removal, never across a blank.
  CHECK(collapse_path(CtcPath{{3, 3, 0, 3, 0, 0, 3, 3}}, nc) ==
        GlossSequence{{3, 3, 3}});
}

TEST_CASE("collapse_path: agrees with the independent rule on random paths") {
  rng::Engine eng(11);
  for (int it = 0; it < 300; ++it) {
    const std::size_t len = rng::uniform_index(eng, 12);
    CtcPath path;
    for (std::size_t i = 0; i < len; ++i) {
      path.labels.push_back(rng::uniform_int(eng, 0, 3));
    }
    CHECK(collapse_path(path, 4).items == oracle::collapse(path.labels));
  }
}

TEST_CASE("collapse_path: rejects out-of-range path symbols") {
  CHECK_THROWS_AS(collapse_path(CtcPath{{4}}, 4), std::invalid_argument);
  CHECK_THROWS_AS(collapse_path(CtcPath{{-1}}, 4), std::invalid_argument);
}

TEST_CASE("segmentation: validators accept ordered spans and reject malformed ones") {
  const GlossSequence label{{1, 2}};
  AlignmentSegmentation seg;
  seg.segments = {{1, 0, 3}, {2, 5, 8}};
  CHECK_NOTHROW(validate_segmentation(seg, label, 8));
  // Gap between spans is fine for the loose validator, not the total one.
  CHECK_THROWS_AS(validate_total_segmentation(seg, label, 8), std::invalid_argument);

  AlignmentSegmentation total;
  total.segments = {{1, 0, 5}, {2, 5, 8}};
  CHECK_NOTHROW(validate_total_segmentation(total, label, 8));

  AlignmentSegmentation overlap;
  overlap.segments = {{1, 0, 4}, {2, 3, 8}};
  CHECK_THROWS_AS(validate_segmentation(overlap, label, 8), std::invalid_argument);

  AlignmentSegmentation empty_span;
  empty_span.segments = {{1, 2, 2}, {2, 2, 8}};
  CHECK_THROWS_AS(validate_segmentation(empty_span, label, 8), std::invalid_argument);

  AlignmentSegmentation out_of_range;
  out_of_range.segments = {{1, 0, 5}, {2, 5, 9}};
  CHECK_THROWS_AS(validate_segmentation(out_of_range, label, 8), std::invalid_argument);

  AlignmentSegmentation wrong_label;
  wrong_label.segments = {{2, 0, 5}, {1, 5, 8}};
  CHECK_THROWS_AS(validate_segmentation(wrong_label, label, 8), std::invalid_argument);

  AlignmentSegmentation wrong_count;
  wrong_count.segments = {{1, 0, 8}};
  CHECK_THROWS_AS(validate_segmentation(wrong_count, label, 8), std::invalid_argument);

  // Total tiling must start at frame 0.
  AlignmentSegmentation late_start;
  late_start.segments = {{1, 1, 5}, {2, 5, 8}};
  CHECK_THROWS_AS(validate_total_segmentation(late_start, label, 8), std::invalid_argument);
}

TEST_CASE("feature sequence: shape accessors") {
  Mat frames(4, 3);
  frames(2, 1) = 7.0;
  const FeatureSequence f(frames, FeatureRole::visual_feature);
  CHECK(f.length() == 4);
  CHECK(f.dim() == 3);
  CHECK(f.role() == FeatureRole::visual_feature);
  CHECK(f.frame(2)[1] == 7.0);
}

TEST_CASE("logprob validation: uniform rows pass, broken rows are reported") {
  const LogProbMatrix ok = uniform_log_probs(4, 5);
  CHECK(validate_logprob_matrix(ok).ok());

  LogProbMatrix bad = uniform_log_probs(4, 5);
  bad.at(2, 3) = -0.01;  // inflates the mass of step 3
  const LogProbReport r = validate_logprob_matrix(bad);
  REQUIRE(r.violations.size() == 1);
  CHECK(r.violations[0].step == 3);
  CHECK_FALSE(r.violations[0].non_finite);
  CHECK(r.violations[0].mass > 1.0);

  LogProbMatrix nan_row = uniform_log_probs(4, 5);
  nan_row.at(0, 1) = std::numeric_limits<double>::quiet_NaN();
  const LogProbReport rn = validate_logprob_matrix(nan_row);
  REQUIRE(rn.violations.size() == 1);
  CHECK(rn.violations[0].step == 1);
  CHECK(rn.violations[0].non_finite);

  // -inf is log 0 and perfectly legal as long as the row still sums to 1.
  LogProbMatrix with_zero(3, 2);
  for (std::size_t t = 0; t < 2; ++t) {
    with_zero.at(0, t) = -std::numeric_limits<double>::infinity();
    with_zero.at(1, t) = std::log(0.5);
    with_zero.at(2, t) = std::log(0.5);
  }
  CHECK(validate_logprob_matrix(with_zero).ok());
}
