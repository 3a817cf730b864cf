// Copyright 2026 the cmaug authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CMAUG_METRICS_HPP
#define CMAUG_METRICS_HPP

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "cmaug/core.hpp"

namespace cmaug {

// Minimum-cost edit alignment under unit costs, with a deterministic
// backtrace (match > substitution > deletion > insertion on ties).
struct EditScript {
  enum class Kind { match, substitution, deletion, insertion };
  struct Op {
    Kind kind;
    // Position in the reference / hypothesis this op touches; npos when the
    // op does not consume from that side (insertion / deletion).
    std::size_t ref_pos;
    std::size_t hyp_pos;
  };
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  std::vector<Op> ops;
  std::size_t n_sub = 0;
  std::size_t n_del = 0;
  std::size_t n_ins = 0;
  std::size_t hits = 0;

  std::size_t cost() const { return n_sub + n_del + n_ins; }
};

EditScript edit_alignment(const GlossSequence& ref, const GlossSequence& hyp);

// (n_ins + n_del + n_sub) / |ref|; may exceed 1. Throws on empty reference.
double wer(const GlossSequence& ref, const GlossSequence& hyp);

// Hits of the minimum-cost alignment over |ref|. Throws on empty reference.
double acc_w(const GlossSequence& ref, const GlossSequence& hyp);

// One evaluation sample: reference plus decode candidates ordered by
// non-increasing decode probability.
struct RankedSample {
  GlossSequence reference;
  std::vector<GlossSequence> candidates;
};

// Corpus Top-K WER for each K in 1..k_max: per sample the cheapest script
// among the first min(K, candidates) hypotheses, aggregated as
// sum(best costs) / sum(reference lengths).
std::vector<double> top_k_wer(const std::vector<RankedSample>& samples, int k_max);

struct MetricsReport {
  double wer = 0.0;
  double acc_w = 0.0;
  std::map<int, double> top_k;  // K -> corpus Top-K WER
  std::size_t n_ins = 0;
  std::size_t n_del = 0;
  std::size_t n_sub = 0;

  std::string to_json() const;
};

// Full corpus report from ranked decode outputs; wer / acc_w / operation
// counts come from the rank-1 hypotheses.
MetricsReport corpus_metrics(const std::vector<RankedSample>& samples, int k_max);

}  // namespace cmaug

#endif  // CMAUG_METRICS_HPP
