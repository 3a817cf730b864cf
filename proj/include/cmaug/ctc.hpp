// Copyright 2026 the cmaug authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CMAUG_CTC_HPP
#define CMAUG_CTC_HPP

#include <cstddef>
#include <utility>
#include <vector>

#include "cmaug/core.hpp"

namespace cmaug {

// Fewest timesteps any path collapsing to `s` can occupy: one step per
// label plus one separating blank per adjacent repeat.
std::size_t min_path_steps(const GlossSequence& s);

// log p(s | P) = log of the path sum over the blank-interleaved label
// lattice; -inf when no path of the matrix's length collapses to s.
// Throws std::invalid_argument if s contains blank.
double ctc_log_prob(const LogProbMatrix& p, const GlossSequence& s);

struct CtcLossResult {
  double loss = 0.0;  // -log p(s | P)
  // d loss / d log-prob entry, same [T x (N+1)] layout as LogProbMatrix
  // storage. The log-softmax Jacobian is composed by the caller.
  Mat grad;
};

// Forward-backward loss and gradient. Throws std::domain_error when the
// label is infeasible for the matrix length (loss would be infinite).
CtcLossResult ctc_loss_and_grad(const LogProbMatrix& p, const GlossSequence& s);

struct DecodeCandidate {
  GlossSequence sequence;
  double log_prob = 0.0;  // aggregated prefix mass from the beam
};

// Prefix beam search over collapsed prefixes. Returns up to beam_width
// distinct candidates ordered by non-increasing log_prob (ties broken by
// shorter, then lexicographically smaller sequence).
std::vector<DecodeCandidate> beam_decode(const LogProbMatrix& p, int beam_width);

struct ForcedAlignment {
  AlignmentSegmentation segmentation;
  double log_path_prob = 0.0;  // probability of the single best path
};

// Viterbi best path constrained to collapse to `s`, turned into a total
// segmentation: blank frames join the following gloss, trailing blanks the
// last gloss. Throws std::invalid_argument on an empty label and
// std::domain_error when the label is infeasible.
ForcedAlignment forced_align(const LogProbMatrix& p, const GlossSequence& s);

}  // namespace cmaug

#endif  // CMAUG_CTC_HPP
