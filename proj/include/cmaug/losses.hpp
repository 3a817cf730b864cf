// Copyright 2026 the cmaug authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CMAUG_LOSSES_HPP
#define CMAUG_LOSSES_HPP

#include <string>

#include "cmaug/core.hpp"

namespace cmaug {

struct LossBreakdown {
  double l_align = 0.0;   // CTC terms
  double l_disc_v = 0.0;  // video-anchored triplet
  double l_disc_l = 0.0;  // text-anchored triplet
  double l_disc = 0.0;    // l_disc_v + l_disc_l
  double l_sem = 0.0;     // real video / real text distance
  double total = 0.0;
  double lambda = 0.0;
  double alpha = 0.0;

  std::string to_json() const;
};

// Sum of the real and pseudo CTC losses; pass nullptr for the pseudo
// stream to train on the real stream alone.
double alignment_loss(const LogProbMatrix& p_real, const GlossSequence& s_real,
                      const LogProbMatrix* p_pseudo, const GlossSequence* s_pseudo);

// max(D(anchor, positive) - D(anchor, negative) + alpha, 0) under the
// soft-DTW cosine distance. alpha >= 0 required.
double triplet_dtw(const FeatureSequence& anchor, const FeatureSequence& positive,
                   const FeatureSequence& negative, double alpha, double gamma);

struct DiscriminativeLoss {
  double total = 0.0;
  double video_anchor = 0.0;
  double text_anchor = 0.0;
};

// Both real-pseudo triplets: the video-anchored one contrasts the real and
// pseudo text features, the text-anchored one the real and pseudo video
// features.
DiscriminativeLoss discriminative_loss(const FeatureSequence& f_v_r,
                                       const FeatureSequence& f_l_r,
                                       const FeatureSequence& f_v_p,
                                       const FeatureSequence& f_l_p, double alpha,
                                       double gamma);

double semantic_loss(const FeatureSequence& f_v_r, const FeatureSequence& f_l_r,
                     double gamma);

// total = lambda * l_align + (1 - lambda) * (l_disc + l_sem).
// Throws std::invalid_argument for lambda outside [0,1] or alpha < 0.
LossBreakdown total_loss(double l_align, double l_disc_v, double l_disc_l, double l_sem,
                         double lambda, double alpha);

}  // namespace cmaug

#endif  // CMAUG_LOSSES_HPP
