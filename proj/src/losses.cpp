// Copyright 2026 the cmaug authors
// SPDX-License-Identifier: Apache-2.0

#include "cmaug/losses.hpp"

#include <algorithm>
#include <stdexcept>

#include "cmaug/ctc.hpp"
#include "cmaug/softdtw.hpp"

#include "json.hpp"

namespace cmaug {
namespace {

void check_margin(double alpha) {
  if (alpha < 0.0) {
    throw std::invalid_argument("triplet margin must be nonnegative");
  }
}

}  // namespace

std::string LossBreakdown::to_json() const {
  nlohmann::ordered_json j;
  j["l_align"] = l_align;
  j["l_disc_v"] = l_disc_v;
  j["l_disc_l"] = l_disc_l;
  j["l_disc"] = l_disc;
  j["l_sem"] = l_sem;
  j["total"] = total;
  j["lambda"] = lambda;
  j["alpha"] = alpha;
  return j.dump();
}

double alignment_loss(const LogProbMatrix& p_real, const GlossSequence& s_real,
                      const LogProbMatrix* p_pseudo, const GlossSequence* s_pseudo) {
  double loss = -ctc_log_prob(p_real, s_real);
  if ((p_pseudo == nullptr) != (s_pseudo == nullptr)) {
    throw std::invalid_argument("alignment_loss: pseudo stream needs both inputs");
  }
  if (p_pseudo != nullptr) {
    loss += -ctc_log_prob(*p_pseudo, *s_pseudo);
  }
  return loss;
}

double triplet_dtw(const FeatureSequence& anchor, const FeatureSequence& positive,
                   const FeatureSequence& negative, double alpha, double gamma) {
  check_margin(alpha);
  const double d_pos = dtw_distance(anchor, positive, gamma);
  const double d_neg = dtw_distance(anchor, negative, gamma);
  return std::max(d_pos - d_neg + alpha, 0.0);
}

DiscriminativeLoss discriminative_loss(const FeatureSequence& f_v_r,
                                       const FeatureSequence& f_l_r,
                                       const FeatureSequence& f_v_p,
                                       const FeatureSequence& f_l_p, double alpha,
                                       double gamma) {
  DiscriminativeLoss out;
  out.video_anchor = triplet_dtw(f_v_r, f_l_r, f_l_p, alpha, gamma);
  out.text_anchor = triplet_dtw(f_l_r, f_v_r, f_v_p, alpha, gamma);
  out.total = out.video_anchor + out.text_anchor;
  return out;
}

double semantic_loss(const FeatureSequence& f_v_r, const FeatureSequence& f_l_r,
                     double gamma) {
  return dtw_distance(f_v_r, f_l_r, gamma);
}

LossBreakdown total_loss(double l_align, double l_disc_v, double l_disc_l, double l_sem,
                         double lambda, double alpha) {
  if (lambda < 0.0 || lambda > 1.0) {
    throw std::invalid_argument("total_loss: lambda must lie in [0,1]");
  }
  check_margin(alpha);
  LossBreakdown b;
  b.l_align = l_align;
  b.l_disc_v = l_disc_v;
  b.l_disc_l = l_disc_l;
  b.l_disc = l_disc_v + l_disc_l;
  b.l_sem = l_sem;
  b.lambda = lambda;
  b.alpha = alpha;
  b.total = lambda * l_align + (1.0 - lambda) * (b.l_disc + l_sem);
  return b;
}

}  // namespace cmaug
