// Copyright 2026 the cmaug authors
// SPDX-License-Identifier: Apache-2.0

#include "cmaug/core.hpp"

#include <cmath>
#include <stdexcept>

#include "cmaug/kernels.hpp"

namespace cmaug {

GlossVocabulary::GlossVocabulary(std::vector<std::string> glosses)
    : glosses_(std::move(glosses)) {
  if (glosses_.empty()) throw std::invalid_argument("vocabulary must hold at least one gloss");
  for (std::size_t i = 0; i < glosses_.size(); ++i) {
    if (glosses_[i].empty()) throw std::invalid_argument("gloss names must be non-empty");
    auto [it, inserted] = index_.emplace(glosses_[i], static_cast<int>(i) + 1);
    if (!inserted) throw std::invalid_argument("duplicate gloss: " + glosses_[i]);
  }
}

int GlossVocabulary::id(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::invalid_argument("unknown gloss: " + name);
  return it->second;
}

const std::string& GlossVocabulary::name(int id) const {
  if (!valid_gloss_id(id)) throw std::invalid_argument("gloss id out of range");
  return glosses_[static_cast<std::size_t>(id) - 1];
}

void validate_sequence(const GlossSequence& s, const GlossVocabulary& vocab) {
  for (int v : s.items) {
    if (v == kBlankId) throw std::invalid_argument("gloss sequence contains blank");
    if (!vocab.valid_gloss_id(v)) throw std::invalid_argument("gloss id out of range");
  }
}

FeatureSequence::FeatureSequence(Mat frames, FeatureRole role)
    : frames_(std::move(frames)), role_(role) {
  if (frames_.rows() == 0) throw std::invalid_argument("feature sequence must have T >= 1");
  if (!frames_.all_finite()) throw std::invalid_argument("feature sequence has non-finite entries");
}

GlossSequence collapse_path(const CtcPath& path, int num_classes) {
  GlossSequence out;
  int prev = -1;
  for (int label : path.labels) {
    if (label < 0 || label >= num_classes)
      throw std::invalid_argument("path label out of range");
    if (label == prev) continue;  // merge adjacent duplicates (blank included)
    prev = label;
    if (label != kBlankId) out.items.push_back(label);
  }
  return out;
}

LogProbReport validate_logprob_matrix(const LogProbMatrix& m, double tol) {
  LogProbReport report;
  for (std::size_t t = 0; t < m.num_steps(); ++t) {
    bool finite = true;
    for (double v : m.step(t)) {
      if (std::isnan(v) || (std::isinf(v) && v > 0)) {
        finite = false;
        break;
      }
    }
    if (!finite) {
      report.violations.push_back({t, true, 0.0});
      continue;
    }
    const double log_mass = kern::logsumexp(m.step(t));
    const double mass = std::exp(log_mass);
    if (std::abs(mass - 1.0) > tol) report.violations.push_back({t, false, mass});
  }
  return report;
}

void validate_segmentation(const AlignmentSegmentation& seg, const GlossSequence& label,
                           std::size_t num_frames) {
  if (seg.segments.size() != label.length())
    throw std::invalid_argument("segmentation does not match label length");
  std::size_t prev_end = 0;
  for (std::size_t i = 0; i < seg.segments.size(); ++i) {
    const auto& s = seg.segments[i];
    if (s.gloss != label.items[i])
      throw std::invalid_argument("segmentation glosses do not spell the label");
    if (s.begin >= s.end) throw std::invalid_argument("empty or inverted segment");
    if (s.begin < prev_end) throw std::invalid_argument("overlapping or unordered segments");
    if (s.end > num_frames) throw std::invalid_argument("segment exceeds frame count");
    prev_end = s.end;
  }
}

void validate_total_segmentation(const AlignmentSegmentation& seg, const GlossSequence& label,
                                 std::size_t num_frames) {
  validate_segmentation(seg, label, num_frames);
  std::size_t covered = 0;
  for (const auto& s : seg.segments) covered += s.end - s.begin;
  if (covered != num_frames)
    throw std::invalid_argument("segmentation does not tile the frame range");
  if (!seg.segments.empty() &&
      (seg.segments.front().begin != 0 || seg.segments.back().end != num_frames))
    throw std::invalid_argument("segmentation does not tile the frame range");
}

}  // namespace cmaug
