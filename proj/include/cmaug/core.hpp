// Copyright 2026 the cmaug authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CMAUG_CORE_HPP
#define CMAUG_CORE_HPP

#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

#include "cmaug/mat.hpp"

namespace cmaug {

// Label index 0 is the CTC blank everywhere; glosses occupy 1..N.
inline constexpr int kBlankId = 0;

// Ordered set of distinct gloss names. Owns the name<->index mapping.
class GlossVocabulary {
 public:
  explicit GlossVocabulary(std::vector<std::string> glosses);

  int size() const { return static_cast<int>(glosses_.size()); }  // N
  int num_classes() const { return size() + 1; }                  // N + blank
  bool valid_gloss_id(int id) const { return id >= 1 && id <= size(); }
  int id(const std::string& name) const;  // throws on unknown name
  const std::string& name(int id) const;  // id in 1..N
  const std::vector<std::string>& glosses() const { return glosses_; }

 private:
  std::vector<std::string> glosses_;
  std::unordered_map<std::string, int> index_;
};

// A label sequence over vocabulary ids; never contains blank.
struct GlossSequence {
  std::vector<int> items;

  std::size_t length() const { return items.size(); }
  bool empty() const { return items.empty(); }
  bool operator==(const GlossSequence&) const = default;
};

// Throws std::invalid_argument if any index is blank or out of range.
void validate_sequence(const GlossSequence& s, const GlossVocabulary& vocab);

enum class FeatureRole { raw_video, visual_feature, sequential_feature, text_feature };

// Time-indexed sequence of fixed-dimension real vectors, frames as rows.
class FeatureSequence {
 public:
  FeatureSequence() = default;
  FeatureSequence(Mat frames, FeatureRole role);

  std::size_t length() const { return frames_.rows(); }
  std::size_t dim() const { return frames_.cols(); }
  FeatureRole role() const { return role_; }
  std::span<const double> frame(std::size_t t) const { return frames_.row(t); }
  const Mat& frames() const { return frames_; }
  Mat& frames() { return frames_; }

 private:
  Mat frames_;
  FeatureRole role_ = FeatureRole::raw_video;
};

// Per-timestep log posteriors over vocabulary + blank. Semantically an
// (N+1) x T matrix; stored with timesteps as rows so each distribution is
// one contiguous row.
class LogProbMatrix {
 public:
  LogProbMatrix() = default;
  LogProbMatrix(std::size_t num_classes, std::size_t num_steps)
      : m_(num_steps, num_classes) {}
  explicit LogProbMatrix(Mat steps_by_classes) : m_(std::move(steps_by_classes)) {}

  std::size_t num_classes() const { return m_.cols(); }
  std::size_t num_steps() const { return m_.rows(); }
  double& at(int label, std::size_t t) { return m_(t, label); }
  double at(int label, std::size_t t) const { return m_(t, label); }
  std::span<const double> step(std::size_t t) const { return m_.row(t); }
  std::span<double> step(std::size_t t) { return m_.row(t); }
  const Mat& storage() const { return m_; }

 private:
  Mat m_;
};

// Frame-level labelling over vocabulary + blank, same length as the
// LogProbMatrix it is scored against.
struct CtcPath {
  std::vector<int> labels;
};

// Contiguous frame spans, one per gloss occurrence, in label order.
struct AlignmentSegmentation {
  struct Segment {
    int gloss = 0;
    std::size_t begin = 0;  // inclusive
    std::size_t end = 0;    // exclusive
  };
  std::vector<Segment> segments;
};

// Segments must be ordered, non-overlapping, inside [0, num_frames), and
// their glosses must spell out `label`. Throws std::invalid_argument.
void validate_segmentation(const AlignmentSegmentation& seg, const GlossSequence& label,
                           std::size_t num_frames);
// Stricter variant: spans must also tile [0, num_frames) without gaps.
void validate_total_segmentation(const AlignmentSegmentation& seg, const GlossSequence& label,
                                 std::size_t num_frames);

// The CTC collapse mapping B: merge adjacent duplicates, then drop blanks.
GlossSequence collapse_path(const CtcPath& path, int num_classes);

struct LogProbViolation {
  std::size_t step = 0;
  bool non_finite = false;
  double mass = 0.0;  // probability mass of the step, when finite
};

struct LogProbReport {
  std::vector<LogProbViolation> violations;
  bool ok() const { return violations.empty(); }
};

// Reports steps whose probability mass differs from 1 by more than `tol`
// or that contain non-finite entries (NaN / +inf; -inf is a valid log 0).
LogProbReport validate_logprob_matrix(const LogProbMatrix& m, double tol = 1e-6);

}  // namespace cmaug

#endif  // CMAUG_CORE_HPP
