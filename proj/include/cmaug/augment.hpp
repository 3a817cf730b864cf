// Copyright 2026 the cmaug authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CMAUG_AUGMENT_HPP
#define CMAUG_AUGMENT_HPP

#include <map>
#include <string>
#include <vector>

#include "cmaug/core.hpp"
#include "cmaug/rng.hpp"

namespace cmaug {

struct EditOp {
  enum class Kind { substitute, erase, insert };

  Kind kind = Kind::substitute;
  std::size_t pos = 0;
  int gloss = 0;  // substitute / insert only
};

struct EditPlan {
  std::vector<EditOp> ops;

  std::size_t size() const { return ops.size(); }
};

// Applies the plan to a label sequence alone. Throws std::invalid_argument
// when an op's position is invalid at its application time.
GlossSequence apply_plan_to_label(const GlossSequence& label, const EditPlan& plan);

// Per-gloss pool of feature segments harvested from aligned real pairs.
class SegmentBank {
 public:
  struct Segment {
    std::string source_id;
    Mat frames;
  };

  void add(int gloss, std::string source_id, Mat frames);
  bool covers(int gloss) const;
  const std::vector<Segment>& segments_for(int gloss) const;  // throws if uncovered
  std::vector<int> covered_glosses() const;                   // ascending
  std::size_t segment_count() const;
  bool empty() const { return by_gloss_.empty(); }

 private:
  std::map<int, std::vector<Segment>> by_gloss_;
};

struct VideoTextPair {
  std::string id;
  FeatureSequence features;
  GlossSequence label;
  AlignmentSegmentation segmentation;
  bool is_pseudo = false;
  std::string source_id;  // pseudo only
  EditPlan plan;          // pseudo only
};

// Harvests every (gloss, span) of every pair into the bank. Pairs must be
// real and carry total segmentations.
SegmentBank build_segment_bank(const std::vector<VideoTextPair>& pairs);

// Draws k uniform on {1..k_max}, then k sequential edits: op kind uniform
// over the three (deletion re-drawn while the current length is 1),
// positions uniform, glosses uniform over `covered` (substitution excludes
// the gloss it replaces). `covered` must hold at least two glosses.
EditPlan sample_edit_plan(const GlossSequence& label, int k_max,
                          const std::vector<int>& covered, rng::Engine& eng);

// Edits label, features, and segmentation in lockstep. Spliced segments
// come from the bank, uniformly among segments of other pairs (falling
// back to this pair's own segments when no other source exists).
VideoTextPair apply_plan(const VideoTextPair& pair, const EditPlan& plan,
                         const SegmentBank& bank, rng::Engine& eng);

// sample_edit_plan + apply_plan, re-drawing the whole plan while the edited
// label equals the original (at most 10 retries, then std::runtime_error).
VideoTextPair generate_pseudo_pair(const VideoTextPair& pair, int k_max,
                                   const SegmentBank& bank, rng::Engine& eng);

}  // namespace cmaug

#endif  // CMAUG_AUGMENT_HPP
