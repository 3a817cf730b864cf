// Copyright 2026 the cmaug authors
// SPDX-License-Identifier: Apache-2.0

#include "cmaug/augment.hpp"

#include <algorithm>
#include <stdexcept>
#include <utility>

namespace cmaug {
namespace {

constexpr int kMaxIdentityRetries = 10;

EditOp::Kind draw_kind(rng::Engine& eng, std::size_t current_len) {
  static constexpr EditOp::Kind kKinds[] = {EditOp::Kind::substitute,
                                            EditOp::Kind::erase, EditOp::Kind::insert};
  EditOp::Kind kind = kKinds[rng::uniform_index(eng, 3)];
  while (kind == EditOp::Kind::erase && current_len == 1) {
    kind = kKinds[rng::uniform_index(eng, 3)];
  }
  return kind;
}

int draw_gloss(rng::Engine& eng, const std::vector<int>& covered, int exclude) {
  std::vector<int> pool;
  pool.reserve(covered.size());
  for (int g : covered) {
    if (g != exclude) {
      pool.push_back(g);
    }
  }
  if (pool.empty()) {
    throw std::invalid_argument("edit plan: no eligible gloss to draw");
  }
  return pool[rng::uniform_index(eng, pool.size())];
}

Mat rows_of(const Mat& frames, std::size_t begin, std::size_t end) {
  Mat out(end - begin, frames.cols());
  for (std::size_t r = begin; r < end; ++r) {
    auto src = frames.row(r);
    std::copy(src.begin(), src.end(), out.row(r - begin).begin());
  }
  return out;
}

const SegmentBank::Segment& pick_segment(const SegmentBank& bank, int gloss,
                                         const std::string& exclude_source,
                                         rng::Engine& eng) {
  const std::vector<SegmentBank::Segment>& all = bank.segments_for(gloss);
  std::vector<const SegmentBank::Segment*> eligible;
  eligible.reserve(all.size());
  for (const SegmentBank::Segment& s : all) {
    if (s.source_id != exclude_source) {
      eligible.push_back(&s);
    }
  }
  if (eligible.empty()) {
    for (const SegmentBank::Segment& s : all) {
      eligible.push_back(&s);
    }
  }
  return *eligible[rng::uniform_index(eng, eligible.size())];
}

}  // namespace

GlossSequence apply_plan_to_label(const GlossSequence& label, const EditPlan& plan) {
  GlossSequence out = label;
  for (const EditOp& op : plan.ops) {
    switch (op.kind) {
      case EditOp::Kind::substitute:
        if (op.pos >= out.items.size()) {
          throw std::invalid_argument("edit plan: substitute position out of range");
        }
        out.items[op.pos] = op.gloss;
        break;
      case EditOp::Kind::erase:
        if (op.pos >= out.items.size()) {
          throw std::invalid_argument("edit plan: delete position out of range");
        }
        if (out.items.size() == 1) {
          throw std::invalid_argument("edit plan: cannot delete the only gloss");
        }
        out.items.erase(out.items.begin() + static_cast<std::ptrdiff_t>(op.pos));
        break;
      case EditOp::Kind::insert:
        if (op.pos > out.items.size()) {
          throw std::invalid_argument("edit plan: insert position out of range");
        }
        out.items.insert(out.items.begin() + static_cast<std::ptrdiff_t>(op.pos),
                         op.gloss);
        break;
    }
  }
  return out;
}

void SegmentBank::add(int gloss, std::string source_id, Mat frames) {
  if (gloss < 1) {
    throw std::invalid_argument("segment bank: gloss must be a valid label id");
  }
  if (frames.rows() == 0) {
    throw std::invalid_argument("segment bank: empty segment");
  }
  by_gloss_[gloss].push_back(Segment{std::move(source_id), std::move(frames)});
}

bool SegmentBank::covers(int gloss) const { return by_gloss_.count(gloss) > 0; }

const std::vector<SegmentBank::Segment>& SegmentBank::segments_for(int gloss) const {
  auto it = by_gloss_.find(gloss);
  if (it == by_gloss_.end()) {
    throw std::invalid_argument("segment bank: no segment for gloss " +
                                std::to_string(gloss));
  }
  return it->second;
}

std::vector<int> SegmentBank::covered_glosses() const {
  std::vector<int> out;
  out.reserve(by_gloss_.size());
  for (const auto& [gloss, segments] : by_gloss_) {
    out.push_back(gloss);
  }
  return out;
}

std::size_t SegmentBank::segment_count() const {
  std::size_t n = 0;
  for (const auto& [gloss, segments] : by_gloss_) {
    n += segments.size();
  }
  return n;
}

SegmentBank build_segment_bank(const std::vector<VideoTextPair>& pairs) {
  SegmentBank bank;
  for (const VideoTextPair& pair : pairs) {
    if (pair.is_pseudo) {
      throw std::invalid_argument("segment bank: only real pairs contribute segments");
    }
    validate_total_segmentation(pair.segmentation, pair.label, pair.features.length());
    for (const AlignmentSegmentation::Segment& seg : pair.segmentation.segments) {
      bank.add(seg.gloss, pair.id, rows_of(pair.features.frames(), seg.begin, seg.end));
    }
  }
  return bank;
}

EditPlan sample_edit_plan(const GlossSequence& label, int k_max,
                          const std::vector<int>& covered, rng::Engine& eng) {
  if (label.empty()) {
    throw std::invalid_argument("edit plan: label must be non-empty");
  }
  if (k_max < 1) {
    throw std::invalid_argument("edit plan: K must be at least 1");
  }
  if (covered.size() < 2) {
    throw std::invalid_argument("edit plan: bank must cover at least two glosses");
  }
  const int k = rng::uniform_int(eng, 1, k_max);
  EditPlan plan;
  GlossSequence current = label;
  for (int i = 0; i < k; ++i) {
    EditOp op;
    op.kind = draw_kind(eng, current.items.size());
    switch (op.kind) {
      case EditOp::Kind::substitute:
        op.pos = rng::uniform_index(eng, current.items.size());
        op.gloss = draw_gloss(eng, covered, current.items[op.pos]);
        break;
      case EditOp::Kind::erase:
        op.pos = rng::uniform_index(eng, current.items.size());
        break;
      case EditOp::Kind::insert:
        op.pos = rng::uniform_index(eng, current.items.size() + 1);
        op.gloss = draw_gloss(eng, covered, kBlankId);
        break;
    }
    EditPlan single;
    single.ops.push_back(op);
    current = apply_plan_to_label(current, single);
    plan.ops.push_back(op);
  }
  return plan;
}

VideoTextPair apply_plan(const VideoTextPair& pair, const EditPlan& plan,
                         const SegmentBank& bank, rng::Engine& eng) {
  if (pair.is_pseudo) {
    throw std::invalid_argument("apply_plan: source pair must be real");
  }
  validate_total_segmentation(pair.segmentation, pair.label, pair.features.length());

  // Work on (gloss, frame-chunk) units so edits stay in lockstep.
  std::vector<int> labels = pair.label.items;
  std::vector<Mat> chunks;
  chunks.reserve(labels.size());
  for (const AlignmentSegmentation::Segment& seg : pair.segmentation.segments) {
    chunks.push_back(rows_of(pair.features.frames(), seg.begin, seg.end));
  }

  for (const EditOp& op : plan.ops) {
    switch (op.kind) {
      case EditOp::Kind::substitute: {
        if (op.pos >= labels.size()) {
          throw std::invalid_argument("apply_plan: substitute position out of range");
        }
        const SegmentBank::Segment& s = pick_segment(bank, op.gloss, pair.id, eng);
        labels[op.pos] = op.gloss;
        chunks[op.pos] = s.frames;
        break;
      }
      case EditOp::Kind::erase:
        if (op.pos >= labels.size()) {
          throw std::invalid_argument("apply_plan: delete position out of range");
        }
        if (labels.size() == 1) {
          throw std::invalid_argument("apply_plan: cannot delete the only gloss");
        }
        labels.erase(labels.begin() + static_cast<std::ptrdiff_t>(op.pos));
        chunks.erase(chunks.begin() + static_cast<std::ptrdiff_t>(op.pos));
        break;
      case EditOp::Kind::insert: {
        if (op.pos > labels.size()) {
          throw std::invalid_argument("apply_plan: insert position out of range");
        }
        const SegmentBank::Segment& s = pick_segment(bank, op.gloss, pair.id, eng);
        labels.insert(labels.begin() + static_cast<std::ptrdiff_t>(op.pos), op.gloss);
        chunks.insert(chunks.begin() + static_cast<std::ptrdiff_t>(op.pos), s.frames);
        break;
      }
    }
  }

  std::size_t total_rows = 0;
  for (const Mat& c : chunks) {
    total_rows += c.rows();
  }
  Mat frames(total_rows, pair.features.dim());
  AlignmentSegmentation seg;
  std::size_t at = 0;
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    for (std::size_t r = 0; r < chunks[i].rows(); ++r) {
      auto src = chunks[i].row(r);
      std::copy(src.begin(), src.end(), frames.row(at + r).begin());
    }
    seg.segments.push_back({labels[i], at, at + chunks[i].rows()});
    at += chunks[i].rows();
  }

  VideoTextPair out;
  out.id = pair.id + ":pseudo";
  out.features = FeatureSequence(std::move(frames), pair.features.role());
  out.label = GlossSequence{std::move(labels)};
  out.segmentation = std::move(seg);
  out.is_pseudo = true;
  out.source_id = pair.id;
  out.plan = plan;
  return out;
}

VideoTextPair generate_pseudo_pair(const VideoTextPair& pair, int k_max,
                                   const SegmentBank& bank, rng::Engine& eng) {
  const std::vector<int> covered = bank.covered_glosses();
  for (int attempt = 0; attempt <= kMaxIdentityRetries; ++attempt) {
    EditPlan plan = sample_edit_plan(pair.label, k_max, covered, eng);
    if (apply_plan_to_label(pair.label, plan) == pair.label) {
      continue;
    }
    return apply_plan(pair, plan, bank, eng);
  }
  throw std::runtime_error("augment: could not produce a label distinct from the source");
}

}  // namespace cmaug
