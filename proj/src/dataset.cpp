// Copyright 2026 the cmaug authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>

#include "cmaug/harness.hpp"
#include "cmaug/kernels.hpp"
#include "cmaug/rng.hpp"

namespace cmaug {
namespace {

std::string padded(std::size_t value, std::size_t width) {
  std::string s = std::to_string(value);
  if (s.size() < width) {
    s.insert(0, width - s.size(), '0');
  }
  return s;
}

void reject_unknown_keys(const nlohmann::json& j, const std::set<std::string>& known,
                         const char* what) {
  if (!j.is_object()) {
    throw std::invalid_argument(std::string(what) + ": expected a JSON object");
  }
  for (const auto& item : j.items()) {
    if (known.find(item.key()) == known.end()) {
      throw std::invalid_argument(std::string(what) + ": unknown key '" + item.key() +
                                  "'");
    }
  }
}

Mat make_prototypes(const SyntheticConfig& cfg, rng::Engine& eng) {
  const auto g = static_cast<std::size_t>(cfg.vocab_size);
  Mat protos(g, cfg.feature_dim);
  if (cfg.orthogonal_prototypes) {
    for (std::size_t i = 0; i < g; ++i) {
      protos(i, i) = 1.0;
    }
    return protos;
  }
  for (std::size_t i = 0; i < g; ++i) {
    double norm = 0.0;
    while (norm == 0.0) {
      for (double& v : protos.row(i)) {
        v = rng::normal(eng);
      }
      norm = std::sqrt(kern::dot(protos.row(i), protos.row(i)));
    }
    kern::scale(protos.row(i), 1.0 / norm, protos.row(i));
  }
  return protos;
}

VideoTextPair make_pair(const std::string& id, const GlossSequence& label,
                        const Mat& prototypes, const SyntheticConfig& cfg,
                        rng::Engine& eng) {
  std::vector<std::size_t> durations(label.length());
  std::size_t total = 0;
  for (std::size_t& d : durations) {
    d = static_cast<std::size_t>(
        rng::uniform_int(eng, static_cast<int>(cfg.min_gloss_frames),
                         static_cast<int>(cfg.max_gloss_frames)));
    total += d;
  }
  Mat frames(total, cfg.feature_dim);
  AlignmentSegmentation seg;
  std::size_t at = 0;
  for (std::size_t i = 0; i < label.length(); ++i) {
    const auto proto = prototypes.row(static_cast<std::size_t>(label.items[i] - 1));
    for (std::size_t r = 0; r < durations[i]; ++r) {
      auto dst = frames.row(at + r);
      for (std::size_t c = 0; c < dst.size(); ++c) {
        dst[c] = proto[c] + cfg.noise_stddev * rng::normal(eng);
      }
    }
    seg.segments.push_back({label.items[i], at, at + durations[i]});
    at += durations[i];
  }
  VideoTextPair pair;
  pair.id = id;
  pair.features = FeatureSequence(std::move(frames), FeatureRole::raw_video);
  pair.label = label;
  pair.segmentation = std::move(seg);
  return pair;
}

GlossSequence sample_sentence(const SyntheticConfig& cfg, rng::Engine& eng) {
  const auto len = static_cast<std::size_t>(
      rng::uniform_int(eng, static_cast<int>(cfg.min_sentence_len),
                       static_cast<int>(cfg.max_sentence_len)));
  GlossSequence s;
  s.items.reserve(len);
  for (std::size_t i = 0; i < len; ++i) {
    s.items.push_back(rng::uniform_int(eng, 1, cfg.vocab_size));
  }
  return s;
}

nlohmann::ordered_json pair_to_json(const VideoTextPair& pair,
                                    const GlossVocabulary& vocab) {
  nlohmann::ordered_json j;
  j["id"] = pair.id;
  nlohmann::ordered_json frames = nlohmann::ordered_json::array();
  for (std::size_t r = 0; r < pair.features.length(); ++r) {
    auto row = pair.features.frame(r);
    frames.push_back(std::vector<double>(row.begin(), row.end()));
  }
  j["frames"] = std::move(frames);
  nlohmann::ordered_json glosses = nlohmann::ordered_json::array();
  for (int g : pair.label.items) {
    glosses.push_back(vocab.name(g));
  }
  j["glosses"] = std::move(glosses);
  nlohmann::ordered_json segments = nlohmann::ordered_json::array();
  for (const auto& s : pair.segmentation.segments) {
    segments.push_back({vocab.name(s.gloss), s.begin, s.end});
  }
  j["segments"] = std::move(segments);
  if (pair.is_pseudo) {
    j["is_pseudo"] = true;
    nlohmann::ordered_json plan = nlohmann::ordered_json::array();
    for (const EditOp& op : pair.plan.ops) {
      nlohmann::ordered_json o;
      switch (op.kind) {
        case EditOp::Kind::substitute:
          o["op"] = "substitute";
          o["pos"] = op.pos;
          o["gloss"] = vocab.name(op.gloss);
          break;
        case EditOp::Kind::erase:
          o["op"] = "delete";
          o["pos"] = op.pos;
          break;
        case EditOp::Kind::insert:
          o["op"] = "insert";
          o["pos"] = op.pos;
          o["gloss"] = vocab.name(op.gloss);
          break;
      }
      plan.push_back(std::move(o));
    }
    j["provenance"] = {{"source_id", pair.source_id}, {"plan", std::move(plan)}};
  }
  return j;
}

VideoTextPair pair_from_json(const nlohmann::json& j, const GlossVocabulary& vocab) {
  VideoTextPair pair;
  pair.id = j.at("id").get<std::string>();
  const auto& frames = j.at("frames");
  if (frames.empty()) {
    throw std::invalid_argument("dataset: pair " + pair.id + " has no frames");
  }
  Mat m(frames.size(), frames[0].size());
  for (std::size_t r = 0; r < frames.size(); ++r) {
    const auto row = frames[r].get<std::vector<double>>();
    if (row.size() != m.cols()) {
      throw std::invalid_argument("dataset: ragged frame rows in " + pair.id);
    }
    std::copy(row.begin(), row.end(), m.row(r).begin());
  }
  pair.features = FeatureSequence(std::move(m), FeatureRole::raw_video);
  for (const auto& name : j.at("glosses")) {
    pair.label.items.push_back(vocab.id(name.get<std::string>()));
  }
  for (const auto& s : j.at("segments")) {
    pair.segmentation.segments.push_back({vocab.id(s.at(0).get<std::string>()),
                                          s.at(1).get<std::size_t>(),
                                          s.at(2).get<std::size_t>()});
  }
  validate_total_segmentation(pair.segmentation, pair.label, pair.features.length());
  if (j.value("is_pseudo", false)) {
    pair.is_pseudo = true;
    const auto& prov = j.at("provenance");
    pair.source_id = prov.at("source_id").get<std::string>();
    for (const auto& o : prov.at("plan")) {
      EditOp op;
      const std::string kind = o.at("op").get<std::string>();
      op.pos = o.at("pos").get<std::size_t>();
      if (kind == "substitute") {
        op.kind = EditOp::Kind::substitute;
        op.gloss = vocab.id(o.at("gloss").get<std::string>());
      } else if (kind == "delete") {
        op.kind = EditOp::Kind::erase;
      } else if (kind == "insert") {
        op.kind = EditOp::Kind::insert;
        op.gloss = vocab.id(o.at("gloss").get<std::string>());
      } else {
        throw std::invalid_argument("dataset: unknown edit op '" + kind + "'");
      }
      pair.plan.ops.push_back(op);
    }
  }
  return pair;
}

}  // namespace

void SyntheticConfig::validate() const {
  if (vocab_size < 2) {
    throw std::invalid_argument("synthetic config: need at least two glosses");
  }
  if (feature_dim == 0) {
    throw std::invalid_argument("synthetic config: feature_dim must be positive");
  }
  if (min_gloss_frames < 4 || min_gloss_frames > max_gloss_frames) {
    throw std::invalid_argument(
        "synthetic config: gloss duration range must satisfy 4 <= min <= max");
  }
  if (min_sentence_len == 0 || min_sentence_len > max_sentence_len) {
    throw std::invalid_argument("synthetic config: bad sentence length range");
  }
  if (min_sentence_len * min_gloss_frames < 16) {
    throw std::invalid_argument(
        "synthetic config: shortest sentence must span at least 16 frames");
  }
  if (noise_stddev < 0.0) {
    throw std::invalid_argument("synthetic config: noise_stddev must be nonnegative");
  }
  if (train_size == 0 || test_size == 0) {
    throw std::invalid_argument("synthetic config: split sizes must be positive");
  }
  if (orthogonal_prototypes && feature_dim < static_cast<std::size_t>(vocab_size)) {
    throw std::invalid_argument(
        "synthetic config: orthogonal prototypes need feature_dim >= vocab_size");
  }
}

void to_json(nlohmann::json& j, const SyntheticConfig& cfg) {
  j = nlohmann::json{{"vocab_size", cfg.vocab_size},
                     {"feature_dim", cfg.feature_dim},
                     {"min_gloss_frames", cfg.min_gloss_frames},
                     {"max_gloss_frames", cfg.max_gloss_frames},
                     {"noise_stddev", cfg.noise_stddev},
                     {"min_sentence_len", cfg.min_sentence_len},
                     {"max_sentence_len", cfg.max_sentence_len},
                     {"train_size", cfg.train_size},
                     {"test_size", cfg.test_size},
                     {"seed", cfg.seed},
                     {"orthogonal_prototypes", cfg.orthogonal_prototypes}};
}

void from_json(const nlohmann::json& j, SyntheticConfig& cfg) {
  static const std::set<std::string> known = {
      "vocab_size",       "feature_dim", "min_gloss_frames", "max_gloss_frames",
      "noise_stddev",     "min_sentence_len", "max_sentence_len", "train_size",
      "test_size",        "seed",        "orthogonal_prototypes"};
  reject_unknown_keys(j, known, "synthetic config");
  cfg.vocab_size = j.value("vocab_size", cfg.vocab_size);
  cfg.feature_dim = j.value("feature_dim", cfg.feature_dim);
  cfg.min_gloss_frames = j.value("min_gloss_frames", cfg.min_gloss_frames);
  cfg.max_gloss_frames = j.value("max_gloss_frames", cfg.max_gloss_frames);
  cfg.noise_stddev = j.value("noise_stddev", cfg.noise_stddev);
  cfg.min_sentence_len = j.value("min_sentence_len", cfg.min_sentence_len);
  cfg.max_sentence_len = j.value("max_sentence_len", cfg.max_sentence_len);
  cfg.train_size = j.value("train_size", cfg.train_size);
  cfg.test_size = j.value("test_size", cfg.test_size);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.orthogonal_prototypes = j.value("orthogonal_prototypes", cfg.orthogonal_prototypes);
}

Dataset generate_dataset(const SyntheticConfig& cfg) {
  cfg.validate();
  std::vector<std::string> names;
  const std::size_t width = std::to_string(cfg.vocab_size).size();
  for (int g = 1; g <= cfg.vocab_size; ++g) {
    names.push_back("g" + padded(static_cast<std::size_t>(g), width));
  }

  rng::Engine proto_eng(rng::derive_seed(cfg.seed, "prototypes"));
  rng::Engine train_eng(rng::derive_seed(cfg.seed, "train"));
  rng::Engine test_eng(rng::derive_seed(cfg.seed, "test"));

  Mat prototypes = make_prototypes(cfg, proto_eng);
  Dataset out{GlossVocabulary(names), {}, {}, Mat{}};

  std::set<std::vector<int>> train_combos;
  const std::size_t id_width = std::to_string(std::max(cfg.train_size, cfg.test_size)).size();
  for (std::size_t i = 0; i < cfg.train_size; ++i) {
    GlossSequence label = sample_sentence(cfg, train_eng);
    train_combos.insert(label.items);
    out.train.push_back(make_pair("train-" + padded(i + 1, id_width), label, prototypes,
                                  cfg, train_eng));
  }

  const std::size_t max_attempts = 1000 * cfg.test_size;
  std::size_t attempts = 0;
  while (out.test.size() < cfg.test_size) {
    if (++attempts > max_attempts) {
      throw std::invalid_argument(
          "synthetic config: cannot draw held-out test sentences; label space too small");
    }
    GlossSequence label = sample_sentence(cfg, test_eng);
    if (train_combos.count(label.items) > 0) {
      continue;
    }
    out.test.push_back(make_pair("test-" + padded(out.test.size() + 1, id_width), label,
                                 prototypes, cfg, test_eng));
  }
  out.prototypes = std::move(prototypes);
  return out;
}

void write_dataset_jsonl(const std::string& path, const std::vector<VideoTextPair>& pairs,
                         const GlossVocabulary& vocab) {
  std::ofstream os(path, std::ios::binary);
  if (!os) {
    throw std::runtime_error("dataset: cannot open " + path + " for writing");
  }
  nlohmann::ordered_json header;
  header["type"] = "header";
  header["vocab"] = vocab.glosses();
  os << header.dump() << '\n';
  for (const VideoTextPair& pair : pairs) {
    os << pair_to_json(pair, vocab).dump() << '\n';
  }
  if (!os) {
    throw std::runtime_error("dataset: write failed for " + path);
  }
}

LoadedDataset read_dataset_jsonl(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) {
    throw std::runtime_error("dataset: cannot open " + path);
  }
  std::string line;
  if (!std::getline(is, line)) {
    throw std::runtime_error("dataset: " + path + " is empty");
  }
  nlohmann::json header = nlohmann::json::parse(line);
  if (header.value("type", "") != "header" || !header.contains("vocab")) {
    throw std::runtime_error("dataset: " + path + " is missing the header record");
  }
  LoadedDataset out{GlossVocabulary(header.at("vocab").get<std::vector<std::string>>()),
                    {}};
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    try {
      out.pairs.push_back(pair_from_json(nlohmann::json::parse(line), out.vocab));
    } catch (const std::exception& e) {
      throw std::runtime_error("dataset: " + path + " line " + std::to_string(line_no) +
                               ": " + e.what());
    }
  }
  return out;
}

}  // namespace cmaug
