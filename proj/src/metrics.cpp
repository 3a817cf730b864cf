// Copyright 2026 the cmaug authors
// SPDX-License-Identifier: Apache-2.0

#include "cmaug/metrics.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

#include <json.hpp>

namespace cmaug {

EditScript edit_alignment(const GlossSequence& ref, const GlossSequence& hyp) {
  const std::size_t n = ref.length();
  const std::size_t m = hyp.length();
  // D[i][j]: cost of aligning ref[0,i) with hyp[0,j).
  std::vector<std::vector<std::size_t>> dist(n + 1, std::vector<std::size_t>(m + 1));
  for (std::size_t i = 0; i <= n; ++i) dist[i][0] = i;
  for (std::size_t j = 0; j <= m; ++j) dist[0][j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t diag =
          dist[i - 1][j - 1] + (ref.items[i - 1] == hyp.items[j - 1] ? 0 : 1);
      const std::size_t del = dist[i - 1][j] + 1;
      const std::size_t ins = dist[i][j - 1] + 1;
      dist[i][j] = std::min({diag, del, ins});
    }
  }

  EditScript script;
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 && ref.items[i - 1] == hyp.items[j - 1] &&
        dist[i][j] == dist[i - 1][j - 1]) {
      script.ops.push_back({EditScript::Kind::match, i - 1, j - 1});
      ++script.hits;
      --i, --j;
    } else if (i > 0 && j > 0 && dist[i][j] == dist[i - 1][j - 1] + 1) {
      script.ops.push_back({EditScript::Kind::substitution, i - 1, j - 1});
      ++script.n_sub;
      --i, --j;
    } else if (i > 0 && dist[i][j] == dist[i - 1][j] + 1) {
      script.ops.push_back({EditScript::Kind::deletion, i - 1, EditScript::npos});
      ++script.n_del;
      --i;
    } else {
      script.ops.push_back({EditScript::Kind::insertion, EditScript::npos, j - 1});
      ++script.n_ins;
      --j;
    }
  }
  std::reverse(script.ops.begin(), script.ops.end());
  return script;
}

double wer(const GlossSequence& ref, const GlossSequence& hyp) {
  if (ref.empty()) throw std::invalid_argument("wer: empty reference");
  const EditScript s = edit_alignment(ref, hyp);
  return static_cast<double>(s.cost()) / static_cast<double>(ref.length());
}

double acc_w(const GlossSequence& ref, const GlossSequence& hyp) {
  if (ref.empty()) throw std::invalid_argument("acc_w: empty reference");
  const EditScript s = edit_alignment(ref, hyp);
  return static_cast<double>(s.hits) / static_cast<double>(ref.length());
}

std::vector<double> top_k_wer(const std::vector<RankedSample>& samples, int k_max) {
  if (k_max < 1) throw std::invalid_argument("top_k_wer: K must be >= 1");
  std::vector<std::size_t> best_costs(static_cast<std::size_t>(k_max), 0);
  std::size_t total_len = 0;
  for (const auto& sample : samples) {
    if (sample.reference.empty()) throw std::invalid_argument("top_k_wer: empty reference");
    if (sample.candidates.empty()) throw std::invalid_argument("top_k_wer: empty candidate list");
    total_len += sample.reference.length();
    std::size_t best = std::numeric_limits<std::size_t>::max();
    for (int k = 0; k < k_max; ++k) {
      if (static_cast<std::size_t>(k) < sample.candidates.size()) {
        const EditScript s = edit_alignment(sample.reference, sample.candidates[k]);
        best = std::min(best, s.cost());
      }
      best_costs[static_cast<std::size_t>(k)] += best;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(k_max));
  for (int k = 0; k < k_max; ++k)
    out[static_cast<std::size_t>(k)] =
        total_len == 0 ? 0.0 : static_cast<double>(best_costs[static_cast<std::size_t>(k)]) /
                                   static_cast<double>(total_len);
  return out;
}

MetricsReport corpus_metrics(const std::vector<RankedSample>& samples, int k_max) {
  if (samples.empty()) throw std::invalid_argument("corpus_metrics: empty corpus");
  MetricsReport report;
  std::size_t total_len = 0, total_cost = 0, total_hits = 0;
  for (const auto& sample : samples) {
    if (sample.reference.empty() || sample.candidates.empty())
      throw std::invalid_argument("corpus_metrics: empty reference or candidate list");
    const EditScript s = edit_alignment(sample.reference, sample.candidates.front());
    total_len += sample.reference.length();
    total_cost += s.cost();
    total_hits += s.hits;
    report.n_ins += s.n_ins;
    report.n_del += s.n_del;
    report.n_sub += s.n_sub;
  }
  report.wer = total_len == 0 ? 0.0
                              : static_cast<double>(total_cost) / static_cast<double>(total_len);
  report.acc_w = total_len == 0 ? 0.0
                                : static_cast<double>(total_hits) / static_cast<double>(total_len);
  const std::vector<double> topk = top_k_wer(samples, k_max);
  for (int k = 1; k <= k_max; ++k) report.top_k[k] = topk[static_cast<std::size_t>(k) - 1];
  return report;
}

std::string MetricsReport::to_json() const {
  nlohmann::json j;
  j["wer"] = wer;
  j["acc_w"] = acc_w;
  nlohmann::json tk = nlohmann::json::object();
  for (const auto& [k, v] : top_k) tk[std::to_string(k)] = v;
  j["top_k_wer"] = tk;
  j["n_ins"] = n_ins;
  j["n_del"] = n_del;
  j["n_sub"] = n_sub;
  return j.dump();
}

}  // namespace cmaug
