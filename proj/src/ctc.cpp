// Copyright 2026 the cmaug authors
// SPDX-License-Identifier: Apache-2.0

#include "cmaug/ctc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "cmaug/kernels.hpp"

namespace cmaug {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Blank-interleaved extended label: blank, s1, blank, s2, ..., blank.
std::vector<int> extended_label(const GlossSequence& s) {
  std::vector<int> ext(2 * s.length() + 1, kBlankId);
  for (std::size_t i = 0; i < s.length(); ++i) ext[2 * i + 1] = s.items[i];
  return ext;
}

void check_label(const LogProbMatrix& p, const GlossSequence& s) {
  for (int v : s.items) {
    if (v == kBlankId) throw std::invalid_argument("ctc: label contains blank");
    if (v < 0 || v >= static_cast<int>(p.num_classes()))
      throw std::invalid_argument("ctc: label id out of range");
  }
}

// alpha[t][u], emissions 1..t included. Row t of the result is the lattice
// state distribution after consuming step t.
std::vector<std::vector<double>> forward_table(const LogProbMatrix& p,
                                               const std::vector<int>& ext) {
  const std::size_t T = p.num_steps();
  const std::size_t S = ext.size();
  std::vector<std::vector<double>> alpha(T, std::vector<double>(S, kNegInf));
  alpha[0][0] = p.at(ext[0], 0);
  if (S > 1) alpha[0][1] = p.at(ext[1], 0);
  for (std::size_t t = 1; t < T; ++t) {
    for (std::size_t u = 0; u < S; ++u) {
      double acc = alpha[t - 1][u];
      if (u >= 1) acc = kern::log_add(acc, alpha[t - 1][u - 1]);
      if (u >= 2 && ext[u] != kBlankId && ext[u] != ext[u - 2])
        acc = kern::log_add(acc, alpha[t - 1][u - 2]);
      alpha[t][u] = acc == kNegInf ? kNegInf : acc + p.at(ext[u], t);
    }
  }
  return alpha;
}

std::vector<std::vector<double>> backward_table(const LogProbMatrix& p,
                                                const std::vector<int>& ext) {
  const std::size_t T = p.num_steps();
  const std::size_t S = ext.size();
  std::vector<std::vector<double>> beta(T, std::vector<double>(S, kNegInf));
  beta[T - 1][S - 1] = p.at(ext[S - 1], T - 1);
  if (S > 1) beta[T - 1][S - 2] = p.at(ext[S - 2], T - 1);
  for (std::size_t t = T - 1; t-- > 0;) {
    for (std::size_t u = 0; u < S; ++u) {
      double acc = beta[t + 1][u];
      if (u + 1 < S) acc = kern::log_add(acc, beta[t + 1][u + 1]);
      if (u + 2 < S && ext[u + 2] != kBlankId && ext[u + 2] != ext[u])
        acc = kern::log_add(acc, beta[t + 1][u + 2]);
      beta[t][u] = acc == kNegInf ? kNegInf : acc + p.at(ext[u], t);
    }
  }
  return beta;
}

}  // namespace

std::size_t min_path_steps(const GlossSequence& s) {
  std::size_t steps = s.length();
  for (std::size_t i = 1; i < s.length(); ++i)
    if (s.items[i] == s.items[i - 1]) ++steps;
  return steps;
}

double ctc_log_prob(const LogProbMatrix& p, const GlossSequence& s) {
  check_label(p, s);
  if (p.num_steps() == 0) throw std::invalid_argument("ctc: empty matrix");
  if (min_path_steps(s) > p.num_steps()) return kNegInf;
  const std::vector<int> ext = extended_label(s);
  const auto alpha = forward_table(p, ext);
  const std::size_t S = ext.size();
  double total = alpha[p.num_steps() - 1][S - 1];
  if (S > 1) total = kern::log_add(total, alpha[p.num_steps() - 1][S - 2]);
  return total;
}

CtcLossResult ctc_loss_and_grad(const LogProbMatrix& p, const GlossSequence& s) {
  check_label(p, s);
  if (p.num_steps() == 0) throw std::invalid_argument("ctc: empty matrix");
  const std::size_t T = p.num_steps();
  const std::size_t C = p.num_classes();
  const std::vector<int> ext = extended_label(s);
  const std::size_t S = ext.size();

  const auto alpha = forward_table(p, ext);
  double log_p = alpha[T - 1][S - 1];
  if (S > 1) log_p = kern::log_add(log_p, alpha[T - 1][S - 2]);
  if (!std::isfinite(log_p)) throw std::domain_error("ctc: label infeasible for matrix length");
  const auto beta = backward_table(p, ext);

  CtcLossResult result;
  result.loss = -log_p;
  result.grad = Mat(T, C);
  // Occupancy per label: alpha and beta both include the emission at t, so
  // one copy is divided back out before summing lattice states.
  std::vector<double> acc(C);
  for (std::size_t t = 0; t < T; ++t) {
    std::fill(acc.begin(), acc.end(), kNegInf);
    for (std::size_t u = 0; u < S; ++u) {
      if (alpha[t][u] == kNegInf || beta[t][u] == kNegInf) continue;
      acc[ext[u]] = kern::log_add(acc[ext[u]], alpha[t][u] + beta[t][u]);
    }
    for (std::size_t k = 0; k < C; ++k) {
      if (acc[k] == kNegInf) continue;
      result.grad(t, k) = -std::exp(acc[k] - p.at(static_cast<int>(k), t) - log_p);
    }
  }
  return result;
}

std::vector<DecodeCandidate> beam_decode(const LogProbMatrix& p, int beam_width) {
  if (beam_width < 1) throw std::invalid_argument("beam_decode: width must be >= 1");
  if (p.num_steps() == 0) throw std::invalid_argument("beam_decode: empty matrix");
  const int C = static_cast<int>(p.num_classes());

  struct Mass {
    double blank = kNegInf;      // paths ending in blank
    double non_blank = kNegInf;  // paths ending in the prefix's last label
    double total() const { return kern::log_add(blank, non_blank); }
  };
  // std::map keys keep iteration deterministic.
  using Beam = std::map<std::vector<int>, Mass>;

  Beam beam;
  beam[{}] = Mass{0.0, kNegInf};

  for (std::size_t t = 0; t < p.num_steps(); ++t) {
    Beam next;
    for (const auto& [prefix, mass] : beam) {
      const double total = mass.total();
      // Emit blank: prefix unchanged.
      {
        Mass& m = next[prefix];
        m.blank = kern::log_add(m.blank, total + p.at(kBlankId, t));
      }
      for (int k = 1; k < C; ++k) {
        const double y = p.at(k, t);
        if (!prefix.empty() && prefix.back() == k) {
          // Repeated symbol merges unless a blank intervened.
          Mass& same = next[prefix];
          same.non_blank = kern::log_add(same.non_blank, mass.non_blank + y);
          std::vector<int> ext = prefix;
          ext.push_back(k);
          Mass& grown = next[ext];
          grown.non_blank = kern::log_add(grown.non_blank, mass.blank + y);
        } else {
          std::vector<int> ext = prefix;
          ext.push_back(k);
          Mass& grown = next[ext];
          grown.non_blank = kern::log_add(grown.non_blank, total + y);
        }
      }
    }
    if (next.size() > static_cast<std::size_t>(beam_width)) {
      std::vector<Beam::const_iterator> order;
      order.reserve(next.size());
      for (auto it = next.begin(); it != next.end(); ++it) order.push_back(it);
      std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
        const double ta = a->second.total(), tb = b->second.total();
        if (ta != tb) return ta > tb;
        if (a->first.size() != b->first.size()) return a->first.size() < b->first.size();
        return a->first < b->first;
      });
      Beam pruned;
      for (int i = 0; i < beam_width; ++i) pruned.insert(*order[static_cast<std::size_t>(i)]);
      next = std::move(pruned);
    }
    beam = std::move(next);
  }

  std::vector<DecodeCandidate> out;
  out.reserve(beam.size());
  for (const auto& [prefix, mass] : beam)
    out.push_back({GlossSequence{prefix}, mass.total()});
  std::sort(out.begin(), out.end(), [](const DecodeCandidate& a, const DecodeCandidate& b) {
    if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
    if (a.sequence.length() != b.sequence.length())
      return a.sequence.length() < b.sequence.length();
    return a.sequence.items < b.sequence.items;
  });
  if (out.size() > static_cast<std::size_t>(beam_width))
    out.resize(static_cast<std::size_t>(beam_width));
  return out;
}

ForcedAlignment forced_align(const LogProbMatrix& p, const GlossSequence& s) {
  check_label(p, s);
  if (s.empty()) throw std::invalid_argument("forced_align: empty label");
  if (p.num_steps() == 0) throw std::invalid_argument("forced_align: empty matrix");
  const std::size_t T = p.num_steps();
  const std::vector<int> ext = extended_label(s);
  const std::size_t S = ext.size();

  std::vector<std::vector<double>> v(T, std::vector<double>(S, kNegInf));
  std::vector<std::vector<std::size_t>> from(T, std::vector<std::size_t>(S, 0));
  v[0][0] = p.at(ext[0], 0);
  if (S > 1) v[0][1] = p.at(ext[1], 0);
  for (std::size_t t = 1; t < T; ++t) {
    for (std::size_t u = 0; u < S; ++u) {
      double best = v[t - 1][u];
      std::size_t arg = u;
      if (u >= 1 && v[t - 1][u - 1] > best) {
        best = v[t - 1][u - 1];
        arg = u - 1;
      }
      if (u >= 2 && ext[u] != kBlankId && ext[u] != ext[u - 2] && v[t - 1][u - 2] > best) {
        best = v[t - 1][u - 2];
        arg = u - 2;
      }
      if (best == kNegInf) continue;
      v[t][u] = best + p.at(ext[u], t);
      from[t][u] = arg;
    }
  }

  std::size_t end_state = S - 1;
  double best = v[T - 1][S - 1];
  if (S > 1 && v[T - 1][S - 2] > best) {
    best = v[T - 1][S - 2];
    end_state = S - 2;
  }
  if (!std::isfinite(best)) throw std::domain_error("forced_align: label infeasible");

  std::vector<std::size_t> states(T);
  states[T - 1] = end_state;
  for (std::size_t t = T - 1; t-- > 0;) states[t] = from[t + 1][states[t + 1]];

  // Blank frames attach to the following gloss; trailing blanks to the last.
  std::vector<std::size_t> owner(T);
  std::size_t carry = s.length() - 1;
  for (std::size_t t = T; t-- > 0;) {
    if (states[t] % 2 == 1) carry = (states[t] - 1) / 2;
    owner[t] = carry;
  }

  ForcedAlignment out;
  out.log_path_prob = best;
  std::size_t begin = 0;
  for (std::size_t t = 1; t <= T; ++t) {
    if (t == T || owner[t] != owner[t - 1]) {
      out.segmentation.segments.push_back(
          {s.items[owner[t - 1]], begin, t});
      begin = t;
    }
  }
  return out;
}

}  // namespace cmaug
