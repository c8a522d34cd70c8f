// Copyright 2026 The biofusion Authors.
// SPDX-License-Identifier: Apache-2.0

#include "biofusion/eval/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <map>
#include <unordered_map>

#include "biofusion/core/errors.hpp"

namespace biofusion::eval {
namespace {

using NgramCounts = std::unordered_map<std::string, std::size_t>;

NgramCounts ngrams(const Tokens& tokens, int n) {
  NgramCounts counts;
  const auto order = static_cast<std::size_t>(n);
  if (tokens.size() < order) return counts;
  for (std::size_t i = 0; i + order <= tokens.size(); ++i) {
    std::string key = tokens[i];
    for (std::size_t k = 1; k < order; ++k) {
      key += '\x1f';
      key += tokens[i + k];
    }
    ++counts[key];
  }
  return counts;
}

std::size_t total(const NgramCounts& counts) {
  std::size_t t = 0;
  for (const auto& [key, n] : counts) t += n;
  return t;
}

void check_sizes(std::size_t candidates, std::size_t references) {
  if (candidates == 0) throw EmptyInputError("no samples to score");
  if (candidates != references) {
    throw ShapeError(std::to_string(candidates) + " candidates but " + std::to_string(references) +
                     " references");
  }
}

double f1(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

std::size_t lcs_length(const Tokens& a, const Tokens& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

class ChunkSearch {
 public:
  ChunkSearch(const Tokens& candidate, const Tokens& reference, std::size_t budget) : budget_(budget) {
    std::map<std::string, int> ids;
    for (const auto& t : candidate) cand_.push_back(ids.emplace(t, ids.size()).first->second);
    for (const auto& t : reference) ref_.push_back(ids.emplace(t, ids.size()).first->second);
    std::vector<std::size_t> cand_count(ids.size(), 0), ref_count(ids.size(), 0);
    for (int t : cand_) ++cand_count[t];
    for (int t : ref_) ++ref_count[t];
    need_.resize(ids.size());
    for (std::size_t t = 0; t < ids.size(); ++t) {
      need_[t] = std::min(cand_count[t], ref_count[t]);
      matches_ += need_[t];
    }
    // later_[i]: occurrences of cand_[i]'s type at positions > i.
    later_.resize(cand_.size());
    std::vector<std::size_t> seen(ids.size(), 0);
    for (std::size_t i = cand_.size(); i-- > 0;) {
      later_[i] = seen[cand_[i]];
      ++seen[cand_[i]];
    }
    used_.assign(ref_.size(), false);
  }

  MeteorAlignment run() {
    MeteorAlignment a;
    a.matches = matches_;
    if (matches_ == 0) return a;
    visit(0, -1, 0);
    a.chunks = best_;
    a.exhaustive = nodes_ <= budget_;
    return a;
  }

 private:
  void visit(std::size_t i, long prev_j, std::size_t chunks) {
    if (chunks >= best_ || nodes_ > budget_) return;
    ++nodes_;
    if (i == cand_.size()) {
      best_ = chunks;
      return;
    }
    const int t = cand_[i];
    if (need_[t] > 0) {
      auto try_match = [&](std::size_t j) {
        used_[j] = true;
        --need_[t];
        const bool continues = prev_j >= 0 && static_cast<long>(j) == prev_j + 1;
        visit(i + 1, static_cast<long>(j), chunks + (continues ? 0 : 1));
        ++need_[t];
        used_[j] = false;
      };
      const std::size_t next = static_cast<std::size_t>(prev_j + 1);
      if (prev_j >= 0 && next < ref_.size() && ref_[next] == t && !used_[next]) try_match(next);
      for (std::size_t j = 0; j < ref_.size(); ++j) {
        if (prev_j >= 0 && j == next) continue;
        if (ref_[j] == t && !used_[j]) try_match(j);
      }
    }
    if (later_[i] >= need_[t]) visit(i + 1, -1, chunks);
  }

  std::vector<int> cand_, ref_;
  std::vector<std::size_t> need_, later_;
  std::vector<bool> used_;
  std::size_t matches_ = 0;
  std::size_t best_ = std::numeric_limits<std::size_t>::max();
  std::size_t nodes_ = 0;
  std::size_t budget_;
};

}  // namespace

Tokens metric_tokens(std::string_view text) {
  Tokens tokens;
  std::string current;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    const bool space = c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
    const bool punct = c < 0x80 && std::ispunct(c);
    if (space || punct) {
      if (!current.empty()) tokens.push_back(std::move(current));
      current.clear();
    } else {
      current += (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : ch;
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

double bleu(std::span<const Tokens> candidates, std::span<const std::vector<Tokens>> references, int n) {
  check_sizes(candidates.size(), references.size());
  if (n < 1) throw ConfigError("BLEU order must be >= 1");
  std::vector<std::size_t> matched(n, 0), proposed(n, 0);
  std::size_t cand_len = 0, ref_len = 0;
  for (std::size_t s = 0; s < candidates.size(); ++s) {
    const Tokens& cand = candidates[s];
    const auto& refs = references[s];
    if (refs.empty()) throw ShapeError("sample " + std::to_string(s) + " has no reference");
    cand_len += cand.size();
    std::size_t closest = refs.front().size();
    for (const auto& r : refs) {
      const auto d = [&](std::size_t len) { return len > cand.size() ? len - cand.size() : cand.size() - len; };
      if (d(r.size()) < d(closest) || (d(r.size()) == d(closest) && r.size() < closest)) closest = r.size();
    }
    ref_len += closest;
    for (int k = 1; k <= n; ++k) {
      const NgramCounts c = ngrams(cand, k);
      NgramCounts max_ref;
      for (const auto& r : refs) {
        for (const auto& [key, cnt] : ngrams(r, k)) max_ref[key] = std::max(max_ref[key], cnt);
      }
      for (const auto& [key, cnt] : c) {
        auto it = max_ref.find(key);
        if (it != max_ref.end()) matched[k - 1] += std::min(cnt, it->second);
      }
      proposed[k - 1] += total(c);
    }
  }
  double log_sum = 0.0;
  for (int k = 0; k < n; ++k) {
    if (matched[k] == 0) return 0.0;
    log_sum += std::log(static_cast<double>(matched[k]) / static_cast<double>(proposed[k]));
  }
  const double bp = cand_len < ref_len
                        ? std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(cand_len))
                        : 1.0;
  return bp * std::exp(log_sum / n);
}

double bleu(std::span<const Tokens> candidates, std::span<const Tokens> references, int n) {
  std::vector<std::vector<Tokens>> wrapped;
  wrapped.reserve(references.size());
  for (const auto& r : references) wrapped.push_back({r});
  return bleu(candidates, std::span<const std::vector<Tokens>>(wrapped), n);
}

double rouge_n(std::span<const Tokens> candidates, std::span<const Tokens> references, int n) {
  check_sizes(candidates.size(), references.size());
  if (n < 1) throw ConfigError("ROUGE order must be >= 1");
  double sum = 0.0;
  for (std::size_t s = 0; s < candidates.size(); ++s) {
    const NgramCounts c = ngrams(candidates[s], n);
    const NgramCounts r = ngrams(references[s], n);
    std::size_t overlap = 0;
    for (const auto& [key, cnt] : c) {
      auto it = r.find(key);
      if (it != r.end()) overlap += std::min(cnt, it->second);
    }
    const std::size_t tc = total(c), tr = total(r);
    const double p = tc ? static_cast<double>(overlap) / tc : 0.0;
    const double rec = tr ? static_cast<double>(overlap) / tr : 0.0;
    sum += f1(p, rec);
  }
  return sum / candidates.size();
}

double rouge_l(std::span<const Tokens> candidates, std::span<const Tokens> references) {
  check_sizes(candidates.size(), references.size());
  double sum = 0.0;
  for (std::size_t s = 0; s < candidates.size(); ++s) {
    const std::size_t lcs = lcs_length(candidates[s], references[s]);
    if (lcs == 0) continue;
    sum += f1(static_cast<double>(lcs) / candidates[s].size(), static_cast<double>(lcs) / references[s].size());
  }
  return sum / candidates.size();
}

MeteorAlignment meteor_align(const Tokens& candidate, const Tokens& reference, std::size_t node_budget) {
  return ChunkSearch(candidate, reference, node_budget).run();
}

double meteor_sentence(const Tokens& candidate, const Tokens& reference) {
  const MeteorAlignment a = meteor_align(candidate, reference);
  if (a.matches == 0) return 0.0;
  const double m = static_cast<double>(a.matches);
  const double p = m / candidate.size();
  const double r = m / reference.size();
  const double fmean = 10.0 * p * r / (r + 9.0 * p);
  const double frag = static_cast<double>(a.chunks) / m;
  return fmean * (1.0 - 0.5 * frag * frag * frag);
}

double meteor(std::span<const Tokens> candidates, std::span<const Tokens> references) {
  check_sizes(candidates.size(), references.size());
  double sum = 0.0;
  for (std::size_t s = 0; s < candidates.size(); ++s) sum += meteor_sentence(candidates[s], references[s]);
  return sum / candidates.size();
}

GenScores score_generation(std::span<const std::string> candidates, std::span<const std::string> references) {
  check_sizes(candidates.size(), references.size());
  std::vector<Tokens> cand, ref;
  for (const auto& c : candidates) cand.push_back(metric_tokens(c));
  for (const auto& r : references) ref.push_back(metric_tokens(r));
  GenScores s;
  s.bleu2 = bleu(cand, std::span<const Tokens>(ref), 2);
  s.bleu4 = bleu(cand, std::span<const Tokens>(ref), 4);
  s.rouge1 = rouge_n(cand, ref, 1);
  s.rouge2 = rouge_n(cand, ref, 2);
  s.rougeL = rouge_l(cand, ref);
  s.meteor = meteor(cand, ref);
  return s;
}

}  // namespace biofusion::eval
