// Copyright 2026 The biofusion Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace biofusion::eval {

using Tokens = std::vector<std::string>;

/// Lowercases ASCII letters and splits on whitespace and ASCII punctuation;
/// punctuation itself is discarded.
Tokens metric_tokens(std::string_view text);

/// Corpus BLEU: clipped n-gram matches (max count over the references of a
/// sample) and candidate n-gram totals are pooled over the corpus for orders
/// 1..n, combined by geometric mean and scaled by the brevity penalty
/// exp(1 - r/c) when c < r. r sums, per sample, the reference length closest to
/// the candidate length (shorter wins ties). No smoothing: any order with zero
/// matches gives 0. Throws EmptyInputError / ShapeError.
double bleu(std::span<const Tokens> candidates, std::span<const std::vector<Tokens>> references, int n);
double bleu(std::span<const Tokens> candidates, std::span<const Tokens> references, int n);

/// Mean per-sample n-gram F1 with clipped overlap; 0 when precision and recall
/// are both 0.
double rouge_n(std::span<const Tokens> candidates, std::span<const Tokens> references, int n);

/// Mean per-sample LCS F1.
double rouge_l(std::span<const Tokens> candidates, std::span<const Tokens> references);

struct MeteorAlignment {
  std::size_t matches = 0;
  std::size_t chunks = 0;
  /// False when the chunk search hit its node budget; chunks is then the best
  /// alignment found so far.
  bool exhaustive = true;
};

/// Exact-match unigram alignment with the most matches and, among those, the
/// fewest chunks (runs contiguous and in order on both sides).
MeteorAlignment meteor_align(const Tokens& candidate, const Tokens& reference,
                             std::size_t node_budget = 1'000'000);

/// Exact-match METEOR for one pair: Fmean = 10PR / (R + 9P),
/// penalty = 0.5 (chunks / matches)^3, score = Fmean (1 - penalty); 0 without matches.
double meteor_sentence(const Tokens& candidate, const Tokens& reference);

/// Mean of meteor_sentence over samples.
double meteor(std::span<const Tokens> candidates, std::span<const Tokens> references);

struct GenScores {
  double bleu2 = 0.0;
  double bleu4 = 0.0;
  double rouge1 = 0.0;
  double rouge2 = 0.0;
  double rougeL = 0.0;
  double meteor = 0.0;
};

/// All six metrics on raw strings (tokenized with metric_tokens).
GenScores score_generation(std::span<const std::string> candidates, std::span<const std::string> references);

}  // namespace biofusion::eval
