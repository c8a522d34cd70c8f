// Copyright 2026 The biofusion Authors.
// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "biofusion/core/errors.hpp"
#include "biofusion/core/rng.hpp"
#include "biofusion/eval/evaluate.hpp"
#include "biofusion/eval/metrics.hpp"
#include "support/temp_dir.hpp"

using namespace biofusion;
using namespace biofusion::eval;

namespace {

Tokens toks(const std::string& s) { return metric_tokens(s); }

// Brute-force METEOR oracle: enumerate every one-to-one exact-match
// alignment and keep the one with most matches, then fewest chunks.
void enumerate(const Tokens& c, const Tokens& r, std::size_t i, std::vector<int>& used,
               std::vector<std::pair<std::size_t, std::size_t>>& pairs, std::size_t& best_m, std::size_t& best_ch) {
  if (i == c.size()) {
    if (pairs.empty()) return;
    std::size_t chunks = 1;
    for (std::size_t k = 1; k < pairs.size(); ++k) {
      if (!(pairs[k].first == pairs[k - 1].first + 1 && pairs[k].second == pairs[k - 1].second + 1)) ++chunks;
    }
    if (pairs.size() > best_m || (pairs.size() == best_m && chunks < best_ch)) {
      best_m = pairs.size();
      best_ch = chunks;
    }
    return;
  }
  enumerate(c, r, i + 1, used, pairs, best_m, best_ch);
  for (std::size_t j = 0; j < r.size(); ++j) {
    if (used[j] || c[i] != r[j]) continue;
    used[j] = 1;
    pairs.push_back({i, j});
    enumerate(c, r, i + 1, used, pairs, best_m, best_ch);
    pairs.pop_back();
    used[j] = 0;
  }
}

double meteor_oracle(const Tokens& c, const Tokens& r) {
  std::vector<int> used(r.size(), 0);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::size_t m = 0;
  std::size_t ch = std::numeric_limits<std::size_t>::max();
  enumerate(c, r, 0, used, pairs, m, ch);
  if (m == 0) return 0.0;
  const double p = static_cast<double>(m) / static_cast<double>(c.size());
  const double rec = static_cast<double>(m) / static_cast<double>(r.size());
  const double f = 10.0 * p * rec / (rec + 9.0 * p);
  const double frag = static_cast<double>(ch) / static_cast<double>(m);
  return f * (1.0 - 0.5 * frag * frag * frag);
}

std::size_t lcs_oracle(const Tokens& a, const Tokens& b, std::size_t i, std::size_t j,
                       std::map<std::pair<std::size_t, std::size_t>, std::size_t>& memo) {
  if (i == a.size() || j == b.size()) return 0;
  auto key = std::make_pair(i, j);
  if (auto it = memo.find(key); it != memo.end()) return it->second;
  std::size_t v = a[i] == b[j] ? 1 + lcs_oracle(a, b, i + 1, j + 1, memo)
                               : std::max(lcs_oracle(a, b, i + 1, j, memo), lcs_oracle(a, b, i, j + 1, memo));
  memo[key] = v;
  return v;
}

struct FixedScorer : OptionScorer {
  std::function<std::vector<double>(const data::McqRecord&, std::size_t)> fn;
  std::vector<double> option_token_logprobs(const data::McqRecord& r, std::size_t o) const override { return fn(r, o); }
};

struct EchoAnswerer : Answerer {
  std::string answer(const data::QaRecord& r) const override {
    if (r.record_id == "bad") throw std::runtime_error("cannot answer");
    return r.answer;
  }
};

}  // namespace

TEST_CASE("metric tokenization") {
  CHECK(metric_tokens("The ATP-binding site, (mostly) HIGH.") ==
        Tokens{"the", "atp", "binding", "site", "mostly", "high"});
  CHECK(metric_tokens("  ").empty());
}

TEST_CASE("BLEU") {
  SUBCASE("hand enumerated bigram case") {
    const std::vector<Tokens> c = {toks("a b c")};
    const std::vector<Tokens> r = {toks("a b d")};
    CHECK(bleu(c, r, 2) == doctest::Approx(std::sqrt(2.0 / 3.0 * 0.5)).epsilon(1e-12));
    CHECK(bleu(c, r, 2) == doctest::Approx(0.5774).epsilon(1e-4));
  }
  SUBCASE("identity") {
    const std::vector<Tokens> c = {toks("one two three four five"), toks("alpha beta gamma delta")};
    CHECK(bleu(c, c, 4) == doctest::Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("no smoothing") {
    const std::vector<Tokens> c = {toks("a b c d")};
    const std::vector<Tokens> r = {toks("a x b y")};
    CHECK(bleu(c, r, 2) == 0.0);
  }
  SUBCASE("brevity penalty") {
    const std::vector<Tokens> c = {toks("a b")};
    const std::vector<Tokens> r = {toks("a b c d")};
    CHECK(bleu(c, r, 2) == doctest::Approx(std::exp(1.0 - 2.0)).epsilon(1e-12));
  }
  SUBCASE("multiple references clip against the maximum count") {
    const std::vector<Tokens> c = {toks("the the the")};
    const std::vector<std::vector<Tokens>> refs = {{toks("the cat"), toks("the the dog")}};
    // p1 = 2/3 and the closest ref has length 3, so BP = 1.
    CHECK(bleu(c, refs, 1) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  }
  SUBCASE("errors") {
    const std::vector<Tokens> none;
    CHECK_THROWS_AS(bleu(none, none, 2), EmptyInputError);
    const std::vector<Tokens> one = {toks("a")};
    const std::vector<Tokens> two = {toks("a"), toks("b")};
    CHECK_THROWS_AS(bleu(one, two, 2), ShapeError);
  }
}

TEST_CASE("ROUGE") {
  const std::vector<Tokens> c = {toks("a b c")};
  const std::vector<Tokens> r = {toks("a b d")};
  CHECK(rouge_n(c, r, 1) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(rouge_n(c, c, 2) == 1.0);
  CHECK(rouge_n(std::vector<Tokens>{toks("x y")}, r, 1) == 0.0);
  CHECK(rouge_l(std::vector<Tokens>{toks("a c e")}, std::vector<Tokens>{toks("a b c d e")}) ==
        doctest::Approx(0.75).epsilon(1e-12));
  CHECK(rouge_l(c, c) == 1.0);
  CHECK(rouge_l(std::vector<Tokens>{Tokens{}}, r) == 0.0);
}

TEST_CASE("ROUGE recall never rises when a non-matching token is appended") {
  Rng rng(3);
  const char* vocab[] = {"a", "b", "c", "d", "e"};
  for (int trial = 0; trial < 50; ++trial) {
    Tokens cand, ref;
    for (int i = 0; i < 6; ++i) cand.push_back(vocab[rng.below(5)]);
    for (int i = 0; i < 6; ++i) ref.push_back(vocab[rng.below(5)]);
    Tokens longer = cand;
    longer.push_back("zzz");
    for (int n = 1; n <= 2; ++n) {
      auto overlap = [&](const Tokens& x) {
        std::map<Tokens, int> cx, cr;
        for (std::size_t i = 0; i + n <= x.size(); ++i) ++cx[Tokens(x.begin() + i, x.begin() + i + n)];
        for (std::size_t i = 0; i + n <= ref.size(); ++i) ++cr[Tokens(ref.begin() + i, ref.begin() + i + n)];
        int o = 0;
        for (auto& [g, k] : cx) o += std::min(k, cr[g]);
        return o;
      };
      CHECK(overlap(longer) <= overlap(cand));
    }
  }
}

TEST_CASE("METEOR") {
  SUBCASE("identity with m tokens") {
    for (std::size_t m = 1; m <= 6; ++m) {
      Tokens t;
      for (std::size_t i = 0; i < m; ++i) t.push_back("w" + std::to_string(i));
      const double md = static_cast<double>(m);
      CHECK(meteor_sentence(t, t) == doctest::Approx(1.0 - 0.5 / (md * md * md)).epsilon(1e-12));
    }
  }
  SUBCASE("swapped pair") {
    const auto a = meteor_align(toks("a b"), toks("b a"));
    CHECK(a.matches == 2);
    CHECK(a.chunks == 2);
    CHECK(meteor_sentence(toks("a b"), toks("b a")) == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("no overlap") { CHECK(meteor_sentence(toks("a b"), toks("c d")) == 0.0); }
  SUBCASE("agrees with exhaustive enumeration") {
    Rng rng(11);
    const char* vocab[] = {"a", "b", "c", "d"};
    for (int trial = 0; trial < 200; ++trial) {
      Tokens c, r;
      const auto nc = 1 + rng.below(7);
      const auto nr = 1 + rng.below(7);
      for (std::uint64_t i = 0; i < nc; ++i) c.push_back(vocab[rng.below(4)]);
      for (std::uint64_t i = 0; i < nr; ++i) r.push_back(vocab[rng.below(4)]);
      CHECK(meteor_sentence(c, r) == doctest::Approx(meteor_oracle(c, r)).epsilon(1e-12));
    }
  }
}

TEST_CASE("ROUGE-L agrees with a recursive LCS") {
  Rng rng(12);
  const char* vocab[] = {"a", "b", "c"};
  for (int trial = 0; trial < 100; ++trial) {
    Tokens c, r;
    for (std::uint64_t i = 0, n = 1 + rng.below(8); i < n; ++i) c.push_back(vocab[rng.below(3)]);
    for (std::uint64_t i = 0, n = 1 + rng.below(8); i < n; ++i) r.push_back(vocab[rng.below(3)]);
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> memo;
    const double l = static_cast<double>(lcs_oracle(c, r, 0, 0, memo));
    const double p = l / static_cast<double>(c.size());
    const double rec = l / static_cast<double>(r.size());
    const double f = l == 0 ? 0.0 : 2 * p * rec / (p + rec);
    CHECK(rouge_l(std::vector<Tokens>{c}, std::vector<Tokens>{r}) == doctest::Approx(f).epsilon(1e-12));
  }
}

TEST_CASE("MCQ accuracy") {
  std::vector<data::McqRecord> records = {{"q1", {"a", "b"}, 1, {}},
                                          {"q2", {"a", "b", "c"}, 2, {}},
                                          {"q3", {"a", "b"}, 0, {}},
                                          {"q4", {"a", "b", "c", "d"}, 3, {}}};
  FixedScorer rigged;
  rigged.fn = [](const data::McqRecord& r, std::size_t o) {
    return std::vector<double>{o == r.gold ? -0.1 : -5.0, o == r.gold ? -0.1 : -5.0};
  };
  CHECK(mcq_accuracy(rigged, records).accuracy == 1.0);

  FixedScorer adversarial;
  adversarial.fn = [](const data::McqRecord& r, std::size_t o) { return std::vector<double>{o == r.gold ? -9.0 : -1.0}; };
  CHECK(mcq_accuracy(adversarial, records).accuracy == 0.0);

  FixedScorer uniform;
  uniform.fn = [](const data::McqRecord&, std::size_t) { return std::vector<double>{-0.7}; };
  const auto report = mcq_accuracy(uniform, records);
  for (auto p : report.predictions) CHECK(p == 0);

  FixedScorer three_of_four;
  three_of_four.fn = [](const data::McqRecord& r, std::size_t o) {
    const std::size_t target = r.question == "q4" ? 0 : r.gold;
    return std::vector<double>{o == target ? -0.1 : -2.0};
  };
  CHECK(mcq_accuracy(three_of_four, records).accuracy == 0.75);

  CHECK(length_normalized({-1.0, -3.0}) == -2.0);
  CHECK(std::isinf(length_normalized({})));
  CHECK_THROWS_AS(mcq_accuracy(uniform, {}), EmptyInputError);
}

TEST_CASE("generation evaluation") {
  std::vector<data::QaRecord> records;
  for (int i = 0; i < 3; ++i) {
    data::QaRecord r;
    r.record_id = "r" + std::to_string(i);
    r.answer = "word" + std::to_string(i) + " alpha beta gamma";
    records.push_back(r);
  }
  SUBCASE("echoing gold answers") {
    testing::TempDir dir;
    const auto report = gen_eval(EchoAnswerer{}, records, dir.file("pred.jsonl"));
    CHECK(report.scores.bleu2 == 1.0);
    CHECK(report.scores.bleu4 == 1.0);
    CHECK(report.scores.rouge1 == 1.0);
    CHECK(report.scores.rouge2 == 1.0);
    CHECK(report.scores.rougeL == 1.0);
    CHECK(report.scores.meteor == doctest::Approx(1.0 - 0.5 / 64.0).epsilon(1e-12));
    const auto text = testing::read_text(dir.file("pred.jsonl"));
    CHECK(text.find("\"record_id\":\"r2\"") != std::string::npos);
  }
  SUBCASE("failures are logged and excluded") {
    auto with_bad = records;
    with_bad[1].record_id = "bad";
    const auto report = gen_eval(EchoAnswerer{}, with_bad);
    CHECK(report.samples == 2);
    CHECK(report.failures == 1);
    CHECK(report.failure_log.size() == 1);
    const auto j = report.to_json();
    for (const char* k : {"bleu2", "bleu4", "rouge1", "rouge2", "rougeL", "meteor"}) {
      const double v = j[k].get<double>();
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
  SUBCASE("empty dataset") { CHECK_THROWS_AS(gen_eval(EchoAnswerer{}, {}), EmptyInputError); }
}
