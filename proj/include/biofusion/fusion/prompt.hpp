// Copyright 2026 The biofusion Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "biofusion/core/autodiff.hpp"
#include "biofusion/text/lm.hpp"
#include "biofusion/text/tokenizer.hpp"

namespace biofusion::fusion {

enum class Modality { kMolecule, kProtein };

/// Role-play prompt. Rendered text:
///   {system}\n### Human: <open>{placeholder}</close> {question}.\n### Assistant: {answer}
/// The text template has no marker/placeholder and puts the question right
/// after "### Human: ".
struct PromptTemplate {
  std::string system;
  std::string human_prefix;
  std::string question_suffix;
  std::string assistant_prefix;
  std::optional<Modality> modality;
  std::string placeholder;

  static const PromptTemplate& molecule();
  static const PromptTemplate& protein();
  static const PromptTemplate& text();
  static const PromptTemplate& for_modality(Modality m);

  text::TokenId open_marker() const;
  text::TokenId close_marker() const;

  /// Human-readable prompt with the placeholder symbol in place of modality
  /// tokens; `answer` is appended verbatim after the assistant prefix.
  std::string render(std::string_view question, std::string_view answer = {}) const;
};

enum class Segment : std::uint8_t { kText, kMarker, kModality, kAnswer, kEos };

/// Token-level plan for one prompt. `tokens` is the full sequence (BOS first;
/// answer tokens and EOS last when training); modality slots hold kPad.
struct PromptLayout {
  std::vector<text::TokenId> tokens;
  std::vector<Segment> segments;
  std::size_t modality_begin = 0;
  std::size_t modality_count = 0;
  bool training = false;

  /// Number of LM input positions: all tokens except the final EOS when training.
  std::size_t input_length() const { return training ? tokens.size() - 1 : tokens.size(); }
  std::vector<text::TokenId> input_tokens() const;
  /// Next-token targets per input position (empty in inference mode).
  std::vector<text::TokenId> targets() const;
  /// True where the target is an answer token or the terminal EOS.
  text::LossMask loss_mask() const;
};

/// Builds the layout. Between the markers go either `modality_rows` modality
/// slots or, when `inline_entity` is set, the tokens of that text (used to
/// feed raw SMILES/sequence text to a text-only model). Throws
/// ContextOverflowError when input_length() would exceed `context_length`.
PromptLayout layout_prompt(const PromptTemplate& tmpl, std::size_t modality_rows, std::string_view question,
                           const std::optional<std::string>& answer, const text::Tokenizer& tokenizer,
                           std::size_t context_length, const std::optional<std::string>& inline_entity = std::nullopt);

/// Concrete LM input for one prompt.
struct FusedPromptBatch {
  Matrix embeddings;
  std::vector<text::TokenId> targets;
  text::LossMask mask;
  /// Segment of every input position.
  std::vector<Segment> segments;
  std::size_t modality_begin = 0;
  std::size_t modality_count = 0;
  std::vector<text::TokenId> tokens;

  /// Prompt text: markers rendered, modality span shown as `placeholder`,
  /// BOS/EOS omitted.
  std::string render(const text::Tokenizer& tokenizer, std::string_view placeholder) const;
};

/// Splices `modality_embeddings` (n x d) between the markers of the template
/// and embeds every text token with `embedding_table`.
FusedPromptBatch assemble_prompt(const PromptTemplate& tmpl, const Matrix& modality_embeddings,
                                 std::string_view question, const std::optional<std::string>& answer,
                                 const text::Tokenizer& tokenizer, const Matrix& embedding_table,
                                 std::size_t context_length);

/// Differentiable counterpart of assemble_prompt for a given layout.
ad::Var fuse_embeddings(const ad::Binder& bind, const text::DecoderLm& lm, const PromptLayout& layout,
                        std::optional<ad::Var> modality_rows);

}  // namespace biofusion::fusion
