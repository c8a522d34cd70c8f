// Copyright 2026 The biofusion Authors.
// SPDX-License-Identifier: Apache-2.0

#include "biofusion/fusion/prompt.hpp"

#include "biofusion/core/errors.hpp"

namespace biofusion::fusion {

const PromptTemplate& PromptTemplate::molecule() {
  static const PromptTemplate t{
      .system = "You are working as an excellent assistant in chemistry and molecule discovery. Below a human gives "
                "the representation of a molecule. Answer a question about it.",
      .human_prefix = "\n### Human: ",
      .question_suffix = ".",
      .assistant_prefix = "\n### Assistant: ",
      .modality = Modality::kMolecule,
      .placeholder = "<moleculeHere>",
  };
  return t;
}

const PromptTemplate& PromptTemplate::protein() {
  static const PromptTemplate t{
      .system = "You are working as an excellent assistant in biology. Below a human gives the representation of a "
                "protein. Answer a question about it.",
      .human_prefix = "\n### Human: ",
      .question_suffix = ".",
      .assistant_prefix = "\n### Assistant: ",
      .modality = Modality::kProtein,
      .placeholder = "<proteinHere>",
  };
  return t;
}

const PromptTemplate& PromptTemplate::text() {
  static const PromptTemplate t{
      .system = "You are working as an excellent assistant in biomedicine. Below a human asks a question. Answer it.",
      .human_prefix = "\n### Human: ",
      .question_suffix = "",
      .assistant_prefix = "\n### Assistant: ",
      .modality = std::nullopt,
      .placeholder = "",
  };
  return t;
}

const PromptTemplate& PromptTemplate::for_modality(Modality m) {
  return m == Modality::kMolecule ? molecule() : protein();
}

text::TokenId PromptTemplate::open_marker() const {
  if (!modality) throw ShapeError("text template has no modality marker");
  return *modality == Modality::kMolecule ? text::kMoleculeOpen : text::kProteinOpen;
}

text::TokenId PromptTemplate::close_marker() const {
  if (!modality) throw ShapeError("text template has no modality marker");
  return *modality == Modality::kMolecule ? text::kMoleculeClose : text::kProteinClose;
}

std::string PromptTemplate::render(std::string_view question, std::string_view answer) const {
  std::string out = system + human_prefix;
  if (modality) {
    out += text::kSpecialTexts[static_cast<std::size_t>(open_marker())];
    out += placeholder;
    out += text::kSpecialTexts[static_cast<std::size_t>(close_marker())];
    out += " ";
  }
  out += question;
  out += question_suffix;
  out += assistant_prefix;
  out += answer;
  return out;
}

std::vector<text::TokenId> PromptLayout::input_tokens() const {
  return {tokens.begin(), tokens.begin() + static_cast<std::ptrdiff_t>(input_length())};
}

std::vector<text::TokenId> PromptLayout::targets() const {
  if (!training) return {};
  std::vector<text::TokenId> out(tokens.begin() + 1, tokens.end());
  // Targets that are modality slots have no token identity.
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (segments[i + 1] == Segment::kModality) out[i] = text::kPad;
  }
  return out;
}

text::LossMask PromptLayout::loss_mask() const {
  text::LossMask mask(input_length(), 0);
  if (!training) return mask;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    const Segment next = segments[i + 1];
    mask[i] = next == Segment::kAnswer || next == Segment::kEos ? 1 : 0;
  }
  return mask;
}

PromptLayout layout_prompt(const PromptTemplate& tmpl, std::size_t modality_rows, std::string_view question,
                           const std::optional<std::string>& answer, const text::Tokenizer& tokenizer,
                           std::size_t context_length, const std::optional<std::string>& inline_entity) {
  PromptLayout layout;
  layout.training = answer.has_value();
  auto append = [&](std::span<const text::TokenId> ids, Segment seg) {
    layout.tokens.insert(layout.tokens.end(), ids.begin(), ids.end());
    layout.segments.insert(layout.segments.end(), ids.size(), seg);
  };
  auto append_one = [&](text::TokenId id, Segment seg) {
    layout.tokens.push_back(id);
    layout.segments.push_back(seg);
  };

  append_one(text::kBos, Segment::kText);
  if (tmpl.modality) {
    append(tokenizer.encode(tmpl.system + tmpl.human_prefix), Segment::kText);
    append_one(tmpl.open_marker(), Segment::kMarker);
    layout.modality_begin = layout.tokens.size();
    if (inline_entity) {
      append(tokenizer.encode(*inline_entity), Segment::kText);
    } else {
      layout.modality_count = modality_rows;
      layout.tokens.insert(layout.tokens.end(), modality_rows, text::kPad);
      layout.segments.insert(layout.segments.end(), modality_rows, Segment::kModality);
    }
    append_one(tmpl.close_marker(), Segment::kMarker);
    append(tokenizer.encode(" " + std::string(question) + tmpl.question_suffix + tmpl.assistant_prefix),
           Segment::kText);
  } else {
    if (modality_rows != 0 || inline_entity) throw ShapeError("text template takes no modality content");
    append(tokenizer.encode(tmpl.system + tmpl.human_prefix + std::string(question) + tmpl.question_suffix +
                            tmpl.assistant_prefix),
           Segment::kText);
  }
  if (answer) {
    append(tokenizer.encode(*answer), Segment::kAnswer);
    append_one(text::kEos, Segment::kEos);
  }

  const std::size_t required = layout.input_length();
  if (required > context_length) {
    const std::size_t excess = required - context_length;
    throw ContextOverflowError(required, context_length, excess, excess < layout.modality_count);
  }
  return layout;
}

std::string FusedPromptBatch::render(const text::Tokenizer& tokenizer, std::string_view placeholder) const {
  std::string out;
  std::vector<text::TokenId> run;
  auto flush = [&] {
    out += tokenizer.decode(run);
    run.clear();
  };
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i == modality_begin && modality_count > 0) {
      flush();
      out += placeholder;
    }
    if (i >= modality_begin && i < modality_begin + modality_count) continue;
    const text::TokenId id = tokens[i];
    if (id >= text::kMoleculeOpen && id < text::kSpecialCount) {
      flush();
      out += tokenizer.token_text(id);
      continue;
    }
    run.push_back(id);
  }
  flush();
  return out;
}

FusedPromptBatch assemble_prompt(const PromptTemplate& tmpl, const Matrix& modality_embeddings,
                                 std::string_view question, const std::optional<std::string>& answer,
                                 const text::Tokenizer& tokenizer, const Matrix& embedding_table,
                                 std::size_t context_length) {
  if (tmpl.modality && modality_embeddings.rows() > 0 && modality_embeddings.cols() != embedding_table.cols()) {
    throw ShapeError("modality embedding width " + std::to_string(modality_embeddings.cols()) +
                     " != LM width " + std::to_string(embedding_table.cols()));
  }
  const PromptLayout layout = layout_prompt(tmpl, static_cast<std::size_t>(modality_embeddings.rows()), question,
                                            answer, tokenizer, context_length);
  FusedPromptBatch batch;
  const std::size_t n = layout.input_length();
  batch.embeddings.resize(static_cast<Eigen::Index>(n), embedding_table.cols());
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    if (layout.segments[i] == Segment::kModality) {
      batch.embeddings.row(row) = modality_embeddings.row(static_cast<Eigen::Index>(i - layout.modality_begin));
    } else {
      const text::TokenId id = layout.tokens[i];
      if (id >= embedding_table.rows()) throw ShapeError("token id outside the embedding table");
      batch.embeddings.row(row) = embedding_table.row(id);
    }
  }
  batch.targets = layout.targets();
  batch.mask = layout.loss_mask();
  batch.segments.assign(layout.segments.begin(), layout.segments.begin() + static_cast<std::ptrdiff_t>(n));
  batch.modality_begin = layout.modality_begin;
  batch.modality_count = layout.modality_count;
  batch.tokens = layout.tokens;
  return batch;
}

ad::Var fuse_embeddings(const ad::Binder& bind, const text::DecoderLm& lm, const PromptLayout& layout,
                        std::optional<ad::Var> modality_rows) {
  const std::vector<text::TokenId> inputs = layout.input_tokens();
  const ad::Var text_rows = lm.embed(bind, inputs);
  if (layout.modality_count == 0) return text_rows;
  if (!modality_rows || bind.tape().value(*modality_rows).rows() != static_cast<Eigen::Index>(layout.modality_count)) {
    throw ShapeError("modality rows do not match the prompt layout");
  }
  const auto begin = static_cast<Eigen::Index>(layout.modality_begin);
  const auto count = static_cast<Eigen::Index>(layout.modality_count);
  const auto total = static_cast<Eigen::Index>(inputs.size());
  const ad::Var parts[] = {ad::slice_rows(text_rows, 0, begin), *modality_rows,
                           ad::slice_rows(text_rows, begin + count, total - begin - count)};
  return ad::concat_rows(parts);
}

}  // namespace biofusion::fusion
