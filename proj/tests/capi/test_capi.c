/* Copyright 2026 The biofusion Authors.
 * SPDX-License-Identifier: Apache-2.0
 *
 * Drives the whole workflow through the C interface against a fixture tree
 * made by make_fixtures. Compiled as C to keep the header honest.
 */
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "biofusion/biofusion.h"

static int failures = 0;
static char root[1024];

#define EXPECT(cond)                                                          \
  do {                                                                        \
    if (!(cond)) {                                                            \
      fprintf(stderr, "%s:%d: expectation failed: %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                             \
    }                                                                         \
  } while (0)

#define EXPECT_OK(call)                                                                        \
  do {                                                                                         \
    bf_status s_ = (call);                                                                     \
    if (s_ != BF_OK) {                                                                         \
      fprintf(stderr, "%s:%d: %s -> %s: %s\n", __FILE__, __LINE__, #call, bf_status_name(s_), \
              bf_last_error());                                                                \
      ++failures;                                                                              \
    }                                                                                          \
  } while (0)

static const char* at(const char* rel) {
  static char buf[8][1200];
  static int slot = 0;
  slot = (slot + 1) % 8;
  snprintf(buf[slot], sizeof buf[slot], "%s/%s", root, rel);
  return buf[slot];
}

static void test_errors(void) {
  size_t atoms = 0, bonds = 0;
  EXPECT_OK(bf_parse_smiles("C1CC1", &atoms, &bonds));
  EXPECT(atoms == 3 && bonds == 3);
  EXPECT(bf_parse_smiles("C(", &atoms, &bonds) == BF_ERR_PARSE);
  EXPECT(strlen(bf_last_error()) > 0);
  EXPECT(bf_parse_smiles(NULL, &atoms, &bonds) == BF_ERR_USAGE);

  bf_model* model = NULL;
  EXPECT(bf_model_load(at("does-not-exist.ckpt"), &model) == BF_ERR_IO);
  EXPECT(model == NULL);
  EXPECT(bf_run_stage("align", at("config.json"), NULL, -1, at("out-missing"), NULL) ==
         BF_ERR_MISSING_PREREQUISITE);
  EXPECT(bf_run_stage("pretrain", at("config.json"), NULL, -1, at("out-bad"), NULL) == BF_ERR_USAGE);
  EXPECT(strcmp(bf_status_name(BF_ERR_CORRUPT_CHECKPOINT), "corrupt_checkpoint") == 0);
  EXPECT(strlen(bf_version()) > 0);
}

static void test_workflow(void) {
  char* stats = NULL;
  EXPECT_OK(bf_build_pubchemqa(at("raw_molecules.jsonl"), 7, at("work/pubchemqa"), &stats));
  EXPECT(stats != NULL && strstr(stats, "smiles_parse") != NULL);
  bf_string_free(stats);
  EXPECT_OK(bf_build_uniprotqa(at("raw_proteins.jsonl"), 7, at("work/uniprotqa"), NULL));
  EXPECT_OK(bf_build_corpus(at("corpus.jsonl"), at("allowlist.txt"), NULL, 64, at("work/corpus"), NULL));

  const char* inputs[3];
  inputs[0] = at("work/pubchemqa/pubchemqa.jsonl");
  inputs[1] = at("work/uniprotqa/uniprotqa.jsonl");
  inputs[2] = at("work/corpus/corpus.jsonl");
  EXPECT_OK(bf_train_tokenizer(inputs, 3, 400, at("work/tokenizer.json")));

  bf_tokenizer* tok = NULL;
  EXPECT_OK(bf_tokenizer_load(at("work/tokenizer.json"), &tok));
  if (tok) {
    const char* text = "a chain of four carbons";
    int64_t ids[64];
    size_t n = 0;
    char* back = NULL;
    EXPECT(bf_tokenizer_vocab_size(tok) > 263);
    EXPECT_OK(bf_tokenizer_encode(tok, text, ids, 64, &n));
    EXPECT(n > 0 && n < strlen(text));
    EXPECT_OK(bf_tokenizer_decode(tok, ids, n, &back));
    EXPECT(back != NULL && strcmp(back, text) == 0);
    bf_string_free(back);
    bf_tokenizer_free(tok);
  }

  char* summary = NULL;
  EXPECT_OK(bf_run_stage("lm", at("config.json"), NULL, -1, at("work/run"), &summary));
  EXPECT(summary != NULL && strstr(summary, "lm.ckpt") != NULL);
  bf_string_free(summary);
  EXPECT_OK(bf_run_stage("align", at("config.json"), at("work/run/lm.ckpt"), -1, at("work/run"), NULL));
  EXPECT_OK(bf_run_stage("qa", at("config.json"), at("work/run/align.ckpt"), -1, at("work/run"), NULL));

  bf_model* model = NULL;
  EXPECT_OK(bf_model_load(at("work/run/qa.ckpt"), &model));
  if (!model) return;
  char* answer = NULL;
  EXPECT_OK(bf_model_ask(model, "molecule", "CCO", "please describe the molecule", 4, &answer));
  EXPECT(answer != NULL);
  bf_string_free(answer);
  answer = NULL;
  EXPECT_OK(bf_model_ask(model, "protein", "MKVLAGW", "What is the function of this protein?", 4, &answer));
  bf_string_free(answer);
  answer = NULL;
  EXPECT_OK(bf_model_ask(model, "text", NULL, "What stores energy?", 4, &answer));
  bf_string_free(answer);
  EXPECT(bf_model_ask(model, "molecule", "C(", "q", 4, &answer) == BF_ERR_PARSE);
  EXPECT(bf_model_ask(model, "protein", "MK1", "q", 4, &answer) == BF_ERR_ALPHABET);
  EXPECT(bf_model_ask(model, "sound", "x", "q", 4, &answer) == BF_ERR_USAGE);

  char* report = NULL;
  EXPECT_OK(bf_eval_gen(model, at("work/pubchemqa/pubchemqa.jsonl"), "pubchemqa", "test", at("work/eval"), &report));
  EXPECT(report != NULL && strstr(report, "bleu2") != NULL);
  bf_string_free(report);
  report = NULL;
  EXPECT_OK(bf_eval_mcq(model, at("mcq.jsonl"), "medmcqa-like", at("work/eval"), &report));
  EXPECT(report != NULL && strstr(report, "accuracy") != NULL);
  bf_string_free(report);
  EXPECT(bf_eval_mcq(model, at("mcq.jsonl"), "csv", at("work/eval"), NULL) == BF_ERR_USAGE);
  bf_model_free(model);
}

int main(int argc, char** argv) {
  if (argc != 2) {
    fprintf(stderr, "usage: test_capi FIXTURE_DIR\n");
    return 2;
  }
  snprintf(root, sizeof root, "%s", argv[1]);
  test_errors();
  test_workflow();
  if (failures) {
    fprintf(stderr, "%d expectation(s) failed\n", failures);
    return 1;
  }
  printf("C API workflow passed\n");
  return 0;
}
