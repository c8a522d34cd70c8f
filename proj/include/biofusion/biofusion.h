/* Copyright 2026 The biofusion Authors.
 * SPDX-License-Identifier: Apache-2.0
 *
 * C interface to the biofusion library. Every function returns a bf_status;
 * on failure bf_last_error() describes the error for the calling thread until
 * the next call on that thread. Strings returned through char** are owned by
 * the caller and released with bf_string_free.
 */
#ifndef BIOFUSION_BIOFUSION_H_
#define BIOFUSION_BIOFUSION_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define BF_API __declspec(dllexport)
#else
#define BF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bf_status {
  BF_OK = 0,
  BF_ERR_USAGE = 1,
  BF_ERR_PARSE = 2,
  BF_ERR_ALPHABET = 3,
  BF_ERR_SHAPE = 4,
  BF_ERR_CONFIG = 5,
  BF_ERR_IO = 6,
  BF_ERR_CORRUPT_CHECKPOINT = 7,
  BF_ERR_SCHEMA = 8,
  BF_ERR_CONTEXT_OVERFLOW = 9,
  BF_ERR_MISSING_PREREQUISITE = 10,
  BF_ERR_FREEZE_VIOLATION = 11,
  BF_ERR_EMPTY_INPUT = 12,
  BF_ERR_EMPTY_MASK = 13,
  BF_ERR_NUMERIC = 14,
  BF_ERR_FORMAT = 15,
  BF_ERR_INTERNAL = 100
} bf_status;

typedef struct bf_model bf_model;
typedef struct bf_tokenizer bf_tokenizer;

BF_API const char* bf_version(void);
BF_API const char* bf_last_error(void);
BF_API const char* bf_status_name(bf_status status);
BF_API void bf_string_free(char* s);

/* Datasets. Each writes its outputs and stats.json into out_dir and, when
 * stats_json is non-null, returns the stats manifest. */
BF_API bf_status bf_build_corpus(const char* corpus_path, const char* allowlist_path,
                                 const char* tokenizer_path /* nullable */, int max_tokens,
                                 const char* out_dir, char** stats_json);
BF_API bf_status bf_build_pubchemqa(const char* raw_path, uint64_t seed, const char* out_dir,
                                    char** stats_json);
BF_API bf_status bf_build_uniprotqa(const char* raw_path, uint64_t seed, const char* out_dir,
                                    char** stats_json);

/* Tokenizer. */
BF_API bf_status bf_train_tokenizer(const char* const* input_paths, size_t n_inputs, int vocab_size,
                                    const char* out_path);
BF_API bf_status bf_tokenizer_load(const char* path, bf_tokenizer** out);
BF_API void bf_tokenizer_free(bf_tokenizer* tokenizer);
BF_API int bf_tokenizer_vocab_size(const bf_tokenizer* tokenizer);
/* Writes up to capacity ids; *n_ids receives the full count. */
BF_API bf_status bf_tokenizer_encode(const bf_tokenizer* tokenizer, const char* text, int64_t* ids,
                                     size_t capacity, size_t* n_ids);
BF_API bf_status bf_tokenizer_decode(const bf_tokenizer* tokenizer, const int64_t* ids, size_t n_ids,
                                     char** text);

/* Training. stage is "lm", "align" or "qa"; seed < 0 keeps the config seed.
 * Writes <stage>.ckpt, <stage>_loss.csv and <stage>_run.json to out_dir. */
BF_API bf_status bf_run_stage(const char* stage, const char* config_path,
                              const char* from_checkpoint /* nullable */, int64_t seed,
                              const char* out_dir, char** summary_json);

/* Models. */
BF_API bf_status bf_model_load(const char* checkpoint_path, bf_model** out);
BF_API void bf_model_free(bf_model* model);
/* entity_kind: "molecule" (SMILES), "protein" (sequence) or "text" (entity may be null). */
BF_API bf_status bf_model_ask(const bf_model* model, const char* entity_kind, const char* entity,
                              const char* question, int max_new_tokens, char** answer);

/* Evaluation. qa_format is "pubchemqa" or "uniprotqa"; split filters records
 * (null or "" keeps all). mcq_format is "medmcqa-like", "pubmedqa-like" or
 * "usmle-like". Reports are written to out_dir and returned as JSON. */
BF_API bf_status bf_eval_gen(const bf_model* model, const char* qa_path, const char* qa_format,
                             const char* split, const char* out_dir, char** report_json);
BF_API bf_status bf_eval_mcq(const bf_model* model, const char* mcq_path, const char* mcq_format,
                             const char* out_dir, char** report_json);

/* Chemistry helper: atom and bond counts of a SMILES string. */
BF_API bf_status bf_parse_smiles(const char* smiles, size_t* n_atoms, size_t* n_bonds);

#ifdef __cplusplus
}
#endif

#endif /* BIOFUSION_BIOFUSION_H_ */
