/* C interface to the spectroscopy regression workbench.
 *
 * Every function that can fail returns a spectral_status; on failure a
 * thread-local message is available from spectral_last_error() until the
 * next failing call on the same thread. Returned strings are heap blocks
 * owned by the caller; release them with spectral_string_free(). Datasets
 * are opaque handles released with spectral_dataset_free().
 */
#ifndef SPECTRAL_H
#define SPECTRAL_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum spectral_status {
  SPECTRAL_OK = 0,
  SPECTRAL_ERR_INVALID_ARGUMENT = 1,
  SPECTRAL_ERR_PARSE = 2,
  SPECTRAL_ERR_IO = 3,
  SPECTRAL_ERR_NUMERIC = 4,
  SPECTRAL_ERR_INTERNAL = 5
} spectral_status;

typedef struct spectral_dataset spectral_dataset;

/* Message of this thread's most recent failing call; never NULL. */
const char* spectral_last_error(void);

void spectral_string_free(char* text);

/* ---- datasets ---- */

spectral_status spectral_dataset_load_csv(const char* path, spectral_dataset** out);
spectral_status spectral_dataset_save_csv(const spectral_dataset* ds, const char* path);

/* profile is "pear" or "navel"; n_samples <= 0 is rejected. */
spectral_status spectral_dataset_synthesize(const char* profile, int n_samples,
                                            uint64_t seed, spectral_dataset** out);

void spectral_dataset_free(spectral_dataset* ds);

int spectral_dataset_samples(const spectral_dataset* ds);
int spectral_dataset_dim(const spectral_dataset* ds);

/* Aligned text block with sample count, dimension, and sugar statistics. */
spectral_status spectral_dataset_stats_text(const spectral_dataset* ds, char** out_text);

/* ---- strategy evaluation ---- */

typedef struct spectral_run_options {
  int folds;
  uint64_t seed;

  int pls_max_components;
  int pls_inner_folds;
  int segpls_components;

  int ga_population;
  int ga_generations;
  int ga_inner_folds;
  int ga_pls_components;
  int ga_elitism; /* 0 reproduces pure generational replacement */

  int nn_epochs;
  double nn_learning_rate;
  int nn_adam;    /* 0 plain gradient descent, 1 Adam */
  int nn_reduced; /* down-scaled layer sizes */
  const int* nn_mlp_widths; /* optional override, may be NULL */
  int nn_mlp_width_count;
  const int* nn_conv_channels; /* optional override, may be NULL */
  int nn_conv_channel_count;
  int nn_head_width; /* <= 0 keeps the default */
} spectral_run_options;

/* Fills in the library defaults (10 folds, published GA/NN sizes). */
void spectral_run_options_init(spectral_run_options* options);

/* Cross-validates one strategy, e.g. "SG>MSC>SNV>WD(400)>GA(100)>PLS".
 * as_table = 0 renders the JSON report, 1 the aligned text table. */
spectral_status spectral_run_strategy(const spectral_dataset* ds, const char* strategy,
                                      const spectral_run_options* options,
                                      int as_table, char** out_text);

/* Evaluates several strategies on one fold split. Invalid rows are reported
 * inside the output instead of failing the whole call. */
spectral_status spectral_compare_strategies(const spectral_dataset* ds,
                                            const char* const* strategies, int count,
                                            const spectral_run_options* options,
                                            int as_table, char** out_text);

/* ---- dataset validation (grouping + ANOVA similarity) ---- */

typedef struct spectral_anova_options {
  int use_terciles; /* 1 ignores t1/t2 and splits at the sugar terciles */
  double t1;
  double t2;
  int repeats;
  int representatives;
  int n_subgroups;
  double alpha;
  int bartlett;                 /* 1 swaps the Levene screen for Bartlett */
  int valid_dims_on_full_groups; /* 1 screens once on full groups */
  uint64_t seed;
} spectral_anova_options;

void spectral_anova_options_init(spectral_anova_options* options);

spectral_status spectral_anova(const spectral_dataset* ds,
                               const spectral_anova_options* options,
                               int as_table, char** out_text);

/* ---- neural model persistence ---- */

/* Fits the strategy's preprocessing on the whole dataset, trains the neural
 * model on it, and writes the network to path. PLS-family strategies are
 * rejected. The saved file holds the network only; feed it data in the same
 * feature space it was trained on. */
spectral_status spectral_train_model(const spectral_dataset* ds, const char* strategy,
                                     const spectral_run_options* options,
                                     const char* path);

/* Loads a saved network and predicts the dataset's spectra (whose dimension
 * must match the network input). Output is a CSV "id,prediction" text. */
spectral_status spectral_predict_csv(const char* model_path, const spectral_dataset* ds,
                                     char** out_text);

#ifdef __cplusplus
}
#endif

#endif /* SPECTRAL_H */
