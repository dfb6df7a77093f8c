#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "absa/adam.hpp"
#include "absa/data.hpp"
#include "absa/losses.hpp"
#include "absa/metrics.hpp"
#include "absa/model.hpp"

namespace absa {

struct TrainConfig {
  int iterations = 2;       // T
  int doc_update_ratio = 2; // r: a document update fires on every r-th aspect batch
  int batch_size = 32;
  double learning_rate = 1e-4;
  int max_pretrain_epochs = 5;
  int max_epochs = 50;
  double dev_fraction = 0.2;
  std::uint64_t seed = 1;

  void validate() const;
};

// Inverse sigmoid decay: probability of feeding gold opinion indicators to
// the AS attention at the given 0-based epoch.
double scheduled_sampling_prob(int epoch);

struct EpochLog {
  int epoch = 0;
  double train_loss = 0.0;
  double dev_f1_i = 0.0;
  double best_f1_i = 0.0;  // running maximum; nondecreasing over epochs
};

struct PretrainLog {
  int epoch = 0;
  double doc_loss = 0.0;
};

// Observation hooks for instrumented runs; any member may be left empty.
struct TrainCallbacks {
  std::function<void(int epoch, int batch)> after_aspect_step;
  std::function<void(int epoch, int batch)> after_doc_step;
  std::function<void(const EpochLog&)> after_epoch;
};

struct TrainResult {
  int best_epoch = -1;
  double best_dev_f1_i = 0.0;
  std::vector<PretrainLog> pretrain_log;
  std::vector<EpochLog> log;
  EvalReport final_dev_report;  // of the restored best model on the dev split
  std::vector<std::size_t> dev_indices;
};

// Training schedule:
//   1. pretrain on document batches, updating shared/ds/dd;
//   2. per aspect batch, update shared/ae/as/re with ds and dd frozen, and
//      after every r-th batch take one document step updating shared/ds/dd;
//   3. hold out a dev fraction of the aspect data (drawn once with the run
//      seed) and keep the parameters of the epoch with the best dev F1-I.
// The model is left at the best epoch's parameters. The caller is expected
// to have seeded the global rng; all stochastic choices flow from it.
TrainResult train(Model& model, const Vocabulary& vocab, const std::vector<AspectInstance>& aspect_data,
                  const std::vector<DocumentInstance>& sentiment_data,
                  const std::vector<DocumentInstance>& domain_data, const TrainConfig& config,
                  const TrainCallbacks* callbacks = nullptr);

// Dev-set evaluation used for model selection (eval-mode forwards).
EvalReport evaluate(Model& model, const Vocabulary& vocab, const std::vector<AspectInstance>& data, int iterations);

}  // namespace absa
