#include "absa/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "absa/inference.hpp"

namespace absa {

void TrainConfig::validate() const {
  if (iterations < 0) throw std::invalid_argument("TrainConfig: iterations must be >= 0");
  if (doc_update_ratio < 1) throw std::invalid_argument("TrainConfig: doc_update_ratio must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be >= 1");
  if (learning_rate <= 0.0) throw std::invalid_argument("TrainConfig: learning_rate must be positive");
  if (max_pretrain_epochs < 0) throw std::invalid_argument("TrainConfig: max_pretrain_epochs must be >= 0");
  if (max_epochs < 1) throw std::invalid_argument("TrainConfig: max_epochs must be >= 1");
  if (dev_fraction <= 0.0 || dev_fraction >= 1.0) throw std::invalid_argument("TrainConfig: dev_fraction must be in (0,1)");
}

double scheduled_sampling_prob(int epoch) {
  if (epoch < 0) throw std::invalid_argument("scheduled_sampling_prob: epoch must be >= 0");
  return 5.0 / (5.0 + std::exp(epoch / 5.0));
}

EvalReport evaluate(Model& model, const Vocabulary& vocab, const std::vector<AspectInstance>& data, int iterations) {
  std::vector<SentencePrediction> preds;
  preds.reserve(data.size());
  for (const auto& inst : data) preds.push_back(predict_sentence(model, vocab, inst.tokens, iterations));
  return compute_metrics(preds, data);
}

namespace {

std::vector<std::vector<int>> encode_docs(const Vocabulary& vocab, const std::vector<DocumentInstance>& docs) {
  std::vector<std::vector<int>> out;
  out.reserve(docs.size());
  for (const auto& d : docs) out.push_back(vocab.encode(d.tokens));
  return out;
}

std::vector<DocumentInstance> gather_docs(const std::vector<DocumentInstance>& docs, const Batch& batch) {
  std::vector<DocumentInstance> out;
  out.reserve(batch.indices.size());
  for (auto idx : batch.indices) out.push_back(docs[idx]);
  return out;
}

std::vector<std::vector<double>> snapshot_values(const std::vector<Tensor>& params) {
  std::vector<std::vector<double>> out;
  out.reserve(params.size());
  for (const auto& p : params) out.emplace_back(p.data().begin(), p.data().end());
  return out;
}

void restore_values(std::vector<Tensor>& params, const std::vector<std::vector<double>>& values) {
  for (std::size_t i = 0; i < params.size(); ++i)
    std::copy(values[i].begin(), values[i].end(), params[i].data().begin());
}

}  // namespace

TrainResult train(Model& model, const Vocabulary& vocab, const std::vector<AspectInstance>& aspect_data,
                  const std::vector<DocumentInstance>& sentiment_data,
                  const std::vector<DocumentInstance>& domain_data, const TrainConfig& config,
                  const TrainCallbacks* callbacks) {
  config.validate();
  if (aspect_data.empty() || sentiment_data.empty() || domain_data.empty())
    throw std::invalid_argument("train: all three datasets must be non-empty");
  if (aspect_data.size() < 2) throw std::invalid_argument("train: need at least two aspect instances for a dev split");
  for (const auto& d : sentiment_data)
    if (d.kind != DocKind::Sentiment) throw std::invalid_argument("train: sentiment corpus contains a non-DS instance");
  for (const auto& d : domain_data) {
    if (d.kind != DocKind::Domain) throw std::invalid_argument("train: domain corpus contains a non-DD instance");
    if (d.label < 0 || d.label >= model.config().num_domains)
      throw std::invalid_argument("train: domain label outside the configured domain set");
  }
  for (const auto& inst : aspect_data) inst.validate("train input");

  Rng& rng = global_rng();
  TrainResult result;

  // Dev split drawn once, before any training.
  std::vector<std::size_t> order(aspect_data.size());
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  const auto n_dev = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::floor(config.dev_fraction * static_cast<double>(aspect_data.size()))));
  std::vector<AspectInstance> dev_set, train_set;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (i < n_dev) {
      dev_set.push_back(aspect_data[order[i]]);
      result.dev_indices.push_back(order[i]);
    } else {
      train_set.push_back(aspect_data[order[i]]);
    }
  }

  ParameterGroups groups = model.groups();
  std::vector<Tensor> aspect_params, doc_params;
  for (const auto* g : {&groups.shared, &groups.ae, &groups.as, &groups.re})
    aspect_params.insert(aspect_params.end(), g->begin(), g->end());
  for (const auto* g : {&groups.shared, &groups.ds, &groups.dd})
    doc_params.insert(doc_params.end(), g->begin(), g->end());
  Adam optimizer(groups.all(), config.learning_rate);

  const auto ds_encoded = encode_docs(vocab, sentiment_data);
  const auto dd_encoded = encode_docs(vocab, domain_data);

  // Document-level pretraining.
  for (int epoch = 0; epoch < config.max_pretrain_epochs; ++epoch) {
    const auto ds_batches = make_batches(ds_encoded, config.batch_size, rng.next_u64());
    const auto dd_batches = make_batches(dd_encoded, config.batch_size, rng.next_u64());
    const std::size_t rounds = std::max(ds_batches.size(), dd_batches.size());
    double loss_sum = 0.0;
    for (std::size_t b = 0; b < rounds; ++b) {
      const auto ds_batch = gather_docs(sentiment_data, ds_batches[b % ds_batches.size()]);
      const auto dd_batch = gather_docs(domain_data, dd_batches[b % dd_batches.size()]);
      Tensor loss = doc_batch_loss(model, vocab, ds_batch, dd_batch, /*train=*/true);
      optimizer.zero_grad();
      loss.backward();
      optimizer.step(doc_params);
      loss_sum += loss.item();
    }
    result.pretrain_log.push_back({epoch, loss_sum / static_cast<double>(rounds)});
  }

  // Alternating training on aspect batches with interleaved document steps.
  std::vector<std::vector<int>> train_encoded;
  train_encoded.reserve(train_set.size());
  for (const auto& inst : train_set) train_encoded.push_back(vocab.encode(inst.tokens));
  BatchCycler ds_cycler(ds_encoded, config.batch_size, rng);
  BatchCycler dd_cycler(dd_encoded, config.batch_size, rng);

  std::vector<std::vector<double>> best_values;
  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    const double eps = scheduled_sampling_prob(epoch);
    const auto batches = make_batches(train_encoded, config.batch_size, rng.next_u64());
    double loss_sum = 0.0;
    for (std::size_t b = 0; b < batches.size(); ++b) {
      std::vector<AspectInstance> batch;
      batch.reserve(batches[b].indices.size());
      for (auto idx : batches[b].indices) batch.push_back(train_set[idx]);

      const bool use_gold_opinion = rng.bernoulli(eps);  // one draw per batch
      Tensor loss =
          aspect_batch_loss(model, vocab, batch, config.iterations, /*train=*/true, use_gold_opinion);
      optimizer.zero_grad();
      loss.backward();
      optimizer.step(aspect_params);
      loss_sum += loss.item();
      const int batch_no = static_cast<int>(b) + 1;
      if (callbacks && callbacks->after_aspect_step) callbacks->after_aspect_step(epoch, batch_no);

      if (batch_no % config.doc_update_ratio == 0) {
        const auto ds_batch = gather_docs(sentiment_data, ds_cycler.next());
        const auto dd_batch = gather_docs(domain_data, dd_cycler.next());
        Tensor doc_loss = doc_batch_loss(model, vocab, ds_batch, dd_batch, /*train=*/true);
        optimizer.zero_grad();
        doc_loss.backward();
        optimizer.step(doc_params);
        if (callbacks && callbacks->after_doc_step) callbacks->after_doc_step(epoch, batch_no);
      }
    }

    const EvalReport dev = evaluate(model, vocab, dev_set, config.iterations);
    EpochLog entry;
    entry.epoch = epoch;
    entry.train_loss = loss_sum / static_cast<double>(batches.size());
    entry.dev_f1_i = dev.f1_i;
    // ties go to the later epoch: equal dev score, more co-training
    if (dev.f1_i >= result.best_dev_f1_i || result.best_epoch < 0) {
      result.best_dev_f1_i = dev.f1_i;
      result.best_epoch = epoch;
      best_values = snapshot_values(groups.all());
    }
    entry.best_f1_i = result.best_dev_f1_i;
    result.log.push_back(entry);
    if (callbacks && callbacks->after_epoch) callbacks->after_epoch(entry);
  }

  std::vector<Tensor> all_params = groups.all();
  restore_values(all_params, best_values);
  result.final_dev_report = evaluate(model, vocab, dev_set, config.iterations);
  return result;
}

}  // namespace absa
