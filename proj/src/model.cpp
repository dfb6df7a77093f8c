#include "absa/model.hpp"

#include <stdexcept>

namespace absa {

void ModelConfig::validate() const {
  if (general_dim < 1 || domain_dim < 1) throw std::invalid_argument("ModelConfig: embedding dims must be >= 1");
  if (shared_layers < 1) throw std::invalid_argument("ModelConfig: need at least one shared layer");
  if (layer0_filters_k3 < 1 || layer0_filters_k5 < 1 || filters < 1)
    throw std::invalid_argument("ModelConfig: filter counts must be >= 1");
  if (shared_layers > 1 && layer0_filters_k3 + layer0_filters_k5 != filters)
    throw std::invalid_argument("ModelConfig: layer-0 filter groups must sum to the stacked filter count");
  if (ae_layers < 0 || as_layers < 0 || ds_layers < 0 || dd_layers < 0)
    throw std::invalid_argument("ModelConfig: negative task layer count");
  if (num_domains < 2) throw std::invalid_argument("ModelConfig: need at least two domains");
  if (dropout < 0.0 || dropout >= 1.0) throw std::invalid_argument("ModelConfig: dropout must be in [0,1)");
}

std::vector<Tensor> ParameterGroups::all() const {
  std::vector<Tensor> out;
  for (const auto* g : {&shared, &ae, &as, &ds, &dd, &re})
    for (const auto& t : *g) out.push_back(t);
  return out;
}

Model::Model(ModelConfig config, EmbeddingTable embeddings, Rng& rng)
    : config_(std::move(config)), embeddings_(std::move(embeddings)) {
  config_.validate();
  if (embeddings_.general_dim() != config_.general_dim || embeddings_.domain_dim() != config_.domain_dim)
    throw std::invalid_argument("Model: embedding table dims do not match the config");
  const int emb = config_.emb_dim();
  const int hidden = config_.shared_out_dim();

  shared_encoder = SharedEncoder(emb, config_.shared_layers, config_.layer0_filters_k3, config_.layer0_filters_k5,
                                 config_.filters, rng);
  ae_encoder = ConvStack(config_.ae_layers, hidden, config_.filters, 5, rng);
  as_encoder = ConvStack(config_.as_layers, hidden, config_.filters, 5, rng);
  ds_encoder = ConvStack(config_.ds_layers, hidden, config_.filters, 5, rng);
  dd_encoder = ConvStack(config_.dd_layers, hidden, config_.filters, 5, rng);

  const int as_dim = as_encoder.out_dim();
  w_as = Tensor::glorot({as_dim, as_dim}, as_dim, as_dim, rng);
  ae_decoder = LinearDecoder::make(emb + hidden + ae_encoder.out_dim(), kNumAeLabels, rng);
  as_decoder = LinearDecoder::make(hidden + as_dim, kNumSentiments, rng);
  ds_head = DocHead::make(ds_encoder.out_dim(), kNumSentiments, rng);
  dd_head = DocHead::make(dd_encoder.out_dim(), config_.num_domains, rng);

  const int re_in = hidden + kNumAeLabels + kNumSentiments + kNumSentiments + 1 + 1;
  re_weight = Tensor::glorot({re_in, hidden}, re_in, hidden, rng);
  re_bias = Tensor::zeros({hidden}, true);
}

Model::Model(ModelConfig config, int vocab_size, Rng& rng)
    : Model(config,
            EmbeddingTable::random(vocab_size, config.general_dim, config.domain_dim, rng, config.train_embeddings),
            rng) {}

ForwardCtx Model::make_ctx(bool train) const { return ForwardCtx{train, config_.dropout, &global_rng()}; }

Tensor Model::reencode(const Tensor& h_s, const Tensor& y_ae, const Tensor& y_as, const Tensor& y_ds,
                       const Tensor& a_ds, const Tensor& a_dd) const {
  const int n = h_s.rows();
  Tensor cat = concat_cols({h_s, y_ae, y_as, broadcast_rows(reshape(y_ds, {y_ds.cols()}), n),
                            reshape(a_ds, {n, 1}), reshape(a_dd, {n, 1})});
  if (cat.cols() != re_weight.rows())
    throw std::invalid_argument("reencode: concatenated width " + std::to_string(cat.cols()) +
                                " does not match re-encoder input " + std::to_string(re_weight.rows()));
  return relu(add(matmul(cat, re_weight), re_bias));
}

ForwardState Model::forward(const std::vector<int>& token_ids, int iterations, bool train,
                            const std::vector<double>* opinion_override) {
  if (token_ids.empty()) throw std::invalid_argument("forward: empty token sequence");
  if (iterations < 0) throw std::invalid_argument("forward: negative iteration count");
  if (opinion_override && opinion_override->size() != token_ids.size())
    throw std::invalid_argument("forward: opinion override length does not match the sentence");

  const ForwardCtx ctx = make_ctx(train);
  const int n = static_cast<int>(token_ids.size());

  ForwardState state;
  state.iterations = iterations;
  state.embedded = embed(embeddings_, token_ids, false);
  Tensor h_s0 = shared_encoder.encode(state.embedded, ctx);
  state.h_s.push_back(h_s0);

  // The domain path is independent of the message-passing updates, so its
  // head outputs are computed once and referenced by every round.
  DocHeadResult dd_fixed;
  if (config_.dd_masked_pass) {
    Tensor masked = embed(embeddings_, token_ids, true);
    dd_fixed = dd_head.apply(dd_encoder.encode(shared_encoder.encode(masked, ctx), ctx));
  }

  Tensor h_cur = h_s0;
  for (int t = 0; t <= iterations; ++t) {
    HeadSnapshot snap;

    Tensor h_ae = ae_encoder.encode(h_cur, ctx);
    snap.y_ae = ae_decode(ae_decoder, state.embedded, h_s0, h_ae);
    snap.p_op = opinion_override ? Tensor::from_data({n}, *opinion_override) : opinion_prob(snap.y_ae);

    Tensor h_as = as_encoder.encode(h_cur, ctx);
    auto att = opinion_gated_self_attention(h_as, snap.p_op, w_as);
    snap.attention = att.weights;
    snap.y_as = as_decode(as_decoder, h_s0, att.context);

    auto ds_run = ds_head.apply(ds_encoder.encode(h_cur, ctx));
    snap.y_ds = ds_run.y;
    snap.a_ds = ds_run.weights;

    if (config_.dd_masked_pass) {
      snap.y_dd = dd_fixed.y;
      snap.a_dd = dd_fixed.weights;
    } else {
      auto dd_run = dd_head.apply(dd_encoder.encode(h_cur, ctx));
      snap.y_dd = dd_run.y;
      snap.a_dd = dd_run.weights;
    }

    state.heads.push_back(std::move(snap));
    if (t < iterations) {
      const HeadSnapshot& s = state.heads.back();
      h_cur = reencode(h_cur, s.y_ae, s.y_as, s.y_ds, s.a_ds, s.a_dd);
      state.h_s.push_back(h_cur);
    }
  }
  return state;
}

DocHeadResult Model::sentiment_forward(const std::vector<int>& token_ids, bool train) {
  if (token_ids.empty()) throw std::invalid_argument("sentiment_forward: empty token sequence");
  const ForwardCtx ctx = make_ctx(train);
  Tensor h = shared_encoder.encode(embed(embeddings_, token_ids, false), ctx);
  return ds_head.apply(ds_encoder.encode(h, ctx));
}

DocHeadResult Model::domain_forward(const std::vector<int>& token_ids, bool train) {
  if (token_ids.empty()) throw std::invalid_argument("domain_forward: empty token sequence");
  const ForwardCtx ctx = make_ctx(train);
  Tensor h = shared_encoder.encode(embed(embeddings_, token_ids, config_.dd_masked_pass), ctx);
  return dd_head.apply(dd_encoder.encode(h, ctx));
}

ParameterGroups Model::groups() const {
  ParameterGroups g;
  if (embeddings_.trainable) {
    g.shared.push_back(embeddings_.general);
    g.shared.push_back(embeddings_.domain);
  }
  for (auto& t : shared_encoder.params()) g.shared.push_back(t);
  for (auto& t : ae_encoder.params()) g.ae.push_back(t);
  g.ae.push_back(ae_decoder.weight);
  g.ae.push_back(ae_decoder.bias);
  g.as.push_back(w_as);
  for (auto& t : as_encoder.params()) g.as.push_back(t);
  g.as.push_back(as_decoder.weight);
  g.as.push_back(as_decoder.bias);
  for (auto& t : ds_encoder.params()) g.ds.push_back(t);
  g.ds.push_back(ds_head.attn_vec);
  g.ds.push_back(ds_head.decoder.weight);
  g.ds.push_back(ds_head.decoder.bias);
  for (auto& t : dd_encoder.params()) g.dd.push_back(t);
  g.dd.push_back(dd_head.attn_vec);
  g.dd.push_back(dd_head.decoder.weight);
  g.dd.push_back(dd_head.decoder.bias);
  g.re.push_back(re_weight);
  g.re.push_back(re_bias);
  return g;
}

std::vector<std::pair<std::string, Tensor>> Model::named_state() const {
  std::vector<std::pair<std::string, Tensor>> out;
  out.emplace_back("embedding.general", embeddings_.general);
  out.emplace_back("embedding.domain", embeddings_.domain);

  auto add_stack = [&out](const std::string& prefix, const std::vector<Tensor>& params) {
    for (std::size_t i = 0; i < params.size(); i += 2) {
      const std::string layer = prefix + ".layer" + std::to_string(i / 2);
      out.emplace_back(layer + ".weight", params[i]);
      out.emplace_back(layer + ".bias", params[i + 1]);
    }
  };
  const auto shared = shared_encoder.params();
  out.emplace_back("shared.conv3.weight", shared[0]);
  out.emplace_back("shared.conv3.bias", shared[1]);
  out.emplace_back("shared.conv5.weight", shared[2]);
  out.emplace_back("shared.conv5.bias", shared[3]);
  add_stack("shared.deep", std::vector<Tensor>(shared.begin() + 4, shared.end()));
  add_stack("ae.encoder", ae_encoder.params());
  out.emplace_back("ae.decoder.weight", ae_decoder.weight);
  out.emplace_back("ae.decoder.bias", ae_decoder.bias);
  out.emplace_back("as.bilinear", w_as);
  add_stack("as.encoder", as_encoder.params());
  out.emplace_back("as.decoder.weight", as_decoder.weight);
  out.emplace_back("as.decoder.bias", as_decoder.bias);
  add_stack("ds.encoder", ds_encoder.params());
  out.emplace_back("ds.attn", ds_head.attn_vec);
  out.emplace_back("ds.decoder.weight", ds_head.decoder.weight);
  out.emplace_back("ds.decoder.bias", ds_head.decoder.bias);
  add_stack("dd.encoder", dd_encoder.params());
  out.emplace_back("dd.attn", dd_head.attn_vec);
  out.emplace_back("dd.decoder.weight", dd_head.decoder.weight);
  out.emplace_back("dd.decoder.bias", dd_head.decoder.bias);
  out.emplace_back("re.weight", re_weight);
  out.emplace_back("re.bias", re_bias);
  return out;
}

}  // namespace absa
