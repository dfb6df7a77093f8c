#include "absa/commands.hpp"

#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "absa/checkpoint.hpp"
#include "absa/data.hpp"
#include "absa/embeddings.hpp"
#include "absa/inference.hpp"
#include "absa/run_config.hpp"
#include "absa/training.hpp"

namespace absa {

namespace {

std::vector<std::string> tokenize_line(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> out;
  std::string tok;
  while (ss >> tok) {
    for (auto& c : tok) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    out.push_back(tok);
  }
  return out;
}

// Encoding through the checkpoint vocabulary; tokens it has never seen fall
// back to UNK, which is worth a warning but not an error.
void warn_unknown_tokens(const Vocabulary& vocab, const std::vector<AspectInstance>& data) {
  long unknown = 0, total = 0;
  for (const auto& inst : data)
    for (const auto& tok : inst.tokens) {
      ++total;
      if (!vocab.contains(tok)) ++unknown;
    }
  if (unknown > 0)
    std::cerr << "warning: " << unknown << " of " << total
              << " test tokens are outside the checkpoint vocabulary and map to " << Vocabulary::kUnkToken << "\n";
}

}  // namespace

int cmd_train(const std::string& config_path, const std::vector<std::string>& overrides,
              std::optional<std::uint64_t> seed_override) {
  RunConfig cfg;
  try {
    cfg = RunConfig::parse_file(config_path);
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ConfigError("override '" + kv + "' is not key=value");
      cfg.apply(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (seed_override) cfg.train.seed = *seed_override;
    cfg.validate();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }

  try {
    seed_global_rng(cfg.train.seed);
    Rng& rng = global_rng();

    const auto aspect_data = parse_aspect_file(cfg.aspect_train);
    const auto ds_data = parse_doc_file(cfg.ds_corpus, DocKind::Sentiment, cfg.domains);
    const auto dd_data = parse_doc_file(cfg.dd_corpus, DocKind::Domain, cfg.domains);

    std::vector<std::vector<std::string>> streams;
    for (const auto& i : aspect_data) streams.push_back(i.tokens);
    for (const auto& d : ds_data) streams.push_back(d.tokens);
    for (const auto& d : dd_data) streams.push_back(d.tokens);
    const Vocabulary vocab = build_vocab(streams, cfg.min_count);

    EmbeddingTable table;
    table.general = load_embedding_file(cfg.general_embeddings, vocab, cfg.model.general_dim, rng,
                                        cfg.model.train_embeddings);
    table.domain = load_embedding_file(cfg.domain_embeddings, vocab, cfg.model.domain_dim, rng,
                                       cfg.model.train_embeddings);
    table.trainable = cfg.model.train_embeddings;
    Model model(cfg.model, std::move(table), rng);

    TrainResult result = train(model, vocab, aspect_data, ds_data, dd_data, cfg.train);

    std::filesystem::create_directories(cfg.checkpoint_dir);
    const std::string ckpt_path = cfg.checkpoint_dir + "/model.ckpt.json";
    save_checkpoint(ckpt_path, model, vocab, cfg.train, cfg.domains, cfg.to_entries());

    const std::string log_path = cfg.checkpoint_dir + "/train_log.tsv";
    {
      std::ofstream log(log_path);
      if (!log) throw std::runtime_error("cannot write " + log_path);
      log << "phase\tepoch\tloss\tdev_f1_i\tbest_f1_i\n";
      char buf[160];
      for (const auto& e : result.pretrain_log) {
        std::snprintf(buf, sizeof(buf), "pretrain\t%d\t%.6f\t-\t-\n", e.epoch, e.doc_loss);
        log << buf;
      }
      for (const auto& e : result.log) {
        std::snprintf(buf, sizeof(buf), "train\t%d\t%.6f\t%.6f\t%.6f\n", e.epoch, e.train_loss, e.dev_f1_i,
                      e.best_f1_i);
        log << buf;
      }
    }

    const std::string report_path = cfg.checkpoint_dir + "/dev_report.json";
    {
      std::ofstream rep(report_path);
      if (!rep) throw std::runtime_error("cannot write " + report_path);
      rep << result.final_dev_report.to_json();
    }

    std::cout << "best epoch: " << result.best_epoch << " (dev F1-I " << result.best_dev_f1_i << ")\n";
    std::cout << "checkpoint: " << ckpt_path << "\n";
    std::cout << result.final_dev_report.to_text();
    return kExitOk;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

int cmd_eval(const std::string& checkpoint_path, const std::string& test_path, const std::string& report_path) {
  try {
    LoadedCheckpoint ckpt = load_checkpoint(checkpoint_path);
    const auto test_data = parse_aspect_file(test_path);
    if (test_data.empty()) {
      std::cerr << "error: test file " << test_path << " contains no sentences\n";
      return kExitConfig;
    }
    warn_unknown_tokens(ckpt.vocab, test_data);

    const EvalReport report = evaluate(*ckpt.model, ckpt.vocab, test_data, ckpt.train_config.iterations);
    std::cout << report.to_text();
    std::ofstream out(report_path);
    if (!out) throw std::runtime_error("cannot write " + report_path);
    out << report.to_json();
    return kExitOk;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

int cmd_tag(const std::string& checkpoint_path, const std::string& input_path) {
  try {
    LoadedCheckpoint ckpt = load_checkpoint(checkpoint_path);
    std::ifstream in(input_path);
    if (!in) {
      std::cerr << "error: cannot open " << input_path << "\n";
      return kExitRuntime;
    }
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
      if (!first) std::cout << "\n";
      first = false;
      const auto tokens = tokenize_line(line);
      if (tokens.empty()) continue;
      const auto terms = tag_sentence(*ckpt.model, ckpt.vocab, tokens, ckpt.train_config.iterations);
      for (const auto& term : terms) {
        if (term.kind == SpanKind::Aspect) {
          std::cout << "aspect\t" << term.text << "\t" << sentiment_name(term.sentiment) << "\n";
        } else {
          std::cout << "opinion\t" << term.text << "\n";
        }
      }
    }
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace absa
