/*
 * Copyright 2026 The ANRS Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "anrs/cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "anrs/aspect.hpp"
#include "anrs/checkpoint.hpp"
#include "anrs/config.hpp"
#include "anrs/errors.hpp"
#include "anrs/evaluation.hpp"
#include "anrs/hash.hpp"
#include "anrs/pipeline.hpp"
#include "anrs/training.hpp"

namespace anrs {
namespace {

namespace fs = std::filesystem;

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string views;
  bool no_aspects = false;
  bool deterministic = false;
  std::string run_dir;
  std::vector<std::string> overrides;
};

void AddCommon(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config_path, "key=value config file");
  cmd->add_option("--seed", o.seed, "training seed");
  cmd->add_option("--views", o.views,
                  "comma-separated subset of title,abstract,category");
  cmd->add_flag("--no-aspects", o.no_aspects,
                "disable the aspect extractor (ANRS-a variant)");
  cmd->add_flag("--deterministic", o.deterministic,
                "strictly sequential execution");
  cmd->add_option("--run-dir", o.run_dir, "run directory");
  cmd->add_option("--set", o.overrides, "extra key=value override")
      ->type_name("KEY=VALUE");
}

Config EffectiveConfig(const CommonOptions& o) {
  Config config = o.config_path.empty() ? Config{} : LoadConfig(o.config_path);
  for (const std::string& kv : o.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw InputError("--set expects KEY=VALUE, got '" + kv + "'");
    }
    SetConfigValue(config, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (o.seed) config.seed = *o.seed;
  if (!o.views.empty()) config.views = ParseViews(o.views);
  if (o.no_aspects) config.aspects_enabled = false;
  if (o.deterministic) config.deterministic = true;
  if (!o.run_dir.empty()) config.run_dir = o.run_dir;
  ValidateConfig(config);
  return config;
}

void WriteText(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
}

void EchoConfig(const Config& config, const std::string& command) {
  WriteText(fs::path(config.run_dir) / "config" / (command + ".conf"),
            DumpConfig(config));
}

fs::path BestCheckpointPath(const Config& config) {
  return fs::path(config.run_dir) / "checkpoints" / "best.ckpt";
}

int Preprocess(const Config& config, std::ostream& out) {
  RunLock lock(config.run_dir);
  EchoConfig(config, "preprocess");
  const Prepared p = Preprocess(config);
  if (p.cache_hit) {
    out << "cache hit: " << CorpusCachePath(config).string() << "\n";
  } else {
    out << "parsed " << p.news_parsed << " news (" << p.malformed_news
        << " malformed lines skipped)\n";
    for (const std::string& w : p.warnings) out << "warning: " << w << "\n";
    out << "cache written: " << CorpusCachePath(config).string() << "\n";
  }
  const Corpus& c = p.corpus;
  out << "news " << c.news.size() << ", vocabulary " << c.vocab.size()
      << ", categories " << c.categories.size() << ", subcategories "
      << c.subcategories.size() << "\n"
      << "impressions train " << c.train.size() << ", valid "
      << c.valid.size() << ", test " << c.test.size() << ", clicks "
      << CountClicks(c.train) + CountClicks(c.valid) << "\n";
  if (!p.cache_hit) {
    out << "dropped history entries " << p.dropped_history
        << ", embedding coverage " << p.embedding_coverage << "\n";
  }
  return kExitOk;
}

int TrainCommand(const Config& config, std::ostream& out, std::ostream& err) {
  RunLock lock(config.run_dir);
  EchoConfig(config, "train");
  const Prepared p = LoadPrepared(config);
  const fs::path log_path = fs::path(config.run_dir) / "train.log";
  std::ofstream log(log_path);
  if (!log) throw InputError("cannot write " + log_path.string());
  const ExperimentResult result =
      RunExperiment(config, p, [&](const EpochLog& epoch) {
        const std::string line = EpochLogLine(epoch);
        log << line << "\n" << std::flush;
        err << line << "\n";
      });
  const ModelShape shape{p.corpus.vocab.size(), p.corpus.categories.size(),
                         p.corpus.subcategories.size()};
  const fs::path ckpt = BestCheckpointPath(config);
  fs::create_directories(ckpt.parent_path());
  ModelParams best = result.training.best;
  SaveCheckpoint(ckpt, config, p.corpus.vocab.Hash(), shape, best);
  out << "samples " << result.samples.samples << " (skipped "
      << result.samples.skipped_without_negatives
      << " impressions without negatives)\n"
      << "best epoch " << result.training.best_epoch << ", validation AUC "
      << result.training.best_auc << "\n"
      << "checkpoint " << ckpt.string() << "\n";
  if (result.test) {
    WriteText(fs::path(config.run_dir) / "reports" / "test.json",
              ReportJson(*result.test).dump(2) + "\n");
    out << ReportText(*result.test);
  }
  return kExitOk;
}

Checkpoint LoadCompatible(const std::string& path, const Corpus& corpus) {
  Checkpoint ckpt = LoadCheckpoint(path);
  if (ckpt.vocab_hash != corpus.vocab.Hash()) {
    throw CompatibilityError("checkpoint vocabulary hash " +
                             HashToHex(ckpt.vocab_hash) +
                             " does not match the cache (" +
                             HashToHex(corpus.vocab.Hash()) + ")");
  }
  const ModelShape shape{corpus.vocab.size(), corpus.categories.size(),
                         corpus.subcategories.size()};
  if (ckpt.shape.categories != shape.categories ||
      ckpt.shape.subcategories != shape.subcategories) {
    throw CompatibilityError("checkpoint category tables do not match cache");
  }
  return ckpt;
}

int EvalCommand(const Config& config, const std::string& checkpoint,
                const std::string& split, std::ostream& out) {
  RunLock lock(config.run_dir);
  EchoConfig(config, "eval");
  const Prepared p = LoadPrepared(config);
  const std::string path =
      checkpoint.empty() ? BestCheckpointPath(config).string() : checkpoint;
  Checkpoint ckpt = LoadCompatible(path, p.corpus);
  const auto& imps = split == "train"   ? p.corpus.train
                     : split == "valid" ? p.corpus.valid
                                        : p.corpus.test;
  const MetricReport report =
      Evaluate(ckpt.params, ckpt.config, p.corpus, imps);
  WriteText(fs::path(config.run_dir) / "reports" / ("eval_" + split + ".json"),
            ReportJson(report).dump(2) + "\n");
  out << ReportText(report);
  return kExitOk;
}

int InspectCommand(const Config& config, const std::string& checkpoint,
                   std::size_t n, bool json, std::ostream& out) {
  RunLock lock(config.run_dir);
  EchoConfig(config, "inspect-aspects");
  const Prepared p = LoadPrepared(config);
  const std::string path =
      checkpoint.empty() ? BestCheckpointPath(config).string() : checkpoint;
  Checkpoint ckpt = LoadCompatible(path, p.corpus);
  if (!ckpt.config.aspects_enabled) {
    throw CompatibilityError("checkpoint was trained without aspects");
  }
  const auto report =
      AspectTopWords(ckpt.params.aspect_matrix, ckpt.params.word_embedding,
                     p.corpus.vocab, n);
  const std::string as_json = AspectReportJson(report).dump(2) + "\n";
  WriteText(fs::path(config.run_dir) / "reports" / "aspects.json", as_json);
  out << (json ? as_json : AspectReportText(report));
  return kExitOk;
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"ANRS aspect-driven news recommender", "anrs"};
  app.require_subcommand(1);
  CommonOptions common;
  std::string checkpoint;
  std::string split = "test";
  std::size_t top_n = 10;
  bool json = false;

  auto* pre = app.add_subcommand("preprocess", "parse inputs and build cache");
  auto* train = app.add_subcommand("train", "train and checkpoint the model");
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  auto* inspect =
      app.add_subcommand("inspect-aspects", "top words of every aspect");
  for (auto* cmd : {pre, train, eval, inspect}) AddCommon(cmd, common);
  for (auto* cmd : {eval, inspect}) {
    cmd->add_option("--checkpoint", checkpoint,
                    "checkpoint file (default: run dir best)");
  }
  eval->add_option("--split", split, "impressions to score")
      ->check(CLI::IsMember({"train", "valid", "test"}));
  inspect->add_option("-n,--top", top_n, "words per aspect");
  inspect->add_flag("--json", json, "print JSON instead of text");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }

  try {
    const Config config = EffectiveConfig(common);
    if (pre->parsed()) return Preprocess(config, out);
    if (train->parsed()) return TrainCommand(config, out, err);
    if (eval->parsed()) return EvalCommand(config, checkpoint, split, out);
    return InspectCommand(config, checkpoint, top_n, json, out);
  } catch (const InputError& e) {
    err << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const ShapeError& e) {
    err << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const CompatibilityError& e) {
    err << "compatibility error: " << e.what() << "\n";
    return kExitCompatibility;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace anrs
