// Copyright 2026 The vpcr Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "vpcr/cli.h"

#include <algorithm>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include "CLI11.hpp"
#include "json.hpp"
#include "vpcr/adjudication.h"
#include "vpcr/checkpoint.h"
#include "vpcr/corpus.h"
#include "vpcr/encoder.h"
#include "vpcr/evaluator.h"
#include "vpcr/manifest.h"
#include "vpcr/model.h"
#include "vpcr/trainer.h"
#include "vpcr/tree.h"

namespace vpcr {
namespace {

using nlohmann::json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string split;
  std::optional<double> lambda;
  std::string grid;
  std::string out;
  std::string labels_file;
  std::string embeddings;
  std::string contextual_vectors;
  std::string link_scope = "pronoun";

  std::string dialogues;
  std::string parses;
  std::string annotations;
  std::string dataset;
  std::string val;
  std::string checkpoint;
  std::string report;
  std::string split_ratios;
  std::string dialogue_id;
  int pool_size = 30;
  std::optional<int> max_steps;
  bool heatmap = true;
};

void WriteText(const std::string &path, const std::string &text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path);
}

std::string ManifestPath(const std::string &out) { return out + ".manifest.json"; }

std::vector<json> ReadJsonLines(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<json> lines;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      lines.push_back(json::parse(line));
    } catch (const json::exception &e) {
      throw ParseError(path + ": " + e.what(), number);
    }
  }
  return lines;
}

// Defaults, then the config file, then flags.
struct RunConfig {
  ModelConfig model;
  TrainConfig train;
};

RunConfig ResolveConfig(const Options &o, RunManifest &manifest) {
  RunConfig c;
  if (!o.config_path.empty()) {
    std::ifstream in(o.config_path);
    if (!in) throw std::runtime_error("cannot open config " + o.config_path);
    json j;
    try {
      in >> j;
    } catch (const json::exception &e) {
      throw std::runtime_error("malformed config " + o.config_path + ": " + e.what());
    }
    if (j.contains("model")) c.model.MergeJson(j.at("model"));
    if (j.contains("train")) c.train.MergeJson(j.at("train"));
    manifest.AddInput(o.config_path);
  }
  if (o.seed) {
    c.model.seed = *o.seed;
    c.train.shuffle_seed = *o.seed;
  }
  if (o.lambda) c.model.lambda_vis = *o.lambda;
  if (o.max_steps) c.train.max_steps = *o.max_steps;
  c.model.Validate();
  manifest.SetSeed(c.model.seed);
  manifest.SetConfig({{"model", c.model.ToJson()}, {"train", c.train.ToJson()}});
  return c;
}

LinkScope ParseLinkScope(const std::string &s) {
  if (s == "pronoun") return LinkScope::kPronounCandidates;
  if (s == "all") return LinkScope::kAllMentions;
  throw UsageError("--link-scope must be 'pronoun' or 'all'");
}

// Replaces label sets from a JSONL file of {dialogue_id, labels}.
void ApplyLabelsFile(const std::string &path, std::vector<Dialogue> &dialogues) {
  std::map<std::string, std::vector<Tokens>> labels;
  for (const json &j : ReadJsonLines(path)) {
    std::vector<Tokens> set;
    for (const auto &l : j.at("labels")) set.push_back(SplitWhitespace(Lowercase(l.get<std::string>())));
    labels[j.at("dialogue_id").get<std::string>()] = std::move(set);
  }
  for (Dialogue &d : dialogues) {
    auto it = labels.find(d.dialogue_id);
    if (it == labels.end()) continue;
    d.label_set.labels = it->second;
    d.Validate();
  }
}

std::vector<Dialogue> LoadInputDataset(const Options &o, const std::string &path,
                                       RunManifest &manifest) {
  manifest.AddInput(path);
  std::vector<Dialogue> dialogues = LoadDataset(path);
  if (!o.labels_file.empty()) {
    manifest.AddInput(o.labels_file);
    ApplyLabelsFile(o.labels_file, dialogues);
  }
  return dialogues;
}

std::vector<Dialogue> SelectSplit(const std::vector<Dialogue> &dialogues, Split split) {
  if (split == Split::kAny) return dialogues;
  std::vector<Dialogue> out;
  for (const Dialogue &d : dialogues) {
    if (d.split == split) out.push_back(d);
  }
  return out;
}

bool AnyTagged(const std::vector<Dialogue> &dialogues) {
  return std::any_of(dialogues.begin(), dialogues.end(),
                     [](const Dialogue &d) { return d.split != Split::kAny; });
}

std::unique_ptr<ContextualVectors> LoadContextual(const Options &o, RunManifest &manifest) {
  if (o.contextual_vectors.empty()) return nullptr;
  manifest.AddInput(o.contextual_vectors);
  return std::make_unique<ContextualVectors>(ContextualVectors::Load(o.contextual_vectors));
}

std::unique_ptr<ModelParameters> LoadModel(const Options &o, RunManifest &manifest,
                                           CheckpointInfo *info) {
  if (o.checkpoint.empty()) throw UsageError("--checkpoint is required");
  std::ifstream probe(o.checkpoint);
  if (!probe) throw std::runtime_error("checkpoint not found: " + o.checkpoint);
  manifest.AddInput(o.checkpoint);
  auto m = LoadCheckpoint(o.checkpoint, info);
  if (o.lambda) m->mutable_config().lambda_vis = *o.lambda;
  m->config().Validate();
  manifest.SetSeed(m->config().seed);
  manifest.SetConfig({{"model", m->config().ToJson()}});
  return m;
}

Split RequestedSplit(const Options &o) {
  if (o.split.empty()) return Split::kAny;
  try {
    return ParseSplit(o.split);
  } catch (const std::exception &) {
    throw UsageError("--split must be train, val or test");
  }
}

void RequireOut(const Options &o) {
  if (o.out.empty()) throw UsageError("--out is required");
}

// ---- ingest ---------------------------------------------------------------

Tokens LeafTokens(const ParseTree &tree) {
  Tokens t;
  for (const std::string &leaf : tree.leaves()) t.push_back(Lowercase(leaf));
  return t;
}

int CmdIngest(const Options &o, std::ostream &out, std::ostream &err) {
  if (o.dialogues.empty() || o.parses.empty()) throw UsageError("--dialogues and --parses are required");
  RequireOut(o);
  if (o.pool_size < 0) throw UsageError("--pool-size must be non-negative");
  RunManifest manifest("ingest");
  manifest.AddInput(o.dialogues);
  manifest.AddInput(o.parses);
  const std::uint64_t seed = o.seed.value_or(1);
  manifest.SetSeed(seed);
  manifest.SetConfig({{"pool_size", o.pool_size}});

  std::map<std::string, json> parses;
  for (const json &j : ReadJsonLines(o.parses)) {
    try {
      parses[j.at("dialogue_id").get<std::string>()] = j;
    } catch (const json::exception &e) {
      throw ParseError(o.parses + ": " + e.what());
    }
  }
  auto parse_at = [](const json &j, const std::string &where) {
    try {
      return ParseTree::Parse(j.get<std::string>());
    } catch (const ParseError &e) {
      throw ParseError(where + ": " + e.what());
    }
  };

  std::vector<Dialogue> dialogues;
  std::vector<std::vector<Mention>> caption_nps;
  int line = 0;
  for (const json &raw : ReadJsonLines(o.dialogues)) {
    ++line;
    Dialogue d;
    try {
      d.dialogue_id = raw.at("dialogue_id").get<std::string>();
      if (raw.contains("split")) d.split = ParseSplit(raw.at("split").get<std::string>());
      auto it = parses.find(d.dialogue_id);
      if (it == parses.end()) throw ParseError("no parse for dialogue " + d.dialogue_id, line);
      const json &p = it->second;
      const auto &turns = raw.at("turns");
      if (!p.contains("turns") || p.at("turns").size() < turns.size()) {
        throw ParseError("dialogue " + d.dialogue_id + ": missing parse for turn " +
                             std::to_string(p.contains("turns") ? p.at("turns").size() : 0),
                         line);
      }
      if (p.at("turns").size() != turns.size()) {
        throw ParseError("dialogue " + d.dialogue_id + ": parse has extra turns", line);
      }
      std::vector<Mention> caption_mentions;
      if (raw.contains("caption")) {
        if (!p.contains("caption")) {
          throw ParseError("dialogue " + d.dialogue_id + ": missing caption parse", line);
        }
        const ParseTree tree = parse_at(p.at("caption"), o.parses + " caption of " + d.dialogue_id);
        d.caption = LeafTokens(tree);
        caption_mentions = ExtractNounPhrases(tree, 0);
        for (Mention &m : caption_mentions) {
          for (auto &t : m.tokens) t = Lowercase(t);
        }
      }
      for (std::size_t t = 0; t < turns.size(); ++t) {
        const ParseTree tree = parse_at(p.at("turns")[t], o.parses + " turn " + std::to_string(t) +
                                                              " of " + d.dialogue_id);
        Tokens tokens = LeafTokens(tree);
        const Tokens text = SplitWhitespace(Lowercase(turns[t].get<std::string>()));
        if (text != tokens) {
          throw ParseError("dialogue " + d.dialogue_id + ": turn " + std::to_string(t) +
                               " text does not match its parse leaves",
                           line);
        }
        const int turn = static_cast<int>(t);
        std::vector<Mention> pronouns = ExtractPronouns(tokens, turn);
        std::set<Span> pronoun_spans;
        for (const Mention &m : pronouns) pronoun_spans.insert(m.span);
        for (Mention &np : ExtractNounPhrases(tree, turn)) {
          if (pronoun_spans.count(np.span)) continue;
          for (auto &tok : np.tokens) tok = Lowercase(tok);
          d.candidates.push_back(std::move(np));
        }
        for (Mention &m : pronouns) {
          PronounInstance pi;
          pi.mention = std::move(m);
          d.pronouns.push_back(std::move(pi));
        }
        d.turns.push_back(std::move(tokens));
      }
      if (raw.contains("labels")) {
        for (const auto &l : raw.at("labels")) {
          d.label_set.labels.push_back(SplitWhitespace(Lowercase(l.get<std::string>())));
        }
      }
      caption_nps.push_back(caption_mentions);
    } catch (const json::exception &e) {
      throw ParseError(o.dialogues + ": " + e.what(), line);
    }
    if (d.pronouns.empty()) err << "warning: dialogue " << d.dialogue_id << " has no target pronouns\n";
    dialogues.push_back(std::move(d));
  }

  // Pools: caption noun phrases, then seeded negatives from other captions.
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < dialogues.size(); ++i) {
    Dialogue &d = dialogues[i];
    std::set<Tokens> seen;
    auto add = [&d, &seen](const Tokens &tokens, PoolSource source) {
      if (!seen.insert(tokens).second) return;
      const int index = static_cast<int>(d.pool.entries.size());
      d.pool.entries.push_back({{Segment::kPool, index, 0, static_cast<int>(tokens.size())},
                                tokens,
                                MentionType::kNounPhrase});
      d.pool.sources.push_back(source);
    };
    for (const Mention &m : caption_nps[i]) {
      if (static_cast<int>(d.pool.size()) >= o.pool_size) break;
      add(m.tokens, PoolSource::kCaption);
    }
    std::vector<Tokens> negatives;
    for (std::size_t j = 0; j < dialogues.size(); ++j) {
      if (j == i) continue;
      for (const Mention &m : caption_nps[j]) negatives.push_back(m.tokens);
    }
    std::shuffle(negatives.begin(), negatives.end(), rng);
    for (const Tokens &t : negatives) {
      if (static_cast<int>(d.pool.size()) >= o.pool_size) break;
      add(t, PoolSource::kNegativeSample);
    }
    d.Finalize();
    d.Validate();
  }

  WriteText(o.out, SerializeDataset(dialogues));
  manifest.AddOutput(o.out);
  manifest.SetResult({{"dialogues", dialogues.size()}});
  manifest.Write(ManifestPath(o.out));
  out << "ingested " << dialogues.size() << " dialogues into " << o.out << "\n";
  return 0;
}

// ---- adjudicate / stats ---------------------------------------------------

std::vector<double> ParseRatios(const std::string &text) {
  std::vector<double> ratios;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, '/')) {
    try {
      std::size_t used = 0;
      ratios.push_back(std::stod(part, &used));
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception &) {
      throw UsageError("bad --split-ratios '" + text + "'");
    }
  }
  if (ratios.size() != 3) throw UsageError("--split-ratios takes train/val/test");
  return ratios;
}

int CmdAdjudicate(const Options &o, std::ostream &out, std::ostream &err) {
  if (o.annotations.empty() || o.dataset.empty()) {
    throw UsageError("--annotations and --dataset are required");
  }
  RequireOut(o);
  RunManifest manifest("adjudicate");
  manifest.AddInput(o.annotations);
  manifest.AddInput(o.dataset);
  const std::vector<Dialogue> dialogues = LoadDataset(o.dataset);
  const std::vector<AnnotationRecord> records = LoadAnnotations(o.annotations);
  AdjudicationOutput result = Adjudicate(dialogues, records);
  for (const auto &w : result.warnings) err << "warning: " << w << "\n";

  std::vector<Dialogue> final_set = result.dialogues;
  json config = json::object();
  if (!o.split_ratios.empty()) {
    const std::uint64_t seed = o.seed.value_or(1);
    manifest.SetSeed(seed);
    config["split_ratios"] = o.split_ratios;
    DatasetSplit s = SplitDataset(result.dialogues, ParseRatios(o.split_ratios), seed);
    std::map<std::string, Split> tag;
    for (const auto &d : s.train) tag[d.dialogue_id] = Split::kTrain;
    for (const auto &d : s.val) tag[d.dialogue_id] = Split::kVal;
    for (const auto &d : s.test) tag[d.dialogue_id] = Split::kTest;
    for (Dialogue &d : final_set) d.split = tag.at(d.dialogue_id);
  }
  manifest.SetConfig(config);

  WriteText(o.out, SerializeDataset(final_set));
  manifest.AddOutput(o.out);
  json per_worker = json::array();
  for (const auto &w : result.per_worker) per_worker.push_back({{"worker_id", w.worker_id}, {"f1", w.f1}});
  json clusters = json::object();
  for (const auto &[id, adj] : result.adjudicated) clusters[id] = ClustersToJson(adj.clusters);
  const json report = {{"iaa", result.iaa},
                       {"retained_fraction", result.retained_fraction},
                       {"per_worker", per_worker},
                       {"statistics", ComputeCorpusStatistics(final_set).ToJson()},
                       {"clusters", clusters},
                       {"warnings", result.warnings}};
  const std::string report_path = o.report.empty() ? o.out + ".report.json" : o.report;
  WriteText(report_path, report.dump(2) + "\n");
  manifest.AddOutput(report_path);
  manifest.SetResult({{"iaa", result.iaa}, {"retained_fraction", result.retained_fraction}});
  manifest.Write(ManifestPath(o.out));
  out << "adjudicated " << final_set.size() << " dialogues, IAA " << result.iaa << "\n";
  return 0;
}

int CmdStats(const Options &o, std::ostream &out, std::ostream &) {
  if (o.dataset.empty()) throw UsageError("--dataset is required");
  RunManifest manifest("stats");
  manifest.AddInput(o.dataset);
  const auto dialogues = SelectSplit(LoadDataset(o.dataset), RequestedSplit(o));
  const json stats = ComputeCorpusStatistics(dialogues).ToJson();
  if (o.out.empty()) {
    out << stats.dump(2) << "\n";
    return 0;
  }
  WriteText(o.out, stats.dump(2) + "\n");
  manifest.AddOutput(o.out);
  manifest.Write(ManifestPath(o.out));
  return 0;
}

// ---- train / eval / sweep / predict ----------------------------------------

struct Splits {
  std::vector<Dialogue> train, val, test;
};

Splits TrainingSplits(const Options &o, RunManifest &manifest) {
  if (o.dataset.empty()) throw UsageError("--dataset is required");
  const std::vector<Dialogue> all = LoadInputDataset(o, o.dataset, manifest);
  Splits s;
  if (AnyTagged(all)) {
    s.train = SelectSplit(all, Split::kTrain);
    s.val = SelectSplit(all, Split::kVal);
    s.test = SelectSplit(all, Split::kTest);
  } else {
    s.train = all;
  }
  if (!o.val.empty()) s.val = LoadInputDataset(o, o.val, manifest);
  if (s.train.empty()) throw std::runtime_error("no training dialogues in " + o.dataset);
  return s;
}

std::vector<Dialogue> MaybeExpand(const std::vector<Dialogue> &ds, const TrainConfig &tc) {
  if (!tc.exhaustive_spans) return ds;
  std::vector<Dialogue> out;
  for (const Dialogue &d : ds) out.push_back(ExpandToAllSpans(d, tc.max_span_width));
  return out;
}

int CmdTrain(const Options &o, std::ostream &out, std::ostream &err) {
  RequireOut(o);
  RunManifest manifest("train");
  const RunConfig c = ResolveConfig(o, manifest);
  Splits s = TrainingSplits(o, manifest);
  const auto contextual = LoadContextual(o, manifest);
  const LinkScope scope = ParseLinkScope(o.link_scope);
  s.train = MaybeExpand(s.train, c.train);
  s.val = MaybeExpand(s.val, c.train);

  ModelParameters init(c.model, Vocabulary::FromDialogues(s.train));
  if (!o.embeddings.empty()) {
    manifest.AddInput(o.embeddings);
    const int loaded = init.LoadStaticEmbeddings(o.embeddings);
    err << "loaded " << loaded << " static embeddings\n";
  }
  Validator validate;
  if (!s.val.empty()) {
    validate = [&](const ModelParameters &m) {
      const double f1 = Evaluate(m, s.val, contextual.get(), scope).overall.f1;
      err << "validation overall F1 " << f1 << "\n";
      return f1;
    };
  }
  const TrainState state = Train(s.train, init, c.train, validate, contextual.get());
  const CheckpointInfo info{validate ? state.best_step : state.step,
                            validate ? state.best_validation_f1 : -1.0};
  SaveCheckpoint(o.out, *state.best, info);
  manifest.AddOutput(o.out);
  manifest.SetResult({{"steps", state.step},
                      {"best_step", info.step},
                      {"best_validation_f1", info.validation_f1},
                      {"final_loss", state.losses.empty() ? 0.0 : state.losses.back()}});
  manifest.Write(ManifestPath(o.out));
  out << "trained " << state.step << " steps; checkpoint " << o.out << "\n";
  return 0;
}

int CmdEval(const Options &o, std::ostream &out, std::ostream &) {
  RunManifest manifest("eval");
  const auto m = LoadModel(o, manifest, nullptr);
  if (o.dataset.empty()) throw UsageError("--dataset is required");
  const auto dialogues = SelectSplit(LoadInputDataset(o, o.dataset, manifest), RequestedSplit(o));
  if (dialogues.empty()) throw std::runtime_error("no dialogues to evaluate");
  const auto contextual = LoadContextual(o, manifest);
  const EvalReport report = Evaluate(*m, dialogues, contextual.get(), ParseLinkScope(o.link_scope));
  json j = report.ToJson();
  j["lambda"] = m->config().lambda_vis;
  if (o.out.empty()) {
    out << j.dump(2) << "\n";
  } else {
    WriteText(o.out, j.dump(2) + "\n");
    manifest.AddOutput(o.out);
    manifest.SetResult({{"overall_f1", report.overall.f1}});
    manifest.Write(ManifestPath(o.out));
  }
  return 0;
}

int CmdSweep(const Options &o, std::ostream &out, std::ostream &err) {
  RequireOut(o);
  RunManifest manifest("sweep");
  const RunConfig c = ResolveConfig(o, manifest);
  std::vector<double> grid;
  try {
    grid = ParseGrid(o.grid);
  } catch (const std::invalid_argument &e) {
    throw UsageError(e.what());
  }
  const Splits s = TrainingSplits(o, manifest);
  if (s.val.empty() || s.test.empty()) throw std::runtime_error("sweep needs val and test dialogues");
  const auto contextual = LoadContextual(o, manifest);
  const auto points = LambdaSweep(MaybeExpand(s.train, c.train), MaybeExpand(s.val, c.train),
                                  s.test, c.model, c.train, grid, contextual.get());
  json rows = json::array();
  for (const auto &p : points) {
    json r = p.report.ToJson();
    r["lambda"] = p.lambda;
    r["validation_f1"] = p.validation_f1;
    rows.push_back(r);
    err << "lambda " << p.lambda << " overall F1 " << p.report.overall.f1 << "\n";
  }
  WriteText(o.out, rows.dump(2) + "\n");
  manifest.AddOutput(o.out);
  manifest.SetResult({{"points", points.size()}});
  manifest.Write(ManifestPath(o.out));
  out << "swept " << points.size() << " values of lambda\n";
  return 0;
}

int CmdPredict(const Options &o, std::ostream &out, std::ostream &) {
  RunManifest manifest("predict");
  const auto m = LoadModel(o, manifest, nullptr);
  if (o.dataset.empty()) throw UsageError("--dataset is required");
  auto dialogues = SelectSplit(LoadInputDataset(o, o.dataset, manifest), RequestedSplit(o));
  if (!o.dialogue_id.empty()) {
    std::erase_if(dialogues, [&](const Dialogue &d) { return d.dialogue_id != o.dialogue_id; });
    if (dialogues.empty()) throw std::runtime_error("unknown dialogue_id " + o.dialogue_id);
  }
  const auto contextual = LoadContextual(o, manifest);
  const ResolveOptions options{.lambda = m->config().lambda_vis,
                               .heatmap = o.heatmap,
                               .scope = ParseLinkScope(o.link_scope)};
  std::string text;
  for (const Dialogue &d : dialogues) {
    text += ResolveDialogue(*m, d, contextual.get(), options).ToJson(d).dump() + "\n";
  }
  if (o.out.empty()) {
    out << text;
    return 0;
  }
  WriteText(o.out, text);
  manifest.AddOutput(o.out);
  manifest.SetResult({{"dialogues", dialogues.size()}});
  manifest.Write(ManifestPath(o.out));
  return 0;
}

void AddCommon(CLI::App *cmd, Options &o) {
  cmd->add_option("--config", o.config_path, "JSON file with \"model\" and \"train\" sections");
  cmd->add_option("--seed", o.seed, "Random seed");
  cmd->add_option("--out", o.out, "Output path");
  cmd->add_option("--labels-file", o.labels_file, "JSONL {dialogue_id, labels} replacing label sets");
  cmd->add_option("--contextual-vectors", o.contextual_vectors, "JSONL per-token contextual vectors");
  cmd->add_option("--link-scope", o.link_scope, "Resolution scope: pronoun or all");
}

}  // namespace

int RunCli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  CLI::App app{"Visual-aware pronoun coreference resolution for dialogues", "vpcr"};
  app.require_subcommand(1);
  Options o;

  auto *ingest = app.add_subcommand("ingest", "Build a dataset from raw dialogues and parses");
  ingest->add_option("--dialogues", o.dialogues, "JSONL {dialogue_id, caption, turns, labels}");
  ingest->add_option("--parses", o.parses, "JSONL {dialogue_id, caption, turns} bracketed trees");
  ingest->add_option("--pool-size", o.pool_size, "Mention pool size");
  ingest->add_option("--seed", o.seed, "Seed for negative pool samples");
  ingest->add_option("--out", o.out, "Output dataset");

  auto *adjudicate = app.add_subcommand("adjudicate", "Aggregate worker annotations");
  adjudicate->add_option("--annotations", o.annotations, "Annotation JSONL");
  adjudicate->add_option("--dataset", o.dataset, "Ingested dataset");
  adjudicate->add_option("--split-ratios", o.split_ratios, "train/val/test ratios, e.g. 8/1/1");
  adjudicate->add_option("--seed", o.seed, "Split seed");
  adjudicate->add_option("--report", o.report, "Report path (default <out>.report.json)");
  adjudicate->add_option("--out", o.out, "Adjudicated dataset");

  auto *stats = app.add_subcommand("stats", "Corpus statistics");
  stats->add_option("--dataset", o.dataset, "Dataset");
  stats->add_option("--split", o.split, "Restrict to one split");
  stats->add_option("--out", o.out, "Output JSON (default stdout)");

  auto *train = app.add_subcommand("train", "Train a model");
  AddCommon(train, o);
  train->add_option("--dataset", o.dataset, "Dataset; split tags select train and val");
  train->add_option("--val", o.val, "Separate validation dataset");
  train->add_option("--lambda", o.lambda, "Visual weight");
  train->add_option("--embeddings", o.embeddings, "Static embeddings, \"token v1 .. vd\" lines");
  train->add_option("--max-steps", o.max_steps, "Step cap");

  auto *eval = app.add_subcommand("eval", "Evaluate a checkpoint");
  AddCommon(eval, o);
  eval->add_option("--checkpoint", o.checkpoint, "Checkpoint");
  eval->add_option("--dataset", o.dataset, "Dataset");
  eval->add_option("--split", o.split, "Restrict to one split");
  eval->add_option("--lambda", o.lambda, "Override the visual weight");

  auto *sweep = app.add_subcommand("sweep", "Retrain and evaluate over a grid of lambda");
  AddCommon(sweep, o);
  sweep->add_option("--dataset", o.dataset, "Dataset with train/val/test tags");
  sweep->add_option("--val", o.val, "Separate validation dataset");
  sweep->add_option("--grid", o.grid, "start:end:step")->required();
  sweep->add_option("--max-steps", o.max_steps, "Step cap");

  auto *predict = app.add_subcommand("predict", "Dump chains, links and alignment heatmaps");
  AddCommon(predict, o);
  predict->add_option("--checkpoint", o.checkpoint, "Checkpoint");
  predict->add_option("--dataset", o.dataset, "Dataset");
  predict->add_option("--split", o.split, "Restrict to one split");
  predict->add_option("--dialogue-id", o.dialogue_id, "Only this dialogue");
  predict->add_option("--lambda", o.lambda, "Override the visual weight");
  predict->add_flag("--heatmap,!--no-heatmap", o.heatmap, "Include alignment heatmaps");

  std::vector<std::string> reversed(args.begin() + (args.empty() ? 0 : 1), args.end());
  std::reverse(reversed.begin(), reversed.end());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError &e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    err << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (*ingest) return CmdIngest(o, out, err);
    if (*adjudicate) return CmdAdjudicate(o, out, err);
    if (*stats) return CmdStats(o, out, err);
    if (*train) return CmdTrain(o, out, err);
    if (*eval) return CmdEval(o, out, err);
    if (*sweep) return CmdSweep(o, out, err);
    if (*predict) return CmdPredict(o, out, err);
  } catch (const UsageError &e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const ParseError &e) {
    err << "error: " << e.what();
    if (e.line() > 0) err << " (line " << e.line() << ")";
    err << "\n";
    return 1;
  } catch (const ValidationError &e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace vpcr
