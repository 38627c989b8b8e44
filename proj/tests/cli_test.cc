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

#include <filesystem>
#include <sstream>

#include <gtest/gtest.h>

#include "test_util.h"
#include "vpcr/adjudication.h"
#include "vpcr/checkpoint.h"
#include "vpcr/synthetic.h"

namespace vpcr {
namespace {

using nlohmann::json;
using testing::DataPath;
using testing::ReadFile;
using testing::TempDir;

struct CliResult {
  int status;
  std::string out;
  std::string err;
};

CliResult Cli(const std::vector<std::string> &args) {
  std::vector<std::string> argv = {"vpcr"};
  argv.insert(argv.end(), args.begin(), args.end());
  std::ostringstream out, err;
  const int status = RunCli(argv, out, err);
  return {status, out.str(), err.str()};
}

constexpr char kRaw[] =
    R"j({"dialogue_id":"f2","caption":"A man with a dog is walking on the grass",)j"
    R"j("turns":["is he happy ?","does the dog like it ?"],"labels":["person","dog"]})j"
    "\n"
    R"j({"dialogue_id":"quiet","caption":"the sky","turns":["what color is the sky ?"],"labels":[]})j"
    "\n";

constexpr char kParses[] =
    R"j({"dialogue_id":"f2","caption":"(ROOT (S (NP (NP (DT A) (NN man)) (PP (IN with) (NP (DT a) (NN dog)))) (VP (VBZ is) (VP (VBG walking) (PP (IN on) (NP (DT the) (NN grass)))))))",)j"
    R"j("turns":["(ROOT (SQ (VBZ is) (NP (PRP he)) (ADJP (JJ happy)) (. ?)))",)j"
    R"j("(ROOT (SQ (VBZ does) (NP (DT the) (NN dog)) (VP (VB like) (NP (PRP it))) (. ?)))"]})j"
    "\n"
    R"j({"dialogue_id":"quiet","caption":"(ROOT (NP (DT the) (NN sky)))",)j"
    R"j("turns":["(ROOT (SBARQ (WHNP (WP what) (NN color)) (SQ (VBZ is) (NP (DT the) (NN sky))) (. ?)))"]})j"
    "\n";

TEST(CliIngestTest, CaptionNounPhrasesFillThePool) {
  TempDir dir;
  const CliResult r = Cli({"ingest", "--dialogues", dir.Write("raw.jsonl", kRaw), "--parses",
                     dir.Write("parses.jsonl", kParses), "--pool-size", "4", "--seed", "3",
                     "--out", dir.File("ds.jsonl")});
  ASSERT_EQ(r.status, 0) << r.err;
  EXPECT_NE(r.err.find("quiet has no target pronouns"), std::string::npos);
  const auto ds = LoadDataset(dir.File("ds.jsonl"));
  ASSERT_EQ(ds.size(), 2u);
  const Dialogue &d = ds[0];
  ASSERT_GE(d.pool.size(), 3u);
  EXPECT_EQ(d.pool.entries[0].Text(), "a man");
  EXPECT_EQ(d.pool.entries[1].Text(), "a dog");
  EXPECT_EQ(d.pool.entries[2].Text(), "the grass");
  EXPECT_EQ(d.pool.sources[2], PoolSource::kCaption);
  // The fourth entry is a negative sample from the other caption.
  ASSERT_EQ(d.pool.size(), 4u);
  EXPECT_EQ(d.pool.entries[3].Text(), "the sky");
  EXPECT_EQ(d.pool.sources[3], PoolSource::kNegativeSample);
  ASSERT_EQ(d.pronouns.size(), 2u);
  EXPECT_EQ(d.pronouns[0].anaphoricity, Anaphoricity::kUnannotated);
  // "(NP (PRP he))" coincides with the pronoun and is not a candidate.
  ASSERT_EQ(d.candidates.size(), 1u);
  EXPECT_EQ(d.candidates[0].Text(), "the dog");
  EXPECT_TRUE(std::filesystem::exists(dir.File("ds.jsonl.manifest.json")));
}

TEST(CliIngestTest, Idempotent) {
  TempDir dir;
  const auto raw = dir.Write("raw.jsonl", kRaw), parses = dir.Write("parses.jsonl", kParses);
  ASSERT_EQ(Cli({"ingest", "--dialogues", raw, "--parses", parses, "--out", dir.File("a")}).status, 0);
  ASSERT_EQ(Cli({"ingest", "--dialogues", raw, "--parses", parses, "--out", dir.File("b")}).status, 0);
  EXPECT_EQ(ReadFile(dir.File("a")), ReadFile(dir.File("b")));
}

TEST(CliIngestTest, MissingParseIsAnError) {
  TempDir dir;
  const std::string parses(kParses);
  const CliResult r = Cli({"ingest", "--dialogues", dir.Write("raw.jsonl", kRaw), "--parses",
                     dir.Write("parses.jsonl", parses.substr(0, parses.find('\n') + 1)), "--out",
                     dir.File("ds.jsonl")});
  EXPECT_NE(r.status, 0);
  EXPECT_NE(r.err.find("no parse for dialogue quiet"), std::string::npos);
}

TEST(CliIngestTest, MismatchedTurnTextIsAnError) {
  TempDir dir;
  std::string raw(kRaw);
  raw.replace(raw.find("is he happy"), 11, "is he sad");
  const CliResult r = Cli({"ingest", "--dialogues", dir.Write("raw.jsonl", raw), "--parses",
                     dir.Write("parses.jsonl", kParses), "--out", dir.File("ds.jsonl")});
  EXPECT_EQ(r.status, 1);
}

std::string DatasetLine(const std::string &id) {
  std::istringstream in(ReadFile(DataPath("adjudication/dataset.jsonl")));
  std::string line;
  while (std::getline(in, line)) {
    if (json::parse(line)["dialogue_id"] == id) return line + "\n";
  }
  return "";
}

TEST(CliAdjudicateTest, TwoAgreeingWorkers) {
  TempDir dir;
  std::string annotations;
  for (const auto &r : LoadAnnotations(DataPath("adjudication/annotations.jsonl"))) {
    if (r.dialogue_id == "g2" && (r.worker_id == "w1" || r.worker_id == "w2")) {
      annotations += AnnotationToJson(r).dump() + "\n";
    }
  }
  const CliResult r = Cli({"adjudicate", "--annotations", dir.Write("ann.jsonl", annotations),
                     "--dataset", dir.Write("ds.jsonl", DatasetLine("g2")), "--out",
                     dir.File("gold.jsonl")});
  ASSERT_EQ(r.status, 0) << r.err;
  const json report = json::parse(ReadFile(dir.File("gold.jsonl.report.json")));
  EXPECT_DOUBLE_EQ(report["iaa"].get<double>(), 100.0);
  EXPECT_DOUBLE_EQ(report["retained_fraction"].get<double>(), 1.0);
  EXPECT_EQ(report["clusters"]["g2"].size(), 2u);
  const auto gold = LoadDataset(dir.File("gold.jsonl"));
  ASSERT_EQ(gold.size(), 1u);
  EXPECT_EQ(gold[0].pronouns[0].gold_antecedents,
            (std::vector<MentionRef>{{RefKind::kPool, 0}, {RefKind::kCandidate, 0}}));
  EXPECT_EQ(gold[0].pronouns[2].gold_antecedents,
            (std::vector<MentionRef>{{RefKind::kCandidate, 1}}));
}

TEST(CliAdjudicateTest, GoldenFixtureReport) {
  TempDir dir;
  const CliResult r = Cli({"adjudicate", "--annotations", DataPath("adjudication/annotations.jsonl"),
                     "--dataset", DataPath("adjudication/dataset.jsonl"), "--out",
                     dir.File("gold.jsonl")});
  ASSERT_EQ(r.status, 0) << r.err;
  const json golden = json::parse(ReadFile(DataPath("adjudication/golden.json")));
  const json report = json::parse(ReadFile(dir.File("gold.jsonl.report.json")));
  EXPECT_NEAR(report["iaa"].get<double>(), golden["iaa"].get<double>(), 1e-9);
  EXPECT_EQ(report["warnings"].size(), 1u);
  EXPECT_NE(r.err.find("warning"), std::string::npos);
}

TEST(CliAdjudicateTest, NoValidAnnotations) {
  TempDir dir;
  std::string annotations;
  for (auto r : LoadAnnotations(DataPath("adjudication/annotations.jsonl"))) {
    r.checkpoint_passed = false;
    annotations += AnnotationToJson(r).dump() + "\n";
  }
  const CliResult r = Cli({"adjudicate", "--annotations", dir.Write("ann.jsonl", annotations),
                     "--dataset", DataPath("adjudication/dataset.jsonl"), "--out",
                     dir.File("gold.jsonl")});
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.err.find("no valid annotations"), std::string::npos);
}

std::string WriteDataset(const TempDir &dir, const std::string &name,
                         const std::vector<Dialogue> &ds) {
  std::string text;
  for (const auto &d : ds) text += DialogueToJson(d).dump() + "\n";
  return dir.Write(name, text);
}

TEST(CliAdjudicateTest, SplitIsDeterministic) {
  std::vector<Dialogue> ds;
  for (int i = 0; i < 10; ++i) {
    Dialogue d = LoadDataset(DataPath("adjudication/dataset.jsonl"))[0];
    d.dialogue_id = "d" + std::to_string(i);
    ds.push_back(d);
  }
  TempDir dir;
  const auto dataset = WriteDataset(dir, "ds.jsonl", ds);
  std::string annotations;
  for (const auto &d : ds) {
    AnnotationRecord r{d.dialogue_id, "w1", true,
                       {{0, ResponseType::kNounPhrases, {{RefKind::kPool, 0}}},
                        {1, ResponseType::kNounPhrases, {{RefKind::kPool, 0}}},
                        {2, ResponseType::kNonReferential, {}}}};
    annotations += AnnotationToJson(r).dump() + "\n";
  }
  const auto ann = dir.Write("ann.jsonl", annotations);
  for (const char *name : {"a.jsonl", "b.jsonl"}) {
    ASSERT_EQ(Cli({"adjudicate", "--annotations", ann, "--dataset", dataset, "--split-ratios",
                   "8/1/1", "--seed", "7", "--out", dir.File(name)})
                  .status,
              0);
  }
  EXPECT_EQ(ReadFile(dir.File("a.jsonl")), ReadFile(dir.File("b.jsonl")));
  int counts[4] = {0, 0, 0, 0};
  for (const auto &d : LoadDataset(dir.File("a.jsonl"))) ++counts[static_cast<int>(d.split)];
  EXPECT_EQ(counts[static_cast<int>(Split::kTrain)], 8);
  EXPECT_EQ(counts[static_cast<int>(Split::kVal)], 1);
  EXPECT_EQ(counts[static_cast<int>(Split::kTest)], 1);
  const CliResult bad = Cli({"adjudicate", "--annotations", ann, "--dataset", dataset,
                       "--split-ratios", "8/1", "--out", dir.File("c.jsonl")});
  EXPECT_EQ(bad.status, 2);
}

TEST(CliStatsTest, PrintsStatistics) {
  TempDir dir;
  const auto ds = WriteDataset(dir, "ds.jsonl", GenerateOverfitSuite(5, 1));
  const CliResult r = Cli({"stats", "--dataset", ds});
  ASSERT_EQ(r.status, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_EQ(j["dialogues"], 5);
}

class CliModelTest : public ::testing::Test {
 protected:
  void SetUp() override {
    auto train = GenerateOverfitSuite(8, 1);
    auto val = GenerateOverfitSuite(3, 2);
    auto test = GenerateOverfitSuite(3, 3);
    std::vector<Dialogue> all;
    for (auto *part : {&train, &val, &test}) {
      const Split s = part == &train ? Split::kTrain : part == &val ? Split::kVal : Split::kTest;
      for (Dialogue d : *part) {
        d.dialogue_id = std::string(SplitName(s)) + "-" + d.dialogue_id;
        d.split = s;
        all.push_back(d);
      }
    }
    dataset_ = WriteDataset(dir_, "ds.jsonl", all);
    config_ = dir_.Write("config.json", json{{"model", testing::TinyConfig().ToJson()},
                                             {"train", {{"max_steps", 20}, {"eval_every", 10}}}}
                                            .dump());
  }

  std::string TrainModel(const std::string &name, double lambda = 0.4) {
    const CliResult r = Cli({"train", "--config", config_, "--dataset", dataset_, "--lambda",
                       std::to_string(lambda), "--seed", "5", "--out", dir_.File(name)});
    EXPECT_EQ(r.status, 0) << r.err;
    return dir_.File(name);
  }

  TempDir dir_;
  std::string dataset_;
  std::string config_;
};

TEST_F(CliModelTest, TrainThenEvalReportsNineCells) {
  const auto ckpt = TrainModel("m.json");
  const json manifest = json::parse(ReadFile(ckpt + ".manifest.json"));
  EXPECT_EQ(manifest["command"], "train");
  EXPECT_EQ(manifest["seed"], 5);
  EXPECT_FALSE(manifest["inputs"].empty());
  const CliResult r = Cli({"eval", "--checkpoint", ckpt, "--dataset", dataset_, "--split", "test"});
  ASSERT_EQ(r.status, 0) << r.err;
  const json j = json::parse(r.out);
  for (const char *category : {"discussed", "not_discussed", "overall"}) {
    for (const char *metric : {"precision", "recall", "f1"}) {
      EXPECT_TRUE(j[category].contains(metric));
    }
  }
  EXPECT_DOUBLE_EQ(j["lambda"].get<double>(), 0.4);
  EXPECT_EQ(Cli({"eval", "--checkpoint", ckpt, "--dataset", dataset_, "--link-scope", "bogus"})
                .status,
            2);
  CheckpointInfo info;
  LoadCheckpoint(ckpt, &info);
  EXPECT_GE(info.validation_f1, 0.0);
}

TEST_F(CliModelTest, TrainingIsReproducible) {
  const auto a = TrainModel("a.json"), b = TrainModel("b.json");
  EXPECT_EQ(ReadFile(a), ReadFile(b));
}

TEST_F(CliModelTest, SweepWritesOneRowPerLambda) {
  const CliResult r = Cli({"sweep", "--config", config_, "--dataset", dataset_, "--grid", "0:1:0.1",
                     "--max-steps", "2", "--out", dir_.File("sweep.json")});
  ASSERT_EQ(r.status, 0) << r.err;
  const json rows = json::parse(ReadFile(dir_.File("sweep.json")));
  ASSERT_EQ(rows.size(), 11u);
  EXPECT_NEAR(rows[10]["lambda"].get<double>(), 1.0, 1e-12);
  EXPECT_TRUE(rows[3].contains("overall"));
  EXPECT_EQ(Cli({"sweep", "--dataset", dataset_, "--out", dir_.File("x")}).status, 2);
  EXPECT_EQ(Cli({"sweep", "--dataset", dataset_, "--grid", "1:0:0.1", "--out", dir_.File("x")}).status, 2);
}

TEST_F(CliModelTest, PredictDumpsChainsAndHeatmaps) {
  const auto ckpt = TrainModel("m.json");
  const CliResult r = Cli({"predict", "--checkpoint", ckpt, "--dataset", dataset_, "--dialogue-id",
                     "test-overfit-0"});
  ASSERT_EQ(r.status, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_EQ(j["dialogue_id"], "test-overfit-0");
  EXPECT_TRUE(j.contains("chains"));
  EXPECT_TRUE(j.contains("links"));
  EXPECT_TRUE(j.contains("heatmap"));
  const CliResult plain = Cli({"predict", "--checkpoint", ckpt, "--dataset", dataset_,
                         "--dialogue-id", "test-overfit-0", "--no-heatmap"});
  EXPECT_FALSE(json::parse(plain.out).contains("heatmap"));
  EXPECT_EQ(Cli({"predict", "--checkpoint", ckpt, "--dataset", dataset_, "--dialogue-id", "nope"})
                .status,
            1);
}

TEST_F(CliModelTest, LabelsFileReplacesLabelSets) {
  const auto ckpt = TrainModel("m.json", 0.0);
  const std::string labels =
      R"({"dialogue_id":"test-overfit-0","labels":["zebra","airplane"]})" "\n";
  const CliResult a = Cli({"predict", "--checkpoint", ckpt, "--dataset", dataset_, "--dialogue-id",
                     "test-overfit-0", "--no-heatmap"});
  const CliResult b = Cli({"predict", "--checkpoint", ckpt, "--dataset", dataset_, "--dialogue-id",
                     "test-overfit-0", "--no-heatmap", "--labels-file",
                     dir_.Write("labels.jsonl", labels)});
  ASSERT_EQ(b.status, 0) << b.err;
  EXPECT_EQ(a.out, b.out);
}

TEST_F(CliModelTest, MissingCheckpointIsAnError) {
  const CliResult r = Cli({"eval", "--checkpoint", dir_.File("absent.json"), "--dataset", dataset_});
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.err.find("absent.json"), std::string::npos);
}

TEST(CliUsageTest, UnknownCommandAndMissingFlags) {
  EXPECT_EQ(Cli({"frobnicate"}).status, 2);
  EXPECT_EQ(Cli({"train"}).status, 2);
}

}  // namespace
}  // namespace vpcr
