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

// Model configuration and the full set of trainable tensors.

#ifndef VPCR_MODEL_H_
#define VPCR_MODEL_H_

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "vpcr/autodiff.h"
#include "vpcr/corpus.h"

namespace vpcr {

struct ModelConfig {
  int static_embedding_dim = 300;
  int contextual_embedding_dim = 0;  // 0 disables contextual vectors
  int hidden_size = 200;             // per direction
  int projection_dim = 512;
  std::vector<int> contextual_scorer_hidden = {150, 150};
  std::vector<int> visual_scorer_hidden = {100};
  // Lower bounds of the span-width buckets.
  std::vector<int> length_buckets = {1, 2, 3, 4, 5, 8, 16, 32};
  int length_feature_dim = 20;
  double lambda_vis = 0.4;
  bool train_embeddings = true;
  double init_scale = 0.1;
  std::uint64_t seed = 1;

  int embedding_dim() const { return static_embedding_dim + contextual_embedding_dim; }
  int state_dim() const { return 2 * hidden_size; }
  // [x*_start, x*_end, x_hat, phi]
  int span_dim() const { return 2 * state_dim() + embedding_dim() + length_feature_dim; }

  // Throws std::invalid_argument on non-positive dims or lambda outside [0, 1].
  void Validate() const;
  nlohmann::json ToJson() const;
  // Fields absent from `j` keep their current values.
  void MergeJson(const nlohmann::json &j);
};

// Lowercased token -> column of the static embedding table.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> tokens);

  // -1 when absent.
  int Find(std::string_view token) const;
  int size() const { return static_cast<int>(tokens_.size()); }
  const std::vector<std::string> &tokens() const { return tokens_; }

  // Every token in dialogues, pool entries and labels, sorted.
  static Vocabulary FromDialogues(const std::vector<Dialogue> &dialogues);

 private:
  std::vector<std::string> tokens_;
  std::map<std::string, int, std::less<>> index_;
};

// Stack of affine layers with ReLU between them; scalar output.
struct FeedForward {
  std::vector<Parameter *> weights;
  std::vector<Parameter *> biases;
};

struct LstmWeights {
  Parameter *input = nullptr;      // 4H x E, gates [i, f, o, g]
  Parameter *recurrent = nullptr;  // 4H x H
  Parameter *bias = nullptr;       // 4H x 1
};

class ModelParameters {
 public:
  // Random initialization from config.seed.
  ModelParameters(const ModelConfig &config, Vocabulary vocab);
  ModelParameters(const ModelParameters &other);
  ModelParameters &operator=(const ModelParameters &) = delete;

  const ModelConfig &config() const { return config_; }
  ModelConfig &mutable_config() { return config_; }
  const Vocabulary &vocab() const { return vocab_; }
  ParameterSet &params() { return params_; }
  const ParameterSet &params() const { return params_; }

  // Loads whitespace-separated "token v1 .. vd" lines into the rows of the
  // static table for tokens in the vocabulary; returns the number loaded.
  int LoadStaticEmbeddings(const std::string &path);

  Parameter *embeddings = nullptr;  // static_dim x |V|
  LstmWeights forward_lstm;
  LstmWeights backward_lstm;
  Parameter *attention = nullptr;       // NN_alpha: 1 x 2H
  Parameter *attention_bias = nullptr;  // 1 x 1
  Parameter *length_embeddings = nullptr;  // length_dim x buckets
  Parameter *null_label = nullptr;         // span_dim x 1
  FeedForward contextual_scorer;           // NN_c
  Parameter *projection = nullptr;         // NN_o: P x span_dim
  Parameter *projection_bias = nullptr;
  FeedForward alignment_scorer;            // NN_beta
  FeedForward visual_scorer;               // NN_v

 private:
  void Build();
  void Initialize();

  ModelConfig config_;
  Vocabulary vocab_;
  ParameterSet params_;
};

// Applies `net` to `x`: ReLU on every hidden layer, linear output.
Var ApplyFeedForward(Graph &g, const FeedForward &net, Var x);

}  // namespace vpcr

#endif  // VPCR_MODEL_H_
