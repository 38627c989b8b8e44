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

#include "vpcr/model.h"

#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

namespace vpcr {

using nlohmann::json;

void ModelConfig::Validate() const {
  auto positive = [](int v, const char *name) {
    if (v <= 0) throw std::invalid_argument(std::string(name) + " must be positive");
  };
  positive(static_embedding_dim, "static_embedding_dim");
  positive(hidden_size, "hidden_size");
  positive(projection_dim, "projection_dim");
  positive(length_feature_dim, "length_feature_dim");
  if (contextual_embedding_dim < 0) {
    throw std::invalid_argument("contextual_embedding_dim must be non-negative");
  }
  for (int h : contextual_scorer_hidden) positive(h, "contextual_scorer_hidden");
  for (int h : visual_scorer_hidden) positive(h, "visual_scorer_hidden");
  if (length_buckets.empty() || length_buckets[0] != 1) {
    throw std::invalid_argument("length_buckets must start at 1");
  }
  for (std::size_t i = 1; i < length_buckets.size(); ++i) {
    if (length_buckets[i] <= length_buckets[i - 1]) {
      throw std::invalid_argument("length_buckets must be increasing");
    }
  }
  if (!(lambda_vis >= 0.0 && lambda_vis <= 1.0)) {
    throw std::invalid_argument("lambda_vis must lie in [0, 1]");
  }
  if (!(init_scale > 0.0)) throw std::invalid_argument("init_scale must be positive");
}

json ModelConfig::ToJson() const {
  return json{{"static_embedding_dim", static_embedding_dim},
              {"contextual_embedding_dim", contextual_embedding_dim},
              {"hidden_size", hidden_size},
              {"projection_dim", projection_dim},
              {"contextual_scorer_hidden", contextual_scorer_hidden},
              {"visual_scorer_hidden", visual_scorer_hidden},
              {"length_buckets", length_buckets},
              {"length_feature_dim", length_feature_dim},
              {"lambda_vis", lambda_vis},
              {"train_embeddings", train_embeddings},
              {"init_scale", init_scale},
              {"seed", seed}};
}

void ModelConfig::MergeJson(const json &j) {
  auto take = [&j](const char *key, auto &field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  take("static_embedding_dim", static_embedding_dim);
  take("contextual_embedding_dim", contextual_embedding_dim);
  take("hidden_size", hidden_size);
  take("projection_dim", projection_dim);
  take("contextual_scorer_hidden", contextual_scorer_hidden);
  take("visual_scorer_hidden", visual_scorer_hidden);
  take("length_buckets", length_buckets);
  take("length_feature_dim", length_feature_dim);
  take("lambda_vis", lambda_vis);
  take("train_embeddings", train_embeddings);
  take("init_scale", init_scale);
  take("seed", seed);
}

Vocabulary::Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  for (int i = 0; i < static_cast<int>(tokens_.size()); ++i) {
    if (!index_.emplace(tokens_[i], i).second) {
      throw std::invalid_argument("duplicate vocabulary token '" + tokens_[i] + "'");
    }
  }
}

int Vocabulary::Find(std::string_view token) const {
  auto it = index_.find(Lowercase(token));
  return it == index_.end() ? -1 : it->second;
}

Vocabulary Vocabulary::FromDialogues(const std::vector<Dialogue> &dialogues) {
  std::set<std::string> all;
  auto add = [&all](const Tokens &tokens) {
    for (const auto &t : tokens) all.insert(Lowercase(t));
  };
  for (const auto &d : dialogues) {
    for (const auto &turn : d.turns) add(turn);
    for (const auto &m : d.pool.entries) add(m.tokens);
    for (const auto &l : d.label_set.labels) add(l);
  }
  return Vocabulary(std::vector<std::string>(all.begin(), all.end()));
}

ModelParameters::ModelParameters(const ModelConfig &config, Vocabulary vocab)
    : config_(config), vocab_(std::move(vocab)) {
  config_.Validate();
  Build();
  Initialize();
}

ModelParameters::ModelParameters(const ModelParameters &other)
    : config_(other.config_), vocab_(other.vocab_) {
  Build();
  params_.CopyValuesFrom(other.params_);
  for (int i = 0; i < params_.size(); ++i) params_.at(i).trainable = other.params_.at(i).trainable;
}

void ModelParameters::Build() {
  const ModelConfig &c = config_;
  const int e = c.embedding_dim();
  const int h = c.hidden_size;
  const int d = c.span_dim();
  embeddings = &params_.Add("embeddings", c.static_embedding_dim, std::max(vocab_.size(), 1));
  embeddings->trainable = c.train_embeddings;
  for (auto [name, lstm] : {std::pair{"lstm_fw", &forward_lstm}, std::pair{"lstm_bw", &backward_lstm}}) {
    lstm->input = &params_.Add(std::string(name) + "/input", 4 * h, e);
    lstm->recurrent = &params_.Add(std::string(name) + "/recurrent", 4 * h, h);
    lstm->bias = &params_.Add(std::string(name) + "/bias", 4 * h, 1);
  }
  attention = &params_.Add("attention/w", 1, 2 * h);
  attention_bias = &params_.Add("attention/b", 1, 1);
  length_embeddings = &params_.Add("length_embeddings", c.length_feature_dim,
                                   static_cast<int>(c.length_buckets.size()));
  null_label = &params_.Add("null_label", d, 1);

  auto build_ffnn = [this](const std::string &prefix, int in, const std::vector<int> &hidden,
                           FeedForward &net) {
    int fan_in = in;
    for (std::size_t i = 0; i <= hidden.size(); ++i) {
      const int out = i < hidden.size() ? hidden[i] : 1;
      net.weights.push_back(&params_.Add(prefix + "/w" + std::to_string(i), out, fan_in));
      net.biases.push_back(&params_.Add(prefix + "/b" + std::to_string(i), out, 1));
      fan_in = out;
    }
  };
  build_ffnn("contextual_scorer", 3 * d, c.contextual_scorer_hidden, contextual_scorer);
  projection = &params_.Add("projection/w", c.projection_dim, d);
  projection_bias = &params_.Add("projection/b", c.projection_dim, 1);
  build_ffnn("alignment_scorer", c.projection_dim, {c.projection_dim}, alignment_scorer);
  build_ffnn("visual_scorer", 4, c.visual_scorer_hidden, visual_scorer);
}

void ModelParameters::Initialize() {
  std::mt19937_64 rng(config_.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int i = 0; i < params_.size(); ++i) {
    Parameter &p = params_.at(i);
    const bool is_bias = p.value.cols() == 1 && p.name.find("/b") != std::string::npos;
    if (is_bias || p.name == "lstm_fw/bias" || p.name == "lstm_bw/bias") continue;
    double scale;
    if (p.name == "embeddings" || p.name == "length_embeddings" || p.name == "null_label") {
      scale = config_.init_scale;
    } else {
      // Glorot uniform.
      scale = std::sqrt(6.0 / static_cast<double>(p.value.rows() + p.value.cols()));
    }
    for (Eigen::Index k = 0; k < p.value.size(); ++k) p.value.data()[k] = scale * unit(rng);
  }
}

int ModelParameters::LoadStaticEmbeddings(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open embeddings " + path);
  std::string line;
  int loaded = 0, lineno = 0;
  const int dim = config_.static_embedding_dim;
  std::vector<bool> seen(vocab_.size(), false);
  // Rows for in-vocabulary tokens missing from the file stay zero.
  embeddings->value.setZero();
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream fields(line);
    std::string token;
    if (!(fields >> token)) continue;
    const int col = vocab_.Find(token);
    if (col < 0 || seen[col]) continue;
    Vec v(dim);
    for (int k = 0; k < dim; ++k) {
      if (!(fields >> v(k))) {
        throw ParseError("embedding for '" + token + "' has fewer than " +
                             std::to_string(dim) + " values",
                         lineno);
      }
    }
    embeddings->value.col(col) = v;
    seen[col] = true;
    ++loaded;
  }
  return loaded;
}

Var ApplyFeedForward(Graph &g, const FeedForward &net, Var x) {
  Var h = x;
  for (std::size_t i = 0; i < net.weights.size(); ++i) {
    h = g.Affine(*net.weights[i], net.biases[i], h);
    if (i + 1 < net.weights.size()) h = g.Relu(h);
  }
  return h;
}

}  // namespace vpcr
