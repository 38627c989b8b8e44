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

#include "vpcr/encoder.h"

#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace vpcr {

void ContextualVectors::Put(const std::string &dialogue_id, const std::string &segment, int index,
                            Mat vectors) {
  table_[{dialogue_id, segment, index}] = std::move(vectors);
}

const Mat *ContextualVectors::Find(const std::string &dialogue_id, const std::string &segment,
                                   int index) const {
  auto it = table_.find({dialogue_id, segment, index});
  return it == table_.end() ? nullptr : &it->second;
}

ContextualVectors ContextualVectors::Load(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open contextual vectors " + path);
  ContextualVectors out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      const auto rows = j.at("vectors").get<std::vector<std::vector<double>>>();
      const int cols = rows.empty() ? 0 : static_cast<int>(rows[0].size());
      Mat m(static_cast<Eigen::Index>(rows.size()), cols);
      for (std::size_t r = 0; r < rows.size(); ++r) {
        if (static_cast<int>(rows[r].size()) != cols) throw ParseError("ragged vectors", lineno);
        for (int c = 0; c < cols; ++c) m(static_cast<Eigen::Index>(r), c) = rows[r][c];
      }
      out.Put(j.at("dialogue_id").get<std::string>(), j.at("segment").get<std::string>(),
              j.at("index").get<int>(), std::move(m));
    } catch (const nlohmann::json::exception &e) {
      throw ParseError(e.what(), lineno);
    }
  }
  return out;
}

int LengthBucket(const ModelConfig &config, int width) {
  int bucket = 0;
  for (int i = 0; i < static_cast<int>(config.length_buckets.size()); ++i) {
    if (width >= config.length_buckets[i]) bucket = i;
  }
  return bucket;
}

std::vector<Var> EmbedTokens(Graph &g, const ModelParameters &m, const Tokens &tokens,
                             const Mat *contextual) {
  if (tokens.empty()) throw std::invalid_argument("EmbedTokens: empty token sequence");
  const ModelConfig &c = m.config();
  if (c.contextual_embedding_dim > 0) {
    if (contextual == nullptr) {
      throw std::invalid_argument("contextual vectors enabled but missing for this sequence");
    }
    if (contextual->rows() != static_cast<Eigen::Index>(tokens.size()) ||
        contextual->cols() != c.contextual_embedding_dim) {
      throw std::invalid_argument("contextual vectors have the wrong shape");
    }
  }
  std::vector<Var> out;
  out.reserve(tokens.size());
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    const int col = m.vocab().Find(tokens[t]);
    Var x = col >= 0 ? g.Column(*m.embeddings, col)
                     : g.Input(Vec::Zero(c.static_embedding_dim));
    if (c.contextual_embedding_dim > 0) {
      x = g.Concat({x, g.Input(contextual->row(static_cast<Eigen::Index>(t)).transpose())});
    }
    out.push_back(x);
  }
  return out;
}

namespace {

// One direction over `inputs` in the given order; returns states aligned with
// the original token positions.
std::vector<Var> RunLstm(Graph &g, const LstmWeights &w, int hidden,
                         const std::vector<Var> &inputs, bool reverse) {
  const int n = static_cast<int>(inputs.size());
  std::vector<Var> states(n);
  Var h = g.Input(Vec::Zero(hidden));
  Var c = g.Input(Vec::Zero(hidden));
  for (int step = 0; step < n; ++step) {
    const int t = reverse ? n - 1 - step : step;
    Var gates = g.Add(g.Affine(*w.input, w.bias, inputs[t]), g.Affine(*w.recurrent, nullptr, h));
    Var i = g.Sigmoid(g.Slice(gates, 0, hidden));
    Var f = g.Sigmoid(g.Slice(gates, hidden, hidden));
    Var o = g.Sigmoid(g.Slice(gates, 2 * hidden, hidden));
    Var u = g.Tanh(g.Slice(gates, 3 * hidden, hidden));
    c = g.Add(g.Mul(f, c), g.Mul(i, u));
    h = g.Mul(o, g.Tanh(c));
    states[t] = h;
  }
  return states;
}

}  // namespace

EncodedSequence EncodeSequence(Graph &g, const ModelParameters &m,
                               const std::vector<Var> &embeddings) {
  if (embeddings.empty()) throw std::invalid_argument("EncodeSequence: empty input");
  const int h = m.config().hidden_size;
  EncodedSequence enc;
  enc.inputs = embeddings;
  const auto fw = RunLstm(g, m.forward_lstm, h, embeddings, false);
  const auto bw = RunLstm(g, m.backward_lstm, h, embeddings, true);
  enc.states.reserve(embeddings.size());
  for (std::size_t t = 0; t < embeddings.size(); ++t) enc.states.push_back(g.Concat({fw[t], bw[t]}));
  return enc;
}

SpanRepresentation EncodeSpan(Graph &g, const ModelParameters &m, const EncodedSequence &enc,
                              int start, int end) {
  if (start < 0 || end > static_cast<int>(enc.states.size()) || start >= end) {
    throw std::invalid_argument("EncodeSpan: invalid span [" + std::to_string(start) + ", " +
                                std::to_string(end) + ")");
  }
  std::vector<Var> logits;
  for (int t = start; t < end; ++t) logits.push_back(g.Affine(*m.attention, m.attention_bias, enc.states[t]));
  SpanRepresentation rep;
  rep.attention = g.Softmax(g.Stack(logits));
  std::vector<Var> inputs(enc.inputs.begin() + start, enc.inputs.begin() + end);
  Var weighted = g.WeightedSum(rep.attention, inputs);
  Var width = g.Column(*m.length_embeddings, LengthBucket(m.config(), end - start));
  rep.vector = g.Concat({enc.states[start], enc.states[end - 1], weighted, width});
  return rep;
}

std::vector<Var> EncodeObjectLabels(Graph &g, const ModelParameters &m,
                                    const ObjectLabelSet &labels, const std::string &dialogue_id,
                                    const ContextualVectors *contextual) {
  std::vector<Var> out;
  for (int k = 0; k < labels.K(); ++k) {
    const Mat *ctx = contextual ? contextual->Find(dialogue_id, "label", k) : nullptr;
    const auto enc = EncodeSequence(g, m, EmbedTokens(g, m, labels.labels[k], ctx));
    out.push_back(EncodeSpan(g, m, enc, 0, static_cast<int>(enc.states.size())).vector);
  }
  out.push_back(g.Param(*m.null_label));
  return out;
}

}  // namespace vpcr
