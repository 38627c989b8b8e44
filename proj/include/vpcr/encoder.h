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

// Mention and object-label representations: token embeddings, a
// bidirectional LSTM, inner-span attention and a bucketed width feature.

#ifndef VPCR_ENCODER_H_
#define VPCR_ENCODER_H_

#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "vpcr/autodiff.h"
#include "vpcr/corpus.h"
#include "vpcr/model.h"

namespace vpcr {

// Precomputed per-token contextual vectors, one matrix (tokens x dim) per
// sequence. Sequences are keyed by (dialogue_id, segment, index) where
// segment is "dialogue" (index = turn), "pool" (index = pool entry) or
// "label" (index = label position).
class ContextualVectors {
 public:
  void Put(const std::string &dialogue_id, const std::string &segment, int index, Mat vectors);
  const Mat *Find(const std::string &dialogue_id, const std::string &segment, int index) const;
  bool empty() const { return table_.empty(); }

  // JSONL: {"dialogue_id", "segment", "index", "vectors": [[...], ...]}
  static ContextualVectors Load(const std::string &path);

 private:
  std::map<std::tuple<std::string, std::string, int>, Mat> table_;
};

struct EncodedSequence {
  std::vector<Var> inputs;  // x_t
  std::vector<Var> states;  // x*_t = [forward_t, backward_t]
};

struct SpanRepresentation {
  Var vector;     // e
  Var attention;  // a over the span tokens
};

// Index into config.length_buckets for a span of `width` tokens.
int LengthBucket(const ModelConfig &config, int width);

// Static lookup (zero for out-of-vocabulary tokens) concatenated with the
// contextual vectors when enabled. Throws if contextual vectors are enabled
// and `contextual` is null or mis-shaped.
std::vector<Var> EmbedTokens(Graph &g, const ModelParameters &m, const Tokens &tokens,
                             const Mat *contextual = nullptr);

EncodedSequence EncodeSequence(Graph &g, const ModelParameters &m,
                               const std::vector<Var> &embeddings);

SpanRepresentation EncodeSpan(Graph &g, const ModelParameters &m, const EncodedSequence &enc,
                              int start, int end);

// K label representations followed by the null-label vector.
std::vector<Var> EncodeObjectLabels(Graph &g, const ModelParameters &m,
                                    const ObjectLabelSet &labels,
                                    const std::string &dialogue_id = "",
                                    const ContextualVectors *contextual = nullptr);

}  // namespace vpcr

#endif  // VPCR_ENCODER_H_
