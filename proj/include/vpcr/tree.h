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

// Penn-style bracketed constituency trees, e.g.
//   (ROOT (S (NP (DT A) (NN man)) (VP (VBZ is) (VP (VBG walking)))))

#ifndef VPCR_TREE_H_
#define VPCR_TREE_H_

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "vpcr/corpus.h"

namespace vpcr {

struct TreeNode {
  std::string label;  // token text for leaves
  std::vector<std::unique_ptr<TreeNode>> children;
  int first_leaf = 0;  // leaf index range covered, end-exclusive
  int last_leaf = 0;

  bool is_leaf() const { return children.empty(); }
  // Longest node-to-leaf path in edges; 0 for a leaf.
  int Height() const;
};

class ParseTree {
 public:
  // Throws ParseError on unbalanced brackets or empty input.
  static ParseTree Parse(std::string_view text);

  const TreeNode &root() const { return *root_; }
  const Tokens &leaves() const { return leaves_; }

 private:
  std::unique_ptr<TreeNode> root_;
  Tokens leaves_;
};

// NP nodes of height exactly two (NP -> preterminal -> token), left to right.
// Spans are token indices into the tree's leaves, tagged with `turn`.
std::vector<Mention> ExtractNounPhrases(const ParseTree &tree, int turn = 0);
std::vector<Mention> ExtractNounPhrases(std::string_view parse, int turn = 0);

}  // namespace vpcr

#endif  // VPCR_TREE_H_
