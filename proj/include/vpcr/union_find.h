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

#ifndef VPCR_UNION_FIND_H_
#define VPCR_UNION_FIND_H_

#include <numeric>
#include <utility>
#include <vector>

namespace vpcr {

// Disjoint sets over 0..n-1 with path halving and union by size.
class UnionFind {
 public:
  explicit UnionFind(int n) : parent_(n), size_(n, 1) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }

  int Find(int x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void Union(int a, int b) {
    a = Find(a);
    b = Find(b);
    if (a == b) return;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
  }

  // Members of each component, components ordered by their smallest member.
  std::vector<std::vector<int>> Components() {
    const int n = static_cast<int>(parent_.size());
    std::vector<int> slot(n, -1);
    std::vector<std::vector<int>> out;
    for (int i = 0; i < n; ++i) {
      const int root = Find(i);
      if (slot[root] < 0) {
        slot[root] = static_cast<int>(out.size());
        out.emplace_back();
      }
      out[slot[root]].push_back(i);
    }
    return out;
  }

 private:
  std::vector<int> parent_;
  std::vector<int> size_;
};

}  // namespace vpcr

#endif  // VPCR_UNION_FIND_H_
