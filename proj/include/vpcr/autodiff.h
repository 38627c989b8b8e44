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

// Minimal reverse-mode automatic differentiation over column vectors.
//
// A Graph records every operation applied during a forward pass. Parameters
// are referenced, never copied; Backward() leaves their gradients in the
// graph, keyed by Parameter::id, so forward passes can run against const
// parameters and several graphs can share one parameter set.
//
// All arithmetic is double precision.

#ifndef VPCR_AUTODIFF_H_
#define VPCR_AUTODIFF_H_

#include <functional>
#include <initializer_list>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace vpcr {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct Parameter {
  std::string name;
  int id = -1;
  Mat value;
  bool trainable = true;
};

// Owns parameters with stable addresses, in creation order.
class ParameterSet {
 public:
  ParameterSet() = default;
  ParameterSet(const ParameterSet &) = delete;
  ParameterSet &operator=(const ParameterSet &) = delete;

  Parameter &Add(const std::string &name, int rows, int cols);
  Parameter *Find(const std::string &name);
  const Parameter *Find(const std::string &name) const;

  int size() const { return static_cast<int>(params_.size()); }
  Parameter &at(int id) { return *params_.at(id); }
  const Parameter &at(int id) const { return *params_.at(id); }
  std::size_t ScalarCount() const;

  // Copies values by name; shapes must match.
  void CopyValuesFrom(const ParameterSet &other);

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
  std::map<std::string, int> by_name_;
};

struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

class Graph {
 public:
  // With record_gradients = false no backward closures are kept.
  explicit Graph(bool record_gradients = true) : record_(record_gradients) {}
  Graph(const Graph &) = delete;
  Graph &operator=(const Graph &) = delete;

  Var Input(Vec value);
  Var Scalar(double value);
  // A parameter with a single column, as a vector.
  Var Param(const Parameter &p);
  Var Column(const Parameter &p, int col);
  // w * x + b; `b` may be null.
  Var Affine(const Parameter &w, const Parameter *b, Var x);

  Var Add(Var a, Var b);
  Var Sub(Var a, Var b);
  Var Mul(Var a, Var b);  // element-wise
  Var Scale(Var v, double c);
  Var ScaleBy(Var scalar, Var v);
  Var Sum(std::span<const Var> vs);  // element-wise over same-sized vectors

  Var Sigmoid(Var v);
  Var Tanh(Var v);
  Var Relu(Var v);

  Var Concat(std::span<const Var> vs);
  Var Concat(std::initializer_list<Var> vs) {
    return Concat(std::span<const Var>(vs.begin(), vs.size()));
  }
  Var Slice(Var v, int offset, int size);
  Var Pick(Var v, int index);
  // Stacks scalars into one vector.
  Var Stack(std::span<const Var> scalars) { return Concat(scalars); }

  Var Softmax(Var v);
  Var LogSumExp(Var v);
  // Maximum over the first `count` entries; the gradient flows to the
  // lowest-index maximizer.
  Var MaxPrefix(Var v, int count);
  // Σ_t weights[t] * vs[t].
  Var WeightedSum(Var weights, std::span<const Var> vs);

  const Vec &value(Var v) const { return nodes_.at(v.id).value; }
  double scalar(Var v) const { return nodes_.at(v.id).value(0); }
  int size() const { return static_cast<int>(nodes_.size()); }

  // Seeds d(root)/d(root) = 1 for a scalar root and propagates. May be called
  // once per graph.
  void Backward(Var root);
  const Vec &grad(Var v) const { return nodes_.at(v.id).grad; }
  // Gradient for a parameter, or null if the graph never touched it.
  const Mat *ParamGrad(int param_id) const;
  // Parameter ids with a gradient.
  std::vector<int> TouchedParams() const;

 private:
  struct Node {
    Vec value;
    Vec grad;
    std::function<void()> backward;
  };

  Var Push(Vec value, std::function<void()> backward = nullptr);
  Vec &G(int id) { return nodes_[id].grad; }
  const Vec &V(int id) const { return nodes_[id].value; }
  Mat &PGrad(const Parameter &p);

  bool record_;
  bool done_ = false;
  std::vector<Node> nodes_;
  std::map<int, Mat> param_grads_;
};

}  // namespace vpcr

#endif  // VPCR_AUTODIFF_H_
