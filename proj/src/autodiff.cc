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

#include "vpcr/autodiff.h"

#include <cmath>
#include <stdexcept>

namespace vpcr {

Parameter &ParameterSet::Add(const std::string &name, int rows, int cols) {
  if (by_name_.count(name)) throw std::invalid_argument("duplicate parameter " + name);
  auto p = std::make_unique<Parameter>();
  p->name = name;
  p->id = static_cast<int>(params_.size());
  p->value = Mat::Zero(rows, cols);
  by_name_[name] = p->id;
  params_.push_back(std::move(p));
  return *params_.back();
}

Parameter *ParameterSet::Find(const std::string &name) {
  auto it = by_name_.find(name);
  return it == by_name_.end() ? nullptr : params_[it->second].get();
}

const Parameter *ParameterSet::Find(const std::string &name) const {
  auto it = by_name_.find(name);
  return it == by_name_.end() ? nullptr : params_[it->second].get();
}

std::size_t ParameterSet::ScalarCount() const {
  std::size_t n = 0;
  for (const auto &p : params_) n += static_cast<std::size_t>(p->value.size());
  return n;
}

void ParameterSet::CopyValuesFrom(const ParameterSet &other) {
  for (const auto &p : params_) {
    const Parameter *src = other.Find(p->name);
    if (src == nullptr || src->value.rows() != p->value.rows() ||
        src->value.cols() != p->value.cols()) {
      throw std::invalid_argument("parameter shape mismatch for " + p->name);
    }
    p->value = src->value;
  }
}

Var Graph::Push(Vec value, std::function<void()> backward) {
  Node n;
  n.value = std::move(value);
  if (record_) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Mat &Graph::PGrad(const Parameter &p) {
  auto it = param_grads_.find(p.id);
  if (it == param_grads_.end()) {
    it = param_grads_.emplace(p.id, Mat::Zero(p.value.rows(), p.value.cols())).first;
  }
  return it->second;
}

Var Graph::Input(Vec value) { return Push(std::move(value)); }

Var Graph::Scalar(double value) { return Push(Vec::Constant(1, value)); }

Var Graph::Param(const Parameter &p) {
  if (p.value.cols() != 1) throw std::invalid_argument("Param needs a column parameter: " + p.name);
  const int self = size();
  const Parameter *pp = &p;
  return Push(p.value.col(0), [this, self, pp] {
    if (pp->trainable) PGrad(*pp).col(0) += G(self);
  });
}

Var Graph::Column(const Parameter &p, int col) {
  const int self = size();
  const Parameter *pp = &p;
  return Push(p.value.col(col), [this, self, pp, col] {
    if (pp->trainable) PGrad(*pp).col(col) += G(self);
  });
}

Var Graph::Affine(const Parameter &w, const Parameter *b, Var x) {
  if (w.value.cols() != V(x.id).size()) {
    throw std::invalid_argument("Affine shape mismatch for " + w.name + ": " +
                                std::to_string(w.value.cols()) + " vs " +
                                std::to_string(V(x.id).size()));
  }
  Vec y = w.value * V(x.id);
  if (b != nullptr) y += b->value.col(0);
  const int self = size();
  const Parameter *wp = &w;
  return Push(std::move(y), [this, self, wp, b, x] {
    const Vec &g = G(self);
    if (wp->trainable) PGrad(*wp).noalias() += g * V(x.id).transpose();
    if (b != nullptr && b->trainable) PGrad(*b).col(0) += g;
    G(x.id).noalias() += wp->value.transpose() * g;
  });
}

Var Graph::Add(Var a, Var b) {
  const int self = size();
  return Push(V(a.id) + V(b.id), [this, self, a, b] {
    G(a.id) += G(self);
    G(b.id) += G(self);
  });
}

Var Graph::Sub(Var a, Var b) {
  const int self = size();
  return Push(V(a.id) - V(b.id), [this, self, a, b] {
    G(a.id) += G(self);
    G(b.id) -= G(self);
  });
}

Var Graph::Mul(Var a, Var b) {
  const int self = size();
  return Push(V(a.id).cwiseProduct(V(b.id)), [this, self, a, b] {
    G(a.id) += G(self).cwiseProduct(V(b.id));
    G(b.id) += G(self).cwiseProduct(V(a.id));
  });
}

Var Graph::Scale(Var v, double c) {
  const int self = size();
  return Push(V(v.id) * c, [this, self, v, c] { G(v.id) += G(self) * c; });
}

Var Graph::ScaleBy(Var scalar, Var v) {
  const int self = size();
  return Push(V(v.id) * V(scalar.id)(0), [this, self, scalar, v] {
    G(scalar.id)(0) += G(self).dot(V(v.id));
    G(v.id) += G(self) * V(scalar.id)(0);
  });
}

Var Graph::Sum(std::span<const Var> vs) {
  if (vs.empty()) throw std::invalid_argument("Sum of nothing");
  Vec y = V(vs[0].id);
  for (std::size_t i = 1; i < vs.size(); ++i) y += V(vs[i].id);
  const int self = size();
  std::vector<Var> in(vs.begin(), vs.end());
  return Push(std::move(y), [this, self, in] {
    for (const Var &v : in) G(v.id) += G(self);
  });
}

Var Graph::Sigmoid(Var v) {
  Vec y = V(v.id).unaryExpr([](double x) { return 1.0 / (1.0 + std::exp(-x)); });
  const int self = size();
  return Push(std::move(y), [this, self, v] {
    const Vec &y = V(self);
    G(v.id) += G(self).cwiseProduct(y.cwiseProduct((1.0 - y.array()).matrix()));
  });
}

Var Graph::Tanh(Var v) {
  Vec y = V(v.id).array().tanh().matrix();
  const int self = size();
  return Push(std::move(y), [this, self, v] {
    const Vec &y = V(self);
    G(v.id) += G(self).cwiseProduct((1.0 - y.array().square()).matrix());
  });
}

Var Graph::Relu(Var v) {
  Vec y = V(v.id).cwiseMax(0.0);
  const int self = size();
  return Push(std::move(y), [this, self, v] {
    const Vec &x = V(v.id);
    for (int i = 0; i < x.size(); ++i) {
      if (x(i) > 0.0) G(v.id)(i) += G(self)(i);
    }
  });
}

Var Graph::Concat(std::span<const Var> vs) {
  Eigen::Index total = 0;
  for (const Var &v : vs) total += V(v.id).size();
  Vec y(total);
  Eigen::Index off = 0;
  for (const Var &v : vs) {
    const Vec &x = V(v.id);
    y.segment(off, x.size()) = x;
    off += x.size();
  }
  const int self = size();
  std::vector<Var> in(vs.begin(), vs.end());
  return Push(std::move(y), [this, self, in] {
    Eigen::Index off = 0;
    for (const Var &v : in) {
      const Eigen::Index n = V(v.id).size();
      G(v.id) += G(self).segment(off, n);
      off += n;
    }
  });
}

Var Graph::Slice(Var v, int offset, int n) {
  if (offset < 0 || offset + n > V(v.id).size()) throw std::out_of_range("Slice out of range");
  const int self = size();
  return Push(V(v.id).segment(offset, n),
              [this, self, v, offset, n] { G(v.id).segment(offset, n) += G(self); });
}

Var Graph::Pick(Var v, int index) { return Slice(v, index, 1); }

Var Graph::Softmax(Var v) {
  const Vec &x = V(v.id);
  Vec y = (x.array() - x.maxCoeff()).exp().matrix();
  y /= y.sum();
  const int self = size();
  return Push(std::move(y), [this, self, v] {
    const Vec &y = V(self);
    const Vec &g = G(self);
    const double dot = g.dot(y);
    G(v.id) += y.cwiseProduct((g.array() - dot).matrix());
  });
}

Var Graph::LogSumExp(Var v) {
  const Vec &x = V(v.id);
  const double m = x.maxCoeff();
  const double lse = m + std::log((x.array() - m).exp().sum());
  const int self = size();
  return Push(Vec::Constant(1, lse), [this, self, v] {
    const Vec &x = V(v.id);
    const Vec p = (x.array() - V(self)(0)).exp().matrix();
    G(v.id) += p * G(self)(0);
  });
}

Var Graph::MaxPrefix(Var v, int count) {
  const Vec &x = V(v.id);
  if (count < 1 || count > x.size()) throw std::out_of_range("MaxPrefix count");
  int best = 0;
  for (int i = 1; i < count; ++i) {
    if (x(i) > x(best)) best = i;
  }
  const int self = size();
  return Push(Vec::Constant(1, x(best)),
              [this, self, v, best] { G(v.id)(best) += G(self)(0); });
}

Var Graph::WeightedSum(Var weights, std::span<const Var> vs) {
  const Vec &w = V(weights.id);
  if (static_cast<std::size_t>(w.size()) != vs.size() || vs.empty()) {
    throw std::invalid_argument("WeightedSum size mismatch");
  }
  Vec y = w(0) * V(vs[0].id);
  for (std::size_t t = 1; t < vs.size(); ++t) y += w(static_cast<Eigen::Index>(t)) * V(vs[t].id);
  const int self = size();
  std::vector<Var> in(vs.begin(), vs.end());
  return Push(std::move(y), [this, self, weights, in] {
    const Vec &g = G(self);
    for (std::size_t t = 0; t < in.size(); ++t) {
      const auto ti = static_cast<Eigen::Index>(t);
      G(weights.id)(ti) += g.dot(V(in[t].id));
      G(in[t].id) += g * V(weights.id)(ti);
    }
  });
}

void Graph::Backward(Var root) {
  if (!record_) throw std::logic_error("Backward on a graph without gradient recording");
  if (done_) throw std::logic_error("Backward called twice on one graph");
  if (V(root.id).size() != 1) throw std::invalid_argument("Backward root must be scalar");
  done_ = true;
  for (int i = 0; i <= root.id; ++i) nodes_[i].grad = Vec::Zero(nodes_[i].value.size());
  nodes_[root.id].grad(0) = 1.0;
  for (int i = root.id; i >= 0; --i) {
    if (nodes_[i].backward) nodes_[i].backward();
  }
}

const Mat *Graph::ParamGrad(int param_id) const {
  auto it = param_grads_.find(param_id);
  return it == param_grads_.end() ? nullptr : &it->second;
}

std::vector<int> Graph::TouchedParams() const {
  std::vector<int> ids;
  for (const auto &[id, g] : param_grads_) ids.push_back(id);
  return ids;
}

}  // namespace vpcr
