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

#include "vpcr/checkpoint.h"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace vpcr {

using nlohmann::json;

json CheckpointToJson(const ModelParameters &m, const CheckpointInfo &info) {
  json params = json::object();
  const ParameterSet &set = m.params();
  for (int i = 0; i < set.size(); ++i) {
    const Parameter &p = set.at(i);
    std::vector<double> data(p.value.data(), p.value.data() + p.value.size());
    params[p.name] = {{"rows", p.value.rows()}, {"cols", p.value.cols()}, {"data", data}};
  }
  return json{{"format", kCheckpointFormat},
              {"version", kCheckpointVersion},
              {"config", m.config().ToJson()},
              {"vocabulary", m.vocab().tokens()},
              {"step", info.step},
              {"validation_f1", info.validation_f1},
              {"parameters", params}};
}

std::unique_ptr<ModelParameters> CheckpointFromJson(const json &j, CheckpointInfo *info) {
  if (!j.is_object() || j.value("format", "") != kCheckpointFormat) {
    throw std::runtime_error("not a vpcr checkpoint");
  }
  if (j.value("version", 0) != kCheckpointVersion) {
    throw std::runtime_error("unsupported checkpoint version " + j.value("version", json()).dump());
  }
  ModelConfig config;
  config.MergeJson(j.at("config"));
  config.Validate();
  auto m = std::make_unique<ModelParameters>(
      config, Vocabulary(j.at("vocabulary").get<std::vector<std::string>>()));
  const json &params = j.at("parameters");
  ParameterSet &set = m->params();
  for (int i = 0; i < set.size(); ++i) {
    Parameter &p = set.at(i);
    if (!params.contains(p.name)) throw std::runtime_error("checkpoint lacks tensor " + p.name);
    const json &t = params.at(p.name);
    const auto rows = t.at("rows").get<Eigen::Index>();
    const auto cols = t.at("cols").get<Eigen::Index>();
    const auto data = t.at("data").get<std::vector<double>>();
    if (rows != p.value.rows() || cols != p.value.cols() ||
        static_cast<Eigen::Index>(data.size()) != rows * cols) {
      throw std::runtime_error("shape mismatch for tensor " + p.name);
    }
    p.value = Eigen::Map<const Mat>(data.data(), rows, cols);
  }
  if (params.size() != static_cast<std::size_t>(set.size())) {
    throw std::runtime_error("checkpoint holds unknown tensors");
  }
  if (info) {
    info->step = j.value("step", 0);
    info->validation_f1 = j.value("validation_f1", -1.0);
  }
  return m;
}

void SaveCheckpoint(const std::string &path, const ModelParameters &m,
                    const CheckpointInfo &info) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path);
  out << CheckpointToJson(m, info).dump() << '\n';
  if (!out) throw std::runtime_error("cannot write checkpoint " + path);
}

std::unique_ptr<ModelParameters> LoadCheckpoint(const std::string &path, CheckpointInfo *info) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception &e) {
    throw std::runtime_error("malformed checkpoint " + path + ": " + e.what());
  }
  try {
    return CheckpointFromJson(j, info);
  } catch (const json::exception &e) {
    throw std::runtime_error("malformed checkpoint " + path + ": " + e.what());
  }
}

}  // namespace vpcr
