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

// Run manifests: what was run, on which inputs, with which settings.

#ifndef VPCR_MANIFEST_H_
#define VPCR_MANIFEST_H_

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace vpcr {

inline constexpr const char *kToolVersion = "1.0.0";

// Lowercase hex SHA-256 of the file contents. Throws std::runtime_error
// when the file cannot be read.
std::string Sha256File(const std::string &path);
std::string Sha256Hex(const std::string &bytes);

struct InputDigest {
  std::string path;
  std::string sha256;
};

class RunManifest {
 public:
  explicit RunManifest(std::string command);

  void AddInput(const std::string &path);
  void AddOutput(const std::string &path) { outputs_.push_back(path); }
  void SetConfig(nlohmann::json config) { config_ = std::move(config); }
  void SetSeed(std::uint64_t seed) { seed_ = seed; }
  void SetResult(nlohmann::json result) { result_ = std::move(result); }

  // Stamps the finish time.
  nlohmann::json ToJson() const;
  void Write(const std::string &path) const;

  const std::vector<InputDigest> &inputs() const { return inputs_; }

 private:
  std::string command_;
  std::string started_;
  std::vector<InputDigest> inputs_;
  std::vector<std::string> outputs_;
  nlohmann::json config_ = nlohmann::json::object();
  nlohmann::json result_ = nlohmann::json::object();
  std::uint64_t seed_ = 0;
};

}  // namespace vpcr

#endif  // VPCR_MANIFEST_H_
