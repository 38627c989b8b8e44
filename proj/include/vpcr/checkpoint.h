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

// Versioned JSON checkpoints holding the model configuration, vocabulary
// and every parameter tensor.

#ifndef VPCR_CHECKPOINT_H_
#define VPCR_CHECKPOINT_H_

#include <memory>
#include <string>

#include "json.hpp"
#include "vpcr/model.h"

namespace vpcr {

inline constexpr const char *kCheckpointFormat = "vpcr-checkpoint";
inline constexpr int kCheckpointVersion = 1;

struct CheckpointInfo {
  int step = 0;
  double validation_f1 = -1.0;
};

nlohmann::json CheckpointToJson(const ModelParameters &m, const CheckpointInfo &info);
// Throws std::runtime_error on a wrong format tag, version, missing tensor
// or shape mismatch.
std::unique_ptr<ModelParameters> CheckpointFromJson(const nlohmann::json &j,
                                                    CheckpointInfo *info = nullptr);

void SaveCheckpoint(const std::string &path, const ModelParameters &m,
                    const CheckpointInfo &info);
// Throws std::runtime_error when the file cannot be read or parsed.
std::unique_ptr<ModelParameters> LoadCheckpoint(const std::string &path,
                                                CheckpointInfo *info = nullptr);

}  // namespace vpcr

#endif  // VPCR_CHECKPOINT_H_
