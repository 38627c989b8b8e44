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

// Generated dialogue suites for desk-scale experiments that need no
// pretrained resources.

#ifndef VPCR_SYNTHETIC_H_
#define VPCR_SYNTHETIC_H_

#include <cstdint>
#include <vector>

#include "vpcr/corpus.h"
#include "vpcr/model.h"

namespace vpcr {

// Small dialogues over a closed vocabulary of under 50 words. Each has two
// referents of different pronoun classes (he / she / it / they) introduced
// by noun phrases, pronouns picking them up, and sometimes a non-referential
// "it". Gold antecedents are every earlier noun phrase with the referent's
// head noun, so they are consistent across the suite. 2-4 object labels.
std::vector<Dialogue> GenerateOverfitSuite(int dialogues, std::uint64_t seed);

// Two dialogue shapes:
//  - visual: the pool holds three "the X" phrases and the only pronoun
//    context ("is it big ?") is identical across them; the antecedent is the
//    phrase whose noun is among the detected labels.
//  - contextual: a person and an unlabeled object are introduced in the
//    dialogue and the pronoun form (he/she vs it) decides; neither they nor
//    the pool phrases are among the labels.
// `contextual_fraction` is the probability of the second shape.
std::vector<Dialogue> GenerateVisualSuite(int dialogues, std::uint64_t seed,
                                          double contextual_fraction);

// Model sizes suited to the generated suites.
ModelConfig DeskScaleConfig();

}  // namespace vpcr

#endif  // VPCR_SYNTHETIC_H_
