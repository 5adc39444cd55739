// Copyright 2026 The fairsde Authors
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

#ifndef FAIRSDE_CHECKPOINT_HPP_
#define FAIRSDE_CHECKPOINT_HPP_

#include <filesystem>
#include <stdexcept>
#include <string>

#include "fairsde/training.hpp"

namespace fairsde {

// Raised for missing, unreadable, or malformed checkpoint files.
class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kCheckpointVersion = 1;

// Versioned JSON containers; see docs/formats.md. Doubles are written with
// 17 significant digits, so a save/load cycle reproduces parameters exactly.
void save_checkpoint(const std::filesystem::path& path, const ErmModel& model,
                     const SeedLineage& lineage);
void save_checkpoint(const std::filesystem::path& path, const DecoupledModel& model,
                     const SeedLineage& lineage);
void save_checkpoint(const std::filesystem::path& path, const FairSdeModel& model,
                     const SeedLineage& lineage);

ErmModel load_erm_checkpoint(const std::filesystem::path& path);
DecoupledModel load_decoupled_checkpoint(const std::filesystem::path& path);
FairSdeModel load_fairsde_checkpoint(const std::filesystem::path& path);
SeedLineage load_checkpoint_lineage(const std::filesystem::path& path);
// "erm", "decoupled" or "fairsde".
std::string checkpoint_model(const std::filesystem::path& path);

}  // namespace fairsde

#endif  // FAIRSDE_CHECKPOINT_HPP_
