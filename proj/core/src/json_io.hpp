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

#ifndef FAIRSDE_SRC_JSON_IO_HPP_
#define FAIRSDE_SRC_JSON_IO_HPP_

#include "fairsde/report.hpp"
#include "fairsde/training.hpp"
#include "json.hpp"

namespace fairsde::json_io {

using nlohmann::json;

json encode(const GroupMetrics& gm);
json encode(const SelectionDecision& d);
json encode(const MetricsReport& r);
json encode(const Mlp& net);
json encode(const VirtualCenters& vc);
json encode(std::span<const EpochLog> log);

GroupMetrics group_metrics(const json& j);
SelectionDecision selection(const json& j);
Mlp mlp(const json& j);
VirtualCenters centers(const json& j);
std::vector<EpochLog> epoch_log(const json& j);

}  // namespace fairsde::json_io

#endif  // FAIRSDE_SRC_JSON_IO_HPP_
