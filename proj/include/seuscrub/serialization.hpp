// Copyright 2026 The seuscrub Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "seuscrub/campaign.hpp"

namespace seuscrub::io {

using nlohmann::json;

/// Configuration rejected by validation; message names the offending field.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

json to_json(const campaign::ExperimentConfig& cfg);
json to_json(const campaign::CampaignConfig& cfg);
json to_json(const campaign::ExperimentRecord& rec);

/// Strict readers: unknown keys and wrong types raise ConfigError; missing
/// keys take their defaults.
campaign::ExperimentConfig experiment_from_json(const json& j);
campaign::CampaignConfig campaign_from_json(const json& j);
campaign::ExperimentRecord record_from_json(const json& j);

/// FNV-1a over the model version and the canonical config JSON.
std::uint64_t fingerprint(const campaign::ExperimentConfig& cfg);
std::uint64_t fingerprint(const campaign::CampaignConfig& cfg);

std::string hex64(std::uint64_t v);
std::uint64_t parse_hex64(const std::string& s);

}  // namespace seuscrub::io
