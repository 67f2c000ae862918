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

#include <filesystem>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "seuscrub/campaign.hpp"

namespace seuscrub::cli {

enum ExitCode : int {
  kOk = 0,
  kFailed = 1,  // replay mismatch, bad usage
  kInvalidConfig = 2,
  kIoFailure = 3,
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses a YAML (or JSON) campaign file; unknown keys are rejected.
campaign::CampaignConfig load_campaign(const std::filesystem::path& path);
campaign::CampaignConfig parse_campaign(const std::string& text);

/// YAML text for cfg; commented adds a short note above each setting.
std::string emit_campaign_yaml(const campaign::CampaignConfig& cfg, bool commented);

struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  std::optional<std::string> out;
  std::vector<std::string> policies;
  std::optional<std::string> profile;
  std::optional<std::uint64_t> experiments;
};

void apply_overrides(campaign::CampaignConfig& cfg, const RunOverrides& o);

/// CSV with a '#' header carrying the root seed and fingerprint.
std::string aggregate_csv(const campaign::CampaignConfig& cfg,
                          const campaign::CampaignResult& result);

std::string policy_slug(const std::string& label);

// Commands. Messages go to out/err; the return value is the exit code.
int cmd_run(const std::optional<std::filesystem::path>& config, const RunOverrides& overrides,
            std::ostream& out, std::ostream& err);
int cmd_replay(const std::filesystem::path& record, const std::optional<std::string>& policy,
               const std::optional<std::filesystem::path>& output, std::ostream& out,
               std::ostream& err);
int cmd_summarize(const std::filesystem::path& dir,
                  const std::optional<std::filesystem::path>& output, std::ostream& out,
                  std::ostream& err);
int cmd_gen_config(const std::optional<std::filesystem::path>& output, std::ostream& out,
                   std::ostream& err);

/// Full command line dispatch (argv[0] is the program name).
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace seuscrub::cli
