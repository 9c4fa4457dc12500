#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "vpb/config.hpp"

namespace vpb::cli {

// exit codes
inline constexpr int kOk = 0;
inline constexpr int kCheckFailed = 1;
inline constexpr int kBadInput = 2;  // unusable config or flags
inline constexpr int kRuntimeError = 3;

const std::vector<std::string>& subcommands();

struct Artifacts {
  std::string csv, json;  // file contents
  bool ok = true;         // false when `check` found a failing invariant
};

struct CheckItem {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

// the property suite behind `check`
std::vector<CheckItem> property_suite(const ExperimentConfig& cfg, const CollisionOperator& op);

// Computes one subcommand's tables. Notices (cache rebuilds, skipped points) go to `log`.
Artifacts compute(const std::string& subcommand, const ExperimentConfig& cfg, std::ostream& log);

// Writes <out>/<subcommand>-<config hash>.{csv,json}; returns the csv path.
std::string write_artifacts(const std::string& subcommand, const ExperimentConfig& cfg, const Artifacts& a);

// vpbkit <subcommand> [--config PATH] [--backend B] [--jobs N] [--out DIR]
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace vpb::cli
