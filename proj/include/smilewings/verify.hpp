#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace smilewings::verify {

/// One measured quantity against its limit. Passes when value < limit
/// (strict) or value <= limit.
struct Measurement {
  std::string label;
  double value = 0.0;
  double limit = 0.0;
  bool strict = true;

  bool passed() const { return strict ? value < limit : value <= limit; }
  double margin() const { return limit - value; }
};

struct CheckInfo {
  int id;
  std::string name;
  std::vector<std::string> modules;
  std::string summary;
  double runtime_limit_s;  // inf when untimed
};

struct CheckResult {
  CheckInfo info;
  std::vector<Measurement> measurements;
  double runtime_s = 0.0;
  std::string error;  // set when the check threw

  bool passed() const;
};

struct Options {
  /// Check ids, check names or module names; empty runs everything.
  std::vector<std::string> only;
  /// Loosens every tolerance-type limit to at least this value and relaxes
  /// the working tolerances of the computations to match.
  std::optional<double> tol;
  std::uint64_t seed = 42;
};

const std::vector<CheckInfo>& catalog();

/// Ids selected by `only`; throws smilewings::Error(Domain) on an unknown token.
std::vector<int> select(const std::vector<std::string>& only);

CheckResult run_check(int id, const Options& options);
std::vector<CheckResult> run(const Options& options);

/// One line per check: "PASS [3] name  (1.2 s)  worst margin ...".
std::string summary_line(const CheckResult& r);

/// Wall-clock runtimes are left out unless `timings` is set, so the output
/// is byte-identical across runs.
nlohmann::ordered_json to_json(const std::vector<CheckResult>& results, const Options& options, bool timings = false);

}  // namespace smilewings::verify
