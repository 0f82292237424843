#pragma once

// Experiment orchestration behind the dbarlab tool: one pipeline per
// subcommand, driven by a Config, writing CSVs and a text report.

#include <exception>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dbarlab/config.hpp"
#include "dbarlab/study.hpp"

namespace dbarlab {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 1,
  kExitPrecondition = 2,
  kExitAcceptance = 3,
  kExitNumerical = 4,
};

/// Exit code for an exception escaping run(): ConfigError (and ParseError)
/// 1, PreconditionError and PoleError 2, anything else 4.
int exit_code_for(const std::exception& e);

const std::vector<std::string>& command_names();
const std::vector<double>& default_ladder();  // 1/64, 1/128, 1/256

struct RunOptions {
  std::string out_dir;        // empty: write nothing
  std::optional<int> levels;  // keep the first n spacings of the ladder
  int threads = 1;
};

struct CheckResult {
  std::string key;  // as written in [checks]
  std::string expected;
  std::string actual;
  bool pass = false;
};

struct RunReport {
  std::string command;
  std::vector<double> h;
  std::map<std::string, double> metrics;
  std::map<std::string, std::string> labels;
  std::vector<MetricSlope> slopes;
  std::vector<std::string> summary;
  std::vector<CheckResult> checks;
  std::vector<std::string> files;
  int exit_status = kExitOk;  // kExitAcceptance when a declared check fails
};

/// Runs config "run.command". [checks] entries are evaluated against the
/// report: max_<metric> = v, min_<metric> = v, expect_<label> = text.
RunReport run(const Config& config, const RunOptions& options = {});

/// Summary lines followed by the check table.
std::string render(const RunReport& report);

}  // namespace dbarlab
