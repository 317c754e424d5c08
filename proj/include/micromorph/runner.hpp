/**
 * @file runner.hpp
 * @brief Config-driven pipelines behind the command-line subcommands.
 */
#pragma once

#include "micromorph/cellspec.hpp"
#include "micromorph/config.hpp"
#include "micromorph/model.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace micromorph {

enum ExitCode : int { kExitOk = 0, kExitValidation = 2, kExitNonConvergence = 3, kExitVerifyDiff = 4 };

struct BuiltModel {
  EigenBasis basis;
  GapReport gap;
  std::optional<HomogenisedModel<Rational>> exact;  // oned-trig
  HomogenisedModel<double> numeric;                 // always set
  std::vector<double> log;
  std::optional<GridField1D> kappa;
  std::optional<ElasticCell> cell;

  std::string document() const;
  std::string text(double threshold) const;
};

/// Cell operator and eigen-basis for the configured problem.
std::pair<EigenBasis, GapReport> build_basis(const RunConfig& cfg);
BuiltModel build_model(const RunConfig& cfg);

/// Grid heterogeneity of a oned-grid config.
GridField1D build_grid_field(const RunConfig& cfg);
ElasticCell build_cell(const RunConfig& cfg);

/// Runs one subcommand (eigen, construct, dispersion, radius, regularise,
/// dns, fde, verify).  Artifacts go to cfg.output_dir.  Errors are reported
/// on `err` as one line "error: <kind>: <reason>" and mapped to exit codes.
int run_command(const std::string& command, const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Runs `command` for each config file on up to `jobs` threads.  Each run
/// writes to <output_dir>/<config name>; console output is replayed in input
/// order.  Returns the largest exit code.
int run_sweep(const std::vector<std::string>& configs, const std::string& command,
              const std::vector<Override>& overrides, int jobs, std::ostream& out, std::ostream& err);

}  // namespace micromorph
