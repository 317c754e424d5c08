/**
 * @file model_io.hpp
 * @brief Model documents (JSON), the per-mode text layout and
 *        coefficient-level comparison of two models.
 */
#pragma once

#include "micromorph/model.hpp"

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace micromorph {

/// Exact documents store coefficients as "p/q" strings, numeric ones as
/// shortest round-trip decimals.  Both serialise deterministically.
std::string to_document(const HomogenisedModel<Rational>& model);
std::string to_document(const HomogenisedModel<double>& model);

using AnyModel = std::variant<HomogenisedModel<Rational>, HomogenisedModel<double>>;

/// Parses either flavour; throws ValidationError on schema problems.
AnyModel parse_document(const std::string& text);

/// Numeric view of either flavour.
HomogenisedModel<double> to_numeric(const AnyModel& m);

/// One line per mode, e.g. "∂t^α U0 = U0xx".  Terms are grouped by their
/// amplitude part; numeric coefficients below `threshold` in magnitude are
/// dropped (exact coefficients never are).
std::string pretty(const HomogenisedModel<Rational>& model);
std::string pretty(const HomogenisedModel<double>& model, double threshold = 1e-3);

struct CoefficientDiff {
  int mode = 0;
  std::string term;  // "a^2*U0xx"
  double reference = 0;
  double value = 0;
  double abs_diff = 0;
  double rel_diff = 0;
  bool exact_equal = false;  // both exact and identical
};

struct VerifyOptions {
  double abs_tol = 0;       // a coefficient passes if abs_diff <= abs_tol ...
  double rel_tol = 0;       // ... or rel_diff <= rel_tol
  double ignore_below = 0;  // unmatched terms smaller than this are not mismatches
};

struct DiffReport {
  std::vector<CoefficientDiff> diffs;        // terms present in both
  std::vector<std::string> missing;          // in the reference only
  std::vector<std::string> unexpected;       // in the candidate only
  std::vector<std::string> header_mismatch;  // modes, alpha, dimension
  int failures = 0;

  bool ok() const { return failures == 0; }
  std::string text() const;
  std::string csv() const;
};

/// Compares a candidate against a reference.  Both exact: equality is exact.
DiffReport diff_models(const AnyModel& reference, const AnyModel& candidate, const VerifyOptions& opts);

}  // namespace micromorph
