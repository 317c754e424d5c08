/**
 * @file config.hpp
 * @brief Run configuration: a nested JSON document mapped onto typed
 *        settings, with dotted-path overrides from the command line.
 */
#pragma once

#include "micromorph/hetero.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace micromorph {

enum class Problem { oned_trig, oned_grid, elastic2d };

std::string problem_name(Problem p);

struct HeteroConfig {
  // oned-trig: reciprocal-cos or trig-rational (exact series in a)
  HeterogeneitySpec trig;
  // oned-grid: reciprocal-cos (numeric a), laminate or constant
  std::string grid_kind = "reciprocal-cos";
  double a = 0.5;
  double ell = 2 * std::numbers::pi;
  double eta = 0.06 * 2 * std::numbers::pi;  // layer width
  double chi = 1.0;                           // layer / bulk conductivity ratio
  int n = 128;
  // elastic2d
  int nx = 10, ny = 10;
  std::string E = "sinpattern";  // or a constant given in E_value
  double E_value = 1.0;
  double nu = 0.4;
};

struct DispersionConfig {
  int order = 6;                    // sheet series to s^(order-1)
  std::vector<double> k;            // sample wavenumbers
  std::vector<std::pair<std::string, double>> params;  // symbol values, e.g. a = 0.5
};

struct RadiusConfig {
  std::string method = "mercer-roberts";  // or domb-sykes
  std::string variable = "a";             // a: coefficient series in a; k: in wavenumber
  int mode = 0;                           // equation
  std::string amp = "U0";                 // amplitude monomial (variable a)
  int amp_mode = 0;                       // variable k: U_{amp_mode} d_x^d
  int a_power = 2;                        // variable k: power of a
  int stride = 2;
  int start = 0;                          // leading coefficients to skip
};

struct RegulariseConfig {
  std::vector<std::pair<int, int>> den = {{2, 0}, {0, 2}};
  int order = 5;
};

struct DnsConfig {
  std::vector<double> k0 = {0.25};
  double T = 60;
  double dt = 0.5;
  double cfl = 0.5;
};

struct FdeConfig {
  double alpha = 0.9;
  std::optional<double> lambda;  // default: first non-zero retained eigenvalue
  std::vector<double> c = {1.0};
  double t_max = 10;
  int steps = 200;
  std::optional<double> forcing;  // constant q
};

struct ReduceConfig {
  std::vector<int> keep = {0};
  int drop_order = 2;
};

struct VerifyConfig {
  std::string reference;  // model document, relative to the config file
  double abs_tol = 0;
  double rel_tol = 0;
  double ignore_below = 0;
};

struct RunConfig {
  std::string source;  // path of the config file, for relative references
  std::string name;    // file stem, used by sweep
  Problem problem = Problem::oned_trig;
  int alpha = 1;
  int modes = 1;
  int N = 3;
  int order_a = 1;
  int order_gamma = 1;
  HeteroConfig hetero;
  std::optional<std::vector<FieldTerm>> eta;  // oned-trig nonlinearity
  bool advection = false;                     // oned-grid nonlinearity
  bool y_diffusion = true;
  double tol = 1e-8;
  double zero_small = 1e-8;
  double report_threshold = 1e-3;
  int max_iter = 100;
  std::optional<DispersionConfig> dispersion;
  std::optional<RadiusConfig> radius;
  std::optional<RegulariseConfig> regularise;
  std::optional<DnsConfig> dns;
  std::optional<FdeConfig> fde;
  std::optional<ReduceConfig> reduce;
  std::optional<VerifyConfig> verify;
  std::string output_dir = "out";

  void validate() const;
};

/// "key.sub=value"; the value is parsed as JSON when possible, else taken as a string.
struct Override {
  std::string path;
  std::string value;
  static Override parse(const std::string& text);
};

RunConfig parse_config(const std::string& text, const std::vector<Override>& overrides = {},
                       const std::string& source = "");
RunConfig load_config(const std::string& path, const std::vector<Override>& overrides = {});

/// Derivative-term names used by the regulariser config: "x2", "x2y2", "y4".
std::pair<int, int> parse_deriv_term(const std::string& s);

}  // namespace micromorph
