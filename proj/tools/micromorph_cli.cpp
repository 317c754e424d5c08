// micromorph: config-driven construction and diagnostics of homogenised
// multi-continuum models.  See README.md for the config schema.
#include "micromorph/config.hpp"
#include "micromorph/errors.hpp"
#include "micromorph/runner.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <thread>
#include <vector>

using namespace micromorph;

namespace {

struct Common {
  std::string config;
  std::vector<std::string> sets;
  std::optional<int> modes, N, order_a, order_gamma, alpha;
  std::optional<std::string> out;

  std::vector<Override> overrides() const {
    std::vector<Override> o;
    for (const auto& s : sets) o.push_back(Override::parse(s));
    if (modes) o.push_back({"modes", std::to_string(*modes)});
    if (N) o.push_back({"orders.N", std::to_string(*N)});
    if (order_a) o.push_back({"orders.order_a", std::to_string(*order_a)});
    if (order_gamma) o.push_back({"orders.order_gamma", std::to_string(*order_gamma)});
    if (alpha) o.push_back({"alpha", std::to_string(*alpha)});
    if (out) o.push_back({"output.dir", "\"" + *out + "\""});
    return o;
  }
};

void add_common(CLI::App* sub, Common& c, bool needs_config) {
  auto* opt = sub->add_option("config", c.config, "run configuration (JSON)");
  if (needs_config) opt->required();
  sub->add_option("--set", c.sets, "override a config key, e.g. --set orders.N=5");
  sub->add_option("-M,--modes", c.modes, "number of retained modes");
  sub->add_option("-N,--order", c.N, "gradient truncation (keep derivative orders < N)");
  sub->add_option("--order-a", c.order_a, "heterogeneity truncation (keep a^k, k < order_a)");
  sub->add_option("--order-gamma", c.order_gamma, "nonlinearity truncation");
  sub->add_option("--alpha", c.alpha, "time order, 1 or 2");
  sub->add_option("-o,--out", c.out, "output directory");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Invariant-manifold homogenisation: multi-continuum macroscale models and diagnostics"};
  app.require_subcommand(1);

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"eigen", "cell eigenvalues, spectral gap and eigenvector CSV"},
      {"construct", "construct the homogenised model; writes model.json and iterations.csv"},
      {"dispersion", "dispersion sheets of the model (and the Bloch oracle for grid cells)"},
      {"radius", "Domb-Sykes / Mercer-Roberts convergence radius of a coefficient series"},
      {"regularise", "regularise a one-mode model into operator form"},
      {"dns", "validate the slow rate against a fine-grid simulation"},
      {"fde", "modal solution of the fractional-time equation"},
      {"verify", "construct and compare against a reference model document"},
  };
  Common common;
  for (const auto& [name, help] : commands) add_common(app.add_subcommand(name, help), common, name != "fde" && name != "eigen");

  std::vector<std::string> sweep_configs;
  std::string sweep_command = "construct";
  int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::vector<std::string> sweep_sets;
  auto* sweep = app.add_subcommand("sweep", "run one command over several configs on worker threads");
  sweep->add_option("configs", sweep_configs, "config files")->required();
  sweep->add_option("-c,--command", sweep_command, "command to run for each config")
      ->check(CLI::IsMember({"eigen", "construct", "dispersion", "radius", "regularise", "dns", "fde", "verify"}));
  sweep->add_option("-j,--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  sweep->add_option("--set", sweep_sets, "override applied to every config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitValidation;
  }

  try {
    if (sweep->parsed()) {
      std::vector<Override> o;
      for (const auto& s : sweep_sets) o.push_back(Override::parse(s));
      return run_sweep(sweep_configs, sweep_command, o, jobs, std::cout, std::cerr);
    }
    const std::string command = app.get_subcommands().front()->get_name();
    const RunConfig cfg = common.config.empty() ? parse_config("{}", common.overrides())
                                                : load_config(common.config, common.overrides());
    return run_command(command, cfg, std::cout, std::cerr);
  } catch (const ValidationError& e) {
    std::cerr << "error: validation: " << e.what() << '\n';
    return kExitValidation;
  }
}
