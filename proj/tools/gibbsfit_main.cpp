// Command-line front end for the gibbsfit shared library. Batch only: each
// subcommand reads its inputs, writes its declared output files and exits
// with 0 on success, 1 on input/infeasibility errors, 2 when the solver did
// not converge (the result file is still written).

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gibbsfit.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInputError = 1;
constexpr int kExitNoConvergence = 2;

int fail(const std::string& context) {
  std::cerr << "gibbsfit: " << context;
  const char* detail = gf_last_error();
  if (detail && *detail) std::cerr << ": " << detail;
  std::cerr << '\n';
  return kExitInputError;
}

bool write_file(const std::string& path, const char* text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) return false;
  out << text;
  return static_cast<bool>(out);
}

struct CommonArgs {
  std::string model_path;
  std::string data_path;
  std::string out_path;
  std::string plot_path;
  std::vector<double> theta;
  gf_run_options options{};
};

void add_common_flags(CLI::App* cmd, CommonArgs& args, std::string* grid) {
  cmd->add_option("--model", args.model_path, "model/run config file (TOML or JSON)")
      ->required();
  cmd->add_option("--out", args.out_path, "output file path")->required();
  cmd->add_option("--dvee", args.options.dvee,
                  "erosion distance D-vee (default: config, then model range)");
  cmd->add_option("--cell", args.options.cell,
                  "covariance cell size D-tilde (default: config, then model range)");
  cmd->add_option("--grid", *grid, "quadrature grid, e.g. 256x256");
  cmd->add_option("--mark-nodes", args.options.mark_nodes,
                  "Gauss-Legendre nodes for continuous marks");
  cmd->add_option("--level", args.options.level, "confidence level");
  cmd->add_option("--threads", args.options.threads, "worker threads (0 = all)");
}

bool parse_grid(const std::string& grid, gf_run_options& options) {
  if (grid.empty()) return true;
  const std::size_t pos = grid.find('x');
  if (pos == std::string::npos) return false;
  try {
    options.grid_nx = std::stoi(grid.substr(0, pos));
    options.grid_ny = std::stoi(grid.substr(pos + 1));
  } catch (...) {
    return false;
  }
  return options.grid_nx > 0 && options.grid_ny > 0;
}

using ConfigPtr = std::unique_ptr<gf_config, decltype(&gf_config_free)>;
using PatternPtr = std::unique_ptr<gf_pattern, decltype(&gf_pattern_free)>;
using FitPtr = std::unique_ptr<gf_fit, decltype(&gf_fit_free)>;

ConfigPtr load_config(const std::string& path) {
  return ConfigPtr(gf_config_load(path.c_str()), gf_config_free);
}

PatternPtr read_pattern(const gf_config* config, const std::string& path) {
  return PatternPtr(gf_pattern_read(config, path.c_str(), nullptr),
                    gf_pattern_free);
}

int maybe_plot(const gf_pattern* pattern, const std::string& plot_path) {
  if (plot_path.empty()) return kExitOk;
  char* svg = gf_pattern_svg_string(pattern);
  if (!svg) return fail("cannot render '" + plot_path + "'");
  const bool ok = write_file(plot_path, svg);
  gf_string_free(svg);
  return ok ? kExitOk : fail("cannot write '" + plot_path + "'");
}

int run_fit_like(const CommonArgs& args, bool solve) {
  const ConfigPtr config = load_config(args.model_path);
  if (!config) return fail("cannot load '" + args.model_path + "'");
  const PatternPtr pattern = read_pattern(config.get(), args.data_path);
  if (!pattern) return fail("cannot read '" + args.data_path + "'");

  FitPtr fit(nullptr, gf_fit_free);
  if (solve) {
    fit.reset(gf_fit_run(config.get(), pattern.get(), &args.options));
  } else {
    fit.reset(gf_vcov_run(config.get(), pattern.get(),
                          args.theta.empty() ? nullptr : args.theta.data(),
                          static_cast<int>(args.theta.size()), &args.options));
  }
  if (!fit) return fail(solve ? "fit failed" : "vcov failed");

  char* json = gf_fit_json_string(fit.get());
  if (!json) return fail("cannot serialize the result");
  const bool ok = write_file(args.out_path, json);
  gf_string_free(json);
  if (!ok) return fail("cannot write '" + args.out_path + "'");
  if (const int rc = maybe_plot(pattern.get(), args.plot_path); rc != kExitOk) {
    return rc;
  }
  if (solve && !gf_fit_converged(fit.get())) {
    std::cerr << "gibbsfit: solver did not converge; result written with "
                 "converged=false\n";
    return kExitNoConvergence;
  }
  return kExitOk;
}

int run_stats(const CommonArgs& args, bool per_point) {
  const ConfigPtr config = load_config(args.model_path);
  if (!config) return fail("cannot load '" + args.model_path + "'");
  const PatternPtr pattern = read_pattern(config.get(), args.data_path);
  if (!pattern) return fail("cannot read '" + args.data_path + "'");
  char* json =
      gf_stats_json_string(config.get(), pattern.get(), per_point ? 1 : 0);
  if (!json) return fail("stats failed");
  const bool ok = write_file(args.out_path, json);
  gf_string_free(json);
  if (!ok) return fail("cannot write '" + args.out_path + "'");
  return maybe_plot(pattern.get(), args.plot_path);
}

int run_gnz(const CommonArgs& args) {
  const ConfigPtr config = load_config(args.model_path);
  if (!config) return fail("cannot load '" + args.model_path + "'");
  const PatternPtr pattern = read_pattern(config.get(), args.data_path);
  if (!pattern) return fail("cannot read '" + args.data_path + "'");
  char* json = gf_gnz_json_string(
      config.get(), pattern.get(),
      args.theta.empty() ? nullptr : args.theta.data(),
      static_cast<int>(args.theta.size()), &args.options);
  if (!json) return fail("gnz failed");
  const bool ok = write_file(args.out_path, json);
  gf_string_free(json);
  return ok ? kExitOk : fail("cannot write '" + args.out_path + "'");
}

int run_simulate(const std::string& model_path, const std::string& out_path,
                 const std::string& manifest_path,
                 const std::string& plot_path, gf_sim_options& options) {
  const ConfigPtr config = load_config(model_path);
  if (!config) return fail("cannot load '" + model_path + "'");
  char* manifest = nullptr;
  const PatternPtr pattern(gf_simulate(config.get(), &options, &manifest),
                           gf_pattern_free);
  if (!pattern) return fail("simulation failed");
  const int rc = gf_pattern_write(pattern.get(), out_path.c_str());
  if (rc != GF_OK) {
    gf_string_free(manifest);
    return fail("cannot write '" + out_path + "'");
  }
  if (!manifest_path.empty() && manifest) {
    if (!write_file(manifest_path, manifest)) {
      gf_string_free(manifest);
      return fail("cannot write '" + manifest_path + "'");
    }
  }
  gf_string_free(manifest);
  return maybe_plot(pattern.get(), plot_path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pseudolikelihood fitting and simulation for marked Gibbs "
               "point process models"};
  app.require_subcommand(1);

  CommonArgs fit_args, vcov_args, stats_args, gnz_args;
  std::string fit_grid, vcov_grid, stats_grid, gnz_grid;
  bool stats_per_point = false;

  CLI::App* fit = app.add_subcommand("fit", "maximum pseudolikelihood fit");
  add_common_flags(fit, fit_args, &fit_grid);
  fit->add_option("--data", fit_args.data_path, "pattern CSV")->required();
  fit->add_option("--plot", fit_args.plot_path, "also write an SVG of the data");

  CLI::App* vcov = app.add_subcommand(
      "vcov", "covariances and intervals at a fixed theta");
  add_common_flags(vcov, vcov_args, &vcov_grid);
  vcov->add_option("--data", vcov_args.data_path, "pattern CSV")->required();
  vcov->add_option("--theta", vcov_args.theta,
                   "theta components (default: [model] theta)");

  CLI::App* stats = app.add_subcommand("stats", "sufficient statistics");
  add_common_flags(stats, stats_args, &stats_grid);
  stats->add_option("--data", stats_args.data_path, "pattern CSV")->required();
  stats->add_flag("--per-point", stats_per_point,
                  "also emit each point's local statistics");
  stats->add_option("--plot", stats_args.plot_path,
                    "also write an SVG of the data");

  CLI::App* gnz = app.add_subcommand("gnz", "residual diagnostics");
  add_common_flags(gnz, gnz_args, &gnz_grid);
  gnz->add_option("--data", gnz_args.data_path, "pattern CSV")->required();
  gnz->add_option("--theta", gnz_args.theta,
                  "theta components (default: [model] theta)");

  std::string sim_model, sim_out, sim_manifest, sim_plot;
  gf_sim_options sim_options;
  gf_sim_options_init(&sim_options);
  long long sim_steps = -1, sim_burn = -1;
  std::uint64_t sim_seed = 0;
  bool sim_seed_given = false;
  CLI::App* sim = app.add_subcommand("simulate", "draw a synthetic pattern");
  sim->add_option("--model", sim_model, "model/run config file")->required();
  sim->add_option("--out", sim_out, "pattern CSV to write")->required();
  sim->add_option("--manifest", sim_manifest, "run manifest JSON to write");
  sim->add_option("--steps", sim_steps, "chain length");
  sim->add_option("--burn-in", sim_burn, "burn-in steps");
  sim->add_option("--seed", sim_seed, "RNG seed")
      ->each([&](const std::string&) { sim_seed_given = true; });
  sim->add_option("--plot", sim_plot, "also write an SVG of the pattern");

  CLI11_PARSE(app, argc, argv);

  if (fit->parsed()) {
    if (!parse_grid(fit_grid, fit_args.options)) return fail("bad --grid");
    return run_fit_like(fit_args, true);
  }
  if (vcov->parsed()) {
    if (!parse_grid(vcov_grid, vcov_args.options)) return fail("bad --grid");
    return run_fit_like(vcov_args, false);
  }
  if (stats->parsed()) {
    return run_stats(stats_args, stats_per_point);
  }
  if (gnz->parsed()) {
    if (!parse_grid(gnz_grid, gnz_args.options)) return fail("bad --grid");
    return run_gnz(gnz_args);
  }
  if (sim->parsed()) {
    sim_options.steps = sim_steps;
    sim_options.burn_in = sim_burn;
    if (sim_seed_given) {
      sim_options.seed = sim_seed;
      sim_options.seed_set = 1;
    }
    return run_simulate(sim_model, sim_out, sim_manifest, sim_plot,
                        sim_options);
  }
  return kExitInputError;
}
