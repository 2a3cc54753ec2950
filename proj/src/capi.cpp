#include "gibbsfit.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include "config.hpp"
#include "inference.hpp"
#include "pattern_io.hpp"
#include "report_json.hpp"
#include "simulate.hpp"

namespace {

using namespace gibbsfit;

thread_local std::string g_last_error;

int code_of(const Error& e) {
  switch (e.code()) {
    case ErrorCode::parse:
      return GF_ERR_PARSE;
    case ErrorCode::infeasible_data:
      return GF_ERR_INFEASIBLE;
    case ErrorCode::ill_conditioned:
      return GF_ERR_ILL_CONDITIONED;
    case ErrorCode::numeric:
      return GF_ERR_NUMERIC;
    case ErrorCode::io:
      return GF_ERR_IO;
    default:
      return GF_ERR_INVALID;
  }
}

template <typename F>
auto guarded(F&& f) -> decltype(f()) {
  try {
    g_last_error.clear();
    return f();
  } catch (const Error& e) {
    g_last_error = std::string(e.what()) + " [code " +
                   std::to_string(code_of(e)) + "]";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  }
  return {};
}

template <typename F>
int guarded_status(F&& f) {
  try {
    g_last_error.clear();
    f();
    return GF_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return code_of(e);
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return GF_ERR_INVALID;
  }
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

struct Resolved {
  double dvee = 0.0;
  double cell = 0.0;
  double level = 0.95;
  int nx = 256, ny = 256, mark_nodes = 16, threads = 0;
};

}  // namespace

struct gf_config {
  FileConfig cfg;
};

struct gf_pattern {
  PointPattern pattern;
};

struct gf_fit {
  FitResult result;
  ModelSpec model;
  std::string echo;
};

namespace {

Resolved resolve_options(const FileConfig& cfg, const gf_run_options* opt) {
  Resolved r;
  const double D = cfg.model.interaction_range();
  r.dvee = (opt && opt->dvee > 0.0) ? opt->dvee : cfg.dvee.value_or(D);
  r.cell = (opt && opt->cell > 0.0) ? opt->cell : cfg.cell.value_or(D);
  r.level = (opt && opt->level > 0.0) ? opt->level : cfg.level.value_or(0.95);
  r.nx = (opt && opt->grid_nx > 0) ? opt->grid_nx : cfg.grid_nx.value_or(256);
  r.ny = (opt && opt->grid_ny > 0) ? opt->grid_ny : cfg.grid_ny.value_or(256);
  r.mark_nodes = (opt && opt->mark_nodes > 0) ? opt->mark_nodes
                                              : cfg.mark_nodes.value_or(16);
  r.threads = (opt && opt->threads > 0) ? opt->threads : cfg.threads.value_or(0);
  return r;
}

std::vector<double> resolve_theta(const FileConfig& cfg, const double* theta,
                                  int theta_len, const char* purpose) {
  if (theta && theta_len > 0) {
    return std::vector<double>(theta, theta + theta_len);
  }
  if (cfg.theta) return *cfg.theta;
  raise(ErrorCode::configuration,
        std::string(purpose) +
            " needs theta (pass it explicitly or set [model] theta)");
}

}  // namespace

extern "C" {

const char* gf_last_error(void) { return g_last_error.c_str(); }

gf_config* gf_config_load(const char* path) {
  return guarded([&]() -> gf_config* {
    return new gf_config{load_config(path)};
  });
}

gf_config* gf_config_parse(const char* text, int is_json) {
  return guarded([&]() -> gf_config* {
    return new gf_config{parse_config(text, is_json != 0)};
  });
}

void gf_config_free(gf_config* config) { delete config; }

int gf_config_dimension(const gf_config* config) {
  return config ? config->cfg.model.dimension() : -1;
}

double gf_config_range(const gf_config* config) {
  return config ? config->cfg.model.interaction_range() : -1.0;
}

int gf_config_theta(const gf_config* config, double* out, int cap) {
  if (!config || !config->cfg.theta) return 0;
  const auto& t = *config->cfg.theta;
  for (int i = 0; i < cap && i < static_cast<int>(t.size()); ++i) {
    out[i] = t[static_cast<std::size_t>(i)];
  }
  return static_cast<int>(t.size());
}

int gf_config_data_window(const gf_config* config, double out[4]) {
  if (!config || !config->cfg.data_window) return 0;
  const Window& w = *config->cfg.data_window;
  out[0] = w.xmin;
  out[1] = w.xmax;
  out[2] = w.ymin;
  out[3] = w.ymax;
  return 1;
}

gf_pattern* gf_pattern_read(const gf_config* config, const char* csv_path,
                            const double window[4]) {
  return guarded([&]() -> gf_pattern* {
    if (!config) raise(ErrorCode::invalid_input, "null config");
    Window w = [&]() {
      if (window) return Window(window[0], window[1], window[2], window[3]);
      if (config->cfg.data_window) return *config->cfg.data_window;
      raise(ErrorCode::configuration,
            "no window: pass one or set [data] window in the config");
    }();
    return new gf_pattern{read_pattern_file(
        csv_path, config->cfg.model.mark_space(), w)};
  });
}

void gf_pattern_free(gf_pattern* pattern) { delete pattern; }

long gf_pattern_size(const gf_pattern* pattern) {
  return pattern ? static_cast<long>(pattern->pattern.size()) : -1;
}

int gf_pattern_write(const gf_pattern* pattern, const char* csv_path) {
  return guarded_status([&]() {
    if (!pattern) raise(ErrorCode::invalid_input, "null pattern");
    write_pattern_file(csv_path, pattern->pattern);
  });
}

char* gf_pattern_svg_string(const gf_pattern* pattern) {
  return guarded([&]() -> char* {
    if (!pattern) raise(ErrorCode::invalid_input, "null pattern");
    return copy_string(pattern_svg(pattern->pattern));
  });
}

void gf_run_options_init(gf_run_options* options) {
  if (!options) return;
  options->dvee = 0.0;
  options->cell = 0.0;
  options->grid_nx = 0;
  options->grid_ny = 0;
  options->mark_nodes = 0;
  options->level = 0.0;
  options->threads = 0;
}

gf_fit* gf_fit_run(const gf_config* config, const gf_pattern* pattern,
                   const gf_run_options* options) {
  return guarded([&]() -> gf_fit* {
    if (!config || !pattern) raise(ErrorCode::invalid_input, "null argument");
    Resolved r = resolve_options(config->cfg, options);
    const ModelSpec& model = config->cfg.model;
    const Window fit_window = erode_window(pattern->pattern.window(), r.dvee);
    if (!(r.cell > 0.0)) {
      r.cell = std::min(fit_window.width(), fit_window.height()) / 8.0;
    }
    const QuadratureScheme quad = build_quadrature(
        fit_window, model.mark_space(), r.nx, r.ny, r.mark_nodes);
    FitOptions fit_options;
    fit_options.level = r.level;
    fit_options.threads = r.threads;
    FitResult result = fit_mple(model, pattern->pattern, fit_window, quad,
                                r.cell, r.dvee, fit_options);
    return new gf_fit{std::move(result), model, config->cfg.echo_json};
  });
}

gf_fit* gf_vcov_run(const gf_config* config, const gf_pattern* pattern,
                    const double* theta, int theta_len,
                    const gf_run_options* options) {
  return guarded([&]() -> gf_fit* {
    if (!config || !pattern) raise(ErrorCode::invalid_input, "null argument");
    Resolved r = resolve_options(config->cfg, options);
    const ModelSpec& model = config->cfg.model;
    const std::vector<double> th =
        resolve_theta(config->cfg, theta, theta_len, "vcov");
    const Window fit_window = erode_window(pattern->pattern.window(), r.dvee);
    if (!(r.cell > 0.0)) {
      r.cell = std::min(fit_window.width(), fit_window.height()) / 8.0;
    }
    const QuadratureScheme quad = build_quadrature(
        fit_window, model.mark_space(), r.nx, r.ny, r.mark_nodes);
    FitOptions fit_options;
    fit_options.level = r.level;
    fit_options.threads = r.threads;
    FitResult result = inference_at(model, pattern->pattern, fit_window, quad,
                                    r.cell, r.dvee, th, fit_options);
    return new gf_fit{std::move(result), model, config->cfg.echo_json};
  });
}

void gf_fit_free(gf_fit* fit) { delete fit; }

int gf_fit_converged(const gf_fit* fit) {
  return fit && fit->result.trace.converged ? 1 : 0;
}

int gf_fit_dimension(const gf_fit* fit) {
  return fit ? static_cast<int>(fit->result.theta_hat.size()) : -1;
}

double gf_fit_theta_at(const gf_fit* fit, int j) {
  if (!fit || j < 0 || j >= fit->result.theta_hat.size()) return 0.0;
  return fit->result.theta_hat[j];
}

double gf_fit_vcov_at(const gf_fit* fit, int j, int k) {
  if (!fit || j < 0 || k < 0 || j >= fit->result.vcov.rows() ||
      k >= fit->result.vcov.cols()) {
    return 0.0;
  }
  return fit->result.vcov(j, k);
}

char* gf_fit_json_string(const gf_fit* fit) {
  return guarded([&]() -> char* {
    if (!fit) raise(ErrorCode::invalid_input, "null fit");
    return copy_string(fit_result_json(fit->result, fit->model, fit->echo));
  });
}

void gf_sim_options_init(gf_sim_options* options) {
  if (!options) return;
  options->window[0] = options->window[1] = 0.0;
  options->window[2] = options->window[3] = 0.0;
  options->steps = -1;
  options->burn_in = -1;
  options->seed = 0;
  options->seed_set = 0;
  options->p_birth = options->p_death = options->p_move = 0.0;
  options->theta = nullptr;
  options->theta_len = 0;
}

gf_pattern* gf_simulate(const gf_config* config,
                        const gf_sim_options* options,
                        char** manifest_json) {
  return guarded([&]() -> gf_pattern* {
    if (!config) raise(ErrorCode::invalid_input, "null config");
    const FileConfig& cfg = config->cfg;
    SimConfig sim;
    sim.theta = resolve_theta(
        cfg, options ? options->theta : nullptr,
        options ? options->theta_len : 0, "simulate");
    const bool window_given =
        options && (options->window[0] != 0.0 || options->window[1] != 0.0 ||
                    options->window[2] != 0.0 || options->window[3] != 0.0);
    if (window_given) {
      sim.window = Window(options->window[0], options->window[1],
                          options->window[2], options->window[3]);
    } else if (cfg.sim_window) {
      sim.window = *cfg.sim_window;
    } else if (cfg.data_window) {
      sim.window = *cfg.data_window;
    } else {
      raise(ErrorCode::configuration, "simulate needs a window");
    }
    sim.steps = (options && options->steps >= 0) ? options->steps
                                                 : cfg.steps.value_or(200000);
    sim.burn_in = (options && options->burn_in >= 0)
                      ? options->burn_in
                      : cfg.burn_in.value_or(100000);
    sim.burn_in = std::min(sim.burn_in, sim.steps);
    sim.seed = (options && options->seed_set) ? options->seed
                                              : cfg.seed.value_or(0);
    const bool mix_given =
        options && (options->p_birth != 0.0 || options->p_death != 0.0 ||
                    options->p_move != 0.0);
    if (mix_given) {
      sim.p_birth = options->p_birth;
      sim.p_death = options->p_death;
      sim.p_move = options->p_move;
    } else if (cfg.p_birth || cfg.p_death || cfg.p_move) {
      sim.p_birth = cfg.p_birth.value_or(0.0);
      sim.p_death = cfg.p_death.value_or(0.0);
      sim.p_move = cfg.p_move.value_or(0.0);
    } else {
      sim.p_birth = 0.45;
      sim.p_death = 0.45;
      sim.p_move = 0.10;
    }
    SimResult result = simulate_mh(cfg.model, sim);
    if (manifest_json) {
      *manifest_json = copy_string(
          sim_manifest_json(cfg.model, sim, result, cfg.echo_json));
    }
    return new gf_pattern{std::move(result.pattern)};
  });
}

char* gf_stats_json_string(const gf_config* config, const gf_pattern* pattern,
                           int per_point) {
  return guarded([&]() -> char* {
    if (!config || !pattern) raise(ErrorCode::invalid_input, "null argument");
    return copy_string(stats_json(config->cfg.model, pattern->pattern,
                                  per_point != 0, config->cfg.echo_json));
  });
}

char* gf_gnz_json_string(const gf_config* config, const gf_pattern* pattern,
                         const double* theta, int theta_len,
                         const gf_run_options* options) {
  return guarded([&]() -> char* {
    if (!config || !pattern) raise(ErrorCode::invalid_input, "null argument");
    const Resolved r = resolve_options(config->cfg, options);
    const ModelSpec& model = config->cfg.model;
    const std::vector<double> th =
        resolve_theta(config->cfg, theta, theta_len, "gnz");
    const ThetaCheck check = validate_theta(model, th);
    if (!check.ok) raise(ErrorCode::invalid_parameter, check.message);
    const Window fit_window = erode_window(pattern->pattern.window(), r.dvee);
    const QuadratureScheme quad = build_quadrature(
        fit_window, model.mark_space(), r.nx, r.ny, r.mark_nodes);
    return copy_string(gnz_json(model, th, pattern->pattern, fit_window, quad,
                                config->cfg.echo_json));
  });
}

void gf_string_free(char* text) { std::free(text); }

}  // extern "C"
