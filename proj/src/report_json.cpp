#include "report_json.hpp"

#include <nlohmann/json.hpp>
#include <sstream>

#include "pattern_io.hpp"

namespace gibbsfit {

namespace {

using nlohmann::json;

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

json window_to_json(const Window& w) {
  return json::array({w.xmin, w.xmax, w.ymin, w.ymax});
}

json model_to_json(const ModelSpec& model) {
  json m;
  m["family"] = family_name(model.family());
  m["dimension"] = model.dimension();
  m["interaction_range"] = model.interaction_range();
  json names = json::array();
  for (const auto& c : model.components()) names.push_back(c.name);
  m["components"] = names;
  return m;
}

json echo_or_null(const std::string& config_echo) {
  if (config_echo.empty()) return nullptr;
  json parsed = json::parse(config_echo, nullptr, false);
  return parsed.is_discarded() ? json(config_echo) : parsed;
}

}  // namespace

std::string fit_result_json(const FitResult& fit, const ModelSpec& model,
                            const std::string& config_echo) {
  json out;
  out["model"] = model_to_json(model);
  out["theta_hat"] = vector_to_json(fit.theta_hat);
  out["u2"] = matrix_to_json(fit.u2);
  out["sigma_hat"] = matrix_to_json(fit.sigma_hat);
  out["vcov"] = matrix_to_json(fit.vcov);
  json ci = json::array();
  for (std::size_t j = 0; j < fit.ci.size(); ++j) {
    ci.push_back(json::array({fit.ci[j][0], fit.ci[j][1]}));
  }
  out["ci"] = ci;
  out["ci_level"] = fit.level;
  out["ci_valid"] = fit.ci_valid;
  out["solver"] = {
      {"iterations", fit.trace.iterations},
      {"gradient_norm", fit.trace.grad_norm},
      {"converged", fit.trace.converged},
      {"stop_reason", fit.trace.stop_reason},
  };
  out["diagnostics"] = {
      {"u2_eigenvalues", vector_to_json(fit.identifiability.u2_eigenvalues)},
      {"sigma_eigenvalues",
       vector_to_json(fit.identifiability.sigma_eigenvalues)},
      {"u2_condition", fit.identifiability.u2_condition},
      {"sigma_condition", fit.identifiability.sigma_condition},
      {"u2_flagged", fit.identifiability.u2_flagged},
      {"sigma_flagged", fit.identifiability.sigma_flagged},
  };
  out["geometry"] = {
      {"fit_window", window_to_json(fit.fit_window)},
      {"cell_size", fit.cell_size},
      {"dvee", fit.dvee},
      {"area", fit.area},
      {"data_count", fit.data_count},
  };
  out["config"] = echo_or_null(config_echo);
  return out.dump(2);
}

std::string stats_json(const ModelSpec& model, const PointPattern& pattern,
                       bool per_point, const std::string& config_echo) {
  json out;
  out["model"] = model_to_json(model);
  const StatValue global = global_statistics(model, pattern);
  out["global"] = global.v;
  out["hard_core_violation"] = global.hard_core;
  out["n"] = pattern.size();
  if (per_point) {
    json local = json::array();
    for (std::size_t i = 0; i < pattern.size(); ++i) {
      std::vector<MarkedPoint> rest;
      rest.reserve(pattern.size() - 1);
      for (std::size_t j = 0; j < pattern.size(); ++j) {
        if (j != i) rest.push_back(pattern[j]);
      }
      const PointPattern others(std::move(rest), pattern.window(),
                                pattern.mark_space());
      const StatValue v = local_statistics(model, pattern[i], others);
      local.push_back(
          {{"index", i}, {"v", v.v}, {"hard_core", v.hard_core}});
    }
    out["local"] = local;
  }
  out["config"] = echo_or_null(config_echo);
  return out.dump(2);
}

std::string gnz_json(const ModelSpec& model, std::span<const double> theta,
                     const PointPattern& pattern, const Window& fit_window,
                     const QuadratureScheme& quad,
                     const std::string& config_echo) {
  json out;
  out["model"] = model_to_json(model);
  out["theta"] = std::vector<double>(theta.begin(), theta.end());
  LplEvaluator eval(model, pattern, fit_window, quad);
  out["raw_residual"] = eval.gnz_residual(theta, -1);
  json per_stat = json::array();
  for (int j = 0; j < model.dimension(); ++j) {
    per_stat.push_back(eval.gnz_residual(theta, j));
  }
  out["statistic_residuals"] = per_stat;
  out["fit_window"] = window_to_json(fit_window);
  out["config"] = echo_or_null(config_echo);
  return out.dump(2);
}

std::string sim_manifest_json(const ModelSpec& model, const SimConfig& config,
                              const SimResult& result,
                              const std::string& config_echo) {
  json out;
  out["model"] = model_to_json(model);
  out["theta"] = config.theta;
  out["window"] = window_to_json(config.window);
  out["steps"] = config.steps;
  out["burn_in"] = config.burn_in;
  out["seed"] = config.seed;
  out["proposal_mix"] = {config.p_birth, config.p_death, config.p_move};
  out["points"] = result.pattern.size();
  const auto rate = [](long long acc, long long prop) {
    return prop > 0 ? static_cast<double>(acc) / static_cast<double>(prop)
                    : 0.0;
  };
  out["acceptance_rates"] = {
      {"birth", rate(result.accepted[0], result.proposals[0])},
      {"death", rate(result.accepted[1], result.proposals[1])},
      {"move", rate(result.accepted[2], result.proposals[2])},
  };
  out["config"] = echo_or_null(config_echo);
  return out.dump(2);
}

std::string pattern_svg(const PointPattern& pattern) {
  const Window& w = pattern.window();
  const double scale = 600.0 / std::max(w.width(), w.height());
  const double width = w.width() * scale;
  const double height = w.height() * scale;
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << ' '
      << height << "\">\n";
  svg << "  <rect width=\"" << width << "\" height=\"" << height
      << "\" fill=\"white\" stroke=\"black\"/>\n";
  for (const MarkedPoint& p : pattern.points()) {
    const double cx = (p.x - w.xmin) * scale;
    const double cy = height - (p.y - w.ymin) * scale;
    svg << "  <circle cx=\"" << cx << "\" cy=\"" << cy
        << "\" r=\"2.5\" fill=\"steelblue\"/>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace gibbsfit
