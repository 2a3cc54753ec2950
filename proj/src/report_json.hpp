#pragma once

#include <string>

#include "inference.hpp"
#include "simulate.hpp"

namespace gibbsfit {

std::string fit_result_json(const FitResult& fit, const ModelSpec& model,
                            const std::string& config_echo);

std::string stats_json(const ModelSpec& model, const PointPattern& pattern,
                       bool per_point, const std::string& config_echo);

std::string gnz_json(const ModelSpec& model, std::span<const double> theta,
                     const PointPattern& pattern, const Window& fit_window,
                     const QuadratureScheme& quad,
                     const std::string& config_echo);

std::string sim_manifest_json(const ModelSpec& model, const SimConfig& config,
                              const SimResult& result,
                              const std::string& config_echo);

std::string pattern_svg(const PointPattern& pattern);

}  // namespace gibbsfit
