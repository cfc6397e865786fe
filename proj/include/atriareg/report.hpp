#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "atriareg/metrics.hpp"
#include "atriareg/registration.hpp"

namespace atriareg {

inline constexpr const char *kMetricsCsvHeader = "phase,dice,hausdorff_mm,gt_volume_ml,warped_volume_ml,mean_jacobian";

// Shortest decimal that parses back to the same double ("1" for 1.0,
// "0.95" for 0.95, exponent form where shorter).
std::string format_double(double v);

// Header line plus one row per evaluation, '\n' line endings.
// Throws InvalidArgument for an empty list, IoFailure.
std::string metrics_csv(std::span<const PhaseEvaluation> evals);
void write_metrics_csv(std::span<const PhaseEvaluation> evals, const std::filesystem::path &path);

// Throws IoFailure on unreadable or malformed input.
std::vector<PhaseEvaluation> parse_metrics_csv(std::string_view text);
std::vector<PhaseEvaluation> read_metrics_csv(const std::filesystem::path &path);

// JSON document with the configuration and, per phase, the iterations per
// level, the convergence flag and every accepted iteration's loss terms.
std::string loss_trace_json(std::span<const RegistrationResult> results, const RegistrationConfig &cfg);
void write_loss_trace(std::span<const RegistrationResult> results, const RegistrationConfig &cfg,
                      const std::filesystem::path &path);

} // namespace atriareg
