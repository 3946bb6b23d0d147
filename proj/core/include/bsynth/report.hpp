#pragma once

#include <string>

#include <bsynth/experiment.hpp>

namespace bsynth {

/// Row label used in the tables, e.g. "analyst_1" -> "ANALYST 1".
std::string display_name(const std::string& method);

/// Log-ozone sum of squared errors by test split and protocol.
std::string render_sse_table(const MetricsReport& report);
/// Original-scale mean squared error.
std::string render_mse_table(const MetricsReport& report);
/// Exceedance classification errors with per-protocol totals.
std::string render_classification_table(const MetricsReport& report);
/// Once-protocol calibration (Var, MSE, % cvg) plus split averages and
/// optimism = average MSE / average Var.
std::string render_calibration_table(const MetricsReport& report);

/// All four tables separated by blank lines.
std::string render_tables(const MetricsReport& report);

}  // namespace bsynth
