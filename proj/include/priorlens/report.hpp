#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "priorlens/fit.hpp"

namespace priorlens {

// Per-scenario report: the observed prediction curve with each family's
// fitted curve, and the winning prior's density over a display range
// [min t, 1.5 * max fitted t*], normalized to integrate to 1 (trapezoid).
struct ReportBundle {
    std::string scenario_id;
    std::vector<double> t;
    std::vector<double> observed;
    std::vector<std::pair<Family, std::vector<double>>> fitted;
    std::vector<double> prior_x;
    std::vector<double> prior_density_values;
    FitResult winner;
};

ReportBundle build_report(std::span<const PredictionPair> pairs,
                          std::span<const FitResult> ranked, const QuadratureConfig& cfg,
                          std::string scenario_id);

/// `<stem>.curve.csv` (t, observed, one column per fitted family) and
/// `<stem>.prior.csv` (x, density).
void write_report_csv(const ReportBundle& report, const std::filesystem::path& curve_csv,
                      const std::filesystem::path& prior_csv);

/// Two-panel chart: prediction curves on the left, recovered prior density
/// on the right. Self-contained SVG, no plotting dependency.
void write_report_svg(const ReportBundle& report, const std::filesystem::path& svg);

} // namespace priorlens
