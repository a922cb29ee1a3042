#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "ssar/algorithms/metrics.hpp"

namespace ssar::cli {

enum class PlotKind { Return, Score, Q, Beta, N };

PlotKind parse_plot_kind(std::string_view name);
std::string_view plot_kind_name(PlotKind k);

/// Seed-aggregated curve: mean and population std at every step present in
/// all runs. lo/hi are mean -/+ std, so one run collapses the band.
struct Curve {
  std::string label;
  std::vector<double> x, mean, lo, hi;
};

/// Throws Error("empty_metrics") when there are no runs, a run has no
/// records, or the runs share no step.
Curve aggregate(const std::string& label, const std::vector<std::vector<algorithms::MetricRecord>>& runs,
                PlotKind kind);

/// Overlaid mean lines with shaded bands. Output depends only on the inputs.
std::string render_curves(const std::vector<Curve>& curves, const std::string& title, const std::string& x_label,
                          const std::string& y_label);

/// Beta values over the fixed evaluation states at one step, binned on
/// [lo, hi).
struct Histogram {
  std::uint64_t step = 0;
  std::string phase;
  double lo = 0.0;
  double hi = 1.0;
  std::vector<std::uint64_t> counts;
};

Histogram make_histogram(std::uint64_t step, const std::string& phase, const std::vector<double>& values, double lo,
                         double hi, std::size_t bins);
std::string histogram_json_line(const Histogram& h);
std::vector<Histogram> read_histograms(const std::filesystem::path& path);

/// Step on x, beta bin on y, shade by the fraction of states in the bin.
std::string render_heatmap(const std::vector<Histogram>& hists, const std::string& title);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace ssar::cli
