#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace readapt {

struct MetricsRecord {
  double accuracy = 0.0;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  std::vector<std::vector<std::int64_t>> confusion; // [true][predicted]
};

// Macro-averaged metrics; per-class precision/recall/F1 terms with an
// empty denominator count as 0.
MetricsRecord evaluate(const std::vector<std::pair<int, int>>& true_pred,
                       int num_classes);

// Gaussian kernel density on an even grid spanning [min - 3h, max + 3h].
// Default bandwidth is Scott's rule, sample-std * n^(-1/5); pass an
// explicit bandwidth to override. Constant input without an explicit
// bandwidth has no scale and is rejected.
std::vector<std::pair<double, double>> kde_export(
    const std::vector<double>& values,
    std::optional<double> bandwidth = std::nullopt, std::size_t grid = 256);

} // namespace readapt
