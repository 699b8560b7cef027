#include "readapt/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace readapt {

MetricsRecord evaluate(const std::vector<std::pair<int, int>>& true_pred,
                       int num_classes) {
  if (true_pred.empty()) {
    throw std::invalid_argument("evaluate: empty prediction list");
  }
  if (num_classes < 2) {
    throw std::invalid_argument("evaluate: need num_classes >= 2");
  }
  MetricsRecord rec;
  rec.confusion.assign(num_classes, std::vector<std::int64_t>(num_classes, 0));
  for (const auto& [t, p] : true_pred) {
    if (t < 0 || t >= num_classes || p < 0 || p >= num_classes) {
      throw std::invalid_argument("evaluate: label out of range");
    }
    ++rec.confusion[t][p];
  }
  const double total = static_cast<double>(true_pred.size());
  double trace = 0.0, prec_sum = 0.0, rec_sum = 0.0, f1_sum = 0.0;
  for (int c = 0; c < num_classes; ++c) {
    const double tp = static_cast<double>(rec.confusion[c][c]);
    trace += tp;
    double support = 0.0, predicted = 0.0;
    for (int j = 0; j < num_classes; ++j) {
      support += static_cast<double>(rec.confusion[c][j]);
      predicted += static_cast<double>(rec.confusion[j][c]);
    }
    const double precision = predicted > 0.0 ? tp / predicted : 0.0;
    const double recall = support > 0.0 ? tp / support : 0.0;
    const double f1 = (precision + recall) > 0.0
                          ? 2.0 * precision * recall / (precision + recall)
                          : 0.0;
    prec_sum += precision;
    rec_sum += recall;
    f1_sum += f1;
  }
  rec.accuracy = trace / total;
  rec.macro_precision = prec_sum / num_classes;
  rec.macro_recall = rec_sum / num_classes;
  rec.macro_f1 = f1_sum / num_classes;
  return rec;
}

std::vector<std::pair<double, double>> kde_export(
    const std::vector<double>& values, std::optional<double> bandwidth,
    std::size_t grid) {
  if (values.size() < 2) {
    throw std::invalid_argument("kde_export: need at least 2 values");
  }
  if (grid < 2) {
    throw std::invalid_argument("kde_export: need a grid of at least 2");
  }
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1.0));

  double h;
  if (bandwidth.has_value()) {
    h = *bandwidth;
    if (!(h > 0.0)) {
      throw std::invalid_argument("kde_export: bandwidth must be positive");
    }
  } else {
    h = sd * std::pow(n, -0.2);
    if (!(h > 0.0)) {
      throw std::invalid_argument(
          "kde_export: constant input gives zero bandwidth; pass one "
          "explicitly");
    }
  }

  double lo = values[0], hi = values[0];
  for (double v : values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  lo -= 3.0 * h;
  hi += 3.0 * h;

  const double inv_norm = 1.0 / (n * h * std::sqrt(2.0 * M_PI));
  std::vector<std::pair<double, double>> out;
  out.reserve(grid);
  for (std::size_t g = 0; g < grid; ++g) {
    const double x =
        lo + (hi - lo) * static_cast<double>(g) /
                 static_cast<double>(grid - 1);
    double density = 0.0;
    for (double v : values) {
      const double z = (x - v) / h;
      density += std::exp(-0.5 * z * z);
    }
    out.emplace_back(x, density * inv_norm);
  }
  return out;
}

} // namespace readapt
