#pragma once

#include <string>
#include <utility>
#include <vector>

#include "readapt/adaptation.hpp"
#include "readapt/metrics.hpp"

namespace readapt {

// All serializers are deterministic: keys are emitted sorted and no
// timestamps or environment state enter the output.
std::string rounds_to_json(const std::vector<RoundReport>& rounds);
std::string summary_to_json(const RunSummary& summary);

void write_text_file(const std::string& path, const std::string& content);

// Two-column CSV `x,density`.
void write_kde_csv(const std::string& path,
                   const std::vector<std::pair<double, double>>& points);

// One row per evaluation surface: pool, phase and the four metrics.
void write_metrics_csv(const std::string& path, const RunSummary& summary);

} // namespace readapt
