#pragma once

#include <string>

#include "readapt/adaptation.hpp"
#include "readapt/dataset.hpp"

namespace readapt {

// Everything a `run` invocation needs. Either `dataset_path` points at a CSV
// produced by gen-data, or `data` describes a benchmark to synthesize on the
// fly; specifying both in one config is rejected.
struct RunConfig {
    AdaConfig ada;
    DomainSpec data;
    std::string dataset_path;
    std::string out_dir;
};

RunConfig default_run_config();

// Parses and fully validates a config. Violations are not reported one at a
// time: the exception message lists every problem found, one per line.
RunConfig parse_run_config(const std::string& json_text);

RunConfig load_run_config(const std::string& path);

// Normalized snapshot of the effective configuration, suitable for byte
// comparison across runs.
std::string run_config_to_json(const RunConfig& config);

} // namespace readapt
