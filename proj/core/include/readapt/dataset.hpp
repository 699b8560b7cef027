#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace readapt {

enum class Domain { source, target };
enum class Split { train, test };

struct Sample {
  std::int64_t id = 0;
  Domain domain = Domain::source;
  Split split = Split::train;
  int label = 0;
  std::vector<double> x;
};

// Affine shift applied to target-domain points: rotation in the first
// two coordinates, uniform scaling, then translation. Target noise is
// the source noise scaled by sigma_ratio.
struct ShiftSpec {
  double rotation_deg = 0.0;
  double scale = 1.0;
  std::vector<double> translation; // empty means zero
  double sigma_ratio = 1.0;
};

struct DomainSpec {
  int num_classes = 6;
  int d_in = 8;
  int per_class_per_domain = 60;
  double radius = 2.0;
  double sigma = 0.55;
  ShiftSpec shift;
  std::uint64_t seed = 0;
};

struct DatasetBundle {
  DomainSpec spec;
  std::vector<Sample> samples; // ascending id
};

// Every constraint violation in the spec, one message each; empty means valid.
std::vector<std::string> spec_problems(const DomainSpec& spec);

// Class centers sit on a radius-R circle in the first two coordinates
// (zero elsewhere); every point is the center plus isotropic Gaussian
// noise; target points then pass through the affine shift. Ids are
// sequential, source block first. The split is 75/25 train/test,
// stratified exactly per (domain, class) group.
DatasetBundle generate(const DomainSpec& spec);

// CSV with `# key value` metadata lines (the full DomainSpec), then a
// header row `id,domain,split,label,f0,...`; values carry 17
// significant digits so the round trip is bit-exact.
void save_csv(const DatasetBundle& bundle, const std::string& path);
DatasetBundle load_csv(const std::string& path);

} // namespace readapt
