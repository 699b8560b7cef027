#include "readapt/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "readapt/rng.hpp"

namespace readapt {

std::vector<std::string> spec_problems(const DomainSpec& spec) {
  std::vector<std::string> problems;
  if (spec.num_classes < 2) problems.push_back("num_classes must be >= 2");
  if (spec.d_in < 2) problems.push_back("d_in must be >= 2");
  if (spec.per_class_per_domain < 4) {
    problems.push_back("per_class_per_domain must be >= 4");
  }
  if (!(spec.radius > 0.0)) problems.push_back("radius must be positive");
  if (!(spec.sigma >= 0.0)) problems.push_back("sigma must be non-negative");
  if (!(spec.shift.scale > 0.0)) problems.push_back("scale must be positive");
  if (!(spec.shift.sigma_ratio >= 0.0)) {
    problems.push_back("sigma_ratio must be non-negative");
  }
  if (!spec.shift.translation.empty() &&
      spec.shift.translation.size() != static_cast<std::size_t>(spec.d_in)) {
    problems.push_back("translation must be empty or of length d_in");
  }
  return problems;
}

namespace {

void validate_spec(const DomainSpec& spec) {
  const std::vector<std::string> problems = spec_problems(spec);
  if (!problems.empty()) {
    std::string msg = "invalid dataset spec:";
    for (const std::string& p : problems) msg += " " + p + ";";
    throw std::invalid_argument(msg);
  }
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

const char* domain_name(Domain d) {
  return d == Domain::source ? "source" : "target";
}
const char* split_name(Split s) { return s == Split::train ? "train" : "test"; }

} // namespace

DatasetBundle generate(const DomainSpec& spec) {
  validate_spec(spec);
  DatasetBundle bundle;
  bundle.spec = spec;

  RandomStream stream(derive_seed(spec.seed, "data"));
  const double angle = spec.shift.rotation_deg * M_PI / 180.0;
  const double cos_a = std::cos(angle);
  const double sin_a = std::sin(angle);

  std::int64_t next_id = 0;
  for (Domain domain : {Domain::source, Domain::target}) {
    const double sigma = domain == Domain::source
                             ? spec.sigma
                             : spec.sigma * spec.shift.sigma_ratio;
    for (int c = 0; c < spec.num_classes; ++c) {
      const double theta = 2.0 * M_PI * c / spec.num_classes;
      const double cx = spec.radius * std::cos(theta);
      const double cy = spec.radius * std::sin(theta);
      for (int n = 0; n < spec.per_class_per_domain; ++n) {
        Sample s;
        s.id = next_id++;
        s.domain = domain;
        s.label = c;
        s.x.assign(spec.d_in, 0.0);
        s.x[0] = cx;
        s.x[1] = cy;
        for (int d = 0; d < spec.d_in; ++d) {
          s.x[d] += sigma * stream.normal();
        }
        if (domain == Domain::target) {
          const double x0 = s.x[0], x1 = s.x[1];
          s.x[0] = cos_a * x0 - sin_a * x1;
          s.x[1] = sin_a * x0 + cos_a * x1;
          for (int d = 0; d < spec.d_in; ++d) {
            s.x[d] *= spec.shift.scale;
            if (!spec.shift.translation.empty()) {
              s.x[d] += spec.shift.translation[d];
            }
          }
        }
        bundle.samples.push_back(std::move(s));
      }
    }
  }

  // Exact 75/25 split inside every (domain, class) group.
  for (Domain domain : {Domain::source, Domain::target}) {
    for (int c = 0; c < spec.num_classes; ++c) {
      std::vector<std::size_t> idx;
      for (std::size_t i = 0; i < bundle.samples.size(); ++i) {
        if (bundle.samples[i].domain == domain &&
            bundle.samples[i].label == c) {
          idx.push_back(i);
        }
      }
      stream.shuffle(idx);
      const std::size_t n_train = (idx.size() * 3) / 4;
      for (std::size_t r = 0; r < idx.size(); ++r) {
        bundle.samples[idx[r]].split = r < n_train ? Split::train : Split::test;
      }
    }
  }
  return bundle;
}

void save_csv(const DatasetBundle& bundle, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw std::runtime_error("save_csv: cannot open " + path + " for writing");
  }
  const DomainSpec& s = bundle.spec;
  out << "# num_classes " << s.num_classes << "\n";
  out << "# d_in " << s.d_in << "\n";
  out << "# per_class_per_domain " << s.per_class_per_domain << "\n";
  out << "# radius " << format_double(s.radius) << "\n";
  out << "# sigma " << format_double(s.sigma) << "\n";
  out << "# rotation_deg " << format_double(s.shift.rotation_deg) << "\n";
  out << "# scale " << format_double(s.shift.scale) << "\n";
  out << "# sigma_ratio " << format_double(s.shift.sigma_ratio) << "\n";
  out << "# translation";
  if (s.shift.translation.empty()) {
    out << " none";
  } else {
    for (double t : s.shift.translation) out << " " << format_double(t);
  }
  out << "\n";
  out << "# seed " << s.seed << "\n";

  out << "id,domain,split,label";
  for (int d = 0; d < s.d_in; ++d) out << ",f" << d;
  out << "\n";
  for (const Sample& sm : bundle.samples) {
    out << sm.id << "," << domain_name(sm.domain) << "," << split_name(sm.split)
        << "," << sm.label;
    for (double v : sm.x) out << "," << format_double(v);
    out << "\n";
  }
  if (!out) {
    throw std::runtime_error("save_csv: write failed for " + path);
  }
}

namespace {

std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

[[noreturn]] void parse_fail(const std::string& path, std::size_t line_no,
                             const std::string& what) {
  throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + what);
}

} // namespace

DatasetBundle load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("load_csv: cannot open " + path);
  }
  DatasetBundle bundle;
  DomainSpec& spec = bundle.spec;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::map<std::string, bool> meta_seen;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::stringstream ss(line.substr(1));
      std::string key;
      ss >> key;
      meta_seen[key] = true;
      if (key == "num_classes") ss >> spec.num_classes;
      else if (key == "d_in") ss >> spec.d_in;
      else if (key == "per_class_per_domain") ss >> spec.per_class_per_domain;
      else if (key == "radius") ss >> spec.radius;
      else if (key == "sigma") ss >> spec.sigma;
      else if (key == "rotation_deg") ss >> spec.shift.rotation_deg;
      else if (key == "scale") ss >> spec.shift.scale;
      else if (key == "sigma_ratio") ss >> spec.shift.sigma_ratio;
      else if (key == "seed") ss >> spec.seed;
      else if (key == "translation") {
        std::string tok;
        spec.shift.translation.clear();
        while (ss >> tok) {
          if (tok == "none") break;
          spec.shift.translation.push_back(std::stod(tok));
        }
      } else {
        parse_fail(path, line_no, "unknown metadata key '" + key + "'");
      }
      if (ss.fail() && key != "translation") {
        parse_fail(path, line_no, "malformed metadata value for '" + key + "'");
      }
      continue;
    }
    if (!header_seen) {
      if (!meta_seen.count("d_in")) {
        parse_fail(path, line_no,
                   "header row before the '# d_in ...' metadata line");
      }
      std::vector<std::string> cols = split_csv_row(line);
      std::vector<std::string> expected = {"id", "domain", "split", "label"};
      for (int d = 0; d < spec.d_in; ++d) expected.push_back("f" + std::to_string(d));
      if (cols.size() != expected.size()) {
        parse_fail(path, line_no,
                   "header has " + std::to_string(cols.size()) +
                       " columns, expected " + std::to_string(expected.size()));
      }
      for (std::size_t i = 0; i < cols.size(); ++i) {
        if (cols[i] != expected[i]) {
          parse_fail(path, line_no, "header column " + std::to_string(i) +
                                        " is '" + cols[i] + "', expected '" +
                                        expected[i] + "'");
        }
      }
      header_seen = true;
      continue;
    }
    std::vector<std::string> fields = split_csv_row(line);
    if (fields.size() != static_cast<std::size_t>(4 + spec.d_in)) {
      parse_fail(path, line_no,
                 "row has " + std::to_string(fields.size()) +
                     " fields, expected " + std::to_string(4 + spec.d_in));
    }
    Sample s;
    try {
      s.id = std::stoll(fields[0]);
    } catch (const std::exception&) {
      parse_fail(path, line_no, "bad id '" + fields[0] + "'");
    }
    if (fields[1] == "source") s.domain = Domain::source;
    else if (fields[1] == "target") s.domain = Domain::target;
    else parse_fail(path, line_no, "bad domain '" + fields[1] + "'");
    if (fields[2] == "train") s.split = Split::train;
    else if (fields[2] == "test") s.split = Split::test;
    else parse_fail(path, line_no, "bad split '" + fields[2] + "'");
    try {
      s.label = std::stoi(fields[3]);
    } catch (const std::exception&) {
      parse_fail(path, line_no, "bad label '" + fields[3] + "'");
    }
    if (s.label < 0 || s.label >= spec.num_classes) {
      parse_fail(path, line_no, "label " + fields[3] + " out of range");
    }
    s.x.resize(spec.d_in);
    for (int d = 0; d < spec.d_in; ++d) {
      try {
        s.x[d] = std::stod(fields[4 + d]);
      } catch (const std::exception&) {
        parse_fail(path, line_no,
                   "bad value in column f" + std::to_string(d));
      }
    }
    bundle.samples.push_back(std::move(s));
  }

  for (const char* key :
       {"num_classes", "d_in", "per_class_per_domain", "radius", "sigma",
        "rotation_deg", "scale", "sigma_ratio", "translation", "seed"}) {
    if (!meta_seen.count(key)) {
      throw std::runtime_error(path + ": missing metadata line '# " +
                               std::string(key) + " ...'");
    }
  }
  if (!header_seen) {
    throw std::runtime_error(path + ": no header row found");
  }
  if (bundle.samples.empty()) {
    throw std::runtime_error(path + ": no data rows");
  }
  return bundle;
}

} // namespace readapt
