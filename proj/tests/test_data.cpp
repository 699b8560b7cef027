#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <doctest.h>

#include "readapt/dataset.hpp"

using readapt::DatasetBundle;
using readapt::Domain;
using readapt::DomainSpec;
using readapt::Sample;
using readapt::Split;

namespace {

DomainSpec base_spec(std::uint64_t seed) {
    DomainSpec spec;
    spec.num_classes = 4;
    spec.d_in = 5;
    spec.per_class_per_domain = 8;
    spec.radius = 2.0;
    spec.sigma = 0.4;
    spec.shift.rotation_deg = 30.0;
    spec.shift.scale = 1.2;
    spec.shift.sigma_ratio = 1.5;
    spec.seed = seed;
    return spec;
}

std::string temp_path(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)), {});
}

} // namespace

TEST_CASE("generation produces exact counts, ids and splits") {
    const DatasetBundle bundle = readapt::generate(base_spec(7));
    CHECK(bundle.samples.size() == 64); // 4 classes x 8 x 2 domains

    // Ids are sequential with the whole source block first.
    std::map<std::pair<int, int>, int> train_count, test_count;
    for (std::size_t i = 0; i < bundle.samples.size(); ++i) {
        const Sample& s = bundle.samples[i];
        CHECK(s.id == static_cast<std::int64_t>(i));
        CHECK((i < 32 ? Domain::source : Domain::target) == s.domain);
        const int dom = s.domain == Domain::source ? 0 : 1;
        if (s.split == Split::train) train_count[{dom, s.label}]++;
        else test_count[{dom, s.label}]++;
    }
    for (int dom = 0; dom < 2; ++dom) {
        for (int c = 0; c < 4; ++c) {
            CHECK(train_count[{dom, c}] == 6);
            CHECK(test_count[{dom, c}] == 2);
        }
    }
}

TEST_CASE("generation is deterministic per seed") {
    const DatasetBundle a = readapt::generate(base_spec(3));
    const DatasetBundle b = readapt::generate(base_spec(3));
    const DatasetBundle c = readapt::generate(base_spec(4));
    REQUIRE(a.samples.size() == b.samples.size());
    bool identical = true, differs_from_c = false;
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        identical = identical && a.samples[i].x == b.samples[i].x &&
                    a.samples[i].split == b.samples[i].split;
        differs_from_c = differs_from_c || a.samples[i].x != c.samples[i].x;
    }
    CHECK(identical);
    CHECK(differs_from_c);
}

TEST_CASE("noiseless shift is the exact affine map") {
    DomainSpec spec = base_spec(1);
    spec.sigma = 0.0;
    spec.shift.rotation_deg = 90.0;
    spec.shift.scale = 2.0;
    spec.shift.sigma_ratio = 3.0; // irrelevant at sigma zero
    spec.shift.translation = {0.5, 0.0, -1.0, 0.0, 0.25};
    const DatasetBundle bundle = readapt::generate(spec);
    for (const Sample& s : bundle.samples) {
        const double theta = 2.0 * M_PI * s.label / spec.num_classes;
        const double cx = spec.radius * std::cos(theta);
        const double cy = spec.radius * std::sin(theta);
        if (s.domain == Domain::source) {
            CHECK(s.x[0] == doctest::Approx(cx).epsilon(1e-12));
            CHECK(s.x[1] == doctest::Approx(cy).epsilon(1e-12));
            CHECK(s.x[2] == 0.0);
            CHECK(s.x[4] == 0.0);
        } else {
            // rotate 90: (x,y) -> (-y,x); then scale 2 and translate
            CHECK(s.x[0] == doctest::Approx(2.0 * -cy + 0.5).epsilon(1e-12));
            CHECK(s.x[1] == doctest::Approx(2.0 * cx).epsilon(1e-12));
            CHECK(s.x[2] == doctest::Approx(-1.0));
            CHECK(s.x[3] == doctest::Approx(0.0));
            CHECK(s.x[4] == doctest::Approx(0.25));
        }
    }
}

TEST_CASE("identity shift with zero noise collapses the domains") {
    DomainSpec spec = base_spec(2);
    spec.sigma = 0.0;
    spec.shift = readapt::ShiftSpec{};
    const DatasetBundle bundle = readapt::generate(spec);
    const std::size_t half = bundle.samples.size() / 2;
    for (std::size_t i = 0; i < half; ++i) {
        CHECK(bundle.samples[i].x == bundle.samples[i + half].x);
        CHECK(bundle.samples[i].label == bundle.samples[i + half].label);
    }
}

TEST_CASE("spec problems accumulate instead of stopping early") {
    DomainSpec spec = base_spec(1);
    spec.num_classes = 1;
    spec.per_class_per_domain = 2;
    spec.sigma = -0.5;
    spec.shift.scale = 0.0;
    spec.shift.translation = {1.0, 2.0}; // wrong length for d_in 5
    const std::vector<std::string> problems = readapt::spec_problems(spec);
    CHECK(problems.size() == 5);
    CHECK_THROWS_AS(readapt::generate(spec), std::invalid_argument);
    try {
        readapt::generate(spec);
    } catch (const std::invalid_argument& e) {
        const std::string msg = e.what();
        CHECK(msg.find("num_classes") != std::string::npos);
        CHECK(msg.find("translation") != std::string::npos);
        CHECK(msg.find("scale") != std::string::npos);
    }
}

TEST_CASE("csv round trip is exact") {
    DomainSpec spec = base_spec(11);
    spec.shift.translation = {0.25, 0.0, 0.5, 0.0, -0.125};
    const DatasetBundle bundle = readapt::generate(spec);
    const std::string path = temp_path("readapt_data_rt.csv");
    readapt::save_csv(bundle, path);
    const DatasetBundle loaded = readapt::load_csv(path);

    CHECK(loaded.spec.num_classes == spec.num_classes);
    CHECK(loaded.spec.d_in == spec.d_in);
    CHECK(loaded.spec.per_class_per_domain == spec.per_class_per_domain);
    CHECK(loaded.spec.radius == spec.radius);
    CHECK(loaded.spec.sigma == spec.sigma);
    CHECK(loaded.spec.shift.rotation_deg == spec.shift.rotation_deg);
    CHECK(loaded.spec.shift.scale == spec.shift.scale);
    CHECK(loaded.spec.shift.sigma_ratio == spec.shift.sigma_ratio);
    CHECK(loaded.spec.shift.translation == spec.shift.translation);
    CHECK(loaded.spec.seed == spec.seed);
    REQUIRE(loaded.samples.size() == bundle.samples.size());
    for (std::size_t i = 0; i < bundle.samples.size(); ++i) {
        CHECK(loaded.samples[i].id == bundle.samples[i].id);
        CHECK(loaded.samples[i].domain == bundle.samples[i].domain);
        CHECK(loaded.samples[i].split == bundle.samples[i].split);
        CHECK(loaded.samples[i].label == bundle.samples[i].label);
        CHECK(loaded.samples[i].x == bundle.samples[i].x); // bit-exact
    }

    // Saving the loaded bundle reproduces the file byte for byte.
    const std::string path2 = temp_path("readapt_data_rt2.csv");
    readapt::save_csv(loaded, path2);
    CHECK(slurp(path) == slurp(path2));
    std::filesystem::remove(path);
    std::filesystem::remove(path2);
}

namespace {

// Writes the bundle, applies a line edit, and returns the load error.
std::string load_error_after(const DatasetBundle& bundle,
                             const std::function<void(std::vector<std::string>&)>& edit) {
    const std::string path = temp_path("readapt_data_bad.csv");
    readapt::save_csv(bundle, path);
    std::vector<std::string> lines;
    {
        std::ifstream in(path);
        std::string line;
        while (std::getline(in, line)) lines.push_back(line);
    }
    edit(lines);
    {
        std::ofstream out(path, std::ios::trunc);
        for (const std::string& l : lines) out << l << "\n";
    }
    try {
        readapt::load_csv(path);
    } catch (const std::runtime_error& e) {
        std::filesystem::remove(path);
        return e.what();
    }
    std::filesystem::remove(path);
    return "";
}

} // namespace

TEST_CASE("csv loader reports the offending line") {
    const DatasetBundle bundle = readapt::generate(base_spec(5));
    // Metadata occupies lines 1-10, header is line 11, rows follow.

    std::string err = load_error_after(bundle, [](std::vector<std::string>& l) {
        l[14] = "oops,row";
    });
    CHECK(err.find(":15: ") != std::string::npos);
    CHECK(err.find("fields") != std::string::npos);

    err = load_error_after(bundle, [](std::vector<std::string>& l) {
        l[10] = "id,domain,split,tag,f0,f1,f2,f3,f4";
    });
    CHECK(err.find(":11: ") != std::string::npos);
    CHECK(err.find("'tag'") != std::string::npos);
    CHECK(err.find("'label'") != std::string::npos);

    err = load_error_after(bundle, [](std::vector<std::string>& l) {
        std::swap(l[1], l[10]); // header before the d_in metadata
    });
    CHECK(err.find("header row before") != std::string::npos);

    err = load_error_after(bundle, [](std::vector<std::string>& l) {
        l[12] = l[12].substr(0, l[12].rfind(',') + 1) + "not-a-number";
    });
    CHECK(err.find(":13: ") != std::string::npos);
    CHECK(err.find("f4") != std::string::npos);

    err = load_error_after(bundle, [](std::vector<std::string>& l) {
        l[0] = "# flavor vanilla";
    });
    CHECK(err.find("unknown metadata key") != std::string::npos);

    err = load_error_after(bundle, [](std::vector<std::string>& l) {
        l.resize(11); // metadata and header only
    });
    CHECK(err.find("no data rows") != std::string::npos);

    CHECK_THROWS_AS(readapt::load_csv(temp_path("readapt_no_such.csv")),
                    std::runtime_error);

    const std::string empty_path = temp_path("readapt_empty.csv");
    std::ofstream(empty_path).close();
    CHECK_THROWS_AS(readapt::load_csv(empty_path), std::runtime_error);
    std::filesystem::remove(empty_path);
}
