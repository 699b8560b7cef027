#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include <doctest.h>

#include "readapt/checkpoint.hpp"
#include "readapt/model.hpp"

namespace fs = std::filesystem;

namespace {

struct CliResult {
    int code = -1;
    std::string out;
    std::string err;
};

std::string cli_path() {
    const char* p = std::getenv("READAPT_CLI");
    REQUIRE_MESSAGE(p != nullptr, "READAPT_CLI must point at the binary");
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream text;
    text << in.rdbuf();
    return text.str();
}

fs::path fresh_dir(const std::string& tag) {
    const fs::path d = fs::temp_directory_path() / ("readapt_cli_" + tag);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

// env holds KEY=value pairs prefixed to the command line.
CliResult run_cli(const std::string& args,
                  const std::vector<std::string>& env = {}) {
    const fs::path dir = fs::temp_directory_path();
    const fs::path out = dir / "readapt_cli_stdout.txt";
    const fs::path err = dir / "readapt_cli_stderr.txt";
    std::string cmd;
    for (const std::string& e : env) cmd += e + " ";
    cmd += cli_path() + " " + args + " > " + out.string() + " 2> " +
           err.string();
    const int raw = std::system(cmd.c_str());
    CliResult r;
    r.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

// id -> (u_dom, u_pred, u_total) from a score CSV.
std::map<long, std::vector<double>> parse_scores(const fs::path& p) {
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    REQUIRE(line == "id,u_dom,u_pred,u_total");
    std::map<long, std::vector<double>> rows;
    while (std::getline(in, line)) {
        std::istringstream ss(line);
        std::string field;
        std::getline(ss, field, ',');
        const long id = std::stol(field);
        std::vector<double> vals;
        while (std::getline(ss, field, ',')) vals.push_back(std::stod(field));
        REQUIRE(vals.size() == 3);
        rows[id] = vals;
    }
    return rows;
}

const char* kSmallRun = R"({
    "seed": 11,
    "rounds": 2,
    "budget_fraction": 0.1,
    "per_round_fraction": 0.05,
    "pretrain_epochs": 5,
    "round_epochs": 3,
    "strategy": "%s",
    "data": {"classes": 3, "dim": 4, "per_class": 8,
             "radius": 2.0, "sigma": 0.3}
})";

std::string small_run_config(const std::string& strategy) {
    std::string text = kSmallRun;
    text.replace(text.find("%s"), 2, strategy);
    return text;
}

} // namespace

TEST_CASE("gen-data writes deterministic bundles and validates flags") {
    const fs::path dir = fresh_dir("gen");
    const std::string flags = " --classes 3 --per-class 6 --dim 4 --seed 9";

    CHECK(run_cli("gen-data --out " + (dir / "a.csv").string() + flags).code ==
          0);
    CHECK(run_cli("gen-data --out " + (dir / "b.csv").string() + flags).code ==
          0);
    const std::string a = slurp(dir / "a.csv");
    CHECK(a == slurp(dir / "b.csv"));
    CHECK(!a.empty());

    CHECK(run_cli("gen-data --out " + (dir / "c.csv").string() +
                  " --classes 3 --per-class 6 --dim 4 --seed 10")
              .code == 0);
    CHECK(slurp(dir / "c.csv") != a);

    CHECK(run_cli("gen-data --seed 9").code == 2); // --out is required
    const CliResult bad = run_cli("gen-data --out " + (dir / "d.csv").string() +
                                  " --classes 1");
    CHECK(bad.code == 1);
    CHECK(bad.err.find("num_classes") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("run emits the documented artifacts and repeats bit for bit") {
    const fs::path dir = fresh_dir("run");
    write_file(dir / "renyi.json", small_run_config("renyi"));
    write_file(dir / "random.json", small_run_config("random"));

    const CliResult first = run_cli("run --config " +
                                    (dir / "renyi.json").string() +
                                    " --out-dir " + (dir / "A").string());
    CHECK(first.code == 0);
    CHECK(first.out.find("round 2:") != std::string::npos);
    for (const char* name :
         {"config.json", "rounds.json", "summary.json", "metrics.csv",
          "kde_udom_source_pre.csv", "kde_udom_target_pre.csv",
          "kde_udom_source_post.csv", "kde_udom_target_post.csv",
          "model.ckpt"}) {
        CHECK_MESSAGE(fs::exists(dir / "A" / name), name);
    }

    CHECK(run_cli("run --config " + (dir / "renyi.json").string() +
                  " --out-dir " + (dir / "B").string())
              .code == 0);
    for (const char* name : {"rounds.json", "summary.json", "model.ckpt"}) {
        CHECK(slurp(dir / "A" / name) == slurp(dir / "B" / name));
    }

    CHECK(run_cli("run --config " + (dir / "random.json").string() +
                  " --out-dir " + (dir / "C").string())
              .code == 0);
    CHECK(slurp(dir / "C" / "rounds.json") != slurp(dir / "A" / "rounds.json"));

    // rounds=0 degenerates to the direct-transfer baseline.
    std::string direct = small_run_config("renyi");
    direct.replace(direct.find("\"rounds\": 2"), 11, "\"rounds\": 0");
    write_file(dir / "direct.json", direct);
    CHECK(run_cli("run --config " + (dir / "direct.json").string() +
                  " --out-dir " + (dir / "D").string())
              .code == 0);
    const std::string summary = slurp(dir / "D" / "summary.json");
    CHECK(summary.find("\"labeled_target_final\": 0") != std::string::npos);
    CHECK(slurp(dir / "D" / "rounds.json").find("[]") != std::string::npos);

    CHECK(run_cli("run --config " + (dir / "missing.json").string()).code ==
          1);
    CHECK(run_cli("run").code == 2);
    fs::remove_all(dir);
}

TEST_CASE("score emits one row per sample and honors the lambdas") {
    const fs::path dir = fresh_dir("score");
    CHECK(run_cli("gen-data --out " + (dir / "d.csv").string() +
                  " --classes 3 --per-class 4 --dim 4 --seed 3")
              .code == 0);

    // A zero head makes every concentration vector (1, 1, 1).
    readapt::EvidentialModel m =
        readapt::init_model(readapt::ModelDims{4, 8, 6, 3}, 77);
    for (std::size_t i = m.dims.off_w3(); i < m.params.size(); ++i) {
        m.params[i] = 0.0;
    }
    readapt::save_checkpoint((dir / "flat.ckpt").string(), m, 0);

    CHECK(run_cli("score --checkpoint " + (dir / "flat.ckpt").string() +
                  " --data " + (dir / "d.csv").string() + " --out " +
                  (dir / "s.csv").string())
              .code == 0);
    const auto rows = parse_scores(dir / "s.csv");
    CHECK(rows.size() == 24); // 3 classes x 4 per class x 2 domains
    const std::vector<double> first = rows.begin()->second;
    for (const auto& [id, vals] : rows) {
        CHECK(vals == first);
        CHECK(vals[2] == doctest::Approx(7.0 * vals[0] + 0.5 * vals[1])
                             .epsilon(1e-12));
    }

    CHECK(run_cli("score --checkpoint " + (dir / "flat.ckpt").string() +
                  " --data " + (dir / "d.csv").string() + " --out " +
                  (dir / "s0.csv").string() + " --lambda-dom 0")
              .code == 0);
    const auto rows0 = parse_scores(dir / "s0.csv");
    for (const auto& [id, vals] : rows0) {
        CHECK(vals[0] == first[0]); // raw components unchanged
        CHECK(vals[1] == first[1]);
        CHECK(vals[2] == doctest::Approx(0.5 * vals[1]).epsilon(1e-12));
    }

    // Class-count mismatch between checkpoint and dataset.
    readapt::EvidentialModel wide =
        readapt::init_model(readapt::ModelDims{4, 8, 6, 5}, 78);
    readapt::save_checkpoint((dir / "wide.ckpt").string(), wide, 0);
    const CliResult mismatch =
        run_cli("score --checkpoint " + (dir / "wide.ckpt").string() +
                " --data " + (dir / "d.csv").string() + " --out " +
                (dir / "bad.csv").string());
    CHECK(mismatch.code == 1);
    CHECK(mismatch.err.find("classes") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("selftest passes clean and catches an injected fault") {
    const CliResult clean = run_cli("selftest");
    CHECK(clean.code == 0);
    CHECK(clean.out.find("PASS domain uncertainty non-negativity") !=
          std::string::npos);

    const CliResult broken = run_cli("selftest --inject udom-sign");
    CHECK(broken.code == 1);
    CHECK(broken.out.find("FAIL domain uncertainty non-negativity") !=
          std::string::npos);

    CHECK(run_cli("selftest --inject no-such-fault").code == 1);
}

TEST_CASE("relative outputs land under the configured root") {
    const fs::path root = fresh_dir("root");
    const CliResult r =
        run_cli("gen-data --out nested/rel.csv --classes 3 --per-class 4",
                {"READAPT_OUTPUT_ROOT=" + root.string()});
    CHECK(r.code == 0);
    CHECK(fs::exists(root / "nested" / "rel.csv"));
    fs::remove_all(root);
}
