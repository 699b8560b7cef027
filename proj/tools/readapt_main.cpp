#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "readapt/adaptation.hpp"
#include "readapt/checkpoint.hpp"
#include "readapt/config.hpp"
#include "readapt/dataset.hpp"
#include "readapt/dirichlet.hpp"
#include "readapt/metrics.hpp"
#include "readapt/model.hpp"
#include "readapt/report.hpp"
#include "readapt/selftest.hpp"

namespace fs = std::filesystem;

namespace {

// Relative output paths land under READAPT_OUTPUT_ROOT when it is set.
// Input paths are taken as given.
fs::path resolve_output(const std::string& path) {
    fs::path p(path);
    if (p.is_absolute()) return p;
    const char* root = std::getenv("READAPT_OUTPUT_ROOT");
    if (root != nullptr && *root != '\0') return fs::path(root) / p;
    return p;
}

void ensure_parent(const fs::path& p) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct GenArgs {
    std::string out;
    std::uint64_t seed = 0;
    readapt::DomainSpec spec;
};

int cmd_gen_data(const GenArgs& args) {
    readapt::DomainSpec spec = args.spec;
    spec.seed = args.seed;
    const readapt::DatasetBundle bundle = readapt::generate(spec);

    const fs::path out = resolve_output(args.out);
    ensure_parent(out);
    readapt::save_csv(bundle, out.string());

    std::size_t counts[2][2] = {{0, 0}, {0, 0}};
    for (const readapt::Sample& s : bundle.samples) {
        ++counts[s.domain == readapt::Domain::target]
                [s.split == readapt::Split::test];
    }
    std::cout << "wrote " << out.string() << ": " << bundle.samples.size()
              << " samples (source " << counts[0][0] << " train / "
              << counts[0][1] << " test, target " << counts[1][0]
              << " train / " << counts[1][1] << " test)\n";
    return 0;
}

std::vector<double> udom_test_values(const readapt::EvidentialModel& m,
                                     const readapt::DatasetBundle& bundle,
                                     readapt::Domain domain) {
    const readapt::RenyiOrder s(m.s);
    std::vector<double> out;
    for (const readapt::Sample& smp : bundle.samples) {
        if (smp.domain != domain || smp.split != readapt::Split::test) {
            continue;
        }
        out.push_back(
            readapt::u_dom(readapt::forward(m, smp.x).dirichlet, s));
    }
    return out;
}

std::vector<std::pair<double, double>> kde_or_fallback(
    const std::vector<double>& values) {
    try {
        return readapt::kde_export(values);
    } catch (const std::invalid_argument&) {
        // Constant sample: no data-driven scale, pick a nominal one so
        // the export still describes the spike location.
        const double at = values.empty() ? 0.0 : values.front();
        return readapt::kde_export(values,
                                   std::max(1e-6, std::abs(at) * 1e-3));
    }
}

struct RunArgs {
    std::string config_path;
    std::string out_dir;
};

int cmd_run(const RunArgs& args) {
    readapt::RunConfig config = readapt::load_run_config(args.config_path);
    if (!args.out_dir.empty()) config.out_dir = args.out_dir;
    if (config.out_dir.empty()) {
        std::cerr << "run: no output directory; set out_dir in the config "
                     "or pass --out-dir\n";
        return 1;
    }
    const fs::path out = resolve_output(config.out_dir);
    fs::create_directories(out);

    const readapt::DatasetBundle bundle =
        config.dataset_path.empty() ? readapt::generate(config.data)
                                    : readapt::load_csv(config.dataset_path);

    readapt::AdaSession session(bundle, config.ada);
    session.pretrain();
    const auto udom_source_pre =
        udom_test_values(session.model(), bundle, readapt::Domain::source);
    const auto udom_target_pre =
        udom_test_values(session.model(), bundle, readapt::Domain::target);
    std::cout << "pretrained on " << bundle.samples.size() << " samples, "
              << config.ada.pretrain_epochs << " epochs\n";

    for (int r = 1; r <= config.ada.rounds; ++r) {
        const readapt::RoundReport rep = session.run_round(r);
        std::cout << "round " << r << ": labeled " << rep.selected_ids.size()
                  << " (total " << rep.labeled_target_size
                  << "), target accuracy " << fmt17(rep.target_test.accuracy)
                  << "\n";
    }

    const readapt::RunResult result = session.finish();
    const auto udom_source_post =
        udom_test_values(session.model(), bundle, readapt::Domain::source);
    const auto udom_target_post =
        udom_test_values(session.model(), bundle, readapt::Domain::target);

    readapt::write_text_file((out / "config.json").string(),
                             readapt::run_config_to_json(config));
    readapt::write_text_file((out / "rounds.json").string(),
                             readapt::rounds_to_json(result.rounds));
    readapt::write_text_file((out / "summary.json").string(),
                             readapt::summary_to_json(result.summary));
    readapt::write_metrics_csv((out / "metrics.csv").string(), result.summary);
    readapt::write_kde_csv((out / "kde_udom_source_pre.csv").string(),
                           kde_or_fallback(udom_source_pre));
    readapt::write_kde_csv((out / "kde_udom_target_pre.csv").string(),
                           kde_or_fallback(udom_target_pre));
    readapt::write_kde_csv((out / "kde_udom_source_post.csv").string(),
                           kde_or_fallback(udom_source_post));
    readapt::write_kde_csv((out / "kde_udom_target_post.csv").string(),
                           kde_or_fallback(udom_target_post));
    readapt::save_checkpoint((out / "model.ckpt").string(), result.model,
                             result.optimizer_step);

    const readapt::RunSummary& s = result.summary;
    std::cout << "target accuracy " << fmt17(s.target_test_before.accuracy)
              << " -> " << fmt17(s.target_test_after.accuracy)
              << ", labeled " << s.labeled_target_final << "/"
              << s.n_target_train << ", reports in " << out.string() << "\n";
    return 0;
}

struct ScoreArgs {
    std::string checkpoint;
    std::string data;
    std::string out;
    double lambda_dom = 7.0;
    double lambda_pred = 0.5;
};

int cmd_score(const ScoreArgs& args) {
    const readapt::Checkpoint cp = readapt::load_checkpoint(args.checkpoint);
    const readapt::DatasetBundle bundle = readapt::load_csv(args.data);
    if (bundle.spec.d_in !=
        static_cast<int>(cp.model.dims.d_in)) {
        std::cerr << "score: checkpoint expects d_in="
                  << cp.model.dims.d_in << " but dataset has d_in="
                  << bundle.spec.d_in << "\n";
        return 1;
    }
    if (bundle.spec.num_classes !=
        static_cast<int>(cp.model.dims.num_classes)) {
        std::cerr << "score: checkpoint expects " << cp.model.dims.num_classes
                  << " classes but dataset has " << bundle.spec.num_classes
                  << "\n";
        return 1;
    }

    const readapt::RenyiOrder s(cp.model.s);
    std::string text = "id,u_dom,u_pred,u_total\n";
    for (const readapt::Sample& smp : bundle.samples) {
        const readapt::UncertaintyScore u = readapt::u_total(
            readapt::forward(cp.model, smp.x).dirichlet, s, args.lambda_dom,
            args.lambda_pred);
        text += std::to_string(smp.id);
        text += ',';
        text += fmt17(u.u_dom);
        text += ',';
        text += fmt17(u.u_pred);
        text += ',';
        text += fmt17(u.u_total);
        text += '\n';
    }
    const fs::path out = resolve_output(args.out);
    ensure_parent(out);
    readapt::write_text_file(out.string(), text);
    std::cout << "wrote " << bundle.samples.size() << " rows to "
              << out.string() << "\n";
    return 0;
}

struct SelftestArgs {
    bool deep = false;
    std::string inject;
    std::uint64_t seed = readapt::SelftestOptions{}.seed;
};

int cmd_selftest(const SelftestArgs& args) {
    readapt::SelftestOptions opt;
    opt.deep = args.deep;
    opt.inject = args.inject;
    opt.seed = args.seed;
    const readapt::SelftestReport report = readapt::run_selftest(opt);
    for (const readapt::SuiteResult& suite : report.suites) {
        std::cout << (suite.passed ? "PASS " : "FAIL ") << suite.name << ": "
                  << suite.detail << "\n";
    }
    if (!report.all_passed()) {
        std::cerr << "selftest failed\n";
        return 1;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Evidential active domain adaptation workbench"};
    app.require_subcommand(1);

    GenArgs gen;
    gen.spec = readapt::default_run_config().data;
    CLI::App* gen_cmd =
        app.add_subcommand("gen-data", "Synthesize a two-domain benchmark");
    gen_cmd->add_option("--out", gen.out, "Output CSV path")->required();
    gen_cmd->add_option("--seed", gen.seed, "Root seed");
    gen_cmd->add_option("--classes", gen.spec.num_classes, "Class count");
    gen_cmd->add_option("--dim", gen.spec.d_in, "Input dimension");
    gen_cmd->add_option("--per-class", gen.spec.per_class_per_domain,
                        "Samples per class per domain");
    gen_cmd->add_option("--radius", gen.spec.radius, "Class center radius");
    gen_cmd->add_option("--sigma", gen.spec.sigma, "Source noise scale");
    gen_cmd->add_option("--rotation-deg", gen.spec.shift.rotation_deg,
                        "Target rotation, degrees");
    gen_cmd->add_option("--scale", gen.spec.shift.scale, "Target scaling");
    gen_cmd->add_option("--sigma-ratio", gen.spec.shift.sigma_ratio,
                        "Target/source noise ratio");
    gen_cmd
        ->add_option("--translation", gen.spec.shift.translation,
                     "Target translation vector")
        ->delimiter(',');

    RunArgs run;
    CLI::App* run_cmd =
        app.add_subcommand("run", "Execute an adaptation experiment");
    run_cmd->add_option("--config", run.config_path, "JSON config path")
        ->required();
    run_cmd->add_option("--out-dir", run.out_dir,
                        "Override the config's output directory");

    ScoreArgs score;
    CLI::App* score_cmd =
        app.add_subcommand("score", "Score a dataset with a checkpoint");
    score_cmd->add_option("--checkpoint", score.checkpoint, "Checkpoint path")
        ->required();
    score_cmd->add_option("--data", score.data, "Dataset CSV path")
        ->required();
    score_cmd->add_option("--out", score.out, "Output CSV path")->required();
    score_cmd->add_option("--lambda-dom", score.lambda_dom,
                          "Domain uncertainty weight");
    score_cmd->add_option("--lambda-pred", score.lambda_pred,
                          "Prediction uncertainty weight");

    SelftestArgs selftest;
    CLI::App* selftest_cmd =
        app.add_subcommand("selftest", "Run the reduced property suites");
    selftest_cmd->add_flag("--deep", selftest.deep,
                           "Raise Monte-Carlo draws to 1e6");
    selftest_cmd->add_option("--inject", selftest.inject,
                             "Deliberate fault (udom-sign)");
    selftest_cmd->add_option("--seed", selftest.seed, "Suite seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (gen_cmd->parsed()) return cmd_gen_data(gen);
        if (run_cmd->parsed()) return cmd_run(run);
        if (score_cmd->parsed()) return cmd_score(score);
        if (selftest_cmd->parsed()) return cmd_selftest(selftest);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
