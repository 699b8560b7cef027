#include "readapt/report.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace readapt {
namespace {

using nlohmann::json;

json metrics_to_json(const MetricsRecord& m) {
    json j;
    j["accuracy"] = m.accuracy;
    j["macro_precision"] = m.macro_precision;
    j["macro_recall"] = m.macro_recall;
    j["macro_f1"] = m.macro_f1;
    j["confusion"] = m.confusion;
    return j;
}

json scores_to_json(const std::vector<ScoredRecord>& scores) {
    json arr = json::array();
    for (const auto& s : scores) {
        json j;
        j["id"] = s.id;
        j["u_dom"] = s.u_dom;
        j["u_pred"] = s.u_pred;
        j["u_total"] = s.u_total;
        arr.push_back(std::move(j));
    }
    return arr;
}

json breakdown_to_json(const LossBreakdown& b) {
    json j;
    j["nll"] = b.nll;
    j["kl"] = b.kl;
    j["edl"] = b.edl;
    j["align"] = b.align;
    j["contrastive"] = b.contrastive;
    j["s_reg"] = b.s_reg;
    j["total"] = b.total;
    return j;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

std::string rounds_to_json(const std::vector<RoundReport>& rounds) {
    json arr = json::array();
    for (const auto& r : rounds) {
        json j;
        j["round_index"] = r.round_index;
        j["budget"] = r.budget;
        j["scores"] = scores_to_json(r.scores);
        j["candidate_ids"] = r.candidate_ids;
        j["selected_ids"] = r.selected_ids;
        j["selected_class_counts"] = r.selected_class_counts;
        j["pls_nonempty"] = r.pls_nonempty;
        j["pls_mean_size"] = r.pls_mean_size;
        j["epoch_loss"] = r.epoch_loss;
        j["final_epoch_loss"] = breakdown_to_json(r.final_epoch_loss);
        j["target_test"] = metrics_to_json(r.target_test);
        j["s_after"] = r.s_after;
        j["labeled_target_size"] = r.labeled_target_size;
        arr.push_back(std::move(j));
    }
    return arr.dump(2) + "\n";
}

std::string summary_to_json(const RunSummary& s) {
    json j;
    j["strategy"] = s.strategy;
    j["seed"] = s.seed;
    j["n_source_train"] = s.n_source_train;
    j["n_target_train"] = s.n_target_train;
    j["budget_total"] = s.budget_total;
    j["labeled_target_final"] = s.labeled_target_final;
    j["before"]["source_test"] = metrics_to_json(s.source_test_before);
    j["before"]["target_test"] = metrics_to_json(s.target_test_before);
    j["before"]["u_dom_source"] = s.u_dom_source_before;
    j["before"]["u_dom_target"] = s.u_dom_target_before;
    j["after"]["source_test"] = metrics_to_json(s.source_test_after);
    j["after"]["target_test"] = metrics_to_json(s.target_test_after);
    j["after"]["u_dom_source"] = s.u_dom_source_after;
    j["after"]["u_dom_target"] = s.u_dom_target_after;
    j["s_final"] = s.s_final;
    j["pretrain_epoch_loss"] = s.pretrain_epoch_loss;
    return j.dump(2) + "\n";
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open for writing: " + path);
    }
    out << content;
    if (!out) {
        throw std::runtime_error("write failed: " + path);
    }
}

void write_kde_csv(const std::string& path,
                   const std::vector<std::pair<double, double>>& points) {
    std::string text = "x,density\n";
    for (const auto& [x, d] : points) {
        text += format_double(x);
        text += ',';
        text += format_double(d);
        text += '\n';
    }
    write_text_file(path, text);
}

void write_metrics_csv(const std::string& path, const RunSummary& summary) {
    const struct Row {
        const char* pool;
        const char* phase;
        const MetricsRecord* m;
    } rows[] = {
        {"source_test", "before", &summary.source_test_before},
        {"target_test", "before", &summary.target_test_before},
        {"source_test", "after", &summary.source_test_after},
        {"target_test", "after", &summary.target_test_after},
    };
    std::string text =
        "pool,phase,accuracy,macro_precision,macro_recall,macro_f1\n";
    for (const auto& row : rows) {
        text += row.pool;
        text += ',';
        text += row.phase;
        text += ',';
        text += format_double(row.m->accuracy);
        text += ',';
        text += format_double(row.m->macro_precision);
        text += ',';
        text += format_double(row.m->macro_recall);
        text += ',';
        text += format_double(row.m->macro_f1);
        text += '\n';
    }
    write_text_file(path, text);
}

} // namespace readapt
