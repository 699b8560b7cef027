#include "readapt/config.hpp"

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace readapt {
namespace {

using nlohmann::json;

const char* const kTopKeys[] = {
    "seed",          "out_dir",          "strategy",
    "rounds",        "budget_fraction",  "per_round_fraction",
    "lambda_dom",    "lambda_pred",      "lambda_c",
    "k",             "batch",            "s_init",
    "lr_extractor",  "lr_head",          "pretrain_epochs",
    "round_epochs",  "hidden",           "d_feat",
    "contrastive_subset", "dataset",     "data",
};

const char* const kDataKeys[] = {
    "classes",      "dim",   "per_class",   "radius",      "sigma",
    "rotation_deg", "scale", "sigma_ratio", "translation",
};

template <std::size_t N>
bool known_key(const std::string& key, const char* const (&keys)[N]) {
    for (const char* k : keys) {
        if (key == k) return true;
    }
    return false;
}

struct Parser {
    const json& root;
    std::vector<std::string>& errors;

    bool get_double(const char* key, double* out) const {
        auto it = root.find(key);
        if (it == root.end()) return false;
        if (!it->is_number()) {
            errors.push_back(std::string(key) + ": expected a number");
            return false;
        }
        *out = it->get<double>();
        return true;
    }

    template <typename Int>
    bool get_count(const char* key, Int* out) const {
        auto it = root.find(key);
        if (it == root.end()) return false;
        if (!it->is_number_integer() ||
            (it->is_number_integer() && !it->is_number_unsigned() &&
             it->get<std::int64_t>() < 0)) {
            errors.push_back(std::string(key) +
                             ": expected a non-negative integer");
            return false;
        }
        *out = static_cast<Int>(it->get<std::uint64_t>());
        return true;
    }

    bool get_string(const char* key, std::string* out) const {
        auto it = root.find(key);
        if (it == root.end()) return false;
        if (!it->is_string()) {
            errors.push_back(std::string(key) + ": expected a string");
            return false;
        }
        *out = it->get<std::string>();
        return true;
    }
};

void parse_data_object(const json& data, RunConfig* config,
                       std::vector<std::string>& errors) {
    if (!data.is_object()) {
        errors.push_back("data: expected an object");
        return;
    }
    for (const auto& item : data.items()) {
        if (!known_key(item.key(), kDataKeys)) {
            errors.push_back("data." + item.key() + ": unknown key");
        }
    }
    Parser p{data, errors};
    std::uint64_t count = 0;
    if (p.get_count("classes", &count)) {
        config->data.num_classes = static_cast<int>(count);
    }
    if (p.get_count("dim", &count)) {
        config->data.d_in = static_cast<int>(count);
    }
    if (p.get_count("per_class", &count)) {
        config->data.per_class_per_domain = static_cast<int>(count);
    }
    p.get_double("radius", &config->data.radius);
    p.get_double("sigma", &config->data.sigma);
    p.get_double("rotation_deg", &config->data.shift.rotation_deg);
    p.get_double("scale", &config->data.shift.scale);
    p.get_double("sigma_ratio", &config->data.shift.sigma_ratio);
    auto it = data.find("translation");
    if (it != data.end()) {
        if (!it->is_array()) {
            errors.push_back("data.translation: expected an array of numbers");
        } else {
            std::vector<double> values;
            bool ok = true;
            for (const auto& v : *it) {
                if (!v.is_number()) {
                    ok = false;
                    break;
                }
                values.push_back(v.get<double>());
            }
            if (!ok) {
                errors.push_back(
                    "data.translation: expected an array of numbers");
            } else {
                config->data.shift.translation = std::move(values);
            }
        }
    }
}

} // namespace

RunConfig default_run_config() {
    RunConfig config;
    config.data.shift.rotation_deg = 35.0;
    config.data.shift.scale = 1.3;
    config.data.shift.sigma_ratio = 1.5;
    return config;
}

RunConfig parse_run_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config is not valid JSON: ") +
                                    e.what());
    }
    if (!root.is_object()) {
        throw std::invalid_argument("config must be a JSON object");
    }

    std::vector<std::string> errors;
    for (const auto& item : root.items()) {
        if (!known_key(item.key(), kTopKeys)) {
            errors.push_back(item.key() + ": unknown key");
        }
    }

    RunConfig config = default_run_config();
    Parser p{root, errors};

    p.get_count("seed", &config.ada.seed);
    p.get_string("out_dir", &config.out_dir);
    std::string strategy;
    if (p.get_string("strategy", &strategy)) {
        try {
            config.ada.strategy = strategy_from_string(strategy);
        } catch (const std::invalid_argument& e) {
            errors.push_back(std::string("strategy: ") + e.what());
        }
    }
    std::uint64_t count = 0;
    if (p.get_count("rounds", &count)) {
        config.ada.rounds = static_cast<int>(count);
    }
    p.get_double("budget_fraction", &config.ada.budget_fraction);
    p.get_double("per_round_fraction", &config.ada.per_round_fraction);
    p.get_double("lambda_dom", &config.ada.lambda_dom);
    p.get_double("lambda_pred", &config.ada.lambda_pred);
    p.get_double("lambda_c", &config.ada.lambda_c);
    p.get_count("k", &config.ada.k);
    p.get_count("batch", &config.ada.batch);
    p.get_double("s_init", &config.ada.s_init);
    p.get_double("lr_extractor", &config.ada.lr_extractor);
    p.get_double("lr_head", &config.ada.lr_head);
    if (p.get_count("pretrain_epochs", &count)) {
        config.ada.pretrain_epochs = static_cast<int>(count);
    }
    if (p.get_count("round_epochs", &count)) {
        config.ada.round_epochs = static_cast<int>(count);
    }
    p.get_count("hidden", &config.ada.hidden);
    p.get_count("d_feat", &config.ada.d_feat);
    p.get_count("contrastive_subset", &config.ada.contrastive_subset);
    p.get_string("dataset", &config.dataset_path);
    if (root.contains("data")) {
        if (!config.dataset_path.empty()) {
            errors.push_back(
                "dataset and data are mutually exclusive; give one");
        }
        parse_data_object(root["data"], &config, errors);
    }

    config.data.seed = config.ada.seed;
    for (const std::string& e : config.ada.problems()) {
        errors.push_back(e);
    }
    if (config.dataset_path.empty()) {
        for (const std::string& e : spec_problems(config.data)) {
            errors.push_back("data: " + e);
        }
    }

    if (!errors.empty()) {
        std::string msg = "invalid config:";
        for (const std::string& e : errors) {
            msg += "\n  - " + e;
        }
        throw std::invalid_argument(msg);
    }
    return config;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open config: " + path);
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_run_config(text.str());
}

std::string run_config_to_json(const RunConfig& config) {
    json j;
    j["seed"] = config.ada.seed;
    j["out_dir"] = config.out_dir;
    j["strategy"] = strategy_name(config.ada.strategy);
    j["rounds"] = config.ada.rounds;
    j["budget_fraction"] = config.ada.budget_fraction;
    j["per_round_fraction"] = config.ada.per_round_fraction;
    j["lambda_dom"] = config.ada.lambda_dom;
    j["lambda_pred"] = config.ada.lambda_pred;
    j["lambda_c"] = config.ada.lambda_c;
    j["k"] = config.ada.k;
    j["batch"] = config.ada.batch;
    j["s_init"] = config.ada.s_init;
    j["lr_extractor"] = config.ada.lr_extractor;
    j["lr_head"] = config.ada.lr_head;
    j["pretrain_epochs"] = config.ada.pretrain_epochs;
    j["round_epochs"] = config.ada.round_epochs;
    j["hidden"] = config.ada.hidden;
    j["d_feat"] = config.ada.d_feat;
    j["contrastive_subset"] = config.ada.contrastive_subset;
    if (!config.dataset_path.empty()) {
        j["dataset"] = config.dataset_path;
    } else {
        json d;
        d["classes"] = config.data.num_classes;
        d["dim"] = config.data.d_in;
        d["per_class"] = config.data.per_class_per_domain;
        d["radius"] = config.data.radius;
        d["sigma"] = config.data.sigma;
        d["rotation_deg"] = config.data.shift.rotation_deg;
        d["scale"] = config.data.shift.scale;
        d["sigma_ratio"] = config.data.shift.sigma_ratio;
        d["translation"] = config.data.shift.translation;
        j["data"] = d;
    }
    return j.dump(2) + "\n";
}

} // namespace readapt
