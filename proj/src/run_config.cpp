#include "afc/run_config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "afc/error.hpp"

namespace afc {

using nlohmann::json;

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    if (path.is_relative() && !base.empty()) return base / path;
    return path;
}

ModelConfig model_from_json(const json& j, const Penalty& defaults, const SolverOptions& solver) {
    if (j.is_string()) {
        ModelConfig m = ModelConfig::parse(j.get<std::string>());
        if (!m.generative()) {
            m.penalty.lambda = defaults.lambda;
            m.penalty.cost = defaults.cost;
            m.solver = solver;
        }
        return m;
    }
    if (!j.is_object()) throw ConfigError("model entries must be strings or objects");
    ModelConfig m = ModelConfig::parse(j.at("model").get<std::string>());
    if (m.generative()) {
        if (j.contains("alpha")) {
            m.policy = j.at("alpha").is_string() && j.at("alpha").get<std::string>() == "MLE"
                           ? SmoothingPolicy::mle()
                           : SmoothingPolicy::bayesian(j.at("alpha").get<double>());
        }
        return m;
    }
    if (j.contains("penalty")) {
        const auto kind = j.at("penalty").get<std::string>();
        if (kind != "L1" && kind != "L2") throw ConfigError("penalty must be L1 or L2");
        m.penalty.kind = kind == "L1" ? Penalty::Kind::L1 : Penalty::Kind::L2;
    }
    m.penalty.lambda = j.value("lambda", defaults.lambda);
    m.penalty.cost = j.value("C", defaults.cost);
    m.solver = solver;
    m.solver.tol = j.value("tol", solver.tol);
    m.solver.grad_tol = j.value("grad_tol", solver.grad_tol);
    m.solver.max_iter = j.value("max_iter", solver.max_iter);
    if (j.contains("solver")) m.solver.method = parse_solver(j.at("solver").get<std::string>());
    return m;
}

}  // namespace

std::vector<ModelConfig> parse_model_list(const std::vector<std::string>& ids) {
    std::vector<ModelConfig> models;
    for (const auto& id : ids) {
        if (id == "paper") {
            const auto all = paper_models();
            models.insert(models.end(), all.begin(), all.end());
        } else {
            models.push_back(ModelConfig::parse(id));
        }
    }
    return models;
}

void RunConfig::validate() const {
    if (k_min < 2) throw ConfigError("k_min must be at least 2");
    if (k_min > k_max) throw ConfigError("k_min must not exceed k_max");
    if (k_max > KmerSpec::kMaxK) {
        throw ConfigError("k_max must not exceed " + std::to_string(KmerSpec::kMaxK));
    }
    if (fasta.empty()) throw ConfigError("no FASTA file given");
    if (labels.empty()) throw ConfigError("no label manifest given");
    for (const auto& p : {fasta, labels}) {
        if (!std::filesystem::exists(p)) throw ConfigError("file not found: " + p.string());
    }
    if (n_folds < 2) throw ConfigError("n_folds must be at least 2");
    if (max_per_class < 1) throw ConfigError("max_per_class must be at least 1");
    if (models.empty()) throw ConfigError("no models selected");
    std::set<std::string> ids;
    for (const auto& m : models) {
        if (!ids.insert(m.id()).second) throw ConfigError("model '" + m.id() + "' listed twice");
        if (!m.generative()) {
            if (!(m.penalty.lambda > 0) || !(m.penalty.cost > 0)) {
                throw ConfigError("model '" + m.id() + "': C and lambda must be positive");
            }
            if (!(m.solver.tol > 0) || !(m.solver.grad_tol > 0) || m.solver.max_iter < 1) {
                throw ConfigError("model '" + m.id() + "': solver tolerances must be positive");
            }
        }
    }
    if (fragment_lengths.empty()) throw ConfigError("fragment_lengths must not be empty");
    for (std::size_t len : fragment_lengths) {
        if (len != 0 && len < static_cast<std::size_t>(k_max)) {
            throw ConfigError("fragment length " + std::to_string(len) + " is shorter than k_max=" +
                              std::to_string(k_max));
        }
    }
    for (const auto& f : formats) {
        if (f != "csv" && f != "json" && f != "svg") {
            throw ConfigError("unknown output format '" + f + "' (csv, json or svg)");
        }
    }
}

GridConfig RunConfig::grid() const {
    GridConfig g;
    g.models = models;
    g.k_min = k_min;
    g.k_max = k_max;
    g.n_folds = n_folds;
    g.fragment_lengths = fragment_lengths;
    g.max_per_class = max_per_class;
    g.seed = seed;
    g.workers = workers;
    return g;
}

std::string RunConfig::canonical_json() const {
    json models_j = json::array();
    for (const auto& m : models) {
        json entry = {{"model", m.id()}};
        if (!m.generative()) {
            entry["C"] = m.penalty.cost;
            entry["lambda"] = m.penalty.lambda;
            entry["tol"] = m.solver.tol;
            entry["grad_tol"] = m.solver.grad_tol;
            entry["max_iter"] = m.solver.max_iter;
            entry["solver"] = solver_name(m.solver.method);
        }
        models_j.push_back(entry);
    }
    // Output location and worker count do not affect results.
    json doc = {{"fasta", fasta.string()},
                {"labels", labels.string()},
                {"labels_delimiter", std::string(1, manifest.delimiter)},
                {"labels_header", manifest.has_header},
                {"strict_labels", manifest.strict},
                {"task", task},
                {"k_min", k_min},
                {"k_max", k_max},
                {"models", models_j},
                {"n_folds", n_folds},
                {"fragment_lengths", fragment_lengths},
                {"max_per_class", max_per_class},
                {"seed", seed}};
    return doc.dump();
}

std::string RunConfig::digest() const { return sha256_hex(canonical_json()); }

RunConfig parse_run_config(std::string_view json_text, const std::filesystem::path& base_dir) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");

    RunConfig config;
    try {
        if (doc.contains("fasta")) config.fasta = resolve(base_dir, doc["fasta"].get<std::string>());
        if (doc.contains("labels")) config.labels = resolve(base_dir, doc["labels"].get<std::string>());
        if (doc.contains("labels_delimiter")) {
            const auto d = doc["labels_delimiter"].get<std::string>();
            if (d.size() != 1) throw ConfigError("labels_delimiter must be a single character");
            config.manifest.delimiter = d[0];
        }
        config.manifest.has_header = doc.value("labels_header", config.manifest.has_header);
        config.manifest.strict = doc.value("strict_labels", config.manifest.strict);
        config.task = doc.value("task", config.task);
        config.k_min = doc.value("k_min", config.k_min);
        config.k_max = doc.value("k_max", config.k_max);
        config.n_folds = doc.value("n_folds", config.n_folds);
        config.max_per_class = doc.value("max_per_class", config.max_per_class);
        config.seed = doc.value("seed", config.seed);
        config.workers = doc.value("workers", config.workers);
        if (doc.contains("fragment_lengths")) {
            config.fragment_lengths = doc["fragment_lengths"].get<std::vector<std::size_t>>();
        }
        if (doc.contains("out")) config.out = resolve(base_dir, doc["out"].get<std::string>());
        if (doc.contains("formats")) config.formats = doc["formats"].get<std::vector<std::string>>();

        const Penalty defaults{Penalty::Kind::L2, doc.value("lambda", 1.0), doc.value("C", 1.0)};
        SolverOptions solver;
        solver.tol = doc.value("tol", solver.tol);
        solver.grad_tol = doc.value("grad_tol", solver.grad_tol);
        solver.max_iter = doc.value("max_iter", solver.max_iter);
        if (doc.contains("solver")) solver.method = parse_solver(doc["solver"].get<std::string>());

        if (doc.contains("models")) {
            const json& list = doc["models"];
            config.models.clear();
            const json entries = list.is_array() ? list : json::array({list});
            for (const auto& entry : entries) {
                if (entry.is_string() && entry.get<std::string>() == "paper") {
                    for (auto m : paper_models(Penalty::l1(defaults.lambda, defaults.cost),
                                               Penalty::l2(defaults.lambda, defaults.cost), solver)) {
                        config.models.push_back(m);
                    }
                } else {
                    config.models.push_back(model_from_json(entry, defaults, solver));
                }
            }
        } else {
            config.models = paper_models(Penalty::l1(defaults.lambda, defaults.cost),
                                         Penalty::l2(defaults.lambda, defaults.cost), solver);
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad config value: ") + e.what());
    }
    return config;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_run_config(buffer.str(), path.parent_path());
}

}  // namespace afc
