#include "afc/serialize.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "afc/error.hpp"

namespace afc {

using nlohmann::json;

namespace {

constexpr const char* kFormatName = "afclass-model";

json encode_real(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v < 0 ? "-inf" : "inf";
    return v;
}

double decode_real(const json& j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    }
    throw InputError("model file: expected a number, got " + j.dump());
}

json encode_reals(const std::vector<double>& values) {
    json out = json::array();
    for (double v : values) out.push_back(encode_real(v));
    return out;
}

std::vector<double> decode_reals(const json& j) {
    std::vector<double> out;
    out.reserve(j.size());
    for (const auto& v : j) out.push_back(decode_real(v));
    return out;
}

json encode_policy(const SmoothingPolicy& p) {
    if (p.is_mle()) return {{"kind", "mle"}};
    return {{"kind", "bayesian"}, {"alpha", p.alpha}};
}

SmoothingPolicy decode_policy(const json& j) {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "mle") return SmoothingPolicy::mle();
    if (kind == "bayesian") return SmoothingPolicy::bayesian(j.at("alpha").get<double>());
    throw InputError("model file: unknown smoothing kind '" + kind + "'");
}

json encode_densities(const std::vector<WordDensity>& densities) {
    json out = json::array();
    for (const auto& d : densities) {
        out.push_back({{"vocabulary_size", d.vocabulary_size},
                       {"words", d.words},
                       {"log_probs", encode_reals(d.log_probs)},
                       {"default_log", encode_real(d.default_log)}});
    }
    return out;
}

std::vector<WordDensity> decode_densities(const json& j) {
    std::vector<WordDensity> out;
    for (const auto& d : j) {
        WordDensity density;
        density.vocabulary_size = d.at("vocabulary_size").get<std::uint64_t>();
        density.words = d.at("words").get<std::vector<KmerCode>>();
        density.log_probs = decode_reals(d.at("log_probs"));
        density.default_log = decode_real(d.at("default_log"));
        if (density.words.size() != density.log_probs.size()) {
            throw InputError("model file: density word and probability counts differ");
        }
        out.push_back(std::move(density));
    }
    return out;
}

json encode(const MultinomialBayesModel& m) {
    return {{"kind", "multinomial_bayes"},
            {"k", m.spec.k()},
            {"classes", m.classes},
            {"policy", encode_policy(m.policy)},
            {"log_priors", encode_reals(m.log_priors)},
            {"densities", encode_densities(m.densities)}};
}

json encode(const MarkovChainModel& m) {
    return {{"kind", "markov_chain"},
            {"k", m.spec.k()},
            {"classes", m.classes},
            {"policy", encode_policy(m.policy)},
            {"log_priors", encode_reals(m.log_priors)},
            {"upper", encode_densities(m.upper)},
            {"lower", encode_densities(m.lower)}};
}

json encode(const OneVsRestModel& m) {
    json binaries = json::array();
    for (const auto& b : m.models) {
        binaries.push_back({{"weights", encode_reals(b.weights)},
                            {"intercept", encode_real(b.intercept)},
                            {"converged", b.converged},
                            {"iterations", b.iterations},
                            {"objective", encode_real(b.objective)}});
    }
    return {{"kind", "one_vs_rest"},
            {"k", m.spec.k()},
            {"classes", m.classes},
            {"loss", m.loss == Loss::Logistic ? "logistic" : "squared_hinge"},
            {"penalty",
             {{"kind", m.penalty.kind == Penalty::Kind::L1 ? "L1" : "L2"},
              {"lambda", m.penalty.lambda},
              {"C", m.penalty.cost}}},
            {"solver",
             {{"tol", m.options.tol},
              {"grad_tol", m.options.grad_tol},
              {"max_iter", m.options.max_iter},
              {"method", solver_name(m.options.method)}}},
            {"features", m.features.codes},
            {"models", binaries}};
}

OneVsRestModel decode_ovr(const json& j) {
    OneVsRestModel m;
    m.spec = KmerSpec(j.at("k").get<int>());
    m.classes = j.at("classes").get<std::vector<std::string>>();
    const auto loss = j.at("loss").get<std::string>();
    if (loss == "logistic") {
        m.loss = Loss::Logistic;
    } else if (loss == "squared_hinge") {
        m.loss = Loss::SquaredHinge;
    } else {
        throw InputError("model file: unknown loss '" + loss + "'");
    }
    const auto& p = j.at("penalty");
    const auto kind = p.at("kind").get<std::string>();
    if (kind != "L1" && kind != "L2") throw InputError("model file: unknown penalty '" + kind + "'");
    m.penalty = Penalty{kind == "L1" ? Penalty::Kind::L1 : Penalty::Kind::L2,
                        p.at("lambda").get<double>(), p.at("C").get<double>()};
    const auto& s = j.at("solver");
    m.options.tol = s.at("tol").get<double>();
    m.options.grad_tol = s.at("grad_tol").get<double>();
    m.options.max_iter = s.at("max_iter").get<int>();
    try {
        m.options.method = parse_solver(s.value("method", std::string("newton")));
    } catch (const ConfigError& e) {
        throw InputError(std::string("model file: ") + e.what());
    }
    m.features.codes = j.at("features").get<std::vector<KmerCode>>();
    for (const auto& b : j.at("models")) {
        BinaryLinearModel binary;
        binary.weights = decode_reals(b.at("weights"));
        binary.intercept = decode_real(b.at("intercept"));
        binary.converged = b.at("converged").get<bool>();
        binary.iterations = b.at("iterations").get<int>();
        binary.objective = decode_real(b.at("objective"));
        binary.loss = m.loss;
        binary.penalty = m.penalty;
        if (binary.weights.size() != m.features.size()) {
            throw InputError("model file: weight vector does not match the feature index");
        }
        m.models.push_back(std::move(binary));
    }
    if (m.models.size() != m.classes.size()) {
        throw InputError("model file: expected one binary model per class");
    }
    return m;
}

template <typename Model>
void decode_generative_common(const json& j, Model& m) {
    m.spec = KmerSpec(j.at("k").get<int>());
    m.classes = j.at("classes").get<std::vector<std::string>>();
    m.policy = decode_policy(j.at("policy"));
    m.log_priors = decode_reals(j.at("log_priors"));
    if (m.log_priors.size() != m.classes.size()) {
        throw InputError("model file: prior count does not match class count");
    }
}

}  // namespace

std::string serialize_model(const TrainedModel& model) {
    json body = std::visit([](const auto& m) { return encode(m); }, model);
    json doc = {{"format", kFormatName}, {"version", kModelFormatVersion}, {"model", body}};
    return doc.dump(1) + "\n";
}

TrainedModel deserialize_model(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InputError(std::string("model file is not valid JSON: ") + e.what());
    }
    try {
        if (doc.at("format").get<std::string>() != kFormatName) {
            throw InputError("not an afclass model file");
        }
        const int version = doc.at("version").get<int>();
        if (version != kModelFormatVersion) {
            throw InputError("unsupported model format version " + std::to_string(version));
        }
        const json& body = doc.at("model");
        const auto kind = body.at("kind").get<std::string>();
        if (kind == "multinomial_bayes") {
            MultinomialBayesModel m;
            decode_generative_common(body, m);
            m.densities = decode_densities(body.at("densities"));
            return m;
        }
        if (kind == "markov_chain") {
            MarkovChainModel m;
            decode_generative_common(body, m);
            m.upper = decode_densities(body.at("upper"));
            m.lower = decode_densities(body.at("lower"));
            return m;
        }
        if (kind == "one_vs_rest") return decode_ovr(body);
        throw InputError("model file: unknown model kind '" + kind + "'");
    } catch (const json::exception& e) {
        throw InputError(std::string("malformed model file: ") + e.what());
    }
}

void save_model(const std::filesystem::path& path, const TrainedModel& model) {
    std::ofstream out(path);
    if (!out) throw InputError("cannot write model file '" + path.string() + "'");
    out << serialize_model(model);
    if (!out) throw InputError("failed writing model file '" + path.string() + "'");
}

TrainedModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open model file '" + path.string() + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return deserialize_model(buffer.str());
}

}  // namespace afc
