#include <fstream>
#include <functional>
#include <sstream>

#include <json.hpp>

#include "lsgnn/error.hpp"
#include "lsgnn/experiment.hpp"

namespace lsgnn {
namespace {

using json = nlohmann::json;

template <class T>
T as(const json& v, const std::string& key) {
    try {
        if constexpr (std::is_same_v<T, bool>) {
            if (!v.is_boolean()) throw InputError("");
        } else if constexpr (std::is_integral_v<T>) {
            if (!v.is_number_integer() || (std::is_unsigned_v<T> && v.get<long long>() < 0)) throw InputError("");
        } else if constexpr (std::is_floating_point_v<T>) {
            if (!v.is_number()) throw InputError("");
        } else {
            if (!v.is_string()) throw InputError("");
        }
        return v.get<T>();
    } catch (const std::exception&) {
        throw InputError("config key '" + key + "' has the wrong type");
    }
}

using Setter = std::function<void(ExperimentConfig&, const json&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"K", [](auto& c, const json& v, const auto& k) { c.propagation.K = c.model.K = as<std::uint32_t>(v, k); }},
        {"gamma", [](auto& c, const json& v, const auto& k) { c.propagation.gamma = as<double>(v, k); }},
        {"beta", [](auto& c, const json& v, const auto& k) { c.propagation.beta = as<double>(v, k); }},
        {"variant", [](auto& c, const json& v, const auto& k) { c.propagation.variant = parse_variant(as<std::string>(v, k)); }},
        {"normalize", [](auto& c, const json& v, const auto& k) { c.propagation.normalize = as<bool>(v, k); }},
        {"z", [](auto& c, const json& v, const auto& k) { c.model.z = as<std::size_t>(v, k); }},
        {"h_ls", [](auto& c, const json& v, const auto& k) { c.model.h_ls = as<std::size_t>(v, k); }},
        {"h_alpha", [](auto& c, const json& v, const auto& k) { c.model.h_alpha = as<std::size_t>(v, k); }},
        {"sim_kind", [](auto& c, const json& v, const auto& k) { c.model.sim_kind = parse_similarity(as<std::string>(v, k)); }},
        {"dropout", [](auto& c, const json& v, const auto& k) { c.model.dropout = as<double>(v, k); }},
        {"weight_mode", [](auto& c, const json& v, const auto& k) { c.model.weight_mode = parse_weight_mode(as<std::string>(v, k)); }},
        {"localsim_mode", [](auto& c, const json& v, const auto& k) { c.model.localsim_mode = parse_localsim_mode(as<std::string>(v, k)); }},
        {"lr", [](auto& c, const json& v, const auto& k) { c.train.lr = as<double>(v, k); }},
        {"weight_decay", [](auto& c, const json& v, const auto& k) { c.train.weight_decay = as<double>(v, k); }},
        {"epochs", [](auto& c, const json& v, const auto& k) { c.train.epochs = as<std::uint32_t>(v, k); }},
        {"patience", [](auto& c, const json& v, const auto& k) { c.train.patience = as<std::uint32_t>(v, k); }},
        {"seed", [](auto& c, const json& v, const auto& k) { c.train.seed = as<std::uint64_t>(v, k); }},
        {"num_splits", [](auto& c, const json& v, const auto& k) { c.num_splits = as<std::size_t>(v, k); }},
        {"budget", [](auto& c, const json& v, const auto& k) { c.budget = as<std::size_t>(v, k); }},
        {"K_list", [](auto& c, const json& v, const auto& k) {
             if (!v.is_array() || v.empty()) throw InputError("config key '" + k + "' must be a nonempty array");
             c.K_list.clear();
             for (const auto& e : v) c.K_list.push_back(as<std::uint32_t>(e, k));
         }},
    };
    return table;
}

} // namespace

void ExperimentConfig::apply_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw FormatError("config must be a flat JSON object");
    const auto& table = setters();
    for (const auto& [key, value] : doc.items()) {
        auto it = table.find(key);
        if (it == table.end()) throw InputError("unknown config key '" + key + "'");
        it->second(*this, value, key);
    }
    propagation.validate();
    model.K = propagation.K;
    if (!(model.dropout >= 0.0 && model.dropout < 1.0)) throw InputError("dropout must lie in [0, 1)");
    if (model.z < 1 || model.h_ls < 1 || model.h_alpha < 1) throw InputError("widths must be >= 1");
    if (!(train.lr > 0.0) || !(train.weight_decay >= 0.0)) throw InputError("lr must be > 0, weight_decay >= 0");
    if (num_splits < 1 || budget < 1) throw InputError("num_splits and budget must be >= 1");
}

ExperimentConfig ExperimentConfig::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    ExperimentConfig cfg;
    cfg.apply_json(ss.str());
    return cfg;
}

std::string ExperimentConfig::to_json() const {
    json j;  // nlohmann orders object keys alphabetically
    j["K"] = propagation.K;
    j["gamma"] = propagation.gamma;
    j["beta"] = propagation.beta;
    j["variant"] = std::string(to_string(propagation.variant));
    j["normalize"] = propagation.normalize;
    j["z"] = model.z;
    j["h_ls"] = model.h_ls;
    j["h_alpha"] = model.h_alpha;
    j["sim_kind"] = std::string(to_string(model.sim_kind));
    j["dropout"] = model.dropout;
    j["weight_mode"] = std::string(to_string(model.weight_mode));
    j["localsim_mode"] = std::string(to_string(model.localsim_mode));
    j["lr"] = train.lr;
    j["weight_decay"] = train.weight_decay;
    j["epochs"] = train.epochs;
    j["patience"] = train.patience;
    j["seed"] = train.seed;
    j["num_splits"] = num_splits;
    j["budget"] = budget;
    j["K_list"] = K_list;
    return j.dump();
}

} // namespace lsgnn
