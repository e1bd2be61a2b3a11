#include "caseseg/cli.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <optional>

namespace caseseg::cli {

namespace {

bool sets_flag(const std::vector<std::string>& args, const std::string& key) {
    const std::string flag = "--" + key;
    return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
        return a == flag || a.rfind(flag + "=", 0) == 0;
    });
}

std::optional<std::string> config_path(const std::vector<std::string>& args, const char* env_path) {
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
        if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
    }
    if (env_path && *env_path) return std::string(env_path);
    return std::nullopt;
}

std::string scalar_text(const nlohmann::json& v, const std::string& key) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number()) return v.dump();
    throw InputError("config key '" + key + "' must be a string, number, boolean or array of those");
}

}  // namespace

std::vector<std::string> expand_config(const std::vector<std::string>& args, const char* env_path,
                                       const std::vector<std::string>& foreign_keys) {
    const auto path = config_path(args, env_path);
    if (!path || args.size() < 2) return args;

    std::ifstream in(*path, std::ios::binary);
    if (!in) throw IoError("cannot open config file '" + *path + "'");
    nlohmann::json config;
    try {
        config = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw InputError("config file '" + *path + "' is not valid JSON: " + e.what());
    }
    if (!config.is_object()) throw InputError("config file '" + *path + "' must hold a JSON object");

    std::vector<std::string> injected;
    for (const auto& [key, value] : config.items()) {
        if (key == "config" || value.is_null() || sets_flag(args, key)) continue;
        if (std::find(foreign_keys.begin(), foreign_keys.end(), key) != foreign_keys.end()) continue;
        if (value.is_array()) {
            for (const auto& item : value) injected.push_back("--" + key + "=" + scalar_text(item, key));
        } else {
            injected.push_back("--" + key + "=" + scalar_text(value, key));
        }
    }
    std::vector<std::string> out(args.begin(), args.begin() + 2);
    out.insert(out.end(), injected.begin(), injected.end());
    out.insert(out.end(), args.begin() + 2, args.end());
    return out;
}

}  // namespace caseseg::cli
