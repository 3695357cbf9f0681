#pragma once

#include "meshforge/agents/train.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

namespace meshforge::app {

/// Bad command-line or config input (exit code 2).
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Every training knob, set from a flat `key = value` file.
struct TrainSettings {
    agents::SmootherTrainConfig smoother;
    agents::FlipperTrainConfig flipper;
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& v) {
    T out{};
    const auto* end = v.data() + v.size();
    const auto [p, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc() || p != end) throw InputError("config key '" + key + "': '" + v + "' is not a number");
    return out;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw InputError("config key '" + key + "': '" + v + "' is not a boolean");
}

}  // namespace detail

using Setter = std::function<void(TrainSettings&, const std::string& key, const std::string& value)>;

inline const std::map<std::string, Setter>& config_keys() {
    using detail::parse_bool;
    using detail::parse_number;
#define MF_REAL(name, expr) {name, [](TrainSettings& s, const std::string& k, const std::string& v) { expr = parse_number<double>(k, v); }}
#define MF_INT(name, expr) {name, [](TrainSettings& s, const std::string& k, const std::string& v) { expr = parse_number<int>(k, v); }}
    static const std::map<std::string, Setter> keys{
        MF_REAL("td3.lr", s.smoother.td3.lr),
        MF_INT("td3.batch", s.smoother.td3.batch),
        MF_REAL("td3.discount", s.smoother.td3.discount),
        MF_REAL("td3.tau", s.smoother.td3.tau),
        MF_INT("td3.policy_delay", s.smoother.td3.policy_delay),
        MF_REAL("td3.exploration_noise", s.smoother.td3.exploration_noise),
        MF_REAL("td3.exploration_noise_final", s.smoother.td3.exploration_noise_final),
        MF_REAL("td3.target_noise", s.smoother.td3.target_noise),
        MF_REAL("td3.target_noise_clip", s.smoother.td3.target_noise_clip),
        MF_INT("td3.start_steps", s.smoother.td3.start_steps),
        MF_INT("td3.updates_per_step", s.smoother.td3.updates_per_step),
        {"td3.buffer", [](TrainSettings& s, const std::string& k, const std::string& v) {
             s.smoother.td3.buffer = parse_number<std::size_t>(k, v);
         }},
        MF_REAL("action_range", s.smoother.td3.action_range),
        {"reward", [](TrainSettings& s, const std::string&, const std::string& v) {
             try {
                 s.smoother.env.reward.variant = rl::reward_variant_from_string(v);
             } catch (const std::invalid_argument& e) {
                 throw InputError(e.what());
             }
         }},
        MF_REAL("reward_gamma", s.smoother.env.reward.gamma),
        MF_INT("max_steps", s.smoother.env.max_steps),
        {"surface_reward", [](TrainSettings& s, const std::string& k, const std::string& v) {
             s.smoother.env.surface_reward = parse_bool(k, v);
         }},
        MF_INT("window", s.smoother.window),
        MF_REAL("d3qn.lr", s.flipper.d3qn.lr),
        MF_INT("d3qn.batch", s.flipper.d3qn.batch),
        MF_REAL("d3qn.discount", s.flipper.d3qn.discount),
        MF_REAL("d3qn.epsilon_start", s.flipper.d3qn.epsilon_start),
        MF_REAL("d3qn.epsilon_final", s.flipper.d3qn.epsilon_final),
        MF_INT("d3qn.target_sync", s.flipper.d3qn.target_sync),
        MF_INT("d3qn.start_steps", s.flipper.d3qn.start_steps),
        {"d3qn.buffer", [](TrainSettings& s, const std::string& k, const std::string& v) {
             s.flipper.d3qn.buffer = parse_number<std::size_t>(k, v);
         }},
        MF_INT("flip.max_steps", s.flipper.env.max_steps),
        MF_INT("flip.min_degree", s.flipper.env.min_degree),
    };
#undef MF_REAL
#undef MF_INT
    return keys;
}

inline void apply_setting(TrainSettings& s, const std::string& key, const std::string& value) {
    const auto& keys = config_keys();
    const auto it = keys.find(key);
    if (it == keys.end()) throw InputError("unknown config key '" + key + "'");
    it->second(s, key, value);
    if (key == "window") s.flipper.window = s.smoother.window;
}

/// Lines are `key = value`; `#` starts a comment; blank lines are skipped.
inline void apply_config(TrainSettings& s, std::istream& in, const std::string& name = "<config>") {
    std::string line;
    for (int lineno = 1; std::getline(in, line); ++lineno) {
        if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw InputError(name + ":" + std::to_string(lineno) + ": expected key = value");
        try {
            apply_setting(s, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
        } catch (const InputError& e) {
            throw InputError(name + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
}

inline TrainSettings load_config(const std::string& path) {
    TrainSettings s;
    if (path.empty()) return s;
    std::ifstream in(path);
    if (!in) throw InputError("cannot read config file " + path);
    apply_config(s, in, path);
    return s;
}

}  // namespace meshforge::app
