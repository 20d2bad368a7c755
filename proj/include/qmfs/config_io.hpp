#pragma once

// JSON form of ReadoutConfig. Keys carry their units:
//
//   {
//     "protocol": "coherent" | "single_mode_squeezed" | "two_mode_qmfs",
//     "cavities": [ { "kappa_rate": 1.0, "chi_rate": 0.5, "n0": 100.0 }, ... ],
//     "source": {
//       "r": 0.0,                  squeeze parameter (e^{2r} is the power ratio)
//       "theta_rad": 0.0,          single-mode squeeze angle
//       "bandwidth_rate": null,    Lorentzian width in units of kappa; null = broadband
//       "t0_kappa": null,          squeezing turn-on time; null = presqueezed
//       "mode": "single" | "two"   defaults from the cavity count
//     },
//     "loss": { "eta": 1.0, "placement": "detection" | "input" },
//     "tau_kappa": 10.0,
//     "qubit_state": "ground" | "excited"
//   }
//
// Every key except "cavities" and "tau_kappa" is optional. Unknown keys are
// rejected so that typos do not silently fall back to defaults.

#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "json.hpp"
#include "qmfs/model.hpp"

namespace qmfs {

using Json = nlohmann::ordered_json;

inline const char* to_string(Protocol p) {
    switch (p) {
    case Protocol::Coherent: return "coherent";
    case Protocol::SingleModeSqueezed: return "single_mode_squeezed";
    case Protocol::TwoModeQMFS: return "two_mode_qmfs";
    }
    return "";
}

inline const char* to_string(QubitState s) { return s == QubitState::Ground ? "ground" : "excited"; }

namespace detail {

[[noreturn]] inline void parse_fail(const std::string& field, const std::string& detail) {
    throw ConfigError(ConfigErrorKind::Parse, field, detail);
}

inline void reject_unknown(const Json& obj, const std::string& prefix, std::initializer_list<const char*> known) {
    const std::set<std::string> allowed(known.begin(), known.end());
    for (const auto& item : obj.items())
        if (!allowed.count(item.key())) parse_fail(prefix + item.key(), "unknown key");
}

inline const Json& require_object(const Json& j, const std::string& field) {
    if (!j.is_object()) parse_fail(field, "expected an object");
    return j;
}

inline double read_number(const Json& obj, const char* key, const std::string& field, double fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_number()) parse_fail(field, "expected a number");
    return v.get<double>();
}

// null maps to the given sentinel.
inline double read_number_or_null(const Json& obj, const char* key, const std::string& field, double sentinel) {
    if (!obj.contains(key) || obj.at(key).is_null()) return sentinel;
    return read_number(obj, key, field, sentinel);
}

inline std::string read_string(const Json& obj, const char* key, const std::string& field,
                               const std::string& fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_string()) parse_fail(field, "expected a string");
    return v.get<std::string>();
}

}  // namespace detail

/// Parses the JSON schema above. Throws ConfigError with kind Parse for
/// malformed input; physical constraints are left to validate().
inline ReadoutConfig config_from_json(const Json& j) {
    using namespace detail;
    require_object(j, "<root>");
    reject_unknown(j, "", {"protocol", "cavities", "source", "loss", "tau_kappa", "qubit_state"});

    ReadoutConfig c;
    const auto protocol = read_string(j, "protocol", "protocol", "coherent");
    if (protocol == "coherent")
        c.protocol = Protocol::Coherent;
    else if (protocol == "single_mode_squeezed")
        c.protocol = Protocol::SingleModeSqueezed;
    else if (protocol == "two_mode_qmfs")
        c.protocol = Protocol::TwoModeQMFS;
    else
        parse_fail("protocol", "unknown protocol '" + protocol + "'");

    if (!j.contains("cavities") || !j.at("cavities").is_array()) parse_fail("cavities", "expected an array");
    c.cavities.clear();
    for (std::size_t i = 0; i < j.at("cavities").size(); ++i) {
        const std::string prefix = "cavities[" + std::to_string(i) + "].";
        const auto& cav = require_object(j.at("cavities")[i], prefix.substr(0, prefix.size() - 1));
        reject_unknown(cav, prefix, {"kappa_rate", "chi_rate", "n0"});
        CavityParams p;
        p.kappa = read_number(cav, "kappa_rate", prefix + "kappa_rate", 1.0);
        p.chi = read_number(cav, "chi_rate", prefix + "chi_rate", 0.0);
        p.drive_flux = read_number(cav, "n0", prefix + "n0", 0.0);
        c.cavities.push_back(p);
    }

    c.source.mode_kind = c.cavities.size() == 2 ? ModeKind::TwoMode : ModeKind::SingleMode;
    if (j.contains("source")) {
        const auto& s = require_object(j.at("source"), "source");
        reject_unknown(s, "source.", {"r", "theta_rad", "bandwidth_rate", "t0_kappa", "mode"});
        c.source.r = read_number(s, "r", "source.r", 0.0);
        c.source.theta = read_number(s, "theta_rad", "source.theta_rad", 0.0);
        c.source.bandwidth = read_number_or_null(s, "bandwidth_rate", "source.bandwidth_rate", kBroadband);
        c.source.t0 = read_number_or_null(s, "t0_kappa", "source.t0_kappa", kPresqueezed);
        if (s.contains("mode")) {
            const auto mode = read_string(s, "mode", "source.mode", "");
            if (mode == "single")
                c.source.mode_kind = ModeKind::SingleMode;
            else if (mode == "two")
                c.source.mode_kind = ModeKind::TwoMode;
            else
                parse_fail("source.mode", "expected \"single\" or \"two\"");
        }
    }

    if (j.contains("loss")) {
        const auto& l = require_object(j.at("loss"), "loss");
        reject_unknown(l, "loss.", {"eta", "placement"});
        c.loss.eta = read_number(l, "eta", "loss.eta", 1.0);
        const auto placement = read_string(l, "placement", "loss.placement", "detection");
        if (placement == "detection")
            c.loss.placement = LossPlacement::Detection;
        else if (placement == "input")
            c.loss.placement = LossPlacement::Input;
        else
            parse_fail("loss.placement", "expected \"detection\" or \"input\"");
    }

    if (!j.contains("tau_kappa")) parse_fail("tau_kappa", "missing");
    c.tau = read_number(j, "tau_kappa", "tau_kappa", 0.0);

    const auto state = read_string(j, "qubit_state", "qubit_state", "ground");
    if (state == "ground")
        c.qubit_state = QubitState::Ground;
    else if (state == "excited")
        c.qubit_state = QubitState::Excited;
    else
        parse_fail("qubit_state", "expected \"ground\" or \"excited\"");
    return c;
}

inline ReadoutConfig config_from_string(const std::string& text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        detail::parse_fail("<root>", e.what());
    }
    return config_from_json(j);
}

inline ReadoutConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) detail::parse_fail("<file>", "cannot open '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return config_from_string(buf.str());
}

inline Json config_to_json(const ReadoutConfig& c) {
    Json j;
    j["protocol"] = to_string(c.protocol);
    j["cavities"] = Json::array();
    for (const auto& cav : c.cavities)
        j["cavities"].push_back({{"kappa_rate", cav.kappa}, {"chi_rate", cav.chi}, {"n0", cav.drive_flux}});
    Json s;
    s["r"] = c.source.r;
    s["theta_rad"] = c.source.theta;
    s["bandwidth_rate"] = c.source.broadband() ? Json(nullptr) : Json(c.source.bandwidth);
    s["t0_kappa"] = c.source.presqueezed() ? Json(nullptr) : Json(c.source.t0);
    s["mode"] = c.source.mode_kind == ModeKind::TwoMode ? "two" : "single";
    j["source"] = s;
    j["loss"] = {{"eta", c.loss.eta},
                 {"placement", c.loss.placement == LossPlacement::Detection ? "detection" : "input"}};
    j["tau_kappa"] = c.tau;
    j["qubit_state"] = to_string(c.qubit_state);
    return j;
}

}  // namespace qmfs
