#pragma once

#include <fstream>
#include <initializer_list>
#include <optional>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "coopsense/calibration.hpp"
#include "coopsense/model.hpp"

namespace coopsense {

/// Optional calibration hints carried by a scenario file.
struct CalibrationSpec {
    std::vector<double> local_candidates;
    ErrorPooling pooling = ErrorPooling::TrueHypothesis;
    double beta_lo = 0.05;
    double beta_hi = 200.0;
};

struct ScenarioFile {
    ScenarioConfig scenario;
    std::optional<CalibrationSpec> calibration;
};

inline std::string_view to_string(DriftConvention d) noexcept
{
    return d == DriftConvention::ExactLLR ? "exact_llr" : "paper_literal";
}

inline std::string_view to_string(ErrorPooling p) noexcept
{
    return p == ErrorPooling::MeanOfBoth ? "mean_of_both" : "true_hypothesis";
}

namespace config_detail {

using nlohmann::json;

inline void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed)
{
    if (!j.is_object()) throw ConfigError("invalid field '" + where + "': expected an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || it.key() == a;
        if (!ok) throw ConfigError("unknown field '" + (where.empty() ? "" : where + ".") + it.key() + "'");
    }
}

template <class T>
void read(const json& j, const char* key, const std::string& where, T& out)
{
    if (!j.contains(key)) return;
    const std::string field = where.empty() ? std::string(key) : where + "." + key;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("invalid field '" + field + "': wrong type (" + std::string(j.at(key).type_name()) + ")");
    }
}

inline DriftConvention parse_drift(const std::string& s)
{
    if (s == "paper_literal") return DriftConvention::PaperLiteral;
    if (s == "exact_llr") return DriftConvention::ExactLLR;
    throw ConfigError("invalid field 'fusion.drift_convention': expected paper_literal or exact_llr");
}

inline ErrorPooling parse_pooling(const std::string& s)
{
    if (s == "true_hypothesis") return ErrorPooling::TrueHypothesis;
    if (s == "mean_of_both") return ErrorPooling::MeanOfBoth;
    throw ConfigError("invalid field 'calibration.pooling': expected true_hypothesis or mean_of_both");
}

template <class Fn>
void with_field(const char* field, Fn&& fn)
{
    try {
        fn();
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        if (msg.rfind("invalid field", 0) == 0 || msg.rfind("unknown field", 0) == 0) throw;
        throw ConfigError("invalid field '" + std::string(field) + "': " + msg);
    }
}

} // namespace config_detail

inline ScenarioFile scenario_from_json(const nlohmann::json& j)
{
    using namespace config_detail;
    only_keys(j, "", {"id", "algorithm", "true_hypothesis", "local_threshold", "fusion_threshold", "max_horizon",
                      "binary_level", "nodes", "fusion", "quantizer", "bias", "glr", "fading", "calibration"});
    ScenarioFile f;
    ScenarioConfig& c = f.scenario;
    read(j, "id", "", c.id);
    std::string s;
    if (j.contains("algorithm")) {
        read(j, "algorithm", "", s);
        with_field("algorithm", [&] { c.algorithm = parse_algorithm(s); });
    }
    if (j.contains("true_hypothesis")) {
        read(j, "true_hypothesis", "", s);
        with_field("true_hypothesis", [&] { c.true_hypothesis = parse_hypothesis(s); });
    }
    read(j, "local_threshold", "", c.local_threshold);
    read(j, "fusion_threshold", "", c.fusion_threshold);
    read(j, "max_horizon", "", c.max_horizon);
    read(j, "binary_level", "", c.binary_level);

    if (j.contains("nodes")) {
        if (!j["nodes"].is_array()) throw ConfigError("invalid field 'nodes': expected an array");
        for (std::size_t i = 0; i < j["nodes"].size(); ++i) {
            const auto& n = j["nodes"][i];
            const std::string where = "nodes[" + std::to_string(i) + "]";
            only_keys(n, where, {"post_change_mean", "noise_std", "channel_gain_db"});
            NodeParams p;
            read(n, "post_change_mean", where, p.post_change_mean);
            read(n, "noise_std", where, p.noise_std);
            read(n, "channel_gain_db", where, p.channel_gain_db);
            c.nodes.push_back(p);
        }
    }
    if (j.contains("fusion")) {
        const auto& fu = j["fusion"];
        only_keys(fu, "fusion", {"noise_variance", "design_mean", "drift_convention"});
        read(fu, "noise_variance", "fusion", c.fusion.noise_variance);
        read(fu, "design_mean", "fusion", c.fusion.design_mean);
        if (fu.contains("drift_convention")) {
            read(fu, "drift_convention", "fusion", s);
            c.fusion.drift_convention = parse_drift(s);
        }
    }
    if (j.contains("quantizer")) {
        const auto& q = j["quantizer"];
        only_keys(q, "quantizer", {"upper_levels", "lower_levels", "delta_up", "delta_down"});
        read(q, "upper_levels", "quantizer", c.quantizer.upper_levels);
        read(q, "lower_levels", "quantizer", c.quantizer.lower_levels);
        read(q, "delta_up", "quantizer", c.quantizer.delta_up);
        read(q, "delta_down", "quantizer", c.quantizer.delta_down);
    }
    if (j.contains("bias")) {
        only_keys(j["bias"], "bias", {"d1", "d0"});
        read(j["bias"], "d1", "bias", c.bias.d1);
        read(j["bias"], "d0", "bias", c.bias.d0);
    }
    if (j.contains("glr")) {
        const auto& g = j["glr"];
        only_keys(g, "glr", {"theta0", "theta1", "cost", "clamp_lo", "clamp_hi", "delta", "boundary"});
        GlrConfig gc;
        read(g, "theta0", "glr", gc.theta0);
        read(g, "theta1", "glr", gc.theta1);
        read(g, "cost", "glr", gc.cost);
        read(g, "clamp_lo", "glr", gc.clamp_lo);
        read(g, "clamp_hi", "glr", gc.clamp_hi);
        read(g, "delta", "glr", gc.delta);
        if (g.contains("boundary")) {
            const auto& b = g["boundary"];
            only_keys(b, "glr.boundary", {"kind", "correction"});
            if (b.contains("kind")) {
                read(b, "kind", "glr.boundary", s);
                with_field("glr.boundary.kind", [&] { gc.boundary.kind = parse_boundary(s); });
            }
            read(b, "correction", "glr.boundary", gc.boundary.correction);
        }
        c.glr = gc;
    }
    if (j.contains("fading")) {
        only_keys(j["fading"], "fading", {"rate", "per_trial"});
        FadingConfig fc;
        read(j["fading"], "rate", "fading", fc.rate);
        read(j["fading"], "per_trial", "fading", fc.per_trial);
        c.fading = fc;
    }
    if (j.contains("calibration")) {
        const auto& k = j["calibration"];
        only_keys(k, "calibration", {"local_candidates", "pooling", "beta_lo", "beta_hi"});
        CalibrationSpec cs;
        read(k, "local_candidates", "calibration", cs.local_candidates);
        if (k.contains("pooling")) {
            read(k, "pooling", "calibration", s);
            cs.pooling = parse_pooling(s);
        }
        read(k, "beta_lo", "calibration", cs.beta_lo);
        read(k, "beta_hi", "calibration", cs.beta_hi);
        f.calibration = cs;
    }
    validate(c);
    return f;
}

inline nlohmann::json scenario_to_json(const ScenarioConfig& c, const std::optional<CalibrationSpec>& cal = {})
{
    nlohmann::json j;
    j["id"] = c.id;
    j["algorithm"] = std::string(to_string(c.algorithm));
    j["true_hypothesis"] = std::string(to_string(c.true_hypothesis));
    j["local_threshold"] = c.local_threshold;
    j["fusion_threshold"] = c.fusion_threshold;
    j["max_horizon"] = c.max_horizon;
    j["binary_level"] = c.binary_level;
    for (const auto& n : c.nodes)
        j["nodes"].push_back(
            {{"post_change_mean", n.post_change_mean}, {"noise_std", n.noise_std}, {"channel_gain_db", n.channel_gain_db}});
    j["fusion"] = {{"noise_variance", c.fusion.noise_variance},
                   {"design_mean", c.fusion.design_mean},
                   {"drift_convention", std::string(to_string(c.fusion.drift_convention))}};
    j["quantizer"] = {{"upper_levels", c.quantizer.upper_levels},
                      {"lower_levels", c.quantizer.lower_levels},
                      {"delta_up", c.quantizer.delta_up},
                      {"delta_down", c.quantizer.delta_down}};
    j["bias"] = {{"d1", c.bias.d1}, {"d0", c.bias.d0}};
    if (c.glr)
        j["glr"] = {{"theta0", c.glr->theta0},
                    {"theta1", c.glr->theta1},
                    {"cost", c.glr->cost},
                    {"clamp_lo", c.glr->clamp_lo},
                    {"clamp_hi", c.glr->clamp_hi},
                    {"delta", c.glr->delta},
                    {"boundary",
                     {{"kind", std::string(to_string(c.glr->boundary.kind))}, {"correction", c.glr->boundary.correction}}}};
    if (c.fading) j["fading"] = {{"rate", c.fading->rate}, {"per_trial", c.fading->per_trial}};
    if (cal)
        j["calibration"] = {{"local_candidates", cal->local_candidates},
                            {"pooling", std::string(to_string(cal->pooling))},
                            {"beta_lo", cal->beta_lo},
                            {"beta_hi", cal->beta_hi}};
    return j;
}

/// Parses scenario text; syntax errors report line and column, semantic errors name the field.
inline ScenarioFile parse_scenario(const std::string& text, const std::string& origin = "<scenario>")
{
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ConfigError(origin + ":" + std::to_string(line) + ":" + std::to_string(col) + ": syntax error");
    }
    try {
        return scenario_from_json(j);
    } catch (const ConfigError& e) {
        throw ConfigError(origin + ": " + e.what());
    }
}

inline ScenarioFile load_scenario(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open scenario file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str(), path);
}

} // namespace coopsense
