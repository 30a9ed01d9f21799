#include "tailtilt/scenario_json.hpp"

#include <algorithm>
#include <cmath>

#include "tailtilt/data_io.hpp"
#include "tailtilt/errors.hpp"

namespace tailtilt {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

double require_number(const json& node, const std::string& path) {
    if (!node.is_number()) throw ConfigError(path, "expected a number");
    return node.get<double>();
}

std::size_t require_positive_integer(const json& node, const std::string& path) {
    if (!node.is_number_integer() || node.get<long long>() < 1) {
        throw ConfigError(path, "expected a positive integer");
    }
    return node.get<std::size_t>();
}

DataSource parse_source(const json& node, const std::string& path,
                        const std::string& baseDir) {
    if (!node.is_object()) throw ConfigError(path, "expected an object");
    if (node.contains("population")) {
        if (!node["population"].is_string()) {
            throw ConfigError(path + "/population", "expected a file path string");
        }
        const bool negate = node.value("negate", false);
        std::string file = node["population"].get<std::string>();
        if (!file.empty() && file.front() != '/') file = baseDir + "/" + file;
        return make_population(read_value_column(file, negate), file);
    }
    if (!node.contains("family")) {
        throw ConfigError(path, "expected either 'family' or 'population'");
    }
    const std::string family = node["family"].get<std::string>();
    try {
        if (family == "loggamma") {
            return DistSpec::log_gamma(require_number(node.at("shape"), path + "/shape"),
                                       require_number(node.at("scale"), path + "/scale"));
        }
        if (family == "gpd") {
            return DistSpec::gpd(require_number(node.at("gamma"), path + "/gamma"),
                                 require_number(node.at("sigma"), path + "/sigma"),
                                 node.contains("t") ? require_number(node["t"], path + "/t")
                                                    : 0.0);
        }
        if (family == "pareto") {
            return DistSpec::pareto(require_number(node.at("gamma"), path + "/gamma"),
                                    require_number(node.at("xm"), path + "/xm"));
        }
    } catch (const json::out_of_range&) {
        throw ConfigError(path, "missing a required parameter for family '" + family + "'");
    } catch (const DomainError& e) {
        throw ConfigError(path, e.what());
    }
    throw ConfigError(path + "/family",
                      "unknown family '" + family + "' (loggamma, gpd, pareto)");
}

ThresholdRule parse_threshold(const json& node, const std::string& path) {
    if (!node.is_object() || !node.contains("rule")) {
        throw ConfigError(path, "expected an object with a 'rule' field");
    }
    const std::string rule = node["rule"].get<std::string>();
    if (rule == "fixed") {
        if (!node.contains("t")) throw ConfigError(path + "/t", "fixed rule needs 't'");
        return FixedThreshold{require_number(node["t"], path + "/t")};
    }
    if (rule == "quantile") {
        if (!node.contains("q")) throw ConfigError(path + "/q", "quantile rule needs 'q'");
        const double q = require_number(node["q"], path + "/q");
        if (!(q > 0.0 && q < 1.0)) throw ConfigError(path + "/q", "must lie in (0, 1)");
        return BackgroundQuantile{q};
    }
    if (rule == "gh") return GuillouHallThreshold{};
    if (rule == "oracle") {
        if (!node.contains("grid") || !node["grid"].is_array() || node["grid"].empty()) {
            throw ConfigError(path + "/grid", "oracle rule needs a nonempty grid array");
        }
        std::vector<double> grid;
        for (std::size_t i = 0; i < node["grid"].size(); ++i) {
            grid.push_back(
                require_number(node["grid"][i], path + "/grid/" + std::to_string(i)));
        }
        if (!std::is_sorted(grid.begin(), grid.end())) {
            throw ConfigError(path + "/grid", "must be sorted ascending");
        }
        return OracleThreshold{std::move(grid)};
    }
    throw ConfigError(path + "/rule",
                      "unknown rule '" + rule + "' (fixed, quantile, gh, oracle)");
}

KappaRule parse_kappa(const json& node, const std::string& path) {
    if (!node.is_object() || !node.contains("rule")) {
        throw ConfigError(path, "expected an object with a 'rule' field");
    }
    const std::string rule = node["rule"].get<std::string>();
    if (rule == "sigma_over_gamma" || rule == "sg") return KappaSigmaOverGamma{};
    if (rule == "t") return KappaEqualsThreshold{};
    if (rule == "fixed") {
        if (!node.contains("value")) {
            throw ConfigError(path + "/value", "fixed rule needs 'value'");
        }
        const double v = require_number(node["value"], path + "/value");
        if (!(v > 0.0)) throw ConfigError(path + "/value", "must be positive");
        return KappaFixed{v};
    }
    throw ConfigError(path + "/rule",
                      "unknown rule '" + rule + "' (sigma_over_gamma, t, fixed)");
}

MethodSpec parse_method(const json& node, const std::string& path) {
    if (!node.is_object() || !node.contains("estimator")) {
        throw ConfigError(path, "expected an object with an 'estimator' field");
    }
    MethodSpec m;
    const std::string name = node["estimator"].get<std::string>();
    if (name == "semiparametric") {
        m.estimator = MeanMethod::Semiparametric;
    } else if (name == "winsorized_threshold" || name == "winsorized-t") {
        m.estimator = MeanMethod::WinsorizedThreshold;
    } else if (name == "winsorized_k" || name == "winsorized-k") {
        m.estimator = MeanMethod::WinsorizedK;
    } else if (name == "pareto_tail" || name == "pareto") {
        m.estimator = MeanMethod::ParetoTail;
    } else if (name == "sample_mean" || name == "sample") {
        m.estimator = MeanMethod::SampleMean;
    } else {
        throw ConfigError(path + "/estimator", "unknown estimator '" + name + "'");
    }
    m.label = node.value("label", std::string{});
    if (m.uses_threshold()) {
        if (!node.contains("threshold")) {
            throw ConfigError(path + "/threshold",
                              "estimator '" + name + "' needs a threshold rule");
        }
        m.threshold = parse_threshold(node["threshold"], path + "/threshold");
    }
    if (m.estimator == MeanMethod::Semiparametric) {
        if (node.contains("kappa")) m.kappa = parse_kappa(node["kappa"], path + "/kappa");
        const std::string fitter = node.value("fitter", "direct");
        if (fitter == "direct") {
            m.fitter = TiltMethod::Direct;
        } else if (fitter == "logistic") {
            m.fitter = TiltMethod::Logistic;
        } else {
            throw ConfigError(path + "/fitter", "must be 'direct' or 'logistic'");
        }
    }
    if (m.estimator == MeanMethod::WinsorizedK) {
        if (!node.contains("k")) throw ConfigError(path + "/k", "winsorized_k needs 'k'");
        m.winsorK = require_positive_integer(node["k"], path + "/k");
    }
    return m;
}

json threshold_to_json(const ThresholdRule& rule) {
    return std::visit(
        [](const auto& r) -> json {
            using T = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<T, FixedThreshold>) {
                return {{"rule", "fixed"}, {"t", r.t}};
            } else if constexpr (std::is_same_v<T, BackgroundQuantile>) {
                return {{"rule", "quantile"}, {"q", r.q}};
            } else if constexpr (std::is_same_v<T, GuillouHallThreshold>) {
                return {{"rule", "gh"}};
            } else {
                return {{"rule", "oracle"}, {"grid", r.grid}};
            }
        },
        rule);
}

json kappa_to_json(const KappaRule& rule) {
    return std::visit(
        [](const auto& r) -> json {
            using T = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<T, KappaSigmaOverGamma>) {
                return {{"rule", "sigma_over_gamma"}};
            } else if constexpr (std::is_same_v<T, KappaEqualsThreshold>) {
                return {{"rule", "t"}};
            } else {
                return {{"rule", "fixed"}, {"value", r.value}};
            }
        },
        rule);
}

json source_to_json(const DataSource& source) {
    if (const auto* spec = std::get_if<DistSpec>(&source)) {
        return std::visit(
            [](const auto& s) -> json {
                using T = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<T, LogGammaSpec>) {
                    return {{"family", "loggamma"}, {"shape", s.shape}, {"scale", s.scale}};
                } else if constexpr (std::is_same_v<T, GpdSpec>) {
                    return {{"family", "gpd"},
                            {"gamma", s.tailIndex},
                            {"sigma", s.scale},
                            {"t", s.location}};
                } else {
                    return {{"family", "pareto"}, {"gamma", s.tailIndex}, {"xm", s.scale}};
                }
            },
            spec->variant());
    }
    const auto& pop = std::get<Population>(source);
    return {{"population", pop.label}, {"size", pop.size()}};
}

}  // namespace

ScenarioConfig scenario_from_json(const json& doc, const std::string& baseDir) {
    if (!doc.is_object()) throw ConfigError("/", "config must be a JSON object");
    ScenarioConfig cfg;
    if (!doc.contains("x")) throw ConfigError("/x", "missing");
    if (!doc.contains("bg")) throw ConfigError("/bg", "missing");
    cfg.x = parse_source(doc["x"], "/x", baseDir);
    cfg.bg = parse_source(doc["bg"], "/bg", baseDir);
    if (!doc.contains("n")) throw ConfigError("/n", "missing");
    if (!doc.contains("N")) throw ConfigError("/N", "missing");
    if (!doc.contains("reps")) throw ConfigError("/reps", "missing");
    cfg.n = require_positive_integer(doc["n"], "/n");
    cfg.N = require_positive_integer(doc["N"], "/N");
    cfg.reps = require_positive_integer(doc["reps"], "/reps");
    if (cfg.reps < 2) throw ConfigError("/reps", "must be at least 2");
    if (doc.contains("masterSeed")) {
        if (!doc["masterSeed"].is_number_integer()) {
            throw ConfigError("/masterSeed", "expected an integer");
        }
        cfg.masterSeed = doc["masterSeed"].get<std::uint64_t>();
    }
    if (doc.contains("redrawBackground")) {
        if (!doc["redrawBackground"].is_boolean()) {
            throw ConfigError("/redrawBackground", "expected a boolean");
        }
        cfg.redrawBackground = doc["redrawBackground"].get<bool>();
    }
    if (doc.contains("trueMean")) {
        cfg.trueMean = require_number(doc["trueMean"], "/trueMean");
    }
    if (!doc.contains("methods") || !doc["methods"].is_array() || doc["methods"].empty()) {
        throw ConfigError("/methods", "expected a nonempty array");
    }
    for (std::size_t i = 0; i < doc["methods"].size(); ++i) {
        cfg.methods.push_back(
            parse_method(doc["methods"][i], "/methods/" + std::to_string(i)));
    }
    try {
        cfg.validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError("/", e.what());
    }
    return cfg;
}

ordered_json scenario_echo_json(const ScenarioConfig& cfg) {
    ordered_json out;
    out["x"] = source_to_json(cfg.x);
    out["bg"] = source_to_json(cfg.bg);
    out["n"] = cfg.n;
    out["N"] = cfg.N;
    out["reps"] = cfg.reps;
    out["masterSeed"] = cfg.masterSeed;
    out["redrawBackground"] = cfg.redrawBackground;
    out["trueMean"] = cfg.resolve_true_mean();
    ordered_json methods = json::array();
    for (const auto& m : cfg.methods) {
        ordered_json node;
        node["estimator"] = to_string(m.estimator);
        node["label"] = m.effective_label();
        if (m.uses_threshold()) node["threshold"] = threshold_to_json(m.threshold);
        if (m.estimator == MeanMethod::Semiparametric) {
            node["kappa"] = kappa_to_json(m.kappa);
            node["fitter"] = m.fitter == TiltMethod::Direct ? "direct" : "logistic";
        }
        if (m.estimator == MeanMethod::WinsorizedK) node["k"] = m.winsorK;
        methods.push_back(node);
    }
    out["methods"] = methods;
    return out;
}

namespace {

ordered_json stats_to_json(const CellStats& s) {
    ordered_json node;
    node["variance"] = s.variance;
    node["se_variance"] = s.seVariance;
    node["bias2"] = s.bias2;
    node["se_bias2"] = s.seBias2;
    node["mse"] = s.mse;
    node["se_mse"] = s.seMse;
    node["t_mean"] = s.meanThreshold;
    if (s.meanPluginVar) node["mean_plugin_var"] = *s.meanPluginVar;
    node["failures"] = s.failures;
    node["reps_used"] = s.repsUsed;
    return node;
}

}  // namespace

ordered_json scenario_result_json(const ScenarioResult& result) {
    ordered_json rows = json::array();
    for (const auto& row : result.rows) {
        ordered_json node;
        node["method"] = row.method;
        node["threshold_policy"] = row.thresholdPolicy;
        node.update(stats_to_json(row.stats));
        rows.push_back(node);
    }
    return ordered_json{{"rows", rows}};
}

ordered_json sweep_json(const SweepResult& sweep) {
    ordered_json out;
    out["grid"] = sweep.grid;
    ordered_json curves = json::array();
    for (std::size_t mi = 0; mi < sweep.methods.size(); ++mi) {
        ordered_json node;
        node["method"] = sweep.methods[mi];
        ordered_json points = json::array();
        for (std::size_t gi = 0; gi < sweep.grid.size(); ++gi) {
            ordered_json p = stats_to_json(sweep.curves[mi][gi]);
            p["t"] = sweep.grid[gi];
            points.push_back(p);
        }
        node["points"] = points;
        curves.push_back(node);
    }
    out["curves"] = curves;
    return out;
}

}  // namespace tailtilt
