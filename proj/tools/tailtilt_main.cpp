// tailtilt command line: tail fitting, mean estimation, and Monte Carlo
// scenario execution on one-column data files.
//
// Exit codes: 0 success, 2 usage/config/ingestion error, 3 estimation or
// model error.

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "tailtilt/data_io.hpp"
#include "tailtilt/errors.hpp"
#include "tailtilt/estimators.hpp"
#include "tailtilt/evt.hpp"
#include "tailtilt/scenario_json.hpp"
#include "tailtilt/sim.hpp"
#include "tailtilt/tilt.hpp"

namespace {

using nlohmann::ordered_json;
using namespace tailtilt;

constexpr int kExitUsage = 2;
constexpr int kExitEstimation = 3;

[[noreturn]] void fail(int code, const std::string& kind, const std::string& message) {
    ordered_json err;
    err["error"] = kind;
    err["message"] = message;
    std::cerr << err.dump() << "\n";
    std::exit(code);
}

ThresholdRule parse_threshold_flag(const std::string& spec) {
    if (spec == "gh") return GuillouHallThreshold{};
    const auto colon = spec.find(':');
    if (colon != std::string::npos) {
        const std::string kind = spec.substr(0, colon);
        const std::string arg = spec.substr(colon + 1);
        try {
            if (kind == "fixed") return FixedThreshold{std::stod(arg)};
            if (kind == "quantile") {
                const double q = std::stod(arg);
                if (!(q > 0.0 && q < 1.0)) {
                    throw ArgumentError("quantile level must lie in (0, 1)");
                }
                return BackgroundQuantile{q};
            }
        } catch (const std::invalid_argument&) {
            throw ArgumentError("could not parse threshold value '" + arg + "'");
        }
    }
    throw ArgumentError("threshold must be fixed:<v>, quantile:<q>, or gh");
}

KappaRule parse_kappa_flag(const std::string& spec) {
    if (spec == "sg") return KappaSigmaOverGamma{};
    if (spec == "t") return KappaEqualsThreshold{};
    if (spec.rfind("fixed:", 0) == 0) {
        try {
            const double v = std::stod(spec.substr(6));
            if (!(v > 0.0)) throw ArgumentError("fixed kappa must be positive");
            return KappaFixed{v};
        } catch (const std::invalid_argument&) {
            throw ArgumentError("could not parse kappa value in '" + spec + "'");
        }
    }
    throw ArgumentError("kappa must be sg, t, or fixed:<v>");
}

std::vector<double> parse_grid_flag(const std::string& spec) {
    std::vector<double> grid;
    try {
        if (spec.find(',') != std::string::npos) {
            std::stringstream ss(spec);
            std::string item;
            while (std::getline(ss, item, ',')) grid.push_back(std::stod(item));
        } else {
            const auto c1 = spec.find(':');
            const auto c2 = spec.find(':', c1 == std::string::npos ? 0 : c1 + 1);
            if (c1 == std::string::npos || c2 == std::string::npos) {
                throw ArgumentError("grid must be a comma list or lo:hi:steps");
            }
            const double lo = std::stod(spec.substr(0, c1));
            const double hi = std::stod(spec.substr(c1 + 1, c2 - c1 - 1));
            const long steps = std::stol(spec.substr(c2 + 1));
            if (steps < 1 || hi < lo) throw ArgumentError("grid needs hi >= lo, steps >= 1");
            if (steps == 1) {
                grid.push_back(lo);
            } else {
                for (long i = 0; i < steps; ++i) {
                    grid.push_back(lo + (hi - lo) * double(i) / double(steps - 1));
                }
            }
        }
    } catch (const std::invalid_argument&) {
        throw ArgumentError("could not parse grid '" + spec + "'");
    }
    if (grid.empty() || !std::is_sorted(grid.begin(), grid.end())) {
        throw ArgumentError("grid must be nonempty and sorted ascending");
    }
    return grid;
}

Sample load_sample(const std::string& path, bool negate) {
    return Sample(read_value_column(path, negate), path);
}

void write_text(const std::string& path, const std::string& body) {
    std::ofstream out(path);
    if (!out) throw IngestError("cannot open output file " + path);
    out << body;
}

ordered_json diagnostics_json(const FitDiagnostics& d) {
    return ordered_json{
        {"momentResidual", d.momentResidual},
        {"iterations", d.iterations},
        {"method", d.method == TiltMethod::Direct ? "direct" : "logistic"},
    };
}

struct CommonFlags {
    std::string xFile, bgFile;
    std::string thresholdSpec = "gh";
    std::string kappaSpec = "sg";
    bool negate = false;
};

int run_fit(const CommonFlags& flags, const std::string& fitter) {
    const Sample x = load_sample(flags.xFile, flags.negate);
    const Sample bg = load_sample(flags.bgFile, flags.negate);
    const ThresholdRule tRule = parse_threshold_flag(flags.thresholdSpec);
    const KappaRule kRule = parse_kappa_flag(flags.kappaSpec);
    const double t = resolve_threshold(tRule, x, bg);
    const double kappa = resolve_kappa(kRule, bg, t);
    const TiltMethod method = fitter == "logistic" ? TiltMethod::Logistic : TiltMethod::Direct;
    const TiltedTailModel model = build_tail_model(x, bg, t, kappa, method);

    ordered_json report;
    report["t"] = t;
    report["kappa"] = kappa;
    report["etaHat"] = model.eta_hat();
    report["psi"] = model.log_partition();
    report["p2Hat"] = model.p2_hat();
    report["counts"] = ordered_json{{"n", x.size()},
                                    {"nTailX", model.n_tail_x()},
                                    {"N", bg.size()},
                                    {"nTailBg", model.bg_excesses().size()}};
    report["diagnostics"] = diagnostics_json(model.diagnostics());
    std::cout << report.dump(2) << "\n";
    return 0;
}

int run_mean(const CommonFlags& flags, const std::string& method, std::size_t winsorK,
             const std::string& fitter) {
    const Sample x = load_sample(flags.xFile, flags.negate);
    MeanEstimate est;
    if (method == "sample") {
        est = sample_mean(x);
    } else if (method == "winsorized-k") {
        est = winsorized_mean_k(x, winsorK);
    } else {
        // The remaining estimators need a threshold; semiparametric also
        // needs the background sample.
        std::optional<Sample> bg;
        if (!flags.bgFile.empty()) bg = load_sample(flags.bgFile, flags.negate);
        const ThresholdRule tRule = parse_threshold_flag(flags.thresholdSpec);
        if (std::holds_alternative<BackgroundQuantile>(tRule) && !bg) {
            throw ArgumentError("quantile threshold needs --bg");
        }
        const double t = resolve_threshold(tRule, x, bg ? *bg : x);
        if (method == "winsorized-t") {
            est = winsorized_mean_threshold(x, t);
        } else if (method == "pareto") {
            est = pareto_tail_mean(x, t);
        } else if (method == "semiparametric") {
            if (!bg) throw ArgumentError("semiparametric estimation needs --bg");
            const double kappa = resolve_kappa(parse_kappa_flag(flags.kappaSpec), *bg, t);
            const TiltMethod fm =
                fitter == "logistic" ? TiltMethod::Logistic : TiltMethod::Direct;
            est = semiparametric_mean(x, *bg, t, kappa, fm);
        } else {
            throw ArgumentError("unknown method '" + method + "'");
        }
    }

    ordered_json report;
    report["muHat"] = est.muHat;
    if (est.varHat) report["varHat"] = *est.varHat;
    report["method"] = to_string(est.method);
    if (est.threshold) report["t"] = *est.threshold;
    if (est.kappa) report["kappa"] = *est.kappa;
    if (est.diagnostics) report["diagnostics"] = diagnostics_json(*est.diagnostics);
    std::cout << report.dump(2) << "\n";
    return 0;
}

std::string base_dir_of(const std::string& path) {
    const auto slash = path.find_last_of('/');
    return slash == std::string::npos ? std::string(".") : path.substr(0, slash);
}

ScenarioConfig load_config(const std::string& path, std::optional<std::uint64_t> seed) {
    std::ifstream in(path);
    if (!in) throw IngestError("file not found: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("/", std::string("invalid JSON: ") + e.what());
    }
    ScenarioConfig cfg = scenario_from_json(doc, base_dir_of(path));
    if (seed) cfg.masterSeed = *seed;
    return cfg;
}

int run_simulate(const std::string& configPath, std::optional<std::uint64_t> seed,
                 const std::string& csvOut, const std::string& jsonOut) {
    const ScenarioConfig cfg = load_config(configPath, seed);
    const ScenarioResult result = run_scenario(cfg);

    ordered_json doc;
    doc["config"] = scenario_echo_json(cfg);
    doc["results"] = scenario_result_json(result);
    const std::string csv = scenario_result_csv(result);
    if (!csvOut.empty()) write_text(csvOut, csv);
    if (!jsonOut.empty()) write_text(jsonOut, doc.dump(2) + "\n");
    if (csvOut.empty() && jsonOut.empty()) {
        std::cout << doc.dump(2) << "\n";
    } else {
        std::cout << csv;
    }
    return 0;
}

int run_sweep(const std::string& configPath, const std::string& gridSpec,
              std::optional<std::uint64_t> seed, const std::string& csvOut) {
    const ScenarioConfig cfg = load_config(configPath, seed);
    const std::vector<double> grid = parse_grid_flag(gridSpec);
    const SweepResult sweep = threshold_sweep(cfg, grid);
    const std::string csv = sweep_csv(sweep);
    if (!csvOut.empty()) {
        write_text(csvOut, csv);
    } else {
        std::cout << csv;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Semiparametric heavy-tail estimation with a background sample"};
    app.require_subcommand(1);

    CommonFlags flags;
    std::string fitter = "direct";
    std::string meanMethod = "semiparametric";
    std::size_t winsorK = 1;
    std::string configPath, gridSpec, csvOut, jsonOut;
    std::optional<std::uint64_t> seed;

    auto* fit = app.add_subcommand("fit", "Fit the tilted tail model and report it");
    fit->add_option("--x", flags.xFile, "Sample of interest (one value per line)")
        ->required();
    fit->add_option("--bg", flags.bgFile, "Background sample")->required();
    fit->add_option("--threshold", flags.thresholdSpec, "fixed:<v> | quantile:<q> | gh");
    fit->add_option("--kappa", flags.kappaSpec, "sg | t | fixed:<v>");
    fit->add_option("--fitter", fitter, "direct | logistic");
    fit->add_flag("--negate", flags.negate, "Negate values at ingestion (left tail)");

    auto* mean = app.add_subcommand("mean", "Estimate the mean of the x population");
    mean->add_option("--x", flags.xFile, "Sample of interest")->required();
    mean->add_option("--bg", flags.bgFile, "Background sample");
    mean->add_option("--method", meanMethod,
                     "semiparametric | winsorized-t | winsorized-k | pareto | sample");
    mean->add_option("--threshold", flags.thresholdSpec, "fixed:<v> | quantile:<q> | gh");
    mean->add_option("--kappa", flags.kappaSpec, "sg | t | fixed:<v>");
    mean->add_option("--k", winsorK, "Cap count for winsorized-k");
    mean->add_option("--fitter", fitter, "direct | logistic");
    mean->add_flag("--negate", flags.negate, "Negate values at ingestion (left tail)");

    auto* simulate = app.add_subcommand("simulate", "Run a Monte Carlo scenario config");
    simulate->add_option("--config", configPath, "Scenario JSON file")->required();
    simulate->add_option("--seed", seed, "Override the config master seed");
    simulate->add_option("--out-csv", csvOut, "Write the result table as CSV");
    simulate->add_option("--out-json", jsonOut, "Write results plus config echo as JSON");

    auto* sweep = app.add_subcommand("sweep", "Threshold sweep, CSV output for plotting");
    sweep->add_option("--config", configPath, "Scenario JSON file")->required();
    sweep->add_option("--grid", gridSpec, "Comma list or lo:hi:steps")->required();
    sweep->add_option("--seed", seed, "Override the config master seed");
    sweep->add_option("--out", csvOut, "Write curves to this file instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        std::stringstream msg;
        msg << e.what();
        fail(kExitUsage, "usage", msg.str());
    }

    try {
        if (fit->parsed()) return run_fit(flags, fitter);
        if (mean->parsed()) return run_mean(flags, meanMethod, winsorK, fitter);
        if (simulate->parsed()) return run_simulate(configPath, seed, csvOut, jsonOut);
        if (sweep->parsed()) return run_sweep(configPath, gridSpec, seed, csvOut);
    } catch (const ConfigError& e) {
        fail(kExitUsage, "config", e.what());
    } catch (const IngestError& e) {
        fail(kExitUsage, "ingest", e.what());
    } catch (const ArgumentError& e) {
        fail(kExitUsage, "usage", e.what());
    } catch (const DomainError& e) {
        fail(kExitEstimation, "domain", e.what());
    } catch (const Error& e) {
        fail(kExitEstimation, "estimation", e.what());
    }
    return 0;
}
