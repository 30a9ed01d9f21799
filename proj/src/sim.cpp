#include "tailtilt/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <sstream>
#include <thread>

#include "tailtilt/errors.hpp"
#include "tailtilt/tilt.hpp"

namespace tailtilt {

namespace {

constexpr std::uint64_t kFixedBackgroundStream = ~std::uint64_t{0};
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Sample draw_source(const DataSource& source, std::size_t n, StreamRng& rng,
                   const std::string& label) {
    std::vector<double> values(n);
    if (const auto* spec = std::get_if<DistSpec>(&source)) {
        for (double& v : values) v = draw(*spec, rng);
    } else {
        const auto& pop = std::get<Population>(source);
        const auto& pv = *pop.values;
        for (double& v : values) v = pv[rng.uniform_below(pv.size())];
    }
    return Sample(std::move(values), label);
}

/// One estimator evaluation slot: a (method, threshold override) pair.
struct Cell {
    std::size_t methodIndex;
    std::optional<double> fixedThreshold;
};

struct CellDraws {
    std::vector<double> muHat;       // NaN marks a failed replication
    std::vector<double> varHat;      // semiparametric plug-in variance
    std::vector<double> threshold;   // resolved threshold
};

std::vector<CellDraws> run_cells(const ScenarioConfig& cfg, const std::vector<Cell>& cells) {
    cfg.validate();
    const std::size_t reps = cfg.reps;
    std::vector<CellDraws> out(cells.size());
    for (auto& cd : out) {
        cd.muHat.assign(reps, kNaN);
        cd.varHat.assign(reps, kNaN);
        cd.threshold.assign(reps, kNaN);
    }

    std::optional<Sample> sharedBg;
    if (!cfg.redrawBackground) {
        StreamRng rng(SeedSpec{cfg.masterSeed, kFixedBackgroundStream});
        sharedBg = draw_source(cfg.bg, cfg.N, rng, "background");
    }

    const auto runRep = [&](std::size_t r) {
        StreamRng xRng(SeedSpec{cfg.masterSeed, 2 * r});
        const Sample x = draw_source(cfg.x, cfg.n, xRng, "x");
        Sample bgLocal;
        const Sample* bg = nullptr;
        if (sharedBg) {
            bg = &*sharedBg;
        } else {
            StreamRng bgRng(SeedSpec{cfg.masterSeed, 2 * r + 1});
            bgLocal = draw_source(cfg.bg, cfg.N, bgRng, "background");
            bg = &bgLocal;
        }

        // The background tail index is threshold-free; compute it at most
        // once per replication and share it across grid cells.
        std::optional<double> bgGamma;
        const auto backgroundGamma = [&]() {
            if (!bgGamma) bgGamma = background_tail_index(*bg);
            return *bgGamma;
        };
        const auto kappaFor = [&](const KappaRule& rule, double t) {
            return std::visit(
                [&](const auto& k) -> double {
                    using T = std::decay_t<decltype(k)>;
                    if constexpr (std::is_same_v<T, KappaFixed>) {
                        if (!(k.value > 0.0)) throw ArgumentError("fixed kappa must be positive");
                        return k.value;
                    } else if constexpr (std::is_same_v<T, KappaEqualsThreshold>) {
                        if (!(t > 0.0)) throw ArgumentError("kappa = t needs t > 0");
                        return t;
                    } else {
                        return kappa_sigma_over_gamma(*bg, t, backgroundGamma());
                    }
                },
                rule);
        };

        for (std::size_t c = 0; c < cells.size(); ++c) {
            const MethodSpec& method = cfg.methods[cells[c].methodIndex];
            try {
                double t = kNaN;
                if (method.uses_threshold()) {
                    t = cells[c].fixedThreshold
                            ? *cells[c].fixedThreshold
                            : resolve_threshold(method.threshold, x, *bg);
                }
                MeanEstimate est;
                switch (method.estimator) {
                    case MeanMethod::Semiparametric:
                        est = semiparametric_mean(x, *bg, t, kappaFor(method.kappa, t),
                                                  method.fitter);
                        break;
                    case MeanMethod::WinsorizedThreshold:
                        est = winsorized_mean_threshold(x, t);
                        break;
                    case MeanMethod::WinsorizedK:
                        est = winsorized_mean_k(x, method.winsorK);
                        break;
                    case MeanMethod::ParetoTail:
                        est = pareto_tail_mean(x, t);
                        break;
                    case MeanMethod::SampleMean:
                        est = sample_mean(x);
                        break;
                }
                out[c].muHat[r] = est.muHat;
                if (est.varHat) out[c].varHat[r] = *est.varHat;
                out[c].threshold[r] = t;
            } catch (const Error&) {
                // leave the slot NaN; aggregation counts it as a failure
            }
        }
    };

    const std::size_t workers = std::min<std::size_t>(effective_worker_count(), reps);
    if (workers <= 1) {
        for (std::size_t r = 0; r < reps; ++r) runRep(r);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                for (std::size_t r = w; r < reps; r += workers) runRep(r);
            });
        }
        for (auto& th : pool) th.join();
    }
    return out;
}

double jackknife_se(const std::vector<double>& leaveOneOut) {
    const std::size_t r = leaveOneOut.size();
    if (r < 2) return kNaN;
    double mean = 0.0;
    for (double v : leaveOneOut) mean += v;
    mean /= double(r);
    double ss = 0.0;
    for (double v : leaveOneOut) ss += (v - mean) * (v - mean);
    return std::sqrt(ss * double(r - 1) / double(r));
}

CellStats aggregate(const CellDraws& draws, double trueMean) {
    CellStats s;
    std::vector<double> errors;
    errors.reserve(draws.muHat.size());
    double tSum = 0.0, varHatSum = 0.0;
    std::size_t varHatCount = 0;
    for (std::size_t r = 0; r < draws.muHat.size(); ++r) {
        if (std::isnan(draws.muHat[r])) {
            ++s.failures;
            continue;
        }
        errors.push_back(draws.muHat[r] - trueMean);
        tSum += draws.threshold[r];
        if (!std::isnan(draws.varHat[r])) {
            varHatSum += draws.varHat[r];
            ++varHatCount;
        }
    }
    const std::size_t R = errors.size();
    s.repsUsed = R;
    if (R == 0) {
        s.variance = s.bias2 = s.mse = kNaN;
        s.seVariance = s.seBias2 = s.seMse = kNaN;
        s.meanThreshold = kNaN;
        return s;
    }
    double sum = 0.0;
    for (double e : errors) sum += e;
    const double meanErr = sum / double(R);
    double m2 = 0.0, m4 = 0.0, sumSq = 0.0;
    for (double e : errors) {
        const double d = e - meanErr;
        m2 += d * d;
        m4 += d * d * d * d;
        sumSq += e * e;
    }
    m2 /= double(R);
    m4 /= double(R);
    s.variance = m2;
    s.bias2 = meanErr * meanErr;
    s.mse = sumSq / double(R);
    s.meanThreshold = std::isnan(tSum) ? kNaN : tSum / double(R);
    if (varHatCount > 0) s.meanPluginVar = varHatSum / double(varHatCount);

    // Direct moment s.e. for the variance.
    s.seVariance = R >= 2 ? std::sqrt(std::max(0.0, m4 - m2 * m2) / double(R)) : kNaN;

    // Jackknife for the squared bias and the MSE.
    if (R >= 2) {
        std::vector<double> loo(R);
        for (std::size_t i = 0; i < R; ++i) {
            const double m = (sum - errors[i]) / double(R - 1);
            loo[i] = m * m;
        }
        s.seBias2 = jackknife_se(loo);
        for (std::size_t i = 0; i < R; ++i) {
            loo[i] = (sumSq - errors[i] * errors[i]) / double(R - 1);
        }
        s.seMse = jackknife_se(loo);
    } else {
        s.seBias2 = s.seMse = kNaN;
    }
    return s;
}

// A cell where the estimator failed in more than a fifth of the
// replications cannot be compared on MSE: the surviving replicates are a
// selected subsample (e.g. only those with an exceedance at an extreme
// threshold). Oracle selection skips such cells when any sound cell exists.
bool oracle_candidate(const CellStats& s) {
    if (std::isnan(s.mse) || s.repsUsed == 0) return false;
    return 5 * s.failures <= s.repsUsed + s.failures;
}

std::size_t pick_oracle_index(const std::vector<CellStats>& cells) {
    std::size_t pick = cells.size();
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (!oracle_candidate(cells[i])) continue;
        if (pick == cells.size() || cells[i].mse < cells[pick].mse) pick = i;
    }
    if (pick != cells.size()) return pick;
    pick = 0;  // no sound cell; fall back to the raw minimum
    for (std::size_t i = 1; i < cells.size(); ++i) {
        const bool better = !std::isnan(cells[i].mse) &&
                            (std::isnan(cells[pick].mse) || cells[i].mse < cells[pick].mse);
        if (better) pick = i;
    }
    return pick;
}

std::string threshold_policy_label(const ThresholdRule& rule) {
    return std::visit(
        [](const auto& r) -> std::string {
            using T = std::decay_t<decltype(r)>;
            std::ostringstream out;
            if constexpr (std::is_same_v<T, FixedThreshold>) {
                out << "fixed t=" << r.t;
            } else if constexpr (std::is_same_v<T, BackgroundQuantile>) {
                out << "quantile q=" << r.q;
            } else if constexpr (std::is_same_v<T, GuillouHallThreshold>) {
                out << "guillou-hall";
            } else {
                out << "oracle";
            }
            return out.str();
        },
        rule);
}

}  // namespace

double Population::mean() const {
    if (!values || values->empty()) throw ArgumentError("population is empty");
    double s = 0.0;
    for (double v : *values) s += v;
    return s / double(values->size());
}

Population make_population(std::vector<double> values, std::string label) {
    if (values.empty()) throw IngestError("population is empty");
    return Population{std::make_shared<const std::vector<double>>(std::move(values)),
                      std::move(label)};
}

std::string describe(const DataSource& source) {
    if (const auto* spec = std::get_if<DistSpec>(&source)) return spec->describe();
    const auto& pop = std::get<Population>(source);
    std::ostringstream out;
    out << "population(" << (pop.label.empty() ? "in-memory" : pop.label)
        << ", size=" << pop.size() << ")";
    return out.str();
}

std::string MethodSpec::effective_label() const {
    if (!label.empty()) return label;
    std::ostringstream out;
    out << to_string(estimator);
    if (estimator == MeanMethod::WinsorizedK) {
        out << " k=" << winsorK;
    } else if (uses_threshold()) {
        out << " [" << threshold_policy_label(threshold) << "]";
    }
    return out.str();
}

bool MethodSpec::uses_threshold() const {
    return estimator == MeanMethod::Semiparametric ||
           estimator == MeanMethod::WinsorizedThreshold ||
           estimator == MeanMethod::ParetoTail;
}

double ScenarioConfig::resolve_true_mean() const {
    if (trueMean) return *trueMean;
    if (const auto* spec = std::get_if<DistSpec>(&x)) return analytic_mean(*spec);
    return std::get<Population>(x).mean();
}

void ScenarioConfig::validate() const {
    if (n < 1) throw ArgumentError("scenario needs n >= 1");
    if (N < 1) throw ArgumentError("scenario needs N >= 1");
    if (reps < 2) throw ArgumentError("scenario needs reps >= 2");
    if (methods.empty()) throw ArgumentError("scenario needs at least one method");
    for (const auto& m : methods) {
        if (m.estimator == MeanMethod::WinsorizedK && (m.winsorK < 1 || m.winsorK >= n)) {
            throw ArgumentError("winsorized-k method needs 1 <= k <= n - 1");
        }
    }
    resolve_true_mean();  // throws if the target mean is unavailable
}

std::size_t effective_worker_count() {
    std::size_t workers = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("TAILTILT_THREADS")) {
        char* end = nullptr;
        const long parsed = std::strtol(env, &end, 10);
        if (end != env && parsed > 0) {
            workers = std::min<std::size_t>(workers, static_cast<std::size_t>(parsed));
        }
    }
    return workers;
}

ScenarioResult run_scenario(const ScenarioConfig& cfg) {
    cfg.validate();
    std::vector<Cell> cells;
    std::vector<std::pair<std::size_t, std::size_t>> cellRange(cfg.methods.size());
    for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
        const auto& method = cfg.methods[mi];
        const std::size_t first = cells.size();
        const auto* oracle = std::get_if<OracleThreshold>(&method.threshold);
        if (method.uses_threshold() && oracle) {
            if (oracle->grid.empty()) {
                throw ArgumentError("oracle threshold rule needs a nonempty grid");
            }
            for (double t : oracle->grid) cells.push_back(Cell{mi, t});
        } else {
            cells.push_back(Cell{mi, std::nullopt});
        }
        cellRange[mi] = {first, cells.size()};
    }

    const double mu = cfg.resolve_true_mean();
    const auto draws = run_cells(cfg, cells);

    ScenarioResult result;
    for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
        const auto& method = cfg.methods[mi];
        const auto [first, last] = cellRange[mi];
        std::vector<CellStats> stats;
        stats.reserve(last - first);
        for (std::size_t c = first; c < last; ++c) stats.push_back(aggregate(draws[c], mu));

        const std::size_t pick = pick_oracle_index(stats);
        ScenarioRow row;
        row.method = method.effective_label();
        if (stats.size() > 1) {
            std::ostringstream policy;
            policy << "oracle t=" << *cells[first + pick].fixedThreshold;
            row.thresholdPolicy = policy.str();
        } else if (method.uses_threshold()) {
            row.thresholdPolicy = threshold_policy_label(method.threshold);
        } else {
            row.thresholdPolicy = "-";
        }
        row.stats = stats[pick];
        result.rows.push_back(std::move(row));
    }
    return result;
}

SweepResult threshold_sweep(const ScenarioConfig& cfg, const std::vector<double>& grid) {
    cfg.validate();
    if (grid.empty()) throw ArgumentError("threshold sweep needs a nonempty grid");
    if (!std::is_sorted(grid.begin(), grid.end())) {
        throw ArgumentError("threshold sweep grid must be sorted ascending");
    }

    std::vector<Cell> cells;
    cells.reserve(cfg.methods.size() * grid.size());
    for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
        for (double t : grid) cells.push_back(Cell{mi, t});
    }
    const double mu = cfg.resolve_true_mean();
    const auto draws = run_cells(cfg, cells);

    SweepResult sweep;
    sweep.grid = grid;
    for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
        sweep.methods.push_back(cfg.methods[mi].effective_label());
        std::vector<CellStats> curve;
        curve.reserve(grid.size());
        for (std::size_t gi = 0; gi < grid.size(); ++gi) {
            curve.push_back(aggregate(draws[mi * grid.size() + gi], mu));
        }
        sweep.curves.push_back(std::move(curve));
    }
    return sweep;
}

double oracle_threshold(const SweepResult& sweep, const std::string& methodLabel) {
    const auto it = std::find(sweep.methods.begin(), sweep.methods.end(), methodLabel);
    if (it == sweep.methods.end()) {
        throw ArgumentError("method '" + methodLabel + "' not present in the sweep");
    }
    const auto& curve = sweep.curves[static_cast<std::size_t>(it - sweep.methods.begin())];
    return sweep.grid[pick_oracle_index(curve)];
}

ScenarioResult resample_experiment(const Population& xPop, const Population& bgPop,
                                   std::size_t n, std::size_t N, std::size_t reps,
                                   std::vector<MethodSpec> methods,
                                   std::uint64_t masterSeed) {
    if (xPop.size() == 0 || bgPop.size() == 0) {
        throw IngestError("resampling experiment needs nonempty populations");
    }
    ScenarioConfig cfg;
    cfg.x = xPop;
    cfg.bg = bgPop;
    cfg.n = n;
    cfg.N = N;
    cfg.reps = reps;
    cfg.methods = std::move(methods);
    cfg.masterSeed = masterSeed;
    cfg.redrawBackground = true;  // resample both per replication
    return run_scenario(cfg);
}

namespace {

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

}  // namespace

std::string scenario_result_csv(const ScenarioResult& result) {
    std::ostringstream out;
    out << "method,threshold_policy,t_mean,variance,se_variance,bias2,se_bias2,"
           "mse,se_mse,mean_plugin_var,failures,reps_used\n";
    for (const auto& row : result.rows) {
        const auto& s = row.stats;
        out << row.method << ',' << row.thresholdPolicy << ',' << fmt(s.meanThreshold)
            << ',' << fmt(s.variance) << ',' << fmt(s.seVariance) << ',' << fmt(s.bias2)
            << ',' << fmt(s.seBias2) << ',' << fmt(s.mse) << ',' << fmt(s.seMse) << ','
            << (s.meanPluginVar ? fmt(*s.meanPluginVar) : std::string()) << ','
            << s.failures << ',' << s.repsUsed << '\n';
    }
    return out.str();
}

std::string sweep_csv(const SweepResult& sweep) {
    std::ostringstream out;
    out << "t,method,bias2,var,mse,se_mse\n";
    for (std::size_t gi = 0; gi < sweep.grid.size(); ++gi) {
        for (std::size_t mi = 0; mi < sweep.methods.size(); ++mi) {
            const auto& s = sweep.curves[mi][gi];
            out << fmt(sweep.grid[gi]) << ',' << sweep.methods[mi] << ',' << fmt(s.bias2)
                << ',' << fmt(s.variance) << ',' << fmt(s.mse) << ',' << fmt(s.seMse)
                << '\n';
        }
    }
    return out.str();
}

}  // namespace tailtilt
