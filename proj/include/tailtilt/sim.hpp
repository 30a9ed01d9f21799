#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "tailtilt/distributions.hpp"
#include "tailtilt/estimators.hpp"
#include "tailtilt/evt.hpp"
#include "tailtilt/sample.hpp"

namespace tailtilt {

/// Finite population for resampling experiments (drawn with replacement).
struct Population {
    std::shared_ptr<const std::vector<double>> values;
    std::string label;

    double mean() const;
    std::size_t size() const { return values ? values->size() : 0; }
};

Population make_population(std::vector<double> values, std::string label = {});

/// Where a scenario's draws come from: a parametric family or a finite
/// population resampled with replacement.
using DataSource = std::variant<DistSpec, Population>;

std::string describe(const DataSource& source);

/// One estimator configuration evaluated by the harness.
struct MethodSpec {
    std::string label;
    MeanMethod estimator = MeanMethod::Semiparametric;
    ThresholdRule threshold = FixedThreshold{0.0};
    KappaRule kappa = KappaSigmaOverGamma{};
    std::size_t winsorK = 1;
    TiltMethod fitter = TiltMethod::Direct;

    std::string effective_label() const;
    bool uses_threshold() const;
};

struct ScenarioConfig {
    DataSource x{Population{}};
    DataSource bg{Population{}};
    std::size_t n = 0;
    std::size_t N = 0;
    std::size_t reps = 0;
    std::vector<MethodSpec> methods;
    std::uint64_t masterSeed = 1;
    /// Redraw the background every replication (default). When false the
    /// background is drawn once and shared, as when it models a fixed
    /// finite population.
    bool redrawBackground = true;
    std::optional<double> trueMean;

    /// trueMean if set, else the analytic or population mean of x.
    double resolve_true_mean() const;
    void validate() const;
};

/// Monte Carlo summary of one estimator at one threshold policy.
/// bias2 and mse carry jackknife standard errors; the variance carries a
/// moment-based one. Replications where the estimator threw are excluded
/// and counted in `failures`.
struct CellStats {
    double variance = 0.0;
    double bias2 = 0.0;
    double mse = 0.0;
    double seVariance = 0.0;
    double seBias2 = 0.0;
    double seMse = 0.0;
    double meanThreshold = 0.0;
    std::optional<double> meanPluginVar;  // mean of the attached varHat
    std::size_t failures = 0;
    std::size_t repsUsed = 0;
};

struct ScenarioRow {
    std::string method;
    std::string thresholdPolicy;
    CellStats stats;
};

struct ScenarioResult {
    std::vector<ScenarioRow> rows;
};

struct SweepResult {
    std::vector<double> grid;
    std::vector<std::string> methods;
    /// curves[methodIndex][gridIndex]
    std::vector<std::vector<CellStats>> curves;
};

/// Runs every configured method over `reps` replications. Oracle-threshold
/// methods are evaluated on the whole grid with shared draws and reported
/// at the grid point with the smallest measured MSE.
ScenarioResult run_scenario(const ScenarioConfig& cfg);

/// Evaluates every method at every grid threshold with common random
/// numbers across grid points, so the curves are directly comparable.
SweepResult threshold_sweep(const ScenarioConfig& cfg, const std::vector<double>& grid);

/// Grid point minimizing the measured MSE for the given method; ties go
/// to the smallest threshold.
double oracle_threshold(const SweepResult& sweep, const std::string& methodLabel);

/// Resampling protocol: per replication draw n values from xPop and N
/// from bgPop with replacement; the target is the xPop mean.
ScenarioResult resample_experiment(const Population& xPop, const Population& bgPop,
                                   std::size_t n, std::size_t N, std::size_t reps,
                                   std::vector<MethodSpec> methods,
                                   std::uint64_t masterSeed = 1);

/// Worker count: hardware concurrency capped by TAILTILT_THREADS. Affects
/// speed only; results are bitwise identical for any worker count.
std::size_t effective_worker_count();

/// CSV renderings of results (stable column sets, documented in the README).
std::string scenario_result_csv(const ScenarioResult& result);
/// Header is exactly "t,method,bias2,var,mse,se_mse".
std::string sweep_csv(const SweepResult& sweep);

}  // namespace tailtilt
