// Acceptance suite: one numbered check per release criterion, each printing
// a PASS/FAIL line with the measured quantities. Run with no arguments for
// the full battery or with --criterion <1..10> for a single check.

#include <chrono>
#include <cmath>
#include <cstring>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "support/oracles.hpp"
#include "tailtilt/distributions.hpp"
#include "tailtilt/errors.hpp"
#include "tailtilt/estimators.hpp"
#include "tailtilt/evt.hpp"
#include "tailtilt/sim.hpp"
#include "tailtilt/tilt.hpp"

using namespace tailtilt;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

constexpr std::uint64_t kMasterSeed = 20250810;

// 12-point threshold grid bracketing both oracle regions of the log-gamma
// scenario (the semiparametric minimum sits near t = 20, the winsorized
// one near t = 400).
std::vector<double> table1_grid() {
    return {8, 11, 14, 18, 23, 30, 45, 70, 120, 220, 360, 480};
}

MethodSpec semi_method() {
    MethodSpec m;
    m.label = "semiparametric";
    m.estimator = MeanMethod::Semiparametric;
    m.threshold = FixedThreshold{0.0};
    m.kappa = KappaSigmaOverGamma{};
    return m;
}

MethodSpec wins_method() {
    MethodSpec m;
    m.label = "winsorized";
    m.estimator = MeanMethod::WinsorizedThreshold;
    m.threshold = FixedThreshold{0.0};
    return m;
}

ScenarioConfig table1_config(double bgTailIndex = 0.45, std::size_t reps = 500) {
    ScenarioConfig cfg;
    cfg.x = DistSpec::log_gamma(4, 0.45);
    cfg.bg = DistSpec::log_gamma(3, bgTailIndex);
    cfg.n = 1000;
    cfg.N = 100000;
    cfg.reps = reps;
    cfg.masterSeed = kMasterSeed;
    // One shared background per scenario: the paper's analysis is in the
    // large-N regime where background error is negligible, so it must not
    // be re-randomized into the per-replication variance.
    cfg.redrawBackground = false;
    cfg.methods = {semi_method(), wins_method()};
    return cfg;
}

struct OraclePick {
    double t = 0.0;
    CellStats stats;
};

OraclePick oracle_row(const SweepResult& sweep, const std::string& label) {
    const double t = oracle_threshold(sweep, label);
    for (std::size_t mi = 0; mi < sweep.methods.size(); ++mi) {
        if (sweep.methods[mi] != label) continue;
        for (std::size_t gi = 0; gi < sweep.grid.size(); ++gi) {
            if (sweep.grid[gi] == t) return {t, sweep.curves[mi][gi]};
        }
    }
    throw ArgumentError("oracle row lookup failed for " + label);
}

SweepResult table1_sweep(double bgTailIndex = 0.45, std::size_t reps = 500) {
    return threshold_sweep(table1_config(bgTailIndex, reps), table1_grid());
}

// ---------------------------------------------------------------------------

Outcome criterion1() {
    const auto start = std::chrono::steady_clock::now();
    const SweepResult sweep = table1_sweep();
    const OraclePick semi = oracle_row(sweep, "semiparametric");
    const OraclePick wins = oracle_row(sweep, "winsorized");

    ScenarioConfig cfg = table1_config();
    MethodSpec winsK1;
    winsK1.label = "winsorized-k1";
    winsK1.estimator = MeanMethod::WinsorizedK;
    winsK1.winsorK = 1;
    cfg.methods = {winsK1};
    const CellStats k1 = run_scenario(cfg).rows[0].stats;

    const double ratio = semi.stats.mse / wins.stats.mse;
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    Outcome o;
    o.pass = ratio >= 0.55 && ratio <= 0.90 && k1.mse > wins.stats.mse;
    std::ostringstream d;
    d << "mse semi-oracle/wins-oracle = " << semi.stats.mse << "/" << wins.stats.mse
      << " = " << ratio << " (need [0.55, 0.90]); wins-k1 mse " << k1.mse
      << (k1.mse > wins.stats.mse ? " > " : " <= ") << wins.stats.mse
      << " wins-oracle; semi oracle t=" << semi.t << ", wins oracle t=" << wins.t
      << "; " << seconds << " s";
    o.detail = d.str();
    return o;
}

Outcome criterion2() {
    const SweepResult sweep = table1_sweep();
    const OraclePick semi = oracle_row(sweep, "semiparametric");
    const OraclePick wins = oracle_row(sweep, "winsorized");
    const double ratio = semi.stats.variance / wins.stats.variance;
    Outcome o;
    o.pass = ratio >= 0.45 && ratio <= 0.80;
    std::ostringstream d;
    d << "variance ratio semi(t=" << semi.t << ") / winsorized(t=" << wins.t
      << ") = " << semi.stats.variance << "/" << wins.stats.variance << " = " << ratio
      << " (need [0.45, 0.80]) over " << semi.stats.repsUsed << " reps";
    o.detail = d.str();
    return o;
}

Outcome criterion3() {
    const SweepResult sweep = table1_sweep();
    const OraclePick semi = oracle_row(sweep, "semiparametric");

    ScenarioConfig cfg = table1_config();
    cfg.reps = 2000;
    MethodSpec m = semi_method();
    m.threshold = FixedThreshold{semi.t};
    cfg.methods = {m};
    const CellStats stats = run_scenario(cfg).rows[0].stats;

    const double ratio = *stats.meanPluginVar / stats.variance;
    Outcome o;
    o.pass = ratio >= 0.8 && ratio <= 1.25 && stats.repsUsed >= 1900;
    std::ostringstream d;
    d << "mean plug-in variance " << *stats.meanPluginVar << " vs monte carlo variance "
      << stats.variance << " at t=" << semi.t << ": ratio " << ratio
      << " (need [0.8, 1.25]) over " << stats.repsUsed << " reps";
    o.detail = d.str();
    return o;
}

Outcome criterion4() {
    const double mean4 = analytic_mean(DistSpec::log_gamma(4, 0.45));
    const double mean3 = analytic_mean(DistSpec::log_gamma(3, 0.45));
    const bool anchors = std::fabs(mean4 - 10.928) < 1e-3 && std::fabs(mean3 - 6.010) < 1e-3;

    // Variance of the n=1000 sample mean across replications.
    ScenarioConfig cfg;
    cfg.x = DistSpec::log_gamma(4, 0.45);
    cfg.bg = DistSpec::log_gamma(3, 0.45);
    cfg.n = 1000;
    cfg.N = 2;  // the sample mean never touches the background
    cfg.reps = 4000;
    cfg.masterSeed = kMasterSeed + 4;
    MethodSpec m;
    m.label = "sample-mean";
    m.estimator = MeanMethod::SampleMean;
    cfg.methods = {m};
    const CellStats stats = run_scenario(cfg).rows[0].stats;
    const double target = analytic_variance(DistSpec::log_gamma(4, 0.45)) / 1000.0;
    const double rel = std::fabs(stats.variance - target) / target;

    Outcome o;
    o.pass = anchors && rel < 0.20;
    std::ostringstream d;
    d << "analytic means " << mean4 << ", " << mean3
      << " (need 10.928, 6.010 within 1e-3); sample-mean variance " << stats.variance
      << " vs analytic " << target << " (rel err " << rel << ", need < 0.20, "
      << stats.repsUsed
      << " reps). Note: X has an infinite fourth moment and its variance "
         "functional converges only logarithmically in the number of draws "
         "(2e8 draws recover ~60% of the analytic value), so no feasible "
         "replication count can meet the 20% band";
    o.detail = d.str();
    return o;
}

Outcome criterion5() {
    const DistSpec spec = DistSpec::log_gamma(3, 0.45);
    const double mu = analytic_mean(spec);
    std::vector<double> errors, etas;
    const int reps = 300;
    for (int r = 0; r < reps; ++r) {
        const Sample x = sample(spec, 1000, SeedSpec{kMasterSeed + 5, std::uint64_t(2 * r)});
        const Sample bg =
            sample(spec, 30000, SeedSpec{kMasterSeed + 5, std::uint64_t(2 * r + 1)});
        const double t = bg.quantile(0.9);
        const auto model = build_tail_model(x, bg, t, t, TiltMethod::Direct);
        etas.push_back(model.eta_hat());
        errors.push_back(semiparametric_mean_from_model(x, model).muHat - mu);
    }
    const auto eta = oracles::mean_and_se(etas);
    const auto err = oracles::mean_and_se(errors);
    Outcome o;
    o.pass = std::fabs(eta.mean) < 3.0 * eta.se && std::fabs(err.mean) < 3.0 * err.se;
    std::ostringstream d;
    d << "null tilt over " << reps << " reps: mean eta " << eta.mean << " (3 s.e. "
      << 3.0 * eta.se << "), mean bias " << err.mean << " (3 s.e. " << 3.0 * err.se << ")";
    o.detail = d.str();
    return o;
}

Outcome criterion6() {
    Outcome o;
    o.pass = true;
    std::ostringstream d;
    for (double gamma : {0.45, 0.8}) {
        const double e1 = oracles::tilt_linearization_gap(gamma, 1.0, 1.2);
        const double e2 = oracles::tilt_linearization_gap(gamma, 1.0, 1.1);
        const double ratio = e1 / e2;
        o.pass = o.pass && ratio >= 3.0 && ratio <= 5.0;
        d << "gamma=" << gamma << ": sup-error " << e1 << " -> " << e2 << ", ratio "
          << ratio << " (need [3, 5]); ";
    }
    o.detail = d.str();
    return o;
}

Outcome criterion7() {
    const DistSpec xSpec = DistSpec::log_gamma(4, 0.45);
    const DistSpec bgSpec = DistSpec::log_gamma(3, 0.45);
    const std::vector<std::size_t> sizes{1000, 10000, 100000};
    std::vector<double> meanGap;
    double fixedSeedGap = -1.0;
    for (std::size_t si = 0; si < sizes.size(); ++si) {
        double acc = 0.0;
        const int reps = 50;
        for (int r = 0; r < reps; ++r) {
            const Sample x =
                sample(xSpec, 1000, SeedSpec{kMasterSeed + 7, std::uint64_t(2 * r)});
            const Sample bg = sample(bgSpec, sizes[si],
                                     SeedSpec{kMasterSeed + 70 + si, std::uint64_t(r)});
            const double t = bg.quantile(0.9);
            const double kappa = resolve_kappa(KappaSigmaOverGamma{}, bg, t);
            const Sample xExc = x.excesses_above(t);
            const Sample bgExc = bg.excesses_above(t);
            const double gap = std::fabs(fit_tilt_direct(xExc, bgExc, kappa).etaHat -
                                         fit_tilt_logistic(xExc, bgExc, kappa).etaHat);
            acc += gap;
            if (r == 0 && sizes[si] == 100000) fixedSeedGap = gap;
        }
        meanGap.push_back(acc / 50.0);
    }
    Outcome o;
    o.pass = fixedSeedGap < 0.05 && meanGap[1] < meanGap[0] && meanGap[2] < meanGap[1];
    std::ostringstream d;
    d << "fixed-seed gap at N=1e5: " << fixedSeedGap << " (need < 0.05); mean gaps "
      << meanGap[0] << " (1e3) > " << meanGap[1] << " (1e4) > " << meanGap[2] << " (1e5)";
    o.detail = d.str();
    return o;
}

Outcome criterion8() {
    Outcome o;
    o.pass = true;
    std::ostringstream d;
    for (double bgGamma : {0.4, 0.5}) {
        const SweepResult sweep = table1_sweep(bgGamma);
        const OraclePick semi = oracle_row(sweep, "semiparametric");
        const OraclePick wins = oracle_row(sweep, "winsorized");
        o.pass = o.pass && semi.stats.mse < wins.stats.mse;
        d << "gamma0=" << bgGamma << ": semi-oracle mse " << semi.stats.mse
          << (semi.stats.mse < wins.stats.mse ? " < " : " >= ") << wins.stats.mse
          << " wins-oracle; ";
    }
    o.detail = d.str();
    return o;
}

Outcome criterion9() {
    std::ostringstream d;
    bool pass = true;

    // Moment-match residual.
    const Sample x = sample(DistSpec::log_gamma(4, 0.45), 1000, SeedSpec{kMasterSeed + 9, 0});
    const Sample bg =
        sample(DistSpec::log_gamma(3, 0.45), 50000, SeedSpec{kMasterSeed + 9, 1});
    double worstResidual = 0.0;
    for (double q : {0.8, 0.9, 0.97}) {
        const double t = bg.quantile(q);
        const auto model = build_tail_model(x, bg, t, t, TiltMethod::Direct);
        worstResidual =
            std::max(worstResidual, std::fabs(model.diagnostics().momentResidual));
    }
    pass = pass && worstResidual < 1e-10;
    d << "moment residual " << worstResidual << " (< 1e-10); ";

    // psi-prime finite differences and convexity.
    const Sample exc = bg.excesses_above(bg.quantile(0.9));
    const double kappa = bg.quantile(0.9);
    double worstFd = 0.0, worstSecond = 0.0;
    const double h = 1e-4;
    for (double eta : {-2.0, -1.0, 0.0, 1.0, 2.0}) {
        const double fd =
            (log_partition(eta + h, exc, kappa) - log_partition(eta - h, exc, kappa)) /
            (2.0 * h);
        double sw = 0.0, swt = 0.0;
        for (double e : exc.values()) {
            const double tv = suff_stat(e, kappa);
            const double w = std::exp(eta * tv);
            sw += w;
            swt += w * tv;
        }
        worstFd = std::max(worstFd, std::fabs(fd - swt / sw) / std::fabs(swt / sw));
        const double second = log_partition(eta + h, exc, kappa) -
                              2.0 * log_partition(eta, exc, kappa) +
                              log_partition(eta - h, exc, kappa);
        worstSecond = std::min(worstSecond, second);
    }
    pass = pass && worstFd < 1e-6 && worstSecond >= -1e-9;
    d << "psi' fd rel err " << worstFd << " (< 1e-6), min second diff " << worstSecond
      << " (>= -1e-9); ";

    // G-hat is a valid CDF.
    const auto model = build_tail_model(x, bg, bg.quantile(0.9), kappa, TiltMethod::Direct);
    bool cdfOk = tail_cdf(model, -1.0) == 0.0 &&
                 std::fabs(tail_cdf(model, model.bg_excesses().max()) - 1.0) < 1e-12;
    double prev = 0.0;
    for (double q = 0.0; q <= 1.0; q += 0.01) {
        const double cur = tail_cdf(model, q * model.bg_excesses().max());
        cdfOk = cdfOk && cur >= prev;
        prev = cur;
    }
    pass = pass && cdfOk;
    d << "cdf valid " << (cdfOk ? "yes" : "no") << "; ";

    // Scale equivariance of the fit.
    {
        const double c = 19.5, t = bg.quantile(0.9);
        std::vector<double> xs(x.values().begin(), x.values().end());
        std::vector<double> bgs(bg.values().begin(), bg.values().end());
        for (double& v : xs) v *= c;
        for (double& v : bgs) v *= c;
        const auto scaled = build_tail_model(Sample(std::move(xs)), Sample(std::move(bgs)),
                                             c * t, c * kappa, TiltMethod::Direct);
        const auto base = build_tail_model(x, bg, t, kappa, TiltMethod::Direct);
        double worst = std::fabs(scaled.eta_hat() - base.eta_hat());
        worst = std::max(worst, std::fabs(scaled.log_partition() - base.log_partition()));
        for (std::size_t i = 0; i < base.weights().size(); ++i) {
            worst = std::max(worst, std::fabs(scaled.weights()[i] - base.weights()[i]));
        }
        pass = pass && worst < 1e-10;
        d << "scale equivariance dev " << worst << " (< 1e-10); ";
    }

    // Guillou-Hall equals the brute-force scan.
    bool ghOk = true;
    for (std::uint64_t stream = 0; stream < 4; ++stream) {
        const Sample s =
            sample(DistSpec::gpd(0.5, 1.0, 0.0), 1500, SeedSpec{kMasterSeed + 90, stream});
        const auto gh = guillou_hall_k(s);
        const std::size_t direct = oracles::gh_direct_scan(s);
        ghOk = ghOk && ((direct == 0 && gh.usedFallback && gh.k == 150) ||
                        (direct != 0 && !gh.usedFallback && gh.k == direct));
    }
    pass = pass && ghOk;
    d << "gh scan match " << (ghOk ? "yes" : "no") << "; ";

    // mse = variance + bias^2 decomposition.
    ScenarioConfig cfg = table1_config(0.45, 40);
    cfg.n = 300;
    cfg.N = 6000;
    MethodSpec m = semi_method();
    m.threshold = BackgroundQuantile{0.9};
    m.kappa = KappaEqualsThreshold{};
    cfg.methods = {m, wins_method()};
    cfg.methods[1].threshold = FixedThreshold{30.0};
    double worstDecomp = 0.0;
    for (const auto& row : run_scenario(cfg).rows) {
        const auto& s = row.stats;
        worstDecomp = std::max(
            worstDecomp, std::fabs(s.mse - (s.variance + s.bias2)) / std::max(s.mse, 1e-300));
    }
    pass = pass && worstDecomp < 1e-9;
    d << "mse decomposition rel dev " << worstDecomp << " (< 1e-9)";

    Outcome o;
    o.pass = pass;
    o.detail = d.str();
    return o;
}

Outcome criterion10() {
    // Rate ordering on exact Pareto tails (the semiparametric tilt is
    // correctly specified there, Winsorization pays the capping bias).
    const std::vector<std::size_t> sizes{1000, 4000, 16000};
    // The background must outgrow n (the background tail has infinite
    // variance at this tail index, so its mean-estimate error decays only
    // like N^{-0.6} and would otherwise floor the rate); grow it ~n^{5/3}.
    const std::vector<std::size_t> bgSizes{30000, 300000, 3000000};
    // One grid shared by all sample sizes. The exact-Pareto tilt is
    // unbiased at every threshold, so its oracle stays at small fixed t
    // and gains the full 1/n; the winsorized oracle walks up the grid.
    std::vector<double> grid;
    for (double t = 2.0; t <= 4400.0; t *= 3.0) grid.push_back(t);
    std::vector<double> logN, logSemi, logWins;
    for (std::size_t si = 0; si < sizes.size(); ++si) {
        const std::size_t n = sizes[si];
        ScenarioConfig cfg;
        cfg.x = DistSpec::pareto(0.7, 1.5);
        cfg.bg = DistSpec::pareto(0.7, 1.0);
        cfg.n = n;
        cfg.N = bgSizes[si];
        cfg.reps = 300;
        cfg.masterSeed = kMasterSeed + 10 + si;
        MethodSpec semi = semi_method();
        semi.kappa = KappaEqualsThreshold{};
        cfg.methods = {semi, wins_method()};
        const SweepResult sweep = threshold_sweep(cfg, grid);
        logN.push_back(std::log(double(n)));
        logSemi.push_back(std::log(oracle_row(sweep, "semiparametric").stats.mse));
        logWins.push_back(std::log(oracle_row(sweep, "winsorized").stats.mse));
    }
    const double slopeSemi = oracles::ols_slope(logN, logSemi);
    const double slopeWins = oracles::ols_slope(logN, logWins);

    // Guillou-Hall k grows with n on data with a genuine second-order term.
    std::vector<double> meanK;
    for (std::size_t si = 0; si < sizes.size(); ++si) {
        double acc = 0.0;
        const int reps = 300;
        for (int r = 0; r < reps; ++r) {
            const Sample s = sample(DistSpec::gpd(0.5, 1.0, 0.0), sizes[si],
                                    SeedSpec{kMasterSeed + 20 + si, std::uint64_t(r)});
            acc += double(guillou_hall_k(s).k);
        }
        meanK.push_back(acc / double(reps));
    }

    Outcome o;
    o.pass = slopeSemi < slopeWins && meanK[0] < meanK[1] && meanK[1] < meanK[2];
    std::ostringstream d;
    d << "log-log mse slopes: semi " << slopeSemi << " vs wins " << slopeWins
      << " (need semi steeper); mean gh k: " << meanK[0] << " -> " << meanK[1] << " -> "
      << meanK[2] << " (need increasing)";
    o.detail = d.str();
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
            only = std::atoi(argv[i + 1]);
        }
    }

    using CriterionFn = Outcome (*)();
    const std::pair<const char*, CriterionFn> criteria[] = {
        {"table-1 desk-scale reproduction", &criterion1},
        {"variance ratio at the oracle thresholds", &criterion2},
        {"plug-in variance validates against monte carlo", &criterion3},
        {"analytic anchors", &criterion4},
        {"null-tilt sanity", &criterion5},
        {"quadratic remainder of the linear tilt approximation", &criterion6},
        {"direct and logistic fitters agree as N grows", &criterion7},
        {"misspecified background still beats winsorization", &criterion8},
        {"always-on property suites", &criterion9},
        {"rate ordering and guillou-hall growth", &criterion10},
    };

    bool allPass = true;
    for (int i =  1; i <= 10; ++i) {
        if (only != 0 && only != i) continue;
        Outcome o;
        try {
            o = criteria[i - 1].second();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        allPass = allPass && o.pass;
        std::cout << "[" << i << "/10] " << (o.pass ? "PASS" : "FAIL") << " "
                  << criteria[i - 1].first << ": " << o.detail << std::endl;
    }
    return allPass ? 0 : 1;
}
