#pragma once

#include <cstddef>
#include <variant>
#include <vector>

#include "tailtilt/sample.hpp"

namespace tailtilt {

/// Minimum number of tail observations for threshold/bandwidth selection
/// and tilt fitting.
inline constexpr std::size_t kMinTailCount = 20;

/// Tail-index and scale estimates together with what was used to get them.
struct EvtFit {
    double gammaHat = 0.0;
    double sigmaHat = 0.0;
    std::size_t kUsed = 0;
    double threshold = 0.0;
};

// --- Threshold selection policies -----------------------------------------

struct FixedThreshold {
    double t;
};

/// Empirical quantile of the background sample (type-7 interpolation).
struct BackgroundQuantile {
    double q;
};

/// Data-driven choice via the Guillou-Hall order-statistic diagnostic,
/// applied to the sample of interest.
struct GuillouHallThreshold {};

/// Placeholder for MSE-minimizing thresholds; only the simulation harness
/// can resolve it (it needs the replicate ensemble).
struct OracleThreshold {
    std::vector<double> grid;
};

using ThresholdRule =
    std::variant<FixedThreshold, BackgroundQuantile, GuillouHallThreshold, OracleThreshold>;

// --- Bandwidth (kappa) selection policies ----------------------------------

/// kappa = sigma0_hat / gamma_hat estimated from the background tail.
struct KappaSigmaOverGamma {};

/// kappa = t (asymptotically equivalent choice: sigma_t / (t gamma) -> 1).
struct KappaEqualsThreshold {};

struct KappaFixed {
    double value;
};

using KappaRule = std::variant<KappaSigmaOverGamma, KappaEqualsThreshold, KappaFixed>;

// --- Operations -------------------------------------------------------------

/// Hill estimator of the tail index from the k largest observations:
/// mean of log X_(n-i+1) - log X_(n-k) over i = 1..k.
double hill_estimate(const Sample& x, std::size_t k);

/// Maximum-likelihood GPD scale for excesses with the tail index held
/// fixed. Requires gamma > -1 so the score equation has an interior root.
double gpd_fit_sigma(const Sample& excesses, double gamma);

/// Joint (gamma, sigma) GPD maximum likelihood via profile likelihood
/// over gamma in [-0.5, 2] with an inner exact scale solve.
EvtFit gpd_fit_ml(const Sample& excesses);

struct GuillouHallResult {
    std::size_t k = 0;
    /// True when the exceedance criterion never triggered and k fell back
    /// to floor(n / 10).
    bool usedFallback = false;
};

/// Number of top order statistics selected by the Guillou-Hall bias
/// diagnostic: the smallest k whose windowed RMS score exceeds the
/// critical value for every larger k.
GuillouHallResult guillou_hall_k(const Sample& x, std::size_t kMin = kMinTailCount);

/// Hill tail index of the background, with k from the Guillou-Hall rule
/// (top 1% when the criterion never triggers).
double background_tail_index(const Sample& bg);

/// kappa = sigma0_hat / gammaHat with sigma0 fit to the background
/// excesses above t. Split out so callers can reuse a cached gammaHat.
double kappa_sigma_over_gamma(const Sample& bg, double t, double gammaHat);

double resolve_threshold(const ThresholdRule& rule, const Sample& x, const Sample& bg);
double resolve_kappa(const KappaRule& rule, const Sample& bg, double t);

}  // namespace tailtilt
