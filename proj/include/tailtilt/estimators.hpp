#pragma once

#include <optional>
#include <string>

#include "tailtilt/sample.hpp"
#include "tailtilt/tilt.hpp"

namespace tailtilt {

enum class MeanMethod {
    Semiparametric,
    WinsorizedThreshold,
    WinsorizedK,
    ParetoTail,
    SampleMean,
};

std::string to_string(MeanMethod method);

struct MeanEstimate {
    double muHat = 0.0;
    /// Asymptotic variance of muHat (plug-in, already divided by n).
    /// Present only for the semiparametric estimator.
    std::optional<double> varHat;
    MeanMethod method = MeanMethod::SampleMean;
    std::optional<double> threshold;
    std::optional<double> kappa;
    std::optional<FitDiagnostics> diagnostics;
};

/// Conditional plug-in moments of the fitted law: empirical below the
/// threshold, tilt-weighted background above it. Exposed so the variance
/// identities can be checked term by term.
struct PluginMoments {
    double p2 = 0.0;       // fitted exceedance probability
    double bodyMean = 0.0;
    double bodyVar = 0.0;  // population-style (divide by count)
    double tailMean = 0.0;
    double tailVar = 0.0;
    double covTX = 0.0;    // Cov(T, X | X > t) under the tilted weights
    double varT = 0.0;
};

PluginMoments plugin_moments(const Sample& x, const TiltedTailModel& model);

/// Eq-for-the-estimator variance from plug-in moments, divided by n.
/// Set requireTail = false to skip the tail terms when p2 == 0.
double plugin_variance(const PluginMoments& m, std::size_t n);

/// Semiparametric mean: empirical body mean plus the exceedance fraction
/// times the tilt-weighted background tail mean. Attaches the plug-in
/// asymptotic variance.
MeanEstimate semiparametric_mean(const Sample& x, const Sample& bg, double t,
                                 double kappa, TiltMethod method = TiltMethod::Direct);

/// Same estimator evaluated on a prebuilt tail model.
MeanEstimate semiparametric_mean_from_model(const Sample& x, const TiltedTailModel& model);

/// Plug-in asymptotic variance of the semiparametric mean (divided by n).
double semiparametric_variance(const Sample& x, const TiltedTailModel& model);

/// mu_W = mean of min(t, x_i).
MeanEstimate winsorized_mean_threshold(const Sample& x, double t);

/// Caps the top k observations at the (k+1)-th largest value (k = 1 caps
/// the maximum at the second largest).
MeanEstimate winsorized_mean_k(const Sample& x, std::size_t k);

/// The winsorized-by-k transform itself, for callers that need the
/// capped values rather than their mean.
std::vector<double> winsorize_k(const Sample& x, std::size_t k);

/// Parametric baseline: joint GPD fit to the x excesses above t and the
/// implied tail conditional mean t + sigma / (1 - gamma).
MeanEstimate pareto_tail_mean(const Sample& x, double t);

MeanEstimate sample_mean(const Sample& x);

}  // namespace tailtilt
