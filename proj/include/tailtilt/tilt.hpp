#pragma once

#include <cstddef>
#include <vector>

#include "tailtilt/sample.hpp"

namespace tailtilt {

/// Bounded sufficient statistic T(x) = x / (kappa + x) for excesses
/// x >= 0. Monotone into [0, 1), so a single huge observation cannot
/// dominate the tilt fit.
struct SufficientStatistic {
    explicit SufficientStatistic(double kappa);
    double operator()(double excess) const;
    double kappa() const noexcept { return kappa_; }

private:
    double kappa_;
};

enum class TiltMethod { Direct, Logistic };

struct FitDiagnostics {
    double momentResidual = 0.0;
    int iterations = 0;
    TiltMethod method = TiltMethod::Direct;
};

struct TiltFit {
    double etaHat = 0.0;
    FitDiagnostics diagnostics;
};

/// Fitted exponential tilt of the background tail above t. Holds the
/// background excesses with their normalized tilt weights, plus the
/// exceedance fraction of the sample of interest.
class TiltedTailModel {
public:
    TiltedTailModel(double threshold, SufficientStatistic stat, double etaHat,
                    Sample bgExcesses, std::size_t nTailX, std::size_t nTotalX,
                    FitDiagnostics diagnostics = {});

    double threshold() const noexcept { return threshold_; }
    double kappa() const noexcept { return stat_.kappa(); }
    const SufficientStatistic& stat() const noexcept { return stat_; }
    double eta_hat() const noexcept { return etaHat_; }
    double log_partition() const noexcept { return logPartition_; }
    const Sample& bg_excesses() const noexcept { return bgExcesses_; }
    const std::vector<double>& weights() const noexcept { return weights_; }
    const std::vector<double>& t_values() const noexcept { return tValues_; }
    std::size_t n_tail_x() const noexcept { return nTailX_; }
    std::size_t n_total_x() const noexcept { return nTotalX_; }
    double p2_hat() const noexcept;
    const FitDiagnostics& diagnostics() const noexcept { return diagnostics_; }

    /// Weighted mean of t + excess under the tilted tail law.
    double tail_mean() const noexcept { return tailMean_; }

private:
    double threshold_;
    SufficientStatistic stat_;
    double etaHat_;
    double logPartition_;
    Sample bgExcesses_;
    std::vector<double> tValues_;
    std::vector<double> weights_;
    std::vector<double> cumulativeWeights_;
    std::size_t nTailX_;
    std::size_t nTotalX_;
    double tailMean_;
    FitDiagnostics diagnostics_;

    friend double tail_cdf(const TiltedTailModel& model, double x);
};

/// T(x) = x / (kappa + x); throws on negative x.
double suff_stat(double x, double kappa);

/// Log normalizing constant psi(eta) = log mean exp{eta T(e_i)} over the
/// carrier excesses, evaluated with max-subtraction so it stays finite
/// for any real eta.
double log_partition(double eta, const Sample& excesses, double kappa);

/// Tilt parameter by direct moment matching: the tilted carrier mean of T
/// equals the sample-of-interest mean of T. Newton with the analytic
/// derivative Var_eta(T), safeguarded by a maintained bisection bracket.
TiltFit fit_tilt_direct(const Sample& xExcesses, const Sample& bgExcesses, double kappa);

/// Tilt parameter as the slope of an intercept+slope logistic regression
/// of the pooled excesses (label 1 for the sample of interest) on T,
/// fitted by iteratively reweighted least squares.
TiltFit fit_tilt_logistic(const Sample& xExcesses, const Sample& bgExcesses, double kappa);

/// Extracts excesses above t from both samples, fits the tilt with the
/// requested method, and assembles the weighted tail law.
TiltedTailModel build_tail_model(const Sample& x, const Sample& bg, double t,
                                 double kappa, TiltMethod method);

/// Assembles a model at a caller-chosen eta (no fitting). Used for the
/// null tilt (eta = 0, uniform weights) and by diagnostics.
TiltedTailModel build_tail_model_fixed_eta(const Sample& x, const Sample& bg, double t,
                                           double kappa, double eta);

/// Estimated tail law G_hat(x) = sum of weights of excesses <= x; a
/// right-continuous step CDF supported on the background excesses.
double tail_cdf(const TiltedTailModel& model, double x);

}  // namespace tailtilt
