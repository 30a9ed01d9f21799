#include "tailtilt/tilt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "tailtilt/errors.hpp"
#include "tailtilt/evt.hpp"

namespace tailtilt {

namespace {

constexpr double kMomentTol = 1e-12;     // direct-fit stopping residual
constexpr double kEtaCap = 1e4;          // |eta| beyond this is a boundary case
constexpr int kMaxIterations = 300;

std::vector<double> t_values_of(const Sample& excesses, double kappa) {
    std::vector<double> t(excesses.size());
    for (std::size_t i = 0; i < excesses.size(); ++i) t[i] = suff_stat(excesses[i], kappa);
    return t;
}

/// Tilted mean and variance of T under weights proportional to exp(eta T).
struct TiltedMoments {
    double mean;
    double variance;
};

TiltedMoments tilted_moments(const std::vector<double>& t, double eta) {
    const double tMax = *std::max_element(t.begin(), t.end());
    const double tMin = *std::min_element(t.begin(), t.end());
    const double shift = eta >= 0.0 ? tMax : tMin;
    double sw = 0.0, swt = 0.0, swt2 = 0.0;
    for (double ti : t) {
        const double w = std::exp(eta * (ti - shift));
        sw += w;
        swt += w * ti;
        swt2 += w * ti * ti;
    }
    const double mean = swt / sw;
    const double variance = std::max(0.0, swt2 / sw - mean * mean);
    return {mean, variance};
}

}  // namespace

SufficientStatistic::SufficientStatistic(double kappa) : kappa_(kappa) {
    if (!(kappa > 0.0) || !std::isfinite(kappa)) {
        throw ArgumentError("sufficient-statistic bandwidth kappa must be positive");
    }
}

double SufficientStatistic::operator()(double excess) const {
    return suff_stat(excess, kappa_);
}

double suff_stat(double x, double kappa) {
    if (!(kappa > 0.0)) throw ArgumentError("kappa must be positive");
    if (x < 0.0) throw DomainError("sufficient statistic is defined for nonnegative excesses");
    return x / (kappa + x);
}

double log_partition(double eta, const Sample& excesses, double kappa) {
    if (excesses.empty()) throw ArgumentError("log partition needs a nonempty carrier");
    const auto t = t_values_of(excesses, kappa);
    const double shift = eta >= 0.0 ? *std::max_element(t.begin(), t.end())
                                    : *std::min_element(t.begin(), t.end());
    double sw = 0.0;
    for (double ti : t) sw += std::exp(eta * (ti - shift));
    return eta * shift + std::log(sw / static_cast<double>(t.size()));
}

TiltFit fit_tilt_direct(const Sample& xExcesses, const Sample& bgExcesses, double kappa) {
    if (xExcesses.empty() || bgExcesses.empty()) {
        throw ArgumentError("tilt fit needs nonempty excess samples");
    }
    const auto tCarrier = t_values_of(bgExcesses, kappa);
    const double tLo = *std::min_element(tCarrier.begin(), tCarrier.end());
    const double tMax = *std::max_element(tCarrier.begin(), tCarrier.end());
    if (tLo == tMax) {
        throw DegeneracyError("carrier T values are all equal; tilt is unidentified");
    }

    const auto tX = t_values_of(xExcesses, kappa);
    const double target =
        std::accumulate(tX.begin(), tX.end(), 0.0) / static_cast<double>(tX.size());
    if (target == tilted_moments(tCarrier, 0.0).mean) {
        return TiltFit{0.0, FitDiagnostics{0.0, 0, TiltMethod::Direct}};
    }
    if (!(target > tLo && target < tMax)) {
        std::ostringstream msg;
        msg << "moment-matching target " << target << " lies outside the open range ("
            << tLo << ", " << tMax << ") of carrier T values; no tilt exists";
        throw NonExistenceError(msg.str());
    }

    // Expand a bracket [etaLo, etaHi] with A(etaLo) < target < A(etaHi);
    // A(eta) is strictly increasing, so one always exists for interior targets.
    double etaLo = -1.0, etaHi = 1.0;
    while (tilted_moments(tCarrier, etaLo).mean >= target) {
        etaLo *= 2.0;
        if (etaLo < -kEtaCap) throw SolverError("tilt bracket expansion hit the lower eta cap");
    }
    while (tilted_moments(tCarrier, etaHi).mean <= target) {
        etaHi *= 2.0;
        if (etaHi > kEtaCap) throw SolverError("tilt bracket expansion hit the upper eta cap");
    }

    double eta = 0.5 * (etaLo + etaHi);
    for (int iter = 1; iter <= kMaxIterations; ++iter) {
        const auto m = tilted_moments(tCarrier, eta);
        const double residual = m.mean - target;
        if (std::fabs(residual) < kMomentTol) {
            return TiltFit{eta, FitDiagnostics{residual, iter, TiltMethod::Direct}};
        }
        if (residual < 0.0) etaLo = eta; else etaHi = eta;
        double next = m.variance > 0.0 ? eta - residual / m.variance
                                       : std::numeric_limits<double>::quiet_NaN();
        if (!(next > etaLo && next < etaHi)) next = 0.5 * (etaLo + etaHi);
        eta = next;
    }
    const double residual = tilted_moments(tCarrier, eta).mean - target;
    if (std::fabs(residual) < 1e-10) {
        return TiltFit{eta, FitDiagnostics{residual, kMaxIterations, TiltMethod::Direct}};
    }
    throw SolverError("tilt moment matching did not converge");
}

TiltFit fit_tilt_logistic(const Sample& xExcesses, const Sample& bgExcesses, double kappa) {
    if (xExcesses.empty() || bgExcesses.empty()) {
        throw ArgumentError("tilt fit needs nonempty excess samples");
    }
    const auto tX = t_values_of(xExcesses, kappa);
    const auto tBg = t_values_of(bgExcesses, kappa);

    const auto [xLoIt, xHiIt] = std::minmax_element(tX.begin(), tX.end());
    const auto [bLoIt, bHiIt] = std::minmax_element(tBg.begin(), tBg.end());
    if (*xLoIt == *xHiIt && *bLoIt == *bHiIt && *xLoIt == *bLoIt) {
        throw DegeneracyError("all T values identical; logistic tilt is unidentified");
    }
    if (*xLoIt > *bHiIt || *xHiIt < *bLoIt) {
        throw SeparationError(
            "T values of the two samples are perfectly separated; "
            "increase the threshold or use the direct fit");
    }

    const std::size_t nx = tX.size(), nb = tBg.size();
    const double total = static_cast<double>(nx + nb);
    double beta0 = std::log(static_cast<double>(nx) / static_cast<double>(nb));
    double beta1 = 0.0;

    const auto loglik = [&](double b0, double b1) {
        double ll = 0.0;
        for (double t : tX) ll += -std::log1p(std::exp(-(b0 + b1 * t)));
        for (double t : tBg) ll += -std::log1p(std::exp(b0 + b1 * t));
        return ll;
    };

    double prev = loglik(beta0, beta1);
    for (int iter = 1; iter <= kMaxIterations; ++iter) {
        double s0 = 0.0, s1 = 0.0, s2 = 0.0, g0 = 0.0, g1 = 0.0;
        const auto accumulate = [&](double t, double y) {
            const double p = 1.0 / (1.0 + std::exp(-(beta0 + beta1 * t)));
            const double w = p * (1.0 - p);
            s0 += w;
            s1 += w * t;
            s2 += w * t * t;
            g0 += y - p;
            g1 += (y - p) * t;
        };
        for (double t : tX) accumulate(t, 1.0);
        for (double t : tBg) accumulate(t, 0.0);

        const double det = s0 * s2 - s1 * s1;
        if (!(det > 1e-14 * total)) {
            throw DegeneracyError("logistic information matrix is singular over T");
        }
        double d0 = (s2 * g0 - s1 * g1) / det;
        double d1 = (s0 * g1 - s1 * g0) / det;

        // Step-halving keeps IRLS monotone on hard geometries.
        double step = 1.0;
        double cur = loglik(beta0 + d0, beta1 + d1);
        for (int h = 0; h < 30 && cur < prev; ++h) {
            step *= 0.5;
            cur = loglik(beta0 + step * d0, beta1 + step * d1);
        }
        beta0 += step * d0;
        beta1 += step * d1;
        if (std::fabs(beta1) > kEtaCap || !std::isfinite(beta1)) {
            throw SeparationError("logistic slope diverged; classes are quasi-separated in T");
        }
        if (std::fabs(cur - prev) < 1e-10) {
            const double grad = std::hypot(g0, g1) / total;
            return TiltFit{beta1, FitDiagnostics{grad, iter, TiltMethod::Logistic}};
        }
        prev = cur;
    }
    throw SolverError("logistic tilt fit did not converge");
}

TiltedTailModel::TiltedTailModel(double threshold, SufficientStatistic stat, double etaHat,
                                 Sample bgExcesses, std::size_t nTailX,
                                 std::size_t nTotalX, FitDiagnostics diagnostics)
    : threshold_(threshold),
      stat_(stat),
      etaHat_(etaHat),
      bgExcesses_(std::move(bgExcesses)),
      nTailX_(nTailX),
      nTotalX_(nTotalX),
      diagnostics_(diagnostics) {
    if (bgExcesses_.empty()) throw ArgumentError("tail model needs background excesses");
    if (nTotalX_ == 0) throw ArgumentError("tail model needs the size of the x sample");
    tValues_ = t_values_of(bgExcesses_, stat_.kappa());
    logPartition_ = tailtilt::log_partition(etaHat_, bgExcesses_, stat_.kappa());

    const double shift = etaHat_ >= 0.0
                             ? *std::max_element(tValues_.begin(), tValues_.end())
                             : *std::min_element(tValues_.begin(), tValues_.end());
    weights_.resize(tValues_.size());
    double sw = 0.0;
    for (std::size_t i = 0; i < tValues_.size(); ++i) {
        weights_[i] = std::exp(etaHat_ * (tValues_[i] - shift));
        sw += weights_[i];
    }
    cumulativeWeights_.resize(weights_.size());
    double acc = 0.0, tm = 0.0;
    for (std::size_t i = 0; i < weights_.size(); ++i) {
        weights_[i] /= sw;
        if (weights_[i] <= 0.0) {
            throw SolverError("tilt weight underflowed to zero; eta is too extreme");
        }
        acc += weights_[i];
        cumulativeWeights_[i] = acc;
        tm += weights_[i] * (threshold_ + bgExcesses_[i]);
    }
    tailMean_ = tm;
}

double TiltedTailModel::p2_hat() const noexcept {
    return static_cast<double>(nTailX_) / static_cast<double>(nTotalX_);
}

namespace {

void check_exceedances(const Sample& x, const Sample& bg, double t,
                       Sample& xExc, Sample& bgExc) {
    xExc = x.excesses_above(t);
    if (xExc.empty()) {
        throw EstimationError("threshold above sample maximum: no x exceedances");
    }
    bgExc = bg.excesses_above(t);
    if (bgExc.size() < kMinTailCount) {
        throw EstimationError("too few background exceedances above the threshold");
    }
}

}  // namespace

TiltedTailModel build_tail_model(const Sample& x, const Sample& bg, double t,
                                 double kappa, TiltMethod method) {
    Sample xExc, bgExc;
    check_exceedances(x, bg, t, xExc, bgExc);
    const TiltFit fit = method == TiltMethod::Direct
                            ? fit_tilt_direct(xExc, bgExc, kappa)
                            : fit_tilt_logistic(xExc, bgExc, kappa);
    return TiltedTailModel(t, SufficientStatistic(kappa), fit.etaHat, std::move(bgExc),
                           xExc.size(), x.size(), fit.diagnostics);
}

TiltedTailModel build_tail_model_fixed_eta(const Sample& x, const Sample& bg, double t,
                                           double kappa, double eta) {
    Sample xExc, bgExc;
    check_exceedances(x, bg, t, xExc, bgExc);
    return TiltedTailModel(t, SufficientStatistic(kappa), eta, std::move(bgExc),
                           xExc.size(), x.size(), FitDiagnostics{});
}

double tail_cdf(const TiltedTailModel& model, double x) {
    const auto& exc = model.bgExcesses_.values();
    const auto it = std::upper_bound(exc.begin(), exc.end(), x);
    if (it == exc.begin()) return 0.0;
    return model.cumulativeWeights_[static_cast<std::size_t>(it - exc.begin()) - 1];
}

}  // namespace tailtilt
