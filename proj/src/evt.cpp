#include "tailtilt/evt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "tailtilt/errors.hpp"

namespace tailtilt {

namespace {

constexpr double kGhCritical = 1.25;       // Guillou-Hall critical value
constexpr double kGammaNearZero = 1e-8;
constexpr double kGammaBracketLo = -0.5;   // profile-likelihood search range
constexpr double kGammaBracketHi = 2.0;

double gpd_loglik(std::span<const double> excesses, double gamma, double sigma) {
    double ll = 0.0;
    if (std::fabs(gamma) < kGammaNearZero) {
        for (double e : excesses) ll += -std::log(sigma) - e / sigma;
        return ll;
    }
    const double a = 1.0 + 1.0 / gamma;
    for (double e : excesses) {
        const double z = 1.0 + gamma * e / sigma;
        if (z <= 0.0) return -std::numeric_limits<double>::infinity();
        ll += -std::log(sigma) - a * std::log(z);
    }
    return ll;
}

// Scaled score in log sigma: (1/m) dL/dlog(sigma) = (1+g)/m sum e/(sigma+g e) - 1.
double sigma_score(std::span<const double> excesses, double gamma, double sigma) {
    double s = 0.0;
    for (double e : excesses) s += e / (sigma + gamma * e);
    return (1.0 + gamma) * s / static_cast<double>(excesses.size()) - 1.0;
}

}  // namespace

double hill_estimate(const Sample& x, std::size_t k) {
    const std::size_t n = x.size();
    if (n < 2 || k < 1 || k > n - 1) {
        throw ArgumentError("hill estimator requires 1 <= k <= n - 1");
    }
    const double base = x[n - k - 1];
    if (base <= 0.0) {
        throw DomainError("hill estimator requires the k+1 largest observations positive");
    }
    const double logBase = std::log(base);
    double acc = 0.0;
    for (std::size_t i = 1; i <= k; ++i) acc += std::log(x[n - i]) - logBase;
    return acc / static_cast<double>(k);
}

double gpd_fit_sigma(const Sample& excesses, double gamma) {
    const std::size_t m = excesses.size();
    if (m == 0) throw ArgumentError("gpd scale fit needs at least one excess");
    if (excesses.min() < 0.0) throw DomainError("excesses must be nonnegative");
    if (gamma <= -1.0) throw ArgumentError("gpd scale MLE requires tail index > -1");
    const auto vals = excesses.values();
    const double maxExc = excesses.max();
    if (maxExc <= 0.0) throw DegeneracyError("all excesses are zero; scale is degenerate");

    if (std::fabs(gamma) < kGammaNearZero) return excesses.mean();

    // The score is strictly decreasing in sigma, so bracket and refine.
    double lo = gamma < 0.0 ? -gamma * maxExc * (1.0 + 1e-12) : excesses.mean() * 1e-8;
    double hi = std::max(excesses.mean() * (1.0 + std::fabs(gamma)), lo * 2.0);
    for (int i = 0; i < 200 && sigma_score(vals, gamma, hi) > 0.0; ++i) hi *= 2.0;
    for (int i = 0; i < 200 && sigma_score(vals, gamma, lo) < 0.0; ++i) {
        hi = lo;
        lo *= 0.5;
    }
    if (sigma_score(vals, gamma, lo) < 0.0 || sigma_score(vals, gamma, hi) > 0.0) {
        std::ostringstream msg;
        msg << "gpd scale solver failed to bracket the score root (gamma=" << gamma
            << ", bracket=[" << lo << ", " << hi << "])";
        throw SolverError(msg.str());
    }

    // Newton in log sigma, bisection when a step leaves the bracket.
    double logLo = std::log(lo), logHi = std::log(hi);
    double logSigma = 0.5 * (logLo + logHi);
    for (int iter = 0; iter < 200; ++iter) {
        const double sigma = std::exp(logSigma);
        double s1 = 0.0, s2 = 0.0;
        for (double e : vals) {
            const double d = sigma + gamma * e;
            s1 += e / d;
            s2 += e / (d * d);
        }
        const double md = static_cast<double>(m);
        const double f = (1.0 + gamma) * s1 / md - 1.0;
        if (std::fabs(f) < 1e-12) return sigma;
        if (f > 0.0) logLo = logSigma; else logHi = logSigma;
        const double fprime = -(1.0 + gamma) * sigma * s2 / md;
        double next = logSigma - f / fprime;
        if (!(next > logLo && next < logHi)) next = 0.5 * (logLo + logHi);
        logSigma = next;
    }
    const double sigma = std::exp(logSigma);
    if (std::fabs(sigma_score(vals, gamma, sigma)) < 1e-8) return sigma;
    std::ostringstream msg;
    msg << "gpd scale solver did not converge (gamma=" << gamma << ", bracket=["
        << std::exp(logLo) << ", " << std::exp(logHi) << "])";
    throw SolverError(msg.str());
}

EvtFit gpd_fit_ml(const Sample& excesses) {
    const std::size_t m = excesses.size();
    if (m < 5) throw ArgumentError("joint gpd fit needs at least 5 excesses");
    if (excesses.min() == excesses.max()) {
        throw FitError("joint gpd fit is degenerate: all excesses equal");
    }

    const auto profile = [&](double gamma) {
        const double sigma = gpd_fit_sigma(excesses, gamma);
        return std::pair{gpd_loglik(excesses.values(), gamma, sigma), sigma};
    };

    // Coarse scan, then golden-section refinement in the best bracket.
    constexpr int kScan = 61;
    double bestGamma = kGammaBracketLo, bestLl = -std::numeric_limits<double>::infinity();
    int bestIdx = 0;
    for (int i = 0; i < kScan; ++i) {
        const double g = kGammaBracketLo +
                         (kGammaBracketHi - kGammaBracketLo) * i / double(kScan - 1);
        const double ll = profile(g).first;
        if (ll > bestLl) {
            bestLl = ll;
            bestGamma = g;
            bestIdx = i;
        }
    }
    const double step = (kGammaBracketHi - kGammaBracketLo) / double(kScan - 1);
    double a = std::max(kGammaBracketLo, bestGamma - step);
    double b = std::min(kGammaBracketHi, bestGamma + step);
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - invphi * (b - a), x2 = a + invphi * (b - a);
    double f1 = profile(x1).first, f2 = profile(x2).first;
    while (b - a > 1e-9) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = profile(x2).first;
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = profile(x1).first;
        }
    }
    (void)bestIdx;
    const double gammaHat = 0.5 * (a + b);
    const auto [ll, sigmaHat] = profile(gammaHat);
    if (!std::isfinite(ll)) throw FitError("joint gpd fit produced a non-finite likelihood");
    return EvtFit{gammaHat, sigmaHat, m, 0.0};
}

GuillouHallResult guillou_hall_k(const Sample& x, std::size_t kMin) {
    const std::size_t n = x.size();
    if (n < kMin) throw ArgumentError("guillou-hall rule needs at least k_min observations");

    // U_i needs log of the top order statistics; restrict to the positive suffix.
    std::size_t positive = 0;
    for (std::size_t i = n; i-- > 0;) {
        if (x[i] > 0.0) ++positive; else break;
    }
    if (positive < 2 || positive - 1 < kMin) {
        throw ArgumentError("guillou-hall rule needs k_min positive top observations");
    }
    const std::size_t K = std::min(n - 1, positive - 1);

    // Normalized log-spacings U_i = i (log X_(n-i+1) - log X_(n-i)); their
    // prefix sums give the Hill estimate, and a weighted prefix gives the
    // score T(k) in O(1) per k.
    std::vector<double> tval(K + 1, 0.0);
    double sumU = 0.0, sumIU = 0.0;
    for (std::size_t i = 1; i <= K; ++i) {
        const double u = double(i) * (std::log(x[n - i]) - std::log(x[n - i - 1]));
        sumU += u;
        sumIU += double(i) * u;
        const double k = double(i);
        const double hill = sumU / k;
        const double num = (k + 1.0) * sumU - 2.0 * sumIU;
        tval[i] = hill > 0.0 ? std::sqrt(3.0 / (k * k * k)) * num / hill
                             : std::numeric_limits<double>::infinity();
    }

    std::vector<double> prefixT2(K + 1, 0.0);
    for (std::size_t i = 1; i <= K; ++i) prefixT2[i] = prefixT2[i - 1] + tval[i] * tval[i];
    const auto windowRms = [&](std::size_t k) {
        const std::size_t w = k / 2;
        const std::size_t lo = k > w ? k - w : 1;
        const std::size_t hi = std::min(K, k + w);
        const double meanSq = (prefixT2[hi] - prefixT2[lo - 1]) / double(hi - lo + 1);
        return std::sqrt(meanSq);
    };

    // Smallest k such that the windowed RMS exceeds the critical value for
    // every j >= k.
    std::size_t kHat = 0;
    bool found = false;
    bool allAbove = true;
    for (std::size_t j = K + 1; j-- > kMin;) {
        if (windowRms(j) <= kGhCritical) allAbove = false;
        if (allAbove) {
            kHat = j;
            found = true;
        }
    }
    if (found && kHat <= K) return GuillouHallResult{kHat, false};
    return GuillouHallResult{std::min(std::max<std::size_t>(n / 10, 1), K), true};
}

double background_tail_index(const Sample& bg) {
    const auto gh = guillou_hall_k(bg);
    std::size_t k = gh.k;
    if (gh.usedFallback) {
        k = std::max(kMinTailCount, bg.size() / 100);  // top 1%
        k = std::min(k, bg.size() - 1);
    }
    return hill_estimate(bg, k);
}

double kappa_sigma_over_gamma(const Sample& bg, double t, double gammaHat) {
    if (gammaHat <= 0.0) {
        throw FitError("background tail index estimate is nonpositive; kappa undefined");
    }
    const Sample excesses = bg.excesses_above(t);
    if (excesses.size() < kMinTailCount) {
        throw ArgumentError("too few background exceedances above t for kappa selection");
    }
    return gpd_fit_sigma(excesses, gammaHat) / gammaHat;
}

double resolve_threshold(const ThresholdRule& rule, const Sample& x, const Sample& bg) {
    return std::visit(
        [&](const auto& r) -> double {
            using T = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<T, FixedThreshold>) {
                return r.t;
            } else if constexpr (std::is_same_v<T, BackgroundQuantile>) {
                if (!(r.q > 0.0 && r.q < 1.0)) {
                    throw ArgumentError("quantile threshold level must lie in (0, 1)");
                }
                return bg.quantile(r.q);
            } else if constexpr (std::is_same_v<T, GuillouHallThreshold>) {
                const auto gh = guillou_hall_k(x);
                return x[x.size() - gh.k];  // the k-th largest observation
            } else {
                throw ArgumentError(
                    "oracle thresholds are resolved by the simulation harness");
            }
        },
        rule);
}

double resolve_kappa(const KappaRule& rule, const Sample& bg, double t) {
    return std::visit(
        [&](const auto& r) -> double {
            using T = std::decay_t<decltype(r)>;
            if constexpr (std::is_same_v<T, KappaFixed>) {
                if (!(r.value > 0.0)) throw ArgumentError("fixed kappa must be positive");
                return r.value;
            } else if constexpr (std::is_same_v<T, KappaEqualsThreshold>) {
                if (!(t > 0.0)) {
                    throw ArgumentError("kappa = t requires a positive threshold");
                }
                return t;
            } else {
                return kappa_sigma_over_gamma(bg, t, background_tail_index(bg));
            }
        },
        rule);
}

}  // namespace tailtilt
