#include <doctest.h>

#include <cmath>
#include <vector>

#include "support/oracles.hpp"
#include "tailtilt/distributions.hpp"
#include "tailtilt/errors.hpp"
#include "tailtilt/evt.hpp"

using namespace tailtilt;

TEST_CASE("hill estimator by hand") {
    const Sample x(std::vector<double>{1, 2, 4, 8});
    // (log 8 + log 4 + log 2)/3 - log 1 = 2 ln 2
    CHECK(hill_estimate(x, 3) == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-12));
    CHECK_THROWS_AS(hill_estimate(x, 0), ArgumentError);
    CHECK_THROWS_AS(hill_estimate(x, 4), ArgumentError);

    const Sample tied(std::vector<double>{1, 5, 5, 5, 5});
    CHECK(hill_estimate(tied, 3) == doctest::Approx(0.0));

    const Sample withNegative(std::vector<double>{-1, 2, 4, 8});
    CHECK_THROWS_AS(hill_estimate(withNegative, 3), DomainError);
}

TEST_CASE("hill estimator is scale invariant") {
    const Sample x = sample(DistSpec::pareto(0.6, 1.0), 500, SeedSpec{3, 0});
    std::vector<double> scaled(x.values().begin(), x.values().end());
    for (double& v : scaled) v *= 17.5;
    const Sample y(std::move(scaled));
    for (std::size_t k : {std::size_t{5}, std::size_t{50}, std::size_t{250}}) {
        CHECK(hill_estimate(x, k) == doctest::Approx(hill_estimate(y, k)).epsilon(1e-12));
    }
}

TEST_CASE("hill estimator recovers the pareto tail index") {
    const double gamma = 0.45;
    const Sample x = sample(DistSpec::pareto(gamma, 1.0), 100000, SeedSpec{9, 2});
    const std::size_t k = 5000;
    const double se = gamma / std::sqrt(double(k));
    CHECK(std::fabs(hill_estimate(x, k) - gamma) < 3.0 * se);
}

TEST_CASE("gpd scale fit: exponential closed form") {
    const Sample exc(std::vector<double>{0.5, 1.0, 1.5, 4.0});
    CHECK(gpd_fit_sigma(exc, 0.0) == doctest::Approx(exc.mean()).epsilon(1e-12));
}

TEST_CASE("gpd scale fit: score is zero at the solution") {
    const Sample exc = sample(DistSpec::gpd(0.45, 2.0, 0.0), 5000, SeedSpec{31, 5});
    for (double gamma : {-0.3, 0.2, 0.45, 1.0}) {
        const double sigma = gpd_fit_sigma(exc, gamma);
        double score = 0.0;
        for (double e : exc.values()) score += e / (sigma + gamma * e);
        score = (1.0 + gamma) * score / double(exc.size()) - 1.0;
        CHECK(std::fabs(score) < 1e-8);
        // likelihood is locally maximal
        const double ll = oracles::gpd_loglik(exc, gamma, sigma);
        CHECK(ll >= oracles::gpd_loglik(exc, gamma, sigma * 1.001));
        CHECK(ll >= oracles::gpd_loglik(exc, gamma, sigma * 0.999));
    }
}

TEST_CASE("gpd scale fit: single excess solves the one-sample score") {
    const Sample exc(std::vector<double>{3.7});
    const double sigma = gpd_fit_sigma(exc, 1.0);
    // (1+g) e / (sigma + g e) = 1 with g = 1 gives sigma = e
    CHECK(sigma == doctest::Approx(3.7).epsilon(1e-9));
    double best = -1e300, bestSigma = 0.0;
    for (int i = 0; i < 20000; ++i) {
        const double s = 0.1 + i * 0.001;
        const double ll = oracles::gpd_loglik(exc, 1.0, s);
        if (ll > best) {
            best = ll;
            bestSigma = s;
        }
    }
    CHECK(sigma == doctest::Approx(bestSigma).epsilon(1e-3));
}

TEST_CASE("gpd scale fit recovers the truth in simulation") {
    const double gamma = 0.45, sigma = 2.0;
    const Sample exc = sample(DistSpec::gpd(gamma, sigma, 0.0), 100000, SeedSpec{12, 0});
    // Fisher information for sigma with gamma known: 1 / (sigma^2 (1+2g)).
    const double se = sigma * std::sqrt((1.0 + 2.0 * gamma) / double(exc.size()));
    CHECK(std::fabs(gpd_fit_sigma(exc, gamma) - sigma) < 3.0 * se);
}

TEST_CASE("joint gpd fit matches a dense grid search") {
    const Sample exc = sample(DistSpec::gpd(0.45, 1.0, 0.0), 200, SeedSpec{8, 4});
    const EvtFit fit = gpd_fit_ml(exc);
    const double fitted = oracles::gpd_loglik(exc, fit.gammaHat, fit.sigmaHat);
    const double gridBest = oracles::gpd_grid_best(exc, -0.5, 2.0, 0.05, 20.0);
    CHECK(fitted >= gridBest - 1e-6);
}

TEST_CASE("joint gpd fit recovers the truth in simulation") {
    const double gamma = 0.45, sigma = 1.0;
    const Sample exc = sample(DistSpec::gpd(gamma, sigma, 0.0), 100000, SeedSpec{21, 6});
    const EvtFit fit = gpd_fit_ml(exc);
    const double m = double(exc.size());
    const double seGamma = (1.0 + gamma) * std::sqrt(1.0 / m);
    const double seSigma = sigma * std::sqrt(2.0 * (1.0 + gamma) / m);
    CHECK(std::fabs(fit.gammaHat - gamma) < 3.0 * seGamma);
    CHECK(std::fabs(fit.sigmaHat - sigma) < 3.0 * seSigma);
}

TEST_CASE("joint gpd fit rejects degenerate data") {
    const Sample allEqual(std::vector<double>(10, 2.5));
    CHECK_THROWS_AS(gpd_fit_ml(allEqual), FitError);
    const Sample tooFew(std::vector<double>{1, 2, 3});
    CHECK_THROWS_AS(gpd_fit_ml(tooFew), ArgumentError);
}

TEST_CASE("guillou-hall equals a direct scan of the criterion") {
    for (std::uint64_t stream : {0, 1, 2, 3, 4}) {
        const Sample x = sample(DistSpec::gpd(0.5, 1.0, 0.0), 1000, SeedSpec{100, stream});
        const auto gh = guillou_hall_k(x);
        const std::size_t direct = oracles::gh_direct_scan(x);
        if (direct == 0) {
            CHECK(gh.usedFallback);
            CHECK(gh.k == 100);  // floor(n / 10)
        } else {
            CHECK_FALSE(gh.usedFallback);
            CHECK(gh.k == direct);
        }
    }
    for (std::uint64_t stream : {0, 1, 2}) {
        const Sample x =
            sample(DistSpec::pareto(0.45, 1.0), 1000, SeedSpec{200, stream});
        const auto gh = guillou_hall_k(x);
        const std::size_t direct = oracles::gh_direct_scan(x);
        if (direct == 0) {
            CHECK(gh.usedFallback);
            CHECK(gh.k == 100);
        } else {
            CHECK_FALSE(gh.usedFallback);
            CHECK(gh.k == direct);
        }
    }
}

TEST_CASE("guillou-hall rejects tiny samples") {
    const Sample x = sample(DistSpec::pareto(0.5, 1.0), 10, SeedSpec{1, 1});
    CHECK_THROWS_AS(guillou_hall_k(x), ArgumentError);
}

TEST_CASE("guillou-hall k grows with the sample size") {
    double mean1000 = 0.0, mean4000 = 0.0;
    const int reps = 200;
    for (int r = 0; r < reps; ++r) {
        const Sample a = sample(DistSpec::pareto(0.45, 1.0), 1000,
                                SeedSpec{303, std::uint64_t(r)});
        const Sample b = sample(DistSpec::pareto(0.45, 1.0), 4000,
                                SeedSpec{304, std::uint64_t(r)});
        mean1000 += double(guillou_hall_k(a).k);
        mean4000 += double(guillou_hall_k(b).k);
    }
    CHECK(mean4000 / reps > mean1000 / reps);
}

TEST_CASE("threshold resolution") {
    const Sample x = sample(DistSpec::pareto(0.5, 1.0), 500, SeedSpec{7, 7});
    const Sample bg(std::vector<double>{1, 2, 3, 4});
    CHECK(resolve_threshold(FixedThreshold{5.0}, x, bg) == 5.0);
    CHECK(resolve_threshold(BackgroundQuantile{0.75}, x, bg) == doctest::Approx(3.25));
    CHECK_THROWS_AS(resolve_threshold(OracleThreshold{{1.0}}, x, bg), ArgumentError);

    const auto gh = guillou_hall_k(x);
    CHECK(resolve_threshold(GuillouHallThreshold{}, x, bg) ==
          doctest::Approx(x[x.size() - gh.k]));
}

TEST_CASE("quantile threshold is monotone in q") {
    const Sample bg = sample(DistSpec::log_gamma(3, 0.45), 2000, SeedSpec{88, 0});
    const Sample x = bg;
    double prev = -1e300;
    for (double q = 0.05; q < 1.0; q += 0.05) {
        const double t = resolve_threshold(BackgroundQuantile{q}, x, bg);
        CHECK(t >= prev);
        prev = t;
    }
}

TEST_CASE("kappa resolution") {
    const Sample bg = sample(DistSpec::log_gamma(3, 0.45), 20000, SeedSpec{14, 1});
    CHECK(resolve_kappa(KappaEqualsThreshold{}, bg, 7.3) == doctest::Approx(7.3));
    CHECK(resolve_kappa(KappaFixed{2.0}, bg, 7.3) == doctest::Approx(2.0));
    CHECK_THROWS_AS(resolve_kappa(KappaFixed{-1.0}, bg, 7.3), ArgumentError);
    CHECK_THROWS_AS(resolve_kappa(KappaEqualsThreshold{}, bg, -1.0), ArgumentError);
}

TEST_CASE("kappa sigma-over-gamma approaches t on an exact pareto tail") {
    // Background values t + GPD(gamma, t * gamma) excesses are exactly
    // Pareto(gamma, x_m = t), where sigma_t / (t gamma) = 1.
    const double gamma = 0.5, t = 10.0;
    const Sample bg = sample(DistSpec::pareto(gamma, t), 200000, SeedSpec{15, 2});
    const double kappa = resolve_kappa(KappaSigmaOverGamma{}, bg, t);
    CHECK(kappa == doctest::Approx(t).epsilon(0.05));
}
