#pragma once

#include <cstdint>
#include <string>
#include <variant>

#include "tailtilt/rng.hpp"
#include "tailtilt/sample.hpp"

namespace tailtilt {

/// X = exp(G), G ~ Gamma(shape, scale). Heavy right tail with tail index
/// equal to the scale parameter; the mean exists iff scale < 1 and the
/// variance iff scale < 1/2.
struct LogGammaSpec {
    double shape;
    double scale;
};

/// Generalized Pareto with tail index gamma, scale sigma, location t.
/// gamma may be negative (bounded support) or zero (exponential).
struct GpdSpec {
    double tailIndex;
    double scale;
    double location = 0.0;
};

/// Exact Pareto: survival (x / xm)^(-1/gamma) for x >= xm.
struct ParetoSpec {
    double tailIndex;
    double scale;  // x_m
};

class DistSpec {
public:
    static DistSpec log_gamma(double shape, double scale);
    static DistSpec gpd(double tailIndex, double scale, double location = 0.0);
    static DistSpec pareto(double tailIndex, double scale);

    const std::variant<LogGammaSpec, GpdSpec, ParetoSpec>& variant() const noexcept {
        return spec_;
    }
    std::string describe() const;

private:
    explicit DistSpec(std::variant<LogGammaSpec, GpdSpec, ParetoSpec> v) : spec_(v) {}
    std::variant<LogGammaSpec, GpdSpec, ParetoSpec> spec_;
};

/// n i.i.d. draws from `spec`, reproducible per (masterSeed, streamId).
Sample sample(const DistSpec& spec, std::size_t n, SeedSpec seed);

/// One draw using an already-open stream (used by the simulation loop).
double draw(const DistSpec& spec, StreamRng& rng);

/// Population mean; throws DomainError naming the violated existence
/// condition when the mean is infinite.
double analytic_mean(const DistSpec& spec);

/// Population variance; throws DomainError when it does not exist.
double analytic_variance(const DistSpec& spec);

/// GPD distribution function H_{gamma,sigma}(x) for an excess x >= 0,
/// with the continuous exponential limit as gamma -> 0.
double gpd_cdf(double tailIndex, double scale, double x);

/// Inverse of gpd_cdf on (0, 1); exact sampling transform.
double gpd_quantile(double tailIndex, double scale, double u);

/// Gamma(shape, scale=1) deviate via Marsaglia-Tsang squeeze/rejection;
/// valid for every shape > 0 (the shape < 1 case is boosted).
double gamma_deviate(double shape, StreamRng& rng);

}  // namespace tailtilt
