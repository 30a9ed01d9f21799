#include "tailtilt/distributions.hpp"

#include <cmath>
#include <sstream>

#include "tailtilt/errors.hpp"

namespace tailtilt {

namespace {

constexpr double kGammaNearZero = 1e-8;

void require(bool cond, const char* msg) {
    if (!cond) throw DomainError(msg);
}

}  // namespace

DistSpec DistSpec::log_gamma(double shape, double scale) {
    require(shape > 0.0 && std::isfinite(shape), "log-gamma shape must be positive");
    require(scale > 0.0 && std::isfinite(scale), "log-gamma scale must be positive");
    return DistSpec{LogGammaSpec{shape, scale}};
}

DistSpec DistSpec::gpd(double tailIndex, double scale, double location) {
    require(std::isfinite(tailIndex), "gpd tail index must be finite");
    require(scale > 0.0 && std::isfinite(scale), "gpd scale must be positive");
    require(std::isfinite(location), "gpd location must be finite");
    return DistSpec{GpdSpec{tailIndex, scale, location}};
}

DistSpec DistSpec::pareto(double tailIndex, double scale) {
    require(tailIndex > 0.0 && std::isfinite(tailIndex), "pareto tail index must be positive");
    require(scale > 0.0 && std::isfinite(scale), "pareto scale must be positive");
    return DistSpec{ParetoSpec{tailIndex, scale}};
}

std::string DistSpec::describe() const {
    std::ostringstream out;
    std::visit(
        [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, LogGammaSpec>) {
                out << "loggamma(shape=" << s.shape << ", scale=" << s.scale << ")";
            } else if constexpr (std::is_same_v<T, GpdSpec>) {
                out << "gpd(gamma=" << s.tailIndex << ", sigma=" << s.scale
                    << ", t=" << s.location << ")";
            } else {
                out << "pareto(gamma=" << s.tailIndex << ", xm=" << s.scale << ")";
            }
        },
        spec_);
    return out.str();
}

double gamma_deviate(double shape, StreamRng& rng) {
    if (shape < 1.0) {
        // Boost a shape+1 draw down: G_k = G_{k+1} * U^{1/k}.
        const double g = gamma_deviate(shape + 1.0, rng);
        return g * std::pow(rng.uniform01(), 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = rng.normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = rng.uniform01();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
}

double gpd_quantile(double tailIndex, double scale, double u) {
    if (!(scale > 0.0)) throw DomainError("gpd scale must be positive");
    if (!(u > 0.0 && u < 1.0)) throw DomainError("gpd quantile level must lie in (0, 1)");
    const double y = -std::log1p(-u);  // exponential quantile
    if (std::fabs(tailIndex) < kGammaNearZero) {
        // Series in gamma: sigma * (y + gamma y^2/2 + ...).
        return scale * y * (1.0 + 0.5 * tailIndex * y);
    }
    return scale * std::expm1(tailIndex * y) / tailIndex;
}

double gpd_cdf(double tailIndex, double scale, double x) {
    if (!(scale > 0.0)) throw DomainError("gpd scale must be positive");
    if (x < 0.0) throw DomainError("gpd excess must be nonnegative");
    if (tailIndex < 0.0 && x > -scale / tailIndex) {
        throw DomainError("gpd excess lies outside the bounded support");
    }
    if (std::fabs(tailIndex) < kGammaNearZero) {
        const double z = x / scale;
        // exp(-log(1+gx/s)/g) expanded to first order in gamma.
        return -std::expm1(-z * (1.0 - 0.5 * tailIndex * z));
    }
    return -std::expm1(-std::log1p(tailIndex * x / scale) / tailIndex);
}

double draw(const DistSpec& spec, StreamRng& rng) {
    return std::visit(
        [&](const auto& s) -> double {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, LogGammaSpec>) {
                return std::exp(s.scale * gamma_deviate(s.shape, rng));
            } else if constexpr (std::is_same_v<T, GpdSpec>) {
                return s.location + gpd_quantile(s.tailIndex, s.scale, rng.uniform01());
            } else {
                return s.scale * std::pow(1.0 - rng.uniform01(), -s.tailIndex);
            }
        },
        spec.variant());
}

Sample sample(const DistSpec& spec, std::size_t n, SeedSpec seed) {
    if (n < 1) throw ArgumentError("sample size must be at least 1");
    StreamRng rng(seed);
    std::vector<double> values(n);
    for (double& v : values) v = draw(spec, rng);
    return Sample(std::move(values), spec.describe());
}

double analytic_mean(const DistSpec& spec) {
    return std::visit(
        [](const auto& s) -> double {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, LogGammaSpec>) {
                if (s.scale >= 1.0)
                    throw DomainError("log-gamma mean exists only for scale < 1");
                return std::pow(1.0 - s.scale, -s.shape);
            } else if constexpr (std::is_same_v<T, GpdSpec>) {
                if (s.tailIndex >= 1.0)
                    throw DomainError("gpd mean exists only for tail index < 1");
                return s.location + s.scale / (1.0 - s.tailIndex);
            } else {
                if (s.tailIndex >= 1.0)
                    throw DomainError("pareto mean exists only for tail index < 1");
                return s.scale / (1.0 - s.tailIndex);
            }
        },
        spec.variant());
}

double analytic_variance(const DistSpec& spec) {
    return std::visit(
        [](const auto& s) -> double {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, LogGammaSpec>) {
                if (s.scale >= 0.5)
                    throw DomainError("log-gamma variance exists only for scale < 1/2");
                return std::pow(1.0 - 2.0 * s.scale, -s.shape) -
                       std::pow(1.0 - s.scale, -2.0 * s.shape);
            } else if constexpr (std::is_same_v<T, GpdSpec>) {
                if (s.tailIndex >= 0.5)
                    throw DomainError("gpd variance exists only for tail index < 1/2");
                const double g = s.tailIndex;
                return s.scale * s.scale / ((1.0 - g) * (1.0 - g) * (1.0 - 2.0 * g));
            } else {
                if (s.tailIndex >= 0.5)
                    throw DomainError("pareto variance exists only for tail index < 1/2");
                const double g = s.tailIndex;
                return s.scale * s.scale * g * g /
                       ((1.0 - g) * (1.0 - g) * (1.0 - 2.0 * g));
            }
        },
        spec.variant());
}

}  // namespace tailtilt
