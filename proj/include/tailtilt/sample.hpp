#pragma once

#include <span>
#include <string>
#include <vector>

#include "tailtilt/errors.hpp"

namespace tailtilt {

/// Immutable batch of real observations, stored sorted ascending.
///
/// Every value is required to be finite. The label carries provenance
/// (file name, distribution spec, stream id) for diagnostics only; it
/// does not participate in comparisons.
class Sample {
public:
    Sample() = default;

    /// Takes ownership of `values`, sorts them, and validates finiteness.
    explicit Sample(std::vector<double> values, std::string label = {});

    /// Trusted constructor for values already sorted ascending.
    static Sample from_sorted(std::vector<double> values, std::string label = {});

    std::size_t size() const noexcept { return values_.size(); }
    bool empty() const noexcept { return values_.empty(); }
    double operator[](std::size_t i) const { return values_[i]; }
    std::span<const double> values() const noexcept { return values_; }
    const std::string& label() const noexcept { return label_; }

    double min() const;
    double max() const;
    double sum() const;
    double mean() const;

    /// Empirical quantile with linear interpolation between order
    /// statistics (the type-7 convention: h = (n-1)q, interpolate
    /// between floor(h) and ceil(h)). q must lie in [0, 1].
    double quantile(double q) const;

    /// Number of observations strictly above t.
    std::size_t count_above(double t) const;

    /// Excesses {x - t : x > t}, sorted ascending (order preserved).
    Sample excesses_above(double t, std::string label = {}) const;

    /// Sum of observations <= t.
    double sum_at_or_below(double t) const;

private:
    std::vector<double> values_;
    std::string label_;
};

}  // namespace tailtilt
