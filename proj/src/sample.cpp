#include "tailtilt/sample.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace tailtilt {

namespace {

void check_finite(const std::vector<double>& v, const std::string& label) {
    for (double x : v) {
        if (!std::isfinite(x)) {
            throw ArgumentError("sample '" + label + "' contains a non-finite value");
        }
    }
}

}  // namespace

Sample::Sample(std::vector<double> values, std::string label)
    : values_(std::move(values)), label_(std::move(label)) {
    check_finite(values_, label_);
    std::sort(values_.begin(), values_.end());
}

Sample Sample::from_sorted(std::vector<double> values, std::string label) {
    Sample s;
    s.values_ = std::move(values);
    s.label_ = std::move(label);
    check_finite(s.values_, s.label_);
    return s;
}

double Sample::min() const {
    if (values_.empty()) throw ArgumentError("min of empty sample");
    return values_.front();
}

double Sample::max() const {
    if (values_.empty()) throw ArgumentError("max of empty sample");
    return values_.back();
}

double Sample::sum() const {
    return std::accumulate(values_.begin(), values_.end(), 0.0);
}

double Sample::mean() const {
    if (values_.empty()) throw ArgumentError("mean of empty sample");
    return sum() / static_cast<double>(values_.size());
}

double Sample::quantile(double q) const {
    if (values_.empty()) throw ArgumentError("quantile of empty sample");
    if (!(q >= 0.0 && q <= 1.0)) throw ArgumentError("quantile level must lie in [0, 1]");
    const std::size_t n = values_.size();
    if (n == 1) return values_[0];
    const double h = q * static_cast<double>(n - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, n - 1);
    const double frac = h - static_cast<double>(lo);
    return values_[lo] + frac * (values_[hi] - values_[lo]);
}

std::size_t Sample::count_above(double t) const {
    auto it = std::upper_bound(values_.begin(), values_.end(), t);
    return static_cast<std::size_t>(values_.end() - it);
}

Sample Sample::excesses_above(double t, std::string label) const {
    auto it = std::upper_bound(values_.begin(), values_.end(), t);
    std::vector<double> exc;
    exc.reserve(static_cast<std::size_t>(values_.end() - it));
    for (; it != values_.end(); ++it) exc.push_back(*it - t);
    return Sample::from_sorted(std::move(exc), std::move(label));
}

double Sample::sum_at_or_below(double t) const {
    auto it = std::upper_bound(values_.begin(), values_.end(), t);
    return std::accumulate(values_.begin(), it, 0.0);
}

}  // namespace tailtilt
