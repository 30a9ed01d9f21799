#include "tailtilt/estimators.hpp"

#include <algorithm>
#include <cmath>

#include "tailtilt/errors.hpp"
#include "tailtilt/evt.hpp"

namespace tailtilt {

std::string to_string(MeanMethod method) {
    switch (method) {
        case MeanMethod::Semiparametric: return "semiparametric";
        case MeanMethod::WinsorizedThreshold: return "winsorized_threshold";
        case MeanMethod::WinsorizedK: return "winsorized_k";
        case MeanMethod::ParetoTail: return "pareto_tail";
        case MeanMethod::SampleMean: return "sample_mean";
    }
    return "unknown";
}

PluginMoments plugin_moments(const Sample& x, const TiltedTailModel& model) {
    const double t = model.threshold();
    PluginMoments m;
    m.p2 = model.p2_hat();

    const auto vals = x.values();
    const auto bodyEnd = std::upper_bound(vals.begin(), vals.end(), t);
    const std::size_t nBody = static_cast<std::size_t>(bodyEnd - vals.begin());
    if (nBody > 0) {
        double s = 0.0, s2 = 0.0;
        for (auto it = vals.begin(); it != bodyEnd; ++it) {
            s += *it;
            s2 += *it * *it;
        }
        m.bodyMean = s / double(nBody);
        m.bodyVar = std::max(0.0, s2 / double(nBody) - m.bodyMean * m.bodyMean);
    }

    const auto& w = model.weights();
    const auto& tv = model.t_values();
    const auto& exc = model.bg_excesses();
    double sy = 0.0, sy2 = 0.0, st = 0.0, st2 = 0.0, sty = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double y = t + exc[i];
        sy += w[i] * y;
        sy2 += w[i] * y * y;
        st += w[i] * tv[i];
        st2 += w[i] * tv[i] * tv[i];
        sty += w[i] * tv[i] * y;
    }
    m.tailMean = sy;
    m.tailVar = std::max(0.0, sy2 - sy * sy);
    m.varT = std::max(0.0, st2 - st * st);
    m.covTX = sty - st * sy;
    return m;
}

double plugin_variance(const PluginMoments& m, std::size_t n) {
    const double f = 1.0 - m.p2;  // fitted F(t)
    double v = f * m.bodyVar;
    if (m.p2 > 0.0) {
        if (!(m.varT > 0.0)) {
            throw DegeneracyError("tail T values are degenerate; variance plug-in undefined");
        }
        v += m.p2 * m.covTX * m.covTX / m.varT;
        v += f * m.p2 * (m.tailMean - m.bodyMean) * (m.tailMean - m.bodyMean);
    }
    return v / static_cast<double>(n);
}

double semiparametric_variance(const Sample& x, const TiltedTailModel& model) {
    const std::size_t nBody = x.size() - model.n_tail_x();
    if (nBody < 2) {
        throw DegeneracyError("variance plug-in needs at least 2 body observations");
    }
    return plugin_variance(plugin_moments(x, model), x.size());
}

MeanEstimate semiparametric_mean_from_model(const Sample& x, const TiltedTailModel& model) {
    const double t = model.threshold();
    const double bodyTerm = x.sum_at_or_below(t) / static_cast<double>(x.size());
    MeanEstimate est;
    est.muHat = bodyTerm + model.p2_hat() * model.tail_mean();
    est.varHat = semiparametric_variance(x, model);
    est.method = MeanMethod::Semiparametric;
    est.threshold = t;
    est.kappa = model.kappa();
    est.diagnostics = model.diagnostics();
    return est;
}

MeanEstimate semiparametric_mean(const Sample& x, const Sample& bg, double t,
                                 double kappa, TiltMethod method) {
    const TiltedTailModel model = build_tail_model(x, bg, t, kappa, method);
    return semiparametric_mean_from_model(x, model);
}

MeanEstimate winsorized_mean_threshold(const Sample& x, double t) {
    if (x.empty()) throw ArgumentError("winsorized mean of empty sample");
    const auto vals = x.values();
    const auto bodyEnd = std::upper_bound(vals.begin(), vals.end(), t);
    double s = 0.0;
    for (auto it = vals.begin(); it != bodyEnd; ++it) s += *it;
    s += t * static_cast<double>(vals.end() - bodyEnd);
    MeanEstimate est;
    est.muHat = s / static_cast<double>(x.size());
    est.method = MeanMethod::WinsorizedThreshold;
    est.threshold = t;
    return est;
}

std::vector<double> winsorize_k(const Sample& x, std::size_t k) {
    const std::size_t n = x.size();
    if (k < 1 || k >= n) throw ArgumentError("winsorize-k requires 1 <= k <= n - 1");
    std::vector<double> capped(x.values().begin(), x.values().end());
    const double cap = capped[n - 1 - k];  // the (k+1)-th largest value
    for (std::size_t i = n - k; i < n; ++i) capped[i] = cap;
    return capped;
}

MeanEstimate winsorized_mean_k(const Sample& x, std::size_t k) {
    const auto capped = winsorize_k(x, k);
    double s = 0.0;
    for (double v : capped) s += v;
    MeanEstimate est;
    est.muHat = s / static_cast<double>(capped.size());
    est.method = MeanMethod::WinsorizedK;
    est.threshold = capped.back();
    return est;
}

MeanEstimate pareto_tail_mean(const Sample& x, double t) {
    if (x.empty()) throw ArgumentError("pareto tail mean of empty sample");
    const Sample excesses = x.excesses_above(t);
    if (excesses.size() < 5) {
        throw ArgumentError("pareto tail fit needs at least 5 exceedances above t");
    }
    const EvtFit fit = gpd_fit_ml(excesses);
    if (fit.gammaHat >= 1.0) {
        throw EstimationError("fitted tail index >= 1 implies an infinite mean");
    }
    const double n = static_cast<double>(x.size());
    const double p2 = static_cast<double>(excesses.size()) / n;
    MeanEstimate est;
    est.muHat = x.sum_at_or_below(t) / n + p2 * (t + fit.sigmaHat / (1.0 - fit.gammaHat));
    est.method = MeanMethod::ParetoTail;
    est.threshold = t;
    return est;
}

MeanEstimate sample_mean(const Sample& x) {
    MeanEstimate est;
    est.muHat = x.mean();
    est.method = MeanMethod::SampleMean;
    return est;
}

}  // namespace tailtilt
