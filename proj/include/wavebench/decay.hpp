#pragma once

#include "wavebench/data.hpp"

namespace wb {

enum class RatioConvention { Energy, Amplitude };

struct DecaySample {
    double t = 0.0;
    double e_grad = 0.0;
    double e_kin = 0.0;
};

struct DecaySeries {
    std::vector<DecaySample> samples;
    DecaySample initial;
    Region region = Region::BallA;

    static double value(const DecaySample& s, RatioConvention c) {
        if (c == RatioConvention::Energy) return s.e_grad + s.e_kin;
        return std::sqrt(s.e_grad) + std::sqrt(s.e_kin);
    }
    double ratio(std::size_t i, RatioConvention c) const {
        return value(samples[i], c) / value(initial, c);
    }
};

/// Evolve the pair and record local energy on the tagged region at each
/// requested time. Sample times must be inside the contamination-free horizon.
inline DecaySeries measure_decay(const DataPair& pair, const SolverConfig& cfg,
                                 const ZoneMap& zm, const std::vector<double>& times,
                                 Region region = Region::BallA) {
    DecaySeries series;
    series.region = region;
    State s = as_state(pair);
    const EnergyParts e0 = energy_parts(s, region, zm);
    if (e0.total() <= 0.0)
        throw ZeroInitialData("measure_decay: initial local energy is zero");
    series.initial = {0.0, e0.grad, e0.kin};

    const double horizon = zm.clean_horizon(support_radius(s, zm));
    double t = 0.0;
    for (double ts : times) {
        if (ts < t) throw ConfigError("measure_decay: sample times must increase");
        if (ts > horizon && cfg.truncation == Truncation::ExactBox)
            throw BoxContamination("sample time " + std::to_string(ts) +
                                   " beyond the clean horizon " + std::to_string(horizon));
        if (ts > t) {
            s = evolve(s, t, ts, cfg, zm);
            t = ts;
        }
        const EnergyParts e = energy_parts(s, region, zm);
        series.samples.push_back({ts, e.grad, e.kin});
    }
    return series;
}

struct DecayFit {
    bool exponential = false;  // odd-dimension model; false = power law
    double C = 0.0;
    double gamma = 0.0;   // decay rate for the exponential model
    double slope = 0.0;   // log-log slope for the power model
    double residual = 0.0;
    double t_lo = 0.0;
    double t_hi = 0.0;
    int n = 0;
};

/// Least squares of log(ratio) against t (odd parity) or log t (even parity).
inline DecayFit fit_series(const std::vector<double>& t, const std::vector<double>& ratio,
                           bool odd_parity, double t_lo, double t_hi) {
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < t_lo || t[i] > t_hi) continue;
        if (!(ratio[i] > 0.0))
            throw NonPositiveRatio("ratio " + std::to_string(ratio[i]) + " at t=" +
                                   std::to_string(t[i]));
        xs.push_back(odd_parity ? t[i] : std::log(t[i]));
        ys.push_back(std::log(ratio[i]));
    }
    if (xs.size() < 5)
        throw InsufficientSamples("need >= 5 samples in the fit window, have " +
                                  std::to_string(xs.size()));
    const double n = double(xs.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    const double denom = n * sxx - sx * sx;
    const double b = denom != 0.0 ? (n * sxy - sx * sy) / denom : 0.0;
    const double a = (sy - b * sx) / n;
    double rss = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - (a + b * xs[i]);
        rss += r * r;
    }
    DecayFit fit;
    fit.exponential = odd_parity;
    fit.C = std::exp(a);
    fit.gamma = odd_parity ? -b : 0.0;
    fit.slope = odd_parity ? 0.0 : b;
    fit.residual = std::sqrt(rss / n);
    fit.t_lo = t_lo;
    fit.t_hi = t_hi;
    fit.n = int(xs.size());
    return fit;
}

inline DecayFit fit_decay(const DecaySeries& series, RatioConvention conv,
                          bool odd_parity, double t_lo, double t_hi) {
    std::vector<double> t, r;
    for (std::size_t i = 0; i < series.samples.size(); ++i) {
        t.push_back(series.samples[i].t);
        r.push_back(series.ratio(i, conv));
    }
    return fit_series(t, r, odd_parity, t_lo, t_hi);
}

/// Default fit window: last two thirds of the sampled range.
inline std::pair<double, double> default_fit_window(const std::vector<double>& times) {
    if (times.empty()) return {0.0, 0.0};
    const double lo = times.front() + (times.back() - times.front()) / 3.0;
    return {lo, times.back()};
}

/// Time-0 over time-T local energy ratio for data imposed at time T, computed
/// through the backward flow. Equals the forward ratio of (f1, -f2).
inline double backward_decay_check(const DataPair& pair, double T,
                                   const SolverConfig& cfg, const ZoneMap& zm,
                                   Region region = Region::BallA,
                                   RatioConvention conv = RatioConvention::Energy) {
    State terminal = as_state(pair, T);
    const EnergyParts eT = energy_parts(terminal, region, zm);
    if (eT.total() <= 0.0)
        throw ZeroInitialData("backward_decay_check: terminal data has zero energy");
    const State s0 = evolve_backward(terminal, T, cfg, zm);
    const EnergyParts e0 = energy_parts(s0, region, zm);
    const DecaySample num{0.0, e0.grad, e0.kin};
    const DecaySample den{T, eT.grad, eT.kin};
    return DecaySeries::value(num, conv) / DecaySeries::value(den, conv);
}

/// Per-time maxima of an ensemble of decay runs: a reproducible lower envelope
/// of the worst-case ratio over data choices.
struct DecayEnvelope {
    std::vector<double> times;
    std::vector<double> energy_ratio;
    std::vector<double> amplitude_ratio;
};

inline DecayEnvelope ensemble_envelope(const std::vector<DecaySeries>& runs) {
    DecayEnvelope env;
    if (runs.empty()) return env;
    const std::size_t m = runs.front().samples.size();
    env.times.resize(m);
    env.energy_ratio.assign(m, 0.0);
    env.amplitude_ratio.assign(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        env.times[i] = runs.front().samples[i].t;
        for (const auto& r : runs) {
            env.energy_ratio[i] =
                std::max(env.energy_ratio[i], r.ratio(i, RatioConvention::Energy));
            env.amplitude_ratio[i] =
                std::max(env.amplitude_ratio[i], r.ratio(i, RatioConvention::Amplitude));
        }
    }
    return env;
}

}  // namespace wb
