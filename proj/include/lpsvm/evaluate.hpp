#pragma once

// Force F = Aw - gamma and the performance measures built on it.

#include "lpsvm/csv.hpp"
#include "lpsvm/data.hpp"
#include "lpsvm/types.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace lpsvm {

struct ForceSeries {
    Vector values;
    Index size() const { return values.size(); }
};

enum class PerformanceKind { pointwise_sign, summed, interval_averaged };

inline const char* to_string(PerformanceKind k) {
    switch (k) {
    case PerformanceKind::pointwise_sign: return "sign";
    case PerformanceKind::summed: return "summed";
    case PerformanceKind::interval_averaged: return "averaged";
    }
    return "?";
}

inline PerformanceKind parse_performance_kind(const std::string& s) {
    if (s == "sign") return PerformanceKind::pointwise_sign;
    if (s == "summed") return PerformanceKind::summed;
    if (s == "averaged") return PerformanceKind::interval_averaged;
    throw ConfigError("unknown measure '" + s + "'");
}

struct PerformanceSeries {
    PerformanceKind kind = PerformanceKind::pointwise_sign;
    Vector values; ///< per bin, except interval_averaged: one value per interval
    std::optional<std::size_t> window_halfwidth;
    std::optional<std::vector<CueInterval>> intervals;
};

inline ForceSeries force(const Matrix& features, const Hyperplane& u) {
    if (features.cols() != u.channels())
        throw ConfigError("model has " + std::to_string(u.channels()) + " channels, data has " + std::to_string(features.cols()));
    return {features * u.w - Vector::Constant(features.rows(), u.gamma)};
}

inline ForceSeries force(const Dataset& ds, const Hyperplane& u) { return force(ds.features(), u); }

inline double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

inline PerformanceSeries sign_series(const ForceSeries& f) {
    return {PerformanceKind::pointwise_sign, f.values.unaryExpr([](double x) { return sgn(x); }), std::nullopt, std::nullopt};
}

/// P_k = sum of F over [k - h, k + h], truncated at both ends of the series.
inline PerformanceSeries summed_performance(const ForceSeries& f, std::size_t h) {
    const Index n = f.size();
    const auto hw = static_cast<Index>(h);
    Vector p(n);
    for (Index k = 0; k < n; ++k) {
        const Index lo = std::max<Index>(0, k - hw);
        const Index hi = std::min<Index>(n - 1, k + hw);
        p(k) = f.values.segment(lo, hi - lo + 1).sum();
    }
    return {PerformanceKind::summed, std::move(p), h, std::nullopt};
}

/// Mean of F over each interval of the schedule.
inline PerformanceSeries averaged_performance(const ForceSeries& f, const CueSchedule& schedule) {
    if (schedule.length() != static_cast<std::size_t>(f.size()))
        throw ConfigError("schedule covers " + std::to_string(schedule.length()) + " bins, force series has " +
                          std::to_string(f.size()));
    Vector means(static_cast<Index>(schedule.size()));
    for (std::size_t k = 0; k < schedule.size(); ++k) {
        const auto& iv = schedule.intervals()[k];
        means(static_cast<Index>(k)) = f.values.segment(static_cast<Index>(iv.start), static_cast<Index>(iv.length())).mean();
    }
    return {PerformanceKind::interval_averaged, std::move(means), std::nullopt, schedule.intervals()};
}

/// Maximal runs of equal sign(F), tagged "+", "-" or "0". Alternative interval
/// source for averaged_performance when no cue schedule is trusted.
inline CueSchedule sign_run_schedule(const ForceSeries& f) {
    std::vector<CueInterval> runs;
    const auto tag_of = [](double x) { return x > 0.0 ? "+" : (x < 0.0 ? "-" : "0"); };
    for (Index i = 0; i < f.size(); ++i) {
        const std::string tag = tag_of(f.values(i));
        if (!runs.empty() && runs.back().tag == tag)
            runs.back().end = static_cast<std::size_t>(i) + 1;
        else
            runs.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(i) + 1, tag});
    }
    return CueSchedule(std::move(runs));
}

/// Per-bin step function of an interval-averaged series (identity for the others).
inline Vector expand_to_bins(const PerformanceSeries& series) {
    if (series.kind != PerformanceKind::interval_averaged) return series.values;
    const auto& ivs = *series.intervals;
    Vector out(static_cast<Index>(ivs.empty() ? 0 : ivs.back().end));
    for (std::size_t k = 0; k < ivs.size(); ++k)
        out.segment(static_cast<Index>(ivs[k].start), static_cast<Index>(ivs[k].length()))
            .setConstant(series.values(static_cast<Index>(k)));
    return out;
}

/// F / max|F|; the zero series is returned unchanged.
inline ForceSeries normalize_max_abs(const ForceSeries& f) {
    const double peak = f.size() ? f.values.lpNorm<Eigen::Infinity>() : 0.0;
    if (peak == 0.0) return f;
    return {f.values / peak};
}

struct MarginStats {
    double fraction_margin_ok = 0.0;
    std::optional<double> mean_pos_force; ///< empty when no +1 rows exist
    std::optional<double> mean_neg_force; ///< empty when no -1 rows exist
    double hinge_sum = 0.0;
};

inline MarginStats margin_stats(const Dataset& ds, const Hyperplane& u) {
    const Vector f = force(ds, u).values;
    const Vector margin = ds.labels().cwiseProduct(f);
    MarginStats out;
    double pos = 0.0, neg = 0.0;
    Index n_pos = 0, n_neg = 0, ok = 0;
    for (Index i = 0; i < ds.rows(); ++i) {
        if (margin(i) >= 1.0) ++ok;
        out.hinge_sum += std::max(0.0, 1.0 - margin(i));
        if (ds.labels()(i) > 0.0) {
            pos += f(i);
            ++n_pos;
        } else {
            neg += f(i);
            ++n_neg;
        }
    }
    out.fraction_margin_ok = static_cast<double>(ok) / static_cast<double>(ds.rows());
    if (n_pos) out.mean_pos_force = pos / static_cast<double>(n_pos);
    if (n_neg) out.mean_neg_force = neg / static_cast<double>(n_neg);
    return out;
}

/// Plot-ready table `bin,F,P,P_tilde,label` at 17 significant digits.
inline void write_forces_csv(std::ostream& out, const ForceSeries& f, const PerformanceSeries& summed,
                             const PerformanceSeries& averaged, const Vector& labels) {
    const Vector p_tilde = expand_to_bins(averaged);
    if (summed.values.size() != f.size() || p_tilde.size() != f.size() || labels.size() != f.size())
        throw Error("force table columns have mismatched lengths");
    out << "bin,F,P,P_tilde,label\n";
    for (Index i = 0; i < f.size(); ++i)
        out << i << ',' << csv::format_double(f.values(i)) << ',' << csv::format_double(summed.values(i)) << ','
            << csv::format_double(p_tilde(i)) << ',' << (labels(i) > 0 ? "1" : "-1") << '\n';
}

} // namespace lpsvm
