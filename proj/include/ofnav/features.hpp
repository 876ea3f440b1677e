#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include "ofnav/lk.hpp"

namespace ofnav {

/// Flow pattern as (norm_1, phase_1, ..., norm_P, phase_P).
struct FeatureVector {
    std::vector<double> values;

    std::size_t size() const noexcept { return values.size(); }
    std::size_t point_count() const noexcept { return values.size() / 2; }
    double norm(std::size_t i) const { return values[2 * i]; }
    double phase(std::size_t i) const { return values[2 * i + 1]; }
    bool operator==(const FeatureVector&) const = default;
};

/// Obstacle label: +1 present, -1 absent.
enum class Label : int { Negative = -1, Positive = 1 };

inline int to_int(Label l) { return static_cast<int>(l); }

inline Label label_from_int(int v) {
    require(v == 1 || v == -1, "label must be -1 or +1");
    return v > 0 ? Label::Positive : Label::Negative;
}

struct LabeledSample {
    FeatureVector features;
    std::optional<double> distance_cm;
    Label label = Label::Negative;
};

/// Wraps an atan2 result into [-pi, pi).
inline double wrap_phase(double a) {
    if (a >= std::numbers::pi) a -= 2.0 * std::numbers::pi;
    return a;
}

inline FeatureVector flow_to_feature(const FlowField& flow) {
    FeatureVector fv;
    fv.values.resize(2 * flow.size(), 0.0);
    for (std::size_t i = 0; i < flow.size(); ++i) {
        if (!flow.tracked(i)) continue;
        const auto& u = flow.u[i];
        fv.values[2 * i] = std::hypot(u.x, u.y);
        fv.values[2 * i + 1] = wrap_phase(std::atan2(u.y, u.x));
    }
    return fv;
}

/// Per-vector min-max rescale of the norm components to [0,1]; phases are
/// copied unchanged. A degenerate range (max == min) maps every norm to 0.
inline FeatureVector normalize_magnitudes(const FeatureVector& fv) {
    FeatureVector out = fv;
    const std::size_t n = fv.point_count();
    if (n == 0) return out;
    double lo = fv.norm(0), hi = fv.norm(0);
    for (std::size_t i = 1; i < n; ++i) {
        lo = std::min(lo, fv.norm(i));
        hi = std::max(hi, fv.norm(i));
    }
    const double range = hi - lo;
    for (std::size_t i = 0; i < n; ++i) {
        out.values[2 * i] = range > 0.0 ? std::clamp((fv.norm(i) - lo) / range, 0.0, 1.0) : 0.0;
    }
    return out;
}

struct LabelThresholds {
    double l_inf = 10.0;  // cm, readings below are treated as sensor noise
    double l_sup = 70.0;  // cm, farthest distance that still counts as an obstacle
};

/// +1 iff l_inf <= m <= l_sup.
inline Label label_from_range(double m_cm, double l_inf = 10.0, double l_sup = 70.0) {
    require(l_inf < l_sup, "label_from_range: l_inf must be < l_sup");
    return (m_cm >= l_inf && m_cm <= l_sup) ? Label::Positive : Label::Negative;
}

inline Label label_from_range(double m_cm, const LabelThresholds& t) { return label_from_range(m_cm, t.l_inf, t.l_sup); }

}  // namespace ofnav
