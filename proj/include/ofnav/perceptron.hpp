#pragma once

#include <cmath>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "ofnav/svm.hpp"

namespace ofnav {

/// sign(w.x + b), with sign(0) = +1
struct LinearModel {
    std::vector<double> weights;
    double bias = 0.0;

    double decision(std::span<const double> x) const {
        if (x.size() != weights.size()) fail(ErrorKind::InvalidArgument, "linear model: dimension mismatch");
        double acc = bias;
        for (std::size_t k = 0; k < x.size(); ++k) acc += weights[k] * x[k];
        return acc;
    }

    Label predict(std::span<const double> x) const { return decision(x) >= 0.0 ? Label::Positive : Label::Negative; }
};

struct PerceptronStats {
    std::size_t epochs = 0;
    bool converged = false;  // last epoch had no mistakes
};

/// Mistake-driven perceptron. A sample is a mistake when y * (w.x + b) <= 0; the
/// update is w += weight(y) * y * x, b += weight(y) * y. Samples are visited in
/// the given order; training stops after a mistake-free epoch or max_iter epochs.
inline LinearModel perceptron_train(const std::vector<std::vector<double>>& x, std::span<const Label> y,
                                    std::size_t max_iter, const ClassWeights& weights,
                                    PerceptronStats* stats = nullptr) {
    if (x.size() != y.size()) fail(ErrorKind::InvalidArgument, "perceptron_train: x/y size mismatch");
    check_two_classes(y);
    const std::size_t d = x.front().size();
    LinearModel m{std::vector<double>(d, 0.0), 0.0};
    PerceptronStats st;
    for (std::size_t epoch = 0; epoch < max_iter; ++epoch) {
        std::size_t mistakes = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (x[i].size() != d) fail(ErrorKind::InvalidArgument, "perceptron_train: ragged input");
            const double yi = to_int(y[i]);
            if (yi * m.decision(x[i]) <= 0.0) {
                const double step = weights.of(y[i]) * yi;
                for (std::size_t k = 0; k < d; ++k) m.weights[k] += step * x[i][k];
                m.bias += step;
                ++mistakes;
            }
        }
        st.epochs = epoch + 1;
        if (mistakes == 0) {
            st.converged = true;
            break;
        }
    }
    for (double w : m.weights) {
        if (!std::isfinite(w)) fail(ErrorKind::Numeric, "perceptron_train: weights diverged");
    }
    if (stats) *stats = st;
    return m;
}

inline Label perceptron_predict(const LinearModel& m, std::span<const double> x) { return m.predict(x); }

inline nlohmann::json to_json(const LinearModel& m) { return {{"weights", m.weights}, {"bias", m.bias}}; }

inline LinearModel linear_from_json(const nlohmann::json& j) {
    return {j.at("weights").get<std::vector<double>>(), j.at("bias").get<double>()};
}

}  // namespace ofnav
