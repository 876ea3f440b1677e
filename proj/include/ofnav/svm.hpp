#pragma once

// RBF soft-margin classifier and epsilon-insensitive regressor on top of the SMO solver.

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "ofnav/features.hpp"
#include "ofnav/smo.hpp"

namespace ofnav {

/// Per-class penalty multipliers.
struct ClassWeights {
    double negative = 1.0;
    double positive = 1.0;

    double of(Label l) const { return l == Label::Positive ? positive : negative; }
};

/// weight(c) = n_total / (2 * n_c)
inline ClassWeights balanced_weights(std::span<const Label> labels) {
    std::size_t pos = 0, neg = 0;
    for (auto l : labels) (l == Label::Positive ? pos : neg)++;
    if (pos == 0 || neg == 0) fail(ErrorKind::InvalidArgument, "balanced_weights: both classes must be present");
    const double n = static_cast<double>(labels.size());
    return {n / (2.0 * static_cast<double>(neg)), n / (2.0 * static_cast<double>(pos))};
}

/// 1 / (q * mean per-feature variance); falls back to 1 for constant data.
inline double scale_gamma(const SampleMatrix& x) {
    if (x.rows == 0 || x.cols == 0) return 1.0;
    double var_sum = 0.0;
    for (std::size_t j = 0; j < x.cols; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < x.rows; ++i) mean += x.data[i * x.cols + j];
        mean /= static_cast<double>(x.rows);
        double v = 0.0;
        for (std::size_t i = 0; i < x.rows; ++i) {
            const double d = x.data[i * x.cols + j] - mean;
            v += d * d;
        }
        var_sum += v / static_cast<double>(x.rows);
    }
    const double mean_var = var_sum / static_cast<double>(x.cols);
    return mean_var > 0.0 ? 1.0 / (static_cast<double>(x.cols) * mean_var) : 1.0;
}

/// Kernel expansion sum_i coef_i K(sv_i, x) + bias.
struct KernelExpansion {
    SampleMatrix support_vectors;
    std::vector<double> coefs;
    double bias = 0.0;
    double gamma = 1.0;

    double evaluate(std::span<const double> x) const {
        if (x.size() != support_vectors.cols) fail(ErrorKind::InvalidArgument, "decision: dimension mismatch");
        double acc = 0.0;
        for (std::size_t i = 0; i < support_vectors.rows; ++i) {
            acc += coefs[i] * std::exp(-gamma * squared_distance(support_vectors.row(i), x));
        }
        return acc + bias;
    }
};

/// Trained C-SVM. dual_coefs hold alpha_i * y_i.
class SvmModel {
public:
    SvmModel(KernelExpansion expansion, double c, ClassWeights weights)
        : exp_(std::move(expansion)), c_(c), weights_(weights) {
        if (exp_.support_vectors.rows == 0) fail(ErrorKind::InvalidArgument, "SvmModel: no support vectors");
        if (exp_.coefs.size() != exp_.support_vectors.rows) fail(ErrorKind::InvalidArgument, "SvmModel: coef count mismatch");
        require(exp_.gamma > 0.0 && c_ > 0.0, "SvmModel: gamma and C must be > 0");
    }

    double decision(std::span<const double> x) const { return exp_.evaluate(x); }
    /// sign(decision), with sign(0) = +1
    Label predict(std::span<const double> x) const { return decision(x) >= 0.0 ? Label::Positive : Label::Negative; }

    const SampleMatrix& support_vectors() const noexcept { return exp_.support_vectors; }
    const std::vector<double>& dual_coefs() const noexcept { return exp_.coefs; }
    double bias() const noexcept { return exp_.bias; }
    double gamma() const noexcept { return exp_.gamma; }
    double c() const noexcept { return c_; }
    const ClassWeights& class_weights() const noexcept { return weights_; }
    std::size_t dim() const noexcept { return exp_.support_vectors.cols; }

private:
    KernelExpansion exp_;
    double c_;
    ClassWeights weights_;
};

struct SvmTrainStats {
    std::size_t iterations = 0;
    double dual_objective = 0.0;  // sum a - 0.5 sum a_i a_j y_i y_j K_ij
    std::vector<double> alpha;    // full alpha vector over the training set
};

inline void check_two_classes(std::span<const Label> y) {
    bool pos = false, neg = false;
    for (auto l : y) (l == Label::Positive ? pos : neg) = true;
    if (!pos || !neg) fail(ErrorKind::InvalidArgument, "training set must contain both classes");
}

inline SvmModel svm_train(const std::vector<std::vector<double>>& x, std::span<const Label> y, double c, double gamma,
                          const ClassWeights& weights, const SmoOptions& opt = {}, SvmTrainStats* stats = nullptr) {
    if (x.size() != y.size()) fail(ErrorKind::InvalidArgument, "svm_train: x/y size mismatch");
    check_two_classes(y);
    require(c > 0.0 && gamma > 0.0, "svm_train: C and gamma must be > 0");
    const SampleMatrix xs = SampleMatrix::from_rows(x);
    const std::size_t n = xs.rows;

    std::vector<std::int8_t> ys(n);
    std::vector<double> p(n, -1.0), upper(n);
    std::vector<std::size_t> sample_of(n);
    for (std::size_t i = 0; i < n; ++i) {
        ys[i] = static_cast<std::int8_t>(to_int(y[i]));
        upper[i] = c * weights.of(y[i]);
        sample_of[i] = i;
    }
    KernelRowCache cache(xs, gamma, opt.cache_bytes);
    SignedKernelQ q(cache, sample_of, ys);
    const auto res = smo_solve(q, ys, p, upper, opt);

    KernelExpansion e;
    e.gamma = gamma;
    e.bias = -res.rho;
    e.support_vectors.cols = xs.cols;
    for (std::size_t i = 0; i < n; ++i) {
        if (res.alpha[i] > 1e-8) {
            const auto r = xs.row(i);
            e.support_vectors.data.insert(e.support_vectors.data.end(), r.begin(), r.end());
            e.coefs.push_back(res.alpha[i] * ys[i]);
            ++e.support_vectors.rows;
        }
    }
    if (stats) {
        stats->iterations = res.iterations;
        stats->dual_objective = -res.objective;
        stats->alpha = res.alpha;
    }
    return SvmModel(std::move(e), c, weights);
}

/// epsilon-SVR with RBF kernel; predicts a real-valued target (cm).
class SvrModel {
public:
    SvrModel(KernelExpansion expansion, double c, double epsilon)
        : exp_(std::move(expansion)), c_(c), epsilon_(epsilon) {
        if (exp_.coefs.size() != exp_.support_vectors.rows) fail(ErrorKind::InvalidArgument, "SvrModel: coef count mismatch");
    }

    double predict(std::span<const double> x) const {
        if (exp_.support_vectors.rows == 0) return exp_.bias;
        return exp_.evaluate(x);
    }

    const KernelExpansion& expansion() const noexcept { return exp_; }
    double c() const noexcept { return c_; }
    double epsilon() const noexcept { return epsilon_; }
    double gamma() const noexcept { return exp_.gamma; }

private:
    KernelExpansion exp_;
    double c_;
    double epsilon_;
};

inline SvrModel svr_train(const std::vector<std::vector<double>>& x, std::span<const double> target, double c,
                          double gamma, double epsilon, const SmoOptions& opt = {}) {
    if (x.size() < 2) fail(ErrorKind::InvalidArgument, "svr_train: need at least 2 samples");
    if (x.size() != target.size()) fail(ErrorKind::InvalidArgument, "svr_train: x/target size mismatch");
    require(c > 0.0 && gamma > 0.0 && epsilon >= 0.0, "svr_train: bad hyperparameters");
    for (double t : target) {
        if (!std::isfinite(t)) fail(ErrorKind::Numeric, "svr_train: non-finite target");
    }
    const SampleMatrix xs = SampleMatrix::from_rows(x);
    const std::size_t n = xs.rows;

    std::vector<std::int8_t> ys(2 * n);
    std::vector<double> p(2 * n), upper(2 * n, c);
    std::vector<std::size_t> sample_of(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        ys[i] = 1;
        ys[i + n] = -1;
        p[i] = epsilon - target[i];
        p[i + n] = epsilon + target[i];
        sample_of[i] = i;
        sample_of[i + n] = i;
    }
    KernelRowCache cache(xs, gamma, opt.cache_bytes);
    SignedKernelQ q(cache, sample_of, ys);
    const auto res = smo_solve(q, ys, p, upper, opt);

    KernelExpansion e;
    e.gamma = gamma;
    e.bias = -res.rho;
    e.support_vectors.cols = xs.cols;
    for (std::size_t i = 0; i < n; ++i) {
        const double coef = res.alpha[i] - res.alpha[i + n];
        if (std::abs(coef) > 1e-8) {
            const auto r = xs.row(i);
            e.support_vectors.data.insert(e.support_vectors.data.end(), r.begin(), r.end());
            e.coefs.push_back(coef);
            ++e.support_vectors.rows;
        }
    }
    return SvrModel(std::move(e), c, epsilon);
}

namespace detail {

inline nlohmann::json expansion_json(const KernelExpansion& e) {
    return {{"rows", e.support_vectors.rows},
            {"cols", e.support_vectors.cols},
            {"support_vectors", e.support_vectors.data},
            {"coefs", e.coefs},
            {"bias", e.bias},
            {"gamma", e.gamma}};
}

inline KernelExpansion expansion_from_json(const nlohmann::json& j) {
    KernelExpansion e;
    e.support_vectors.rows = j.at("rows").get<std::size_t>();
    e.support_vectors.cols = j.at("cols").get<std::size_t>();
    e.support_vectors.data = j.at("support_vectors").get<std::vector<double>>();
    e.coefs = j.at("coefs").get<std::vector<double>>();
    e.bias = j.at("bias").get<double>();
    e.gamma = j.at("gamma").get<double>();
    if (e.support_vectors.data.size() != e.support_vectors.rows * e.support_vectors.cols) {
        fail(ErrorKind::DataFormat, "model: support vector shape mismatch");
    }
    return e;
}

}  // namespace detail

inline nlohmann::json to_json(const SvmModel& m) {
    auto j = detail::expansion_json(KernelExpansion{m.support_vectors(), m.dual_coefs(), m.bias(), m.gamma()});
    j["c"] = m.c();
    j["class_weights"] = {{"negative", m.class_weights().negative}, {"positive", m.class_weights().positive}};
    return j;
}

inline SvmModel svm_from_json(const nlohmann::json& j) {
    ClassWeights w{j.at("class_weights").at("negative").get<double>(), j.at("class_weights").at("positive").get<double>()};
    return SvmModel(detail::expansion_from_json(j), j.at("c").get<double>(), w);
}

inline nlohmann::json to_json(const SvrModel& m) {
    auto j = detail::expansion_json(m.expansion());
    j["c"] = m.c();
    j["epsilon"] = m.epsilon();
    return j;
}

inline SvrModel svr_from_json(const nlohmann::json& j) {
    return SvrModel(detail::expansion_from_json(j), j.at("c").get<double>(), j.at("epsilon").get<double>());
}

}  // namespace ofnav
