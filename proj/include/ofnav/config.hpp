#pragma once

// PipelineConfig: every tunable of the flow -> features -> PCA -> learner chain.
// JSON form mirrors the struct; unknown keys are rejected.

#include <cstdint>
#include <fstream>
#include <set>
#include <string>

#include <nlohmann/json.hpp>

#include "ofnav/distribution.hpp"
#include "ofnav/error.hpp"
#include "ofnav/features.hpp"
#include "ofnav/lk.hpp"

namespace ofnav {

enum class LearnerKind { Svm, Perceptron, Svr };

inline std::string to_string(LearnerKind k) {
    switch (k) {
        case LearnerKind::Svm: return "svm";
        case LearnerKind::Perceptron: return "perceptron";
        case LearnerKind::Svr: return "svr";
    }
    return "svm";
}

inline LearnerKind learner_from_string(const std::string& s) {
    if (s == "svm") return LearnerKind::Svm;
    if (s == "perceptron") return LearnerKind::Perceptron;
    if (s == "svr") return LearnerKind::Svr;
    fail(ErrorKind::InvalidArgument, "unknown learner kind '" + s + "'");
}

enum class FoldMode { Contiguous, Grouped, Shuffled };

inline std::string to_string(FoldMode m) {
    switch (m) {
        case FoldMode::Contiguous: return "contiguous";
        case FoldMode::Grouped: return "grouped";
        case FoldMode::Shuffled: return "shuffled";
    }
    return "grouped";
}

inline FoldMode fold_mode_from_string(const std::string& s) {
    if (s == "contiguous") return FoldMode::Contiguous;
    if (s == "grouped") return FoldMode::Grouped;
    if (s == "shuffled") return FoldMode::Shuffled;
    fail(ErrorKind::InvalidArgument, "unknown fold mode '" + s + "'");
}

struct LearnerParams {
    LearnerKind kind = LearnerKind::Svm;
    double c = 1.0;
    double gamma = 0.0;  // <= 0 selects 1/(q * mean feature variance)
    double epsilon = 0.1;  // SVR tube half-width, cm
    std::size_t max_iter = 100;  // perceptron epochs
    bool balanced = true;
    double tolerance = 1e-3;
};

struct PipelineConfig {
    RingParams ring;
    double occupancy = 0.8;
    LkParams lk;
    bool normalize = true;
    double pca_retained = 0.9;
    LearnerParams learner;
    LabelThresholds labels;
    int k = 8;
    FoldMode fold_mode = FoldMode::Grouped;
    std::uint64_t seed = 0;

    void validate() const {
        require(ring.rings >= 0 && ring.per_ring >= 1 && ring.growth > 1.0, "config: bad ring parameters");
        require(occupancy > 0.0 && occupancy <= 1.0, "config: occupancy must be in (0,1]");
        lk.validate();
        require(pca_retained > 0.0 && pca_retained <= 1.0, "config: pca_retained must be in (0,1]");
        require(learner.c > 0.0, "config: C must be > 0");
        require(learner.epsilon >= 0.0, "config: epsilon must be >= 0");
        require(learner.tolerance > 0.0, "config: tolerance must be > 0");
        require(labels.l_inf < labels.l_sup, "config: l_inf must be < l_sup");
        require(k >= 2, "config: k must be >= 2");
    }
};

namespace detail {

inline void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!j.is_object()) fail(ErrorKind::DataFormat, "config: '" + where + "' must be an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, _] : j.items()) {
        if (!ok.count(key)) fail(ErrorKind::DataFormat, "config: unknown key '" + where + key + "'");
    }
}

template <class T>
void read_if(const nlohmann::json& j, const char* key, T& dst) {
    if (j.contains(key)) dst = j.at(key).get<T>();
}

}  // namespace detail

inline nlohmann::json to_json(const PipelineConfig& c) {
    return {
        {"ring", {{"rings", c.ring.rings}, {"per_ring", c.ring.per_ring}, {"growth", c.ring.growth}}},
        {"occupancy", c.occupancy},
        {"lk",
         {{"window", c.lk.window},
          {"max_iter", c.lk.max_iter},
          {"eps", c.lk.eps},
          {"levels", c.lk.levels},
          {"min_eig", c.lk.min_eig}}},
        {"normalize", c.normalize},
        {"pca_retained", c.pca_retained},
        {"learner",
         {{"kind", to_string(c.learner.kind)},
          {"c", c.learner.c},
          {"gamma", c.learner.gamma},
          {"epsilon", c.learner.epsilon},
          {"max_iter", c.learner.max_iter},
          {"balanced", c.learner.balanced},
          {"tolerance", c.learner.tolerance}}},
        {"labels", {{"l_inf", c.labels.l_inf}, {"l_sup", c.labels.l_sup}}},
        {"k", c.k},
        {"fold_mode", to_string(c.fold_mode)},
        {"seed", c.seed},
    };
}

/// Overlays the keys present in `j` onto `base`.
inline PipelineConfig config_from_json(const nlohmann::json& j, PipelineConfig base = {}) {
    try {
        detail::reject_unknown(j,
                               {"ring", "occupancy", "lk", "normalize", "pca_retained", "learner", "labels", "k",
                                "fold_mode", "seed"},
                               "");
        if (j.contains("ring")) {
            const auto& r = j.at("ring");
            detail::reject_unknown(r, {"rings", "per_ring", "growth"}, "ring.");
            detail::read_if(r, "rings", base.ring.rings);
            detail::read_if(r, "per_ring", base.ring.per_ring);
            detail::read_if(r, "growth", base.ring.growth);
        }
        detail::read_if(j, "occupancy", base.occupancy);
        if (j.contains("lk")) {
            const auto& l = j.at("lk");
            detail::reject_unknown(l, {"window", "max_iter", "eps", "levels", "min_eig"}, "lk.");
            detail::read_if(l, "window", base.lk.window);
            detail::read_if(l, "max_iter", base.lk.max_iter);
            detail::read_if(l, "eps", base.lk.eps);
            detail::read_if(l, "levels", base.lk.levels);
            detail::read_if(l, "min_eig", base.lk.min_eig);
        }
        detail::read_if(j, "normalize", base.normalize);
        detail::read_if(j, "pca_retained", base.pca_retained);
        if (j.contains("learner")) {
            const auto& l = j.at("learner");
            detail::reject_unknown(l, {"kind", "c", "gamma", "epsilon", "max_iter", "balanced", "tolerance"}, "learner.");
            if (l.contains("kind")) base.learner.kind = learner_from_string(l.at("kind").get<std::string>());
            detail::read_if(l, "c", base.learner.c);
            detail::read_if(l, "gamma", base.learner.gamma);
            detail::read_if(l, "epsilon", base.learner.epsilon);
            detail::read_if(l, "max_iter", base.learner.max_iter);
            detail::read_if(l, "balanced", base.learner.balanced);
            detail::read_if(l, "tolerance", base.learner.tolerance);
        }
        if (j.contains("labels")) {
            const auto& l = j.at("labels");
            detail::reject_unknown(l, {"l_inf", "l_sup"}, "labels.");
            detail::read_if(l, "l_inf", base.labels.l_inf);
            detail::read_if(l, "l_sup", base.labels.l_sup);
        }
        detail::read_if(j, "k", base.k);
        if (j.contains("fold_mode")) base.fold_mode = fold_mode_from_string(j.at("fold_mode").get<std::string>());
        detail::read_if(j, "seed", base.seed);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::DataFormat, std::string("config: ") + e.what());
    }
    base.validate();
    return base;
}

inline PipelineConfig load_config(const std::string& path, PipelineConfig base = {}) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::DataFormat, "cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::DataFormat, path + ": " + e.what());
    }
    return config_from_json(j, base);
}

}  // namespace ofnav
