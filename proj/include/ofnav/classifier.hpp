#pragma once

// The full classify path: raw flow feature -> (normalise) -> PCA -> learner -> label,
// bundled with the configuration that produced it so one model file is enough
// to reproduce predictions.

#include <fstream>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "ofnav/config.hpp"
#include "ofnav/features.hpp"
#include "ofnav/image.hpp"
#include "ofnav/lk.hpp"
#include "ofnav/pca.hpp"
#include "ofnav/perceptron.hpp"
#include "ofnav/svm.hpp"

namespace ofnav {

/// Frame conditioning and sparse tracking at the configured sample points.
class FlowExtractor {
public:
    FlowExtractor(const PipelineConfig& cfg, int width, int height)
        : lk_(cfg.lk),
          points_(project_distribution(make_ring_distribution(cfg.ring), width, height, cfg.occupancy)) {}

    GrayImage prepare(const GrayImage& gray) const { return preprocess_for_flow(gray); }

    FlowField track(const GrayImage& prev_prepared, const GrayImage& next_prepared) const {
        return lk_track(prev_prepared, next_prepared, points_, lk_);
    }

    const std::vector<Point2>& points() const noexcept { return points_; }
    const LkParams& lk() const noexcept { return lk_; }

private:
    LkParams lk_;
    std::vector<Point2> points_;
};

using Learner = std::variant<SvmModel, LinearModel, SvrModel>;

class Classifier {
public:
    Classifier(PipelineConfig cfg, PcaModel pca, Learner learner)
        : cfg_(std::move(cfg)), pca_(std::move(pca)), learner_(std::move(learner)) {}

    const PipelineConfig& config() const noexcept { return cfg_; }
    const PcaModel& pca() const noexcept { return pca_; }
    const Learner& learner() const noexcept { return learner_; }
    LearnerKind kind() const noexcept { return static_cast<LearnerKind>(learner_.index()); }

    std::vector<double> condition(const FeatureVector& raw) const {
        return cfg_.normalize ? normalize_magnitudes(raw).values : raw.values;
    }

    std::vector<double> project(std::span<const double> conditioned) const { return pca_project(pca_, conditioned); }

    /// Decision value (SVM / perceptron) or predicted distance in cm (SVR).
    double score(std::span<const double> projected) const {
        return std::visit(
            [&](const auto& m) -> double {
                using M = std::decay_t<decltype(m)>;
                if constexpr (std::is_same_v<M, SvrModel>) return m.predict(projected);
                else return m.decision(projected);
            },
            learner_);
    }

    Label predict_projected(std::span<const double> projected) const {
        const double s = score(projected);
        if (kind() == LearnerKind::Svr) return label_from_range(s, cfg_.labels);
        return s >= 0.0 ? Label::Positive : Label::Negative;
    }

    Label classify(const FeatureVector& raw) const { return predict_projected(project(condition(raw))); }

private:
    PipelineConfig cfg_;
    PcaModel pca_;
    Learner learner_;
};

struct TrainReport {
    std::size_t samples = 0;
    std::size_t pca_rank = 0;
    double gamma = 0.0;
    std::size_t support_vectors = 0;
    std::size_t iterations = 0;
};

inline Classifier train_classifier(const std::vector<LabeledSample>& train, const PipelineConfig& cfg,
                                   TrainReport* report = nullptr) {
    cfg.validate();
    if (train.size() < 2) fail(ErrorKind::InvalidArgument, "train: need at least 2 samples");
    std::vector<std::vector<double>> conditioned;
    conditioned.reserve(train.size());
    std::vector<Label> labels;
    labels.reserve(train.size());
    for (const auto& s : train) {
        conditioned.push_back(cfg.normalize ? normalize_magnitudes(s.features).values : s.features.values);
        labels.push_back(s.label);
    }
    PcaModel pca = pca_fit(conditioned, cfg.pca_retained);
    std::vector<std::vector<double>> z;
    z.reserve(conditioned.size());
    for (const auto& v : conditioned) z.push_back(pca_project(pca, v));

    const auto xs = SampleMatrix::from_rows(z);
    const double gamma = cfg.learner.gamma > 0.0 ? cfg.learner.gamma : scale_gamma(xs);
    SmoOptions opt;
    opt.tolerance = cfg.learner.tolerance;

    TrainReport rep;
    rep.samples = train.size();
    rep.pca_rank = pca.rank();

    auto make = [&]() -> Learner {
        switch (cfg.learner.kind) {
            case LearnerKind::Svm: {
                const ClassWeights w = cfg.learner.balanced ? balanced_weights(labels) : ClassWeights{};
                SvmTrainStats st;
                auto m = svm_train(z, labels, cfg.learner.c, gamma, w, opt, &st);
                rep.gamma = gamma;
                rep.support_vectors = m.support_vectors().rows;
                rep.iterations = st.iterations;
                return m;
            }
            case LearnerKind::Perceptron: {
                const ClassWeights w = cfg.learner.balanced ? balanced_weights(labels) : ClassWeights{};
                PerceptronStats st;
                auto m = perceptron_train(z, labels, cfg.learner.max_iter, w, &st);
                rep.iterations = st.epochs;
                return m;
            }
            case LearnerKind::Svr: {
                std::vector<double> target;
                target.reserve(train.size());
                for (const auto& s : train) {
                    if (!s.distance_cm) fail(ErrorKind::DataFormat, "train: SVR needs distance_cm on every sample");
                    target.push_back(*s.distance_cm);
                }
                auto m = svr_train(z, target, cfg.learner.c, gamma, cfg.learner.epsilon, opt);
                rep.gamma = gamma;
                rep.support_vectors = m.expansion().support_vectors.rows;
                return m;
            }
        }
        fail(ErrorKind::InvalidArgument, "train: unknown learner");
    };
    Learner learner = make();
    if (report) *report = rep;
    return Classifier(cfg, std::move(pca), std::move(learner));
}

inline nlohmann::json to_json(const Classifier& c) {
    nlohmann::json j;
    j["format"] = "ofnav-model";
    j["version"] = 1;
    j["kind"] = to_string(c.kind());
    j["pipeline"] = to_json(c.config());
    j["pca"] = c.pca();
    std::visit([&](const auto& m) { j["model"] = to_json(m); }, c.learner());
    return j;
}

inline Classifier classifier_from_json(const nlohmann::json& j) {
    try {
        if (j.at("format").get<std::string>() != "ofnav-model") fail(ErrorKind::DataFormat, "model: wrong format tag");
        const auto kind = learner_from_string(j.at("kind").get<std::string>());
        PipelineConfig cfg = config_from_json(j.at("pipeline"));
        if (cfg.learner.kind != kind) fail(ErrorKind::DataFormat, "model: kind does not match pipeline learner");
        PcaModel pca = j.at("pca").get<PcaModel>();
        const auto& mj = j.at("model");
        auto learner = [&]() -> Learner {
            switch (kind) {
                case LearnerKind::Svm: return svm_from_json(mj);
                case LearnerKind::Perceptron: return linear_from_json(mj);
                case LearnerKind::Svr: return svr_from_json(mj);
            }
            fail(ErrorKind::DataFormat, "model: unknown kind");
        }();
        return Classifier(std::move(cfg), std::move(pca), std::move(learner));
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::DataFormat, std::string("model: ") + e.what());
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::InvalidArgument) fail(ErrorKind::DataFormat, std::string("model: ") + e.what());
        throw;
    }
}

inline void save_classifier(const std::string& path, const Classifier& c) {
    std::ofstream out(path);
    if (!out) fail(ErrorKind::DataFormat, "cannot write " + path);
    out << to_json(c).dump() << '\n';
}

inline Classifier load_classifier(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::DataFormat, "cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::DataFormat, path + ": " + e.what());
    }
    return classifier_from_json(j);
}

}  // namespace ofnav
