#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <random>

#include "helpers.hpp"
#include "ofnav/classifier.hpp"

using namespace ofnav;

namespace {

// Synthetic flow patterns: positives expand from the centre, negatives are a uniform drift.
std::vector<LabeledSample> synthetic(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 0.15);
    std::uniform_real_distribution<double> dist_pos(15.0, 65.0), dist_neg(90.0, 300.0);
    const auto pts = make_ring_distribution(2, 6, 2.0).points;
    std::vector<LabeledSample> out;
    for (std::size_t i = 0; i < n; ++i) {
        const bool pos = i % 3 == 0;
        FlowField f;
        for (const auto& p : pts) {
            const Point2 u = pos ? Point2{2.0 * p.x + g(rng), -2.0 * p.y + g(rng)} : Point2{0.5 + g(rng), g(rng)};
            f.points.push_back(p);
            f.u.push_back(u);
            f.status.push_back(TrackStatus::Tracked);
        }
        LabeledSample s;
        s.features = flow_to_feature(f);
        s.label = pos ? Label::Positive : Label::Negative;
        s.distance_cm = pos ? dist_pos(rng) : dist_neg(rng);
        out.push_back(std::move(s));
    }
    return out;
}

PipelineConfig config_for(LearnerKind k) {
    PipelineConfig c;
    c.ring = {2, 6, 2.0};
    c.learner.kind = k;
    if (k == LearnerKind::Svr) c.learner.c = 100.0;  // targets span hundreds of cm
    return c;
}

}  // namespace

TEST(Classifier, EachLearnerSeparatesSyntheticPatterns) {
    const auto train = synthetic(90, 1);
    const auto test = synthetic(60, 2);
    for (auto k : {LearnerKind::Svm, LearnerKind::Perceptron, LearnerKind::Svr}) {
        TrainReport rep;
        const auto clf = train_classifier(train, config_for(k), &rep);
        EXPECT_EQ(clf.kind(), k);
        EXPECT_EQ(rep.samples, 90u);
        EXPECT_GE(rep.pca_rank, 1u);
        std::size_t correct = 0;
        for (const auto& s : test) correct += clf.classify(s.features) == s.label;
        EXPECT_GE(correct, 54u) << to_string(k);
    }
}

TEST(Classifier, ScaleGammaIsRecorded) {
    TrainReport rep;
    const auto clf = train_classifier(synthetic(30, 3), config_for(LearnerKind::Svm), &rep);
    const auto& m = std::get<SvmModel>(clf.learner());
    EXPECT_GT(rep.gamma, 0.0);
    EXPECT_EQ(m.gamma(), rep.gamma);
    EXPECT_EQ(m.dim(), clf.pca().rank());
}

TEST(Classifier, JsonRoundTripPredictsIdentically) {
    const auto train = synthetic(45, 4);
    for (auto k : {LearnerKind::Svm, LearnerKind::Perceptron, LearnerKind::Svr}) {
        const auto clf = train_classifier(train, config_for(k));
        const auto back = classifier_from_json(nlohmann::json::parse(to_json(clf).dump()));
        for (const auto& s : synthetic(20, 5)) {
            const auto z = clf.project(clf.condition(s.features));
            EXPECT_EQ(back.score(back.project(back.condition(s.features))), clf.score(z));
            EXPECT_EQ(back.classify(s.features), clf.classify(s.features));
        }
    }
}

TEST(Classifier, FileRoundTrip) {
    const auto clf = train_classifier(synthetic(30, 6), config_for(LearnerKind::Svm));
    const auto path = (std::filesystem::temp_directory_path() / "ofnav_classifier_test.json").string();
    save_classifier(path, clf);
    const auto back = load_classifier(path);
    std::remove(path.c_str());
    EXPECT_EQ(to_json(back), to_json(clf));
}

TEST(Classifier, RejectsCorruptModels) {
    const auto clf = train_classifier(synthetic(30, 7), config_for(LearnerKind::Perceptron));
    auto j = to_json(clf);
    auto wrong_tag = j;
    wrong_tag["format"] = "other";
    EXPECT_OFNAV_ERROR(classifier_from_json(wrong_tag), ErrorKind::DataFormat);
    auto mismatch = j;
    mismatch["kind"] = "svm";
    EXPECT_OFNAV_ERROR(classifier_from_json(mismatch), ErrorKind::DataFormat);
    auto missing = j;
    missing.erase("pca");
    EXPECT_OFNAV_ERROR(classifier_from_json(missing), ErrorKind::DataFormat);
    EXPECT_OFNAV_ERROR(load_classifier("/nonexistent/model.json"), ErrorKind::DataFormat);
}

TEST(Classifier, SvrNeedsDistances) {
    auto train = synthetic(30, 8);
    train[4].distance_cm.reset();
    EXPECT_OFNAV_ERROR(train_classifier(train, config_for(LearnerKind::Svr)), ErrorKind::DataFormat);
}

TEST(Classifier, SingleClassIsRejected) {
    auto train = synthetic(30, 9);
    for (auto& s : train) s.label = Label::Negative;
    EXPECT_OFNAV_ERROR(train_classifier(train, config_for(LearnerKind::Svm)), ErrorKind::InvalidArgument);
}

TEST(FlowExtractor, PointsFollowTheRingLayout) {
    const FlowExtractor fx(PipelineConfig{}, 320, 240);
    ASSERT_EQ(fx.points().size(), 101u);
    EXPECT_EQ(fx.points()[0], (Point2{160.0, 120.0}));
    const auto img = fixtures::noise_canvas(320, 240, 0, 1);
    const auto p = fx.prepare(img);
    const auto f = fx.track(p, p);
    for (std::size_t i = 0; i < f.size(); ++i)
        if (f.tracked(i)) {
            EXPECT_EQ(f.u[i], (Point2{0.0, 0.0}));
        }
}
