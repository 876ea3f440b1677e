#include <gtest/gtest.h>

#include "helpers.hpp"
#include "ofnav/perceptron.hpp"

using namespace ofnav;

using Rows = std::vector<std::vector<double>>;

TEST(Perceptron, SeparableDataConverges) {
    Rows x;
    std::vector<Label> y;
    for (double v : {-3.0, -2.0, -1.5, -1.0}) {
        x.push_back({v});
        y.push_back(Label::Negative);
    }
    for (double v : {1.0, 1.2, 2.5, 4.0}) {
        x.push_back({v});
        y.push_back(Label::Positive);
    }
    PerceptronStats st;
    const auto m = perceptron_train(x, y, 100, ClassWeights{}, &st);
    EXPECT_TRUE(st.converged);
    EXPECT_LT(st.epochs, 100u);
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(perceptron_predict(m, x[i]), y[i]);
}

TEST(Perceptron, ZeroEpochsPredictsPositive) {
    const Rows x{{1.0, 2.0}, {-1.0, 0.0}};
    const std::vector<Label> y{Label::Positive, Label::Negative};
    const auto m = perceptron_train(x, y, 0, ClassWeights{});
    EXPECT_EQ(m.weights, (std::vector<double>{0.0, 0.0}));
    EXPECT_EQ(m.bias, 0.0);
    EXPECT_EQ(m.predict(std::vector<double>{-5.0, -5.0}), Label::Positive);
}

TEST(Perceptron, XorNeverConverges) {
    const Rows x{{0, 0}, {1, 1}, {0, 1}, {1, 0}};
    const std::vector<Label> y{Label::Positive, Label::Positive, Label::Negative, Label::Negative};
    PerceptronStats st;
    const auto m = perceptron_train(x, y, 100, ClassWeights{}, &st);
    EXPECT_FALSE(st.converged);
    EXPECT_EQ(st.epochs, 100u);
    int correct = 0;
    for (std::size_t i = 0; i < 4; ++i) correct += m.predict(x[i]) == y[i];
    EXPECT_LT(correct, 4);
}

TEST(Perceptron, FirstUpdateFollowsTheRule) {
    // first sample is a mistake (0 <= 0) and gets step w(+1) * (+1)
    const Rows x{{2.0, -1.0}, {0.0, 3.0}};
    const std::vector<Label> y{Label::Positive, Label::Negative};
    const ClassWeights w{0.5, 3.0};
    const auto m = perceptron_train(x, y, 1, w);
    // after sample 0: w = (6,-3), b = 3; sample 1: -1 * (-9 + 3) > 0, no update
    EXPECT_EQ(m.weights, (std::vector<double>{6.0, -3.0}));
    EXPECT_EQ(m.bias, 3.0);
}

TEST(Perceptron, RejectsSingleClass) {
    const Rows x{{1.0}, {2.0}};
    const std::vector<Label> y{Label::Negative, Label::Negative};
    EXPECT_OFNAV_ERROR(perceptron_train(x, y, 10, {}), ErrorKind::InvalidArgument);
}

TEST(Perceptron, JsonRoundTrip) {
    const LinearModel m{{1.5, -2.0}, 0.25};
    const auto back = linear_from_json(to_json(m));
    EXPECT_EQ(back.weights, m.weights);
    EXPECT_EQ(back.bias, m.bias);
    EXPECT_OFNAV_ERROR(m.decision(std::vector<double>{1.0}), ErrorKind::InvalidArgument);
}
