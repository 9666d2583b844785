#include <gtest/gtest.h>

#include "support/configs.hpp"
#include "taoi/model.hpp"

using namespace taoi;

namespace {

const LatencyConfig kFig3Lat{1, 2, 2, 11};

SystemConfig fig3_capped(State cap) {
    return SystemConfig::make(kFig3Lat, {0.4, 0.5, 0.6, 0.8}, cap);
}

}  // namespace

TEST(StepDuration, Examples) {
    EXPECT_EQ(step_duration({0, 0}, kFig3Lat), 3);
    EXPECT_EQ(step_duration({1, 1}, kFig3Lat), 13);
    // t1u < t2u forbids all-equal latencies; the smallest admissible is (1,2,1,2).
    EXPECT_EQ(step_duration({1, 0}, LatencyConfig{1, 2, 1, 2}), 3);
    EXPECT_EQ(min_step_duration(kFig3Lat), 3);
    EXPECT_EQ(max_step_duration(kFig3Lat), 13);
}

TEST(StepDuration, EveryActionIsSumOfItsLegs) {
    const LatencyConfig lat{3, 5, 2, 9};
    EXPECT_EQ(step_duration({0, 0}, lat), 5);
    EXPECT_EQ(step_duration({1, 0}, lat), 7);
    EXPECT_EQ(step_duration({0, 1}, lat), 12);
    EXPECT_EQ(step_duration({1, 1}, lat), 14);
}

TEST(SuccessProb, Examples) {
    const AccuracyConfig fig2{0.3, 0.7, 0.5, 0.8};
    EXPECT_DOUBLE_EQ(success_prob({0, 0}, fig2), 0.3);
    EXPECT_DOUBLE_EQ(success_prob({1, 0}, fig2), 0.7);
    EXPECT_DOUBLE_EQ(success_prob({0, 1}, fig2), 0.5);
    EXPECT_DOUBLE_EQ(success_prob({1, 1}, fig2), 0.8);
    for (Action a : kActions) {
        EXPECT_EQ(success_prob(a, AccuracyConfig{1, 1, 1, 1}), 1.0);
    }
}

TEST(Action, CanonicalOrderAndIndex) {
    for (int i = 0; i < kNumActions; ++i) {
        EXPECT_EQ(kActions[static_cast<std::size_t>(i)].index(), i);
        EXPECT_EQ(Action::from_index(i), kActions[static_cast<std::size_t>(i)]);
    }
    EXPECT_EQ((Action{1, 0}.to_string()), "(1,0)");
}

TEST(Validation, LatencyOrdering) {
    EXPECT_THROW((LatencyConfig{5, 4, 1, 2}.validate()), ConfigError);
    EXPECT_THROW((LatencyConfig{1, 2, 3, 3}.validate()), ConfigError);
    EXPECT_THROW((LatencyConfig{0, 2, 1, 2}.validate()), ConfigError);
    EXPECT_NO_THROW((LatencyConfig{1, 2, 1, 2}.validate()));
}

TEST(Validation, ProbabilityRange) {
    EXPECT_THROW((AccuracyConfig{1.5, 0.5, 0.5, 0.5}.validate()), ConfigError);
    EXPECT_THROW((AccuracyConfig{0.0, 0.5, 0.5, 0.5}.validate()), ConfigError);
    EXPECT_NO_THROW((AccuracyConfig{1.0, 0.01, 0.5, 0.5}.validate()));
}

TEST(Validation, CapAndEpsilon) {
    const AccuracyConfig acc{0.4, 0.5, 0.6, 0.8};
    EXPECT_THROW(SystemConfig::make(kFig3Lat, acc, 129), ConfigError);
    EXPECT_NO_THROW(SystemConfig::make(kFig3Lat, acc, 130));
    EXPECT_THROW(SystemConfig::make(kFig3Lat, acc, std::nullopt, 3.5), ConfigError);
    EXPECT_THROW(SystemConfig::make(kFig3Lat, acc, std::nullopt, 0.0), ConfigError);
    const auto defaults = SystemConfig::make(kFig3Lat, acc);
    EXPECT_EQ(defaults.delta_hat, 1300);
    EXPECT_DOUBLE_EQ(defaults.epsilon, 3.0);
}

TEST(NextState, Examples) {
    const auto cfg = fig3_capped(500);
    EXPECT_EQ(next_state(10, {0, 0}, true, cfg), 3);
    EXPECT_EQ(next_state(10, {0, 0}, false, cfg), 13);
    for (Action a : kActions) {
        EXPECT_EQ(next_state(500, a, false, cfg), 500);
        EXPECT_EQ(next_state(499, a, false, cfg), 500);
    }
}

TEST(TransitionDistribution, Examples) {
    const auto cfg = fig3_capped(500);
    const auto row = transition_distribution(10, {0, 0}, cfg);
    ASSERT_EQ(row.size, 2);
    EXPECT_EQ(row.entries[0].next, 3);
    EXPECT_DOUBLE_EQ(row.entries[0].prob, 0.4);
    EXPECT_EQ(row.entries[1].next, 13);
    EXPECT_DOUBLE_EQ(row.entries[1].prob, 0.6);

    const auto sure = SystemConfig::make(kFig3Lat, {0.4, 0.5, 0.6, 1.0});
    const auto one = transition_distribution(10, {1, 1}, sure);
    ASSERT_EQ(one.size, 1);
    EXPECT_EQ(one.entries[0].next, 13);
    EXPECT_EQ(one.entries[0].prob, 1.0);

    const auto top = transition_distribution(500, {0, 1}, cfg);
    EXPECT_EQ(top.entries[top.size - 1].next, 500);
}

TEST(TransitionDistribution, RowsSumToOne) {
    for (const auto& cfg : testcfg::random_configs(10, 7)) {
        for (State s = 1; s <= cfg.delta_hat; s += 7) {
            for (Action a : kActions) {
                EXPECT_NEAR(transition_distribution(s, a, cfg).total(), 1.0, 1e-12);
            }
        }
    }
}

TEST(SmdpCost, Examples) {
    EXPECT_DOUBLE_EQ(smdp_cost(5, {0, 0}, fig3_capped(500)), 18.0);
    const auto unit = SystemConfig::make({1, 2, 1, 2}, {0.5, 0.5, 0.5, 0.5});
    EXPECT_DOUBLE_EQ(smdp_cost(1, {0, 0}, unit), 3.0);
}

TEST(SmdpCost, EqualsSlotSum) {
    const auto cfg = testcfg::fig2(9);
    for (State s : {1, 17, 400}) {
        for (Action a : kActions) {
            double sum = 0;
            for (int i = 0; i < step_duration(a, cfg.latency); ++i) sum += s + i;
            EXPECT_DOUBLE_EQ(smdp_cost(s, a, cfg), sum);
        }
    }
}
