#include "grou/mc.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace grou;

namespace {

ExperimentConfig theta_config(int d, std::vector<double> horizons, int reps) {
    ExperimentConfig c;
    c.scenario = Scenario::ThetaCLT;
    c.model.graph = Graph::ring(d);
    c.model.theta = {0.3, 1.0};
    c.driver = LevyDriverSpec::brownian(Mat::Identity(d, d));
    c.horizons = std::move(horizons);
    c.replicates = reps;
    c.seed = 42;
    c.threads = 1;
    return c;
}

}  // namespace

TEST(Scenario, NamesRoundTrip) {
    for (auto s : {Scenario::ThetaCLT, Scenario::PsiCLT, Scenario::QMaskedCLT, Scenario::LassoOracle,
                   Scenario::ConditionalCLT, Scenario::ErgodicLimits}) {
        EXPECT_EQ(scenario_from_string(to_string(s)), s);
    }
    EXPECT_THROW(scenario_from_string("bootstrap"), ConfigError);
}

TEST(ExperimentConfigTest, Validation) {
    ExperimentConfig c = theta_config(3, {1.0, 2.0}, 2);
    EXPECT_NO_THROW(c.validate());
    c.horizons = {2.0, 1.0};
    EXPECT_THROW(c.validate(), ConfigError);
    c = theta_config(3, {1.0}, 1);
    EXPECT_THROW(c.validate(), ConfigError);
    c = theta_config(3, {1.0}, 2);
    c.model.theta = {-2.0, 0.5};
    EXPECT_THROW(c.validate(), ConfigError);
    c = theta_config(3, {1.0}, 2);
    c.scenario = Scenario::ConditionalCLT;
    EXPECT_THROW(c.validate(), ConfigError);
    c = theta_config(3, {1.0}, 2);
    c.model.param = Parametrization::Psi;
    c.model.psi = Vec::Ones(9);
    EXPECT_THROW(c.validate(), ConfigError);
}

TEST(RunExperiment, Smoke) {
    const McReport r = run_experiment(theta_config(4, {1.0}, 2));
    EXPECT_EQ(r.scenario, "theta_clt");
    EXPECT_EQ(r.replicates, 2);
    EXPECT_EQ(r.dim, 4);
    ASSERT_EQ(r.tables.size(), 1u);
    const HorizonTable& t = r.tables[0];
    EXPECT_EQ(t.successes, 2);
    EXPECT_EQ(t.bias.size(), 2);
    EXPECT_EQ(t.empirical_cov.rows(), 2);
    EXPECT_EQ(t.target_cov.rows(), 2);
    EXPECT_EQ(t.coverage[1].size(), 2);
    EXPECT_TRUE(t.cov_standardized_observed.has_value());
    EXPECT_TRUE(t.cov_standardized_deterministic.has_value());
    EXPECT_FALSE(t.support_exact_rate.has_value());
}

TEST(RunExperiment, DeterministicAcrossThreadCounts) {
    ExperimentConfig c = theta_config(3, {5.0, 10.0}, 12);
    const McReport a = run_experiment(c);
    c.threads = 3;
    const McReport b = run_experiment(c);
    ASSERT_EQ(a.tables.size(), b.tables.size());
    for (std::size_t h = 0; h < a.tables.size(); ++h) {
        EXPECT_EQ(a.tables[h].bias, b.tables[h].bias);
        EXPECT_EQ(a.tables[h].empirical_cov, b.tables[h].empirical_cov);
        EXPECT_EQ(a.tables[h].ks_pvalues, b.tables[h].ks_pvalues);
    }
    c.seed = 43;
    EXPECT_NE(run_experiment(c).tables[0].bias, a.tables[0].bias);
}

TEST(RunExperiment, AbortsWhenTooManyReplicatesFail) {
    ExperimentConfig c = theta_config(3, {1.0}, 4);
    c.model.graph = Graph::edgeless(3);
    try {
        run_experiment(c);
        FAIL();
    } catch (const NumericError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("4 of 4"), std::string::npos);
        EXPECT_NE(msg.find("Cauchy-Schwarz"), std::string::npos);
    }
}

TEST(RunExperiment, StandardisationsAgree) {
    const McReport r = run_experiment(theta_config(5, {100.0}, 200));
    const HorizonTable& t = r.tables[0];
    const Mat& obs = *t.cov_standardized_observed;
    const Mat& det = *t.cov_standardized_deterministic;
    EXPECT_LT((obs - det).norm() / det.norm(), 0.1);
    EXPECT_LT((obs - Mat::Identity(2, 2)).norm(), 0.4);
}

TEST(RunExperiment, ThetaCoverage) {
    const McReport r = run_experiment(theta_config(4, {50.0}, 200));
    const HorizonTable& t = r.tables[0];
    for (int j = 0; j < 2; ++j) {
        // binomial(200, 0.95) sd ~ 0.015
        EXPECT_NEAR(t.coverage[1][j], 0.95, 0.06) << j;
        EXPECT_LE(t.coverage[0][j], t.coverage[1][j]);
        EXPECT_LE(t.coverage[1][j], t.coverage[2][j]);
    }
}

TEST(RunExperiment, MaskedCoordinatesAreInert) {
    ExperimentConfig c = theta_config(3, {20.0}, 20);
    c.scenario = Scenario::QMaskedCLT;
    c.model.graph = Graph::star(3);
    c.model.param = Parametrization::Psi;
    c.model.psi = vec(q_from_theta(c.model.graph, {0.3, 1.0}).q);
    const McReport r = run_experiment(c);
    const Mat mask = network_mask(c.model.graph);
    const HorizonTable& t = r.tables[0];
    ASSERT_EQ(t.target_cov.rows(), 9);
    for (int k = 0; k < 9; ++k) {
        if (vec(mask)[k] == 0.0) {
            EXPECT_EQ(t.target_cov(k, k), 0.0);
            EXPECT_EQ(t.bias[k], 0.0);
            EXPECT_EQ(t.ks_pvalues[k], 1.0);
        } else {
            EXPECT_GT(t.target_cov(k, k), 0.0);
        }
    }
}

TEST(RunExperiment, LassoBlocksFilled) {
    ExperimentConfig c = theta_config(4, {50.0}, 6);
    c.scenario = Scenario::LassoOracle;
    c.model.param = Parametrization::Psi;
    c.model.psi = vec(q_from_theta(c.model.graph, {0.3, 1.0}).q);
    const HorizonTable t = run_experiment(c).tables[0];
    ASSERT_TRUE(t.support_exact_rate.has_value());
    EXPECT_EQ(*t.kkt_failures, 0);
    EXPECT_LT(*t.lambda_zero_max_diff, 1e-8);
    EXPECT_GE(*t.support_tpr, 0.0);
    EXPECT_LE(*t.support_fpr, 1.0);
}

TEST(RunExperiment, ErgodicErrorShrinks) {
    ExperimentConfig c = theta_config(3, {10.0, 100.0, 400.0}, 20);
    c.scenario = Scenario::ErgodicLimits;
    const McReport r = run_experiment(c);
    EXPECT_GT(*r.tables[0].ergodic_median_error, *r.tables[2].ergodic_median_error);
    EXPECT_LT(*r.tables[2].ergodic_median_error, 0.2);
}

TEST(RunExperiment, ConditionalSmoke) {
    ExperimentConfig c = theta_config(3, {5.0, 10.0}, 4);
    c.scenario = Scenario::ConditionalCLT;
    VolatilityModel vm;
    vm.psou.v = Mat::Identity(3, 3);
    vm.psou.subordinator.gamma_l = 0.5 * Mat::Identity(3, 3);
    vm.psou.subordinator.jump_rate = 1.0;
    vm.jumps.gamma_j = Vec::Zero(3);
    c.volatility = vm;
    const McReport r = run_experiment(c);
    ASSERT_EQ(r.tables.size(), 2u);
    EXPECT_EQ(r.tables[1].successes, 4);
    EXPECT_TRUE(r.tables[1].target_cov.allFinite());
    EXPECT_FALSE(r.tables[1].cov_standardized_deterministic.has_value());
}
