#include "grou/levy.hpp"
#include "grou/stats.hpp"
#include "helpers.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace grou;

namespace {

DynamicsMatrix dyn(const Mat& q) { return {q, Provenance::Free}; }

Mat scalar(double v) { return (Mat(1, 1) << v).finished(); }

}  // namespace

TEST(Var1, DegenerateStep) {
    const Mat q = (Mat(2, 2) << 1, 0.3, -0.2, 0.8).finished();
    const auto v = var1_decompose(dyn(q), LevyDriverSpec::brownian(Mat::Identity(2, 2)), 1e-12);
    EXPECT_LT((v.phi - Mat::Identity(2, 2)).norm(), 1e-11);
    EXPECT_LT(v.noise_cov.norm(), 1e-11);
}

TEST(Var1, ScalarFormula) {
    const auto v = var1_decompose(dyn(scalar(1.0)), LevyDriverSpec::brownian(scalar(1.0)), std::numbers::ln2);
    EXPECT_NEAR(v.phi(0, 0), 0.5, 1e-15);
    EXPECT_NEAR(v.noise_cov(0, 0), 0.375, 1e-15);
    EXPECT_THROW(var1_decompose(dyn(scalar(1.0)), LevyDriverSpec::brownian(scalar(1.0)), 0.0), ContractViolation);
}

TEST(Var1, NoiseCovariancePsdAndMatchesVanLoan) {
    Rng rng(31);
    for (int trial = 0; trial < 100; ++trial) {
        const int d = 1 + trial % 6;
        const Mat q = testing_util::random_stable(rng, d, rng.uniform(0.1, 1.0));
        const Mat sigma = testing_util::random_spd(rng, d);
        const double dt = rng.uniform(0.001, 1.0);
        const auto v = var1_decompose(dyn(q), LevyDriverSpec::brownian(sigma), dt);
        EXPECT_GT(min_eigenvalue_sym(v.noise_cov), -1e-12);
        const Mat direct = detail::integrated_covariance_van_loan(q, sigma, dt);
        EXPECT_LT((direct - v.noise_cov).norm(), 1e-10 * std::max(1.0, direct.norm())) << trial;
    }
}

TEST(Var1, NonStationaryUsesDirectIntegral) {
    const Mat q = scalar(-0.5);
    const auto v = var1_decompose(dyn(q), LevyDriverSpec::brownian(scalar(2.0)), 0.1);
    // int_0^dt exp(2 a s) 2 ds with a = 0.5
    EXPECT_NEAR(v.noise_cov(0, 0), 2.0 * (std::exp(0.1) - 1.0), 1e-13);
}

TEST(Simulate, ScalarStationaryVariance) {
    const auto path = simulate_grou(dyn(scalar(1.0)), LevyDriverSpec::brownian(scalar(1.0)), 1e4, 0.01, 7,
                                    StationaryInit{});
    EXPECT_EQ(path.points(), 1000001);
    const Mat m = ergodic_average(path, functional::outer());
    const double mean = ergodic_average(path, functional::identity())(0, 0);
    EXPECT_NEAR(m(0, 0) - mean * mean, 0.5, 0.05);
}

TEST(Simulate, DeterministicDecay) {
    const Mat q = (Mat(2, 2) << 1.0, 0.4, 0.0, 0.7).finished();
    const Vec y0 = (Vec(2) << 1.0, -2.0).finished();
    const auto path = simulate_grou(dyn(q), LevyDriverSpec::brownian(1e-20 * Mat::Identity(2, 2)), 5.0, 0.05, 1,
                                    FixedInit{y0});
    for (std::int64_t k = 0; k < path.points(); k += 10) {
        const oracle::Series e = oracle::matvec(oracle::expm_taylor(testing_util::to_dense(-path.time(k) * q)),
                                               oracle::Series(y0.data(), y0.data() + 2));
        const Vec expect = Eigen::Map<const Vec>(e.data(), 2);
        EXPECT_LT((Vec(path.point(k)) - expect).norm(), 1e-6) << k;
    }
}

TEST(Simulate, BitIdenticalForSameSeed) {
    const Mat q = q_from_theta(Graph::ring(4), {0.3, 1.0}).q;
    LevyDriverSpec drv = LevyDriverSpec::brownian(Mat::Identity(4, 4));
    drv.jumps = JumpSpec{1.0, JumpLaw::Laplace, 0.5};
    const auto a = simulate_grou(dyn(q), drv, 20, 0.01, 99, StationaryInit{});
    const auto b = simulate_grou(dyn(q), drv, 20, 0.01, 99, StationaryInit{});
    EXPECT_EQ(a.values(), b.values());
    ASSERT_EQ(a.jump_marks.size(), b.jump_marks.size());
    const auto c = simulate_grou(dyn(q), drv, 20, 0.01, 100, StationaryInit{});
    EXPECT_NE(a.values(), c.values());
    SimulationOptions other;
    other.replicate = 1;
    EXPECT_NE(a.values(), simulate_grou(dyn(q), drv, 20, 0.01, 99, StationaryInit{}, other).values());
}

TEST(Simulate, JumpsArePropagatedAndRecorded) {
    const Mat q = (Mat(2, 2) << 1.0, 0.2, 0.1, 0.9).finished();
    LevyDriverSpec drv = LevyDriverSpec::brownian(1e-30 * Mat::Identity(2, 2));
    drv.jumps = JumpSpec{3.0, JumpLaw::Gaussian, 2.0};
    const double dt = 0.1;
    const auto path = simulate_grou(dyn(q), drv, 20, dt, 5, FixedInit{Vec::Zero(2)});
    ASSERT_GT(path.jump_marks.size(), 20u);
    const Mat phi = matrix_exponential(-dt * q);
    Vec y = Vec::Zero(2);
    std::size_t m = 0;
    for (std::int64_t k = 0; k < path.steps(); ++k) {
        y = phi * y;
        while (m < path.jump_marks.size() && path.jump_marks[m].interval == k) {
            const auto& jm = path.jump_marks[m];
            EXPECT_GE(jm.time, k * dt);
            EXPECT_LE(jm.time, (k + 1) * dt);
            y += matrix_exponential(-((k + 1) * dt - jm.time) * q) * jm.size;
            ++m;
        }
        ASSERT_LT((y - Vec(path.point(k + 1))).norm(), 1e-9) << k;
    }
    EXPECT_EQ(m, path.jump_marks.size());
}

TEST(Simulate, ContractChecks) {
    EXPECT_THROW(simulate_grou(dyn(scalar(-1.0)), LevyDriverSpec::brownian(scalar(1.0)), 1, 0.1, 1, StationaryInit{}),
                 ContractViolation);
    EXPECT_NO_THROW(simulate_grou(dyn(scalar(-1.0)), LevyDriverSpec::brownian(scalar(1.0)), 1, 0.1, 1,
                                  FixedInit{Vec::Zero(1)}));
    EXPECT_THROW(simulate_grou(dyn(scalar(1.0)), LevyDriverSpec::brownian(scalar(-1.0)), 1, 0.1, 1, StationaryInit{}),
                 ConfigError);
    EXPECT_THROW(simulate_grou(dyn(scalar(1.0)), LevyDriverSpec::brownian(scalar(1.0)), 1, 0.0, 1, StationaryInit{}),
                 ContractViolation);
}

// One-step law: Mahalanobis norms of 1e5 draws from a fixed state against
// chi-square(d), at the 1% level.
TEST(Simulate, OneStepLawIsExact) {
    const Mat q = (Mat(3, 3) << 1.0, 0.3, 0.0, -0.2, 0.8, 0.1, 0.0, 0.4, 1.5).finished();
    const Mat sigma = (Mat(3, 3) << 1.0, 0.3, 0.1, 0.3, 0.5, 0.0, 0.1, 0.0, 2.0).finished();
    const LevyDriverSpec drv = LevyDriverSpec::brownian(sigma);
    const double dt = 0.3;
    const Vec y0 = (Vec(3) << 1.0, -1.0, 0.5).finished();
    // reference transition from the independent oracles
    const Mat phi = testing_util::from_dense(oracle::expm_taylor(testing_util::to_dense(-dt * q)));
    const Mat s = testing_util::from_dense(
        oracle::lyapunov_quadrature(testing_util::to_dense(q), testing_util::to_dense(sigma), 60.0));
    const Mat cov = s - phi * s * phi.transpose();
    const Eigen::LLT<Mat> llt(cov);
    detail::GrouStepper stepper(dyn(q), drv, dt, {}, 2024);
    std::vector<double> m2;
    Vec y(3);
    for (int i = 0; i < 100000; ++i) {
        y = y0;
        stepper.step(y, 0, nullptr);
        m2.push_back(llt.matrixL().solve(y - phi * y0).squaredNorm());
    }
    EXPECT_GE(stats::chi2_goodness_of_fit(m2, 3.0, 20), 0.01);
}

TEST(Simulate, GridRefinementKeepsMarginals) {
    const Mat q = (Mat(2, 2) << 1.0, 0.5, 0.0, 1.0).finished();
    const LevyDriverSpec drv = LevyDriverSpec::brownian(Mat::Identity(2, 2));
    const int n = 4000;
    Mat end_coarse(n, 2), end_fine(n, 2);
    for (int r = 0; r < n; ++r) {
        SimulationOptions so;
        so.replicate = static_cast<std::uint32_t>(r);
        end_coarse.row(r) = simulate_grou(dyn(q), drv, 1.0, 0.02, 1, FixedInit{Vec::Zero(2)}, so).point(50).transpose();
        end_fine.row(r) = simulate_grou(dyn(q), drv, 1.0, 0.01, 2, FixedInit{Vec::Zero(2)}, so).point(100).transpose();
    }
    const Mat vc = stats::covariance_rows(end_coarse);
    const Mat vf = stats::covariance_rows(end_fine);
    const Mat exact = detail::integrated_covariance_van_loan(q, Mat::Identity(2, 2), 1.0);
    for (int i = 0; i < 2; ++i) {
        const double se = exact(i, i) * std::sqrt(2.0 / n);
        EXPECT_NEAR(vc(i, i), vf(i, i), 4 * std::sqrt(2.0) * se);
        EXPECT_NEAR(vc(i, i), exact(i, i), 4 * se);
    }
}

TEST(Simulate, StationaryMeanWithDrift) {
    const Mat q = q_from_theta(Graph::ring(3), {0.4, 1.0}).q;
    LevyDriverSpec drv = LevyDriverSpec::brownian(0.5 * Mat::Identity(3, 3));
    drv.drift = (Vec(3) << 1.0, -0.5, 0.2).finished();
    drv.jumps = JumpSpec{0.5, JumpLaw::Uniform, 1.0};
    const Vec target = q.partialPivLu().solve(drv.drift);
    const int n = 1000;
    Mat ends(n, 3);
    for (int r = 0; r < n; ++r) {
        SimulationOptions so;
        so.replicate = static_cast<std::uint32_t>(r);
        ends.row(r) = simulate_grou(dyn(q), drv, 1.0, 0.01, 77, StationaryInit{}, so).point(100).transpose();
    }
    const Vec mean = ends.colwise().mean().transpose();
    const Vec se = (stats::covariance_rows(ends).diagonal() / n).cwiseSqrt();
    for (int i = 0; i < 3; ++i) EXPECT_LT(std::abs(mean[i] - target[i]), 4 * se[i]) << i;
}

TEST(Simulate, EulerSchemeIsClose) {
    const Mat q = q_from_theta(Graph::ring(3), {0.3, 1.0}).q;
    const LevyDriverSpec drv = LevyDriverSpec::brownian(Mat::Identity(3, 3));
    SimulationOptions so;
    so.scheme = Scheme::Euler;
    const auto path = simulate_grou(dyn(q), drv, 2000, 0.01, 3, StationaryInit{}, so);
    const Mat s = lyapunov_solve(q, Mat::Identity(3, 3));
    EXPECT_LT(testing_util::rel_err(ergodic_average(path, functional::outer()), s), 0.15);
}

TEST(ErgodicAverage, Examples) {
    const Vec c = (Vec(2) << 1.5, -2.0).finished();
    const SamplePath constant(0.1, c.replicate(1, 11));
    EXPECT_LT((ergodic_average(constant, functional::identity()) - c).norm(), 1e-15);
    const SamplePath one(0.1, c);
    EXPECT_EQ(ergodic_average(one, functional::identity()), Mat(c));

    const Mat q = (Mat(2, 2) << 1.0, 0.3, 0.3, 1.2).finished();
    const auto path = simulate_grou(dyn(q), LevyDriverSpec::brownian(Mat::Identity(2, 2)), 5000, 0.01, 8,
                                    StationaryInit{});
    const Mat s = lyapunov_solve(q, Mat::Identity(2, 2));
    EXPECT_LT(testing_util::rel_err(ergodic_average(path, functional::outer()), s), 0.1);
}

TEST(SamplePath, PrefixAndValidation) {
    EXPECT_THROW(SamplePath(0.1, Mat(2, 0)), ContractViolation);
    EXPECT_THROW(SamplePath(-0.1, Mat::Zero(2, 3)), ContractViolation);
    const SamplePath raw = SamplePath::without_dt(Mat::Zero(1, 4));
    EXPECT_FALSE(raw.has_dt());
    EXPECT_THROW((void)raw.dt(), ContractViolation);

    SamplePath p(0.5, Mat::Random(2, 11));
    p.jump_marks.push_back({2, 1.2, Vec::Ones(2)});
    p.jump_marks.push_back({8, 4.1, Vec::Ones(2)});
    const SamplePath pre = p.prefix(5);
    EXPECT_EQ(pre.points(), 6);
    EXPECT_EQ(pre.jump_marks.size(), 1u);
    EXPECT_DOUBLE_EQ(pre.horizon(), 2.5);
    EXPECT_THROW(p.prefix(11), ContractViolation);
}

TEST(JumpSpec, CoordinateVariance) {
    for (auto law : {JumpLaw::Gaussian, JumpLaw::Laplace, JumpLaw::Uniform}) {
        const JumpSpec js{1.0, law, 0.7};
        Rng rng(9);
        double s2 = 0;
        const int n = 100000;
        for (int i = 0; i < n; ++i) s2 += std::pow(js.sample(rng, 1)[0], 2);
        EXPECT_NEAR(s2 / n, js.coordinate_variance(), 0.03 * js.coordinate_variance()) << to_string(law);
        EXPECT_EQ(jump_law_from_string(to_string(law)), law);
    }
    EXPECT_THROW(jump_law_from_string("stable"), ConfigError);
}
