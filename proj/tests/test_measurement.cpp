#include <gtest/gtest.h>

#include <cmath>

#include "sdsem/dynamics.hpp"
#include "sdsem/errors.hpp"
#include "sdsem/measurement.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace sdsem;
namespace st = sdsem::testing;

namespace {

constexpr LatentRef kX1{LatentRef::Kind::Stock, 0};
constexpr LatentRef kY1{LatentRef::Kind::Static, 0};

// Linear population with one indicator on the stock and one on births.
ModelSpec two_indicator_population(std::vector<double> times) {
    auto spec = st::linear_population();
    spec.dims.p = 2;
    spec.dims.q = times.size();
    spec.horizon.observation_times = std::move(times);
    spec.measurement = MeasurementSpec{Matrix(2, 1), Matrix(2, 1), Matrix(2, 1), Matrix(2, 1), {0.0, 0.0}};
    spec.measurement.LambdaX(0, 0) = 1.0;
    spec.measurement.LambdaY(1, 0) = 1.0;
    return spec;
}

ObservationMatrix obs_rows(std::vector<std::vector<double>> rows) {
    ObservationMatrix obs;
    obs.values = Matrix(rows.size(), rows.front().size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < rows[r].size(); ++c) obs.values(r, c) = rows[r][c];
        obs.indicator_labels.push_back("z" + std::to_string(r + 1));
    }
    for (std::size_t c = 0; c < rows.front().size(); ++c) obs.times.push_back(static_cast<double>(c));
    return obs;
}

Trajectory line(double intercept, double slope) {
    std::vector<double> grid;
    Matrix x(11, 1), y(11, 1);
    for (std::size_t k = 0; k <= 10; ++k) {
        const double t = static_cast<double>(k);
        grid.push_back(t);
        x(k, 0) = intercept + slope * t;
        y(k, 0) = slope * t * t;
    }
    return Trajectory(grid, x, y);
}

}  // namespace

TEST(Observe, IdentityMeasurementReproducesLatents) {
    const auto spec = two_indicator_population({0.0, 0.5, 2.0, 7.25, 10.0});
    const auto traj = simulate(spec, {IntegrationMethod::Rk4, 0.25});
    const auto obs = observe(spec, traj, 1);
    ASSERT_EQ(obs.values.rows(), 2u);
    ASSERT_EQ(obs.values.cols(), 5u);
    EXPECT_EQ(obs.times, spec.horizon.observation_times);
    for (std::size_t c = 0; c < 5; ++c) {
        const std::size_t k = static_cast<std::size_t>(std::lround(obs.times[c] / 0.25));
        EXPECT_EQ(obs.values(0, c), traj.sample(kX1, k));
        EXPECT_EQ(obs.values(1, c), traj.sample(kY1, k));
    }
}

TEST(Observe, DelayShiftsTheExponential) {
    auto spec = two_indicator_population({2.0, 3.3, 5.01, 8.777, 10.0});
    spec.measurement.ThetaX(0, 0) = 2.0;
    const auto traj = simulate(spec, {IntegrationMethod::Rk4, 0.01});
    const auto obs = observe(spec, traj, 1);
    for (std::size_t c = 0; c < obs.times.size(); ++c) {
        EXPECT_NEAR(obs.values(0, c), std::exp(-0.1) * analytic_linear_population(10.0, 0.05, obs.times[c]),
                    1e-4);
    }
}

TEST(Observe, ConstantLatentScaled) {
    auto spec = two_indicator_population({0.0, 1.0, 4.0});
    spec.dynamic.B1(0, 0) = 0.0;
    spec.dynamic.x0 = {5.0};
    spec.measurement.LambdaX(0, 0) = 2.0;
    const auto obs = observe(spec, simulate(spec), 3);
    for (std::size_t c = 0; c < 3; ++c) EXPECT_EQ(obs.values(0, c), 10.0);
}

TEST(Observe, NoiseFreeIsSeedIndependent) {
    const auto spec = two_indicator_population({0.0, 1.0, 2.0});
    const auto traj = simulate(spec);
    EXPECT_EQ(observe(spec, traj, 1), observe(spec, traj, 2));
}

TEST(Observe, SeedReproducibility) {
    auto spec = two_indicator_population({0.0, 1.0, 2.0, 3.0});
    spec.measurement.epsilon_sd = {0.5, 0.0};
    const auto traj = simulate(spec);
    const auto a = observe(spec, traj, 17);
    EXPECT_EQ(a, observe(spec, traj, 17));
    const auto b = observe(spec, traj, 18);
    for (std::size_t c = 0; c < 4; ++c) {
        EXPECT_NE(a.values(0, c), b.values(0, c));
        EXPECT_EQ(a.values(1, c), b.values(1, c));  // noise-free row is untouched
    }
}

TEST(Observe, NoiseHasRequestedSpread) {
    std::vector<double> times;
    for (int k = 0; k < 20000; ++k) times.push_back(k * 0.0005);
    auto spec = two_indicator_population(times);
    spec.dynamic.B1(0, 0) = 0.0;
    spec.measurement.epsilon_sd = {0.5, 0.0};
    const auto obs = observe(spec, simulate(spec), 5);
    std::vector<double> row(times.size());
    for (std::size_t c = 0; c < times.size(); ++c) row[c] = obs.values(0, c) - 10.0;
    double mean = 0.0;
    for (double v : row) mean += v;
    mean /= static_cast<double>(row.size());
    EXPECT_NEAR(mean, 0.0, 0.02);
    EXPECT_NEAR(std::sqrt(st::sample_cov(row, row)), 0.5, 0.01);
}

TEST(Observe, Linearity) {
    const auto spec = [] {
        auto s = two_indicator_population({0.0, 1.5, 3.0, 9.5});
        s.measurement.LambdaX(1, 0) = -0.5;
        s.measurement.LambdaY(0, 0) = 2.0;
        s.measurement.ThetaX(0, 0) = 0.75;
        return s;
    }();
    const auto a = line(1.0, 0.5);
    const auto b = line(-3.0, 2.0);
    Matrix xs(11, 1), ys(11, 1);
    for (std::size_t k = 0; k < 11; ++k) {
        xs(k, 0) = a.x_samples()(k, 0) + b.x_samples()(k, 0);
        ys(k, 0) = a.y_samples()(k, 0) + b.y_samples()(k, 0);
    }
    const Trajectory sum(a.grid(), xs, ys);
    const auto oa = observe(spec, a, 0), ob = observe(spec, b, 0), os = observe(spec, sum, 0);
    for (std::size_t r = 0; r < 2; ++r) {
        for (std::size_t c = 0; c < 4; ++c) {
            EXPECT_NEAR(os.values(r, c), oa.values(r, c) + ob.values(r, c), 1e-12);
        }
    }
}

TEST(Observe, DelayClampsToInitialValue) {
    auto spec = two_indicator_population({0.0, 1.0, 2.5, 4.0});
    spec.measurement.ThetaX(0, 0) = 4.0;
    const auto traj = simulate(spec);
    const auto obs = observe(spec, traj, 0);
    for (std::size_t c = 0; c < 4; ++c) EXPECT_EQ(obs.values(0, c), traj.sample(kX1, 0));
}

TEST(Observe, GridAlignedDelayHasNoInterpolationError) {
    auto spec = two_indicator_population({3.0, 4.5, 10.0});
    spec.measurement.ThetaY(1, 0) = 1.25;
    const auto traj = simulate(spec, {IntegrationMethod::Rk4, 0.25});
    const auto obs = observe(spec, traj, 0);
    for (std::size_t c = 0; c < 3; ++c) {
        const auto k = static_cast<std::size_t>(std::lround((obs.times[c] - 1.25) / 0.25));
        EXPECT_EQ(obs.values(1, c), traj.sample(kY1, k));
    }
}

TEST(Observe, MismatchedTrajectoryIsRejected) {
    const auto spec = two_indicator_population({0.0, 1.0});
    const auto other = simulate(st::transfer_pair());
    EXPECT_THROW((void)observe(spec, other, 0), DimensionError);
}

TEST(Observe, LabelsComeFromNames) {
    const auto spec = st::bundled("political_democracy");
    const auto obs = observe(spec, static_series(spec, spec.horizon.observation_times), 0);
    ASSERT_EQ(obs.indicator_labels.size(), 11u);
    EXPECT_EQ(obs.values.cols(), 75u);
}

TEST(SampleCovariance, HandComputed) {
    const auto s = sample_covariance(obs_rows({{1, 2, 3}, {2, 4, 6}}));
    EXPECT_DOUBLE_EQ(s(0, 0), 1.0);
    EXPECT_DOUBLE_EQ(s(0, 1), 2.0);
    EXPECT_DOUBLE_EQ(s(1, 0), 2.0);
    EXPECT_DOUBLE_EQ(s(1, 1), 4.0);
}

TEST(SampleCovariance, IdenticalRowsAreRankOne) {
    const auto s = sample_covariance(obs_rows({{0.5, -1, 4, 2}, {0.5, -1, 4, 2}}));
    EXPECT_DOUBLE_EQ(s(0, 1), s(0, 0));
    EXPECT_DOUBLE_EQ(s(1, 1), s(0, 0));
    EXPECT_NEAR(s(0, 0) * s(1, 1) - s(0, 1) * s(1, 0), 0.0, 1e-12);
}

TEST(SampleCovariance, ConstantRowsGiveZero) {
    const auto s = sample_covariance(obs_rows({{3, 3, 3}, {-1, -1, -1}}));
    for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t j = 0; j < 2; ++j) EXPECT_EQ(s(i, j), 0.0);
    }
}

TEST(SampleCovariance, NeedsTwoObservations) {
    EXPECT_THROW((void)sample_covariance(obs_rows({{1.0}})), InsufficientData);
}
