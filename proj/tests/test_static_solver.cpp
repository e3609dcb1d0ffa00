#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "sdsem/errors.hpp"
#include "sdsem/generator.hpp"
#include "sdsem/static_solver.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace sdsem;
namespace st = sdsem::testing;

namespace {

const std::vector<double> kOne{1.0};

// Linear SD specs from the generator: exponents in {0, 1}, no interactions.
std::vector<ModelSpec> linear_sd_specs(std::size_t count, std::uint64_t seed) {
    GeneratorConfig cfg;
    cfg.exponent_pool = {0.0, 1.0};
    cfg.sparsity.B4 = 0.0;
    cfg.sparsity.B3 = 0.5;
    cfg.n = {2, 8};
    cfg.p = {0, 0};
    cfg.seed = seed;
    std::vector<ModelSpec> specs;
    for (const auto& item : batch(cfg, count).items) {
        if (item.system) specs.push_back(item.system->spec);
    }
    return specs;
}

}  // namespace

TEST(PowerTerm, EdgeCases) {
    EXPECT_EQ(power_term(0.0, 0.0), 1.0);
    EXPECT_EQ(power_term(-3.0, 0.0), 1.0);
    EXPECT_EQ(power_term(-2.0, 3.0), -8.0);
    EXPECT_EQ(power_term(4.0, 0.5), 2.0);
    EXPECT_EQ(power_term(4.0, -1.0), 0.25);
    EXPECT_THROW((void)power_term(-4.0, 0.5), DomainError);
    EXPECT_THROW((void)power_term(0.0, -1.0), DomainError);
}

TEST(EvalStatic, LimitsToGrowthAtUnitPopulation) {
    const auto spec = st::bundled("limits_to_growth");
    const auto y = eval_static(spec, kOne, 0.0).y;
    // y6 = y1*y9 and y7 = y5*y6, evaluated by hand.
    const std::vector<double> expected{0.15, 0.05, 100.0, 0.01, 0.99, 0.15, 0.1485, 0.05, 1.0};
    ASSERT_EQ(y.size(), expected.size());
    for (std::size_t i = 0; i < y.size(); ++i) EXPECT_NEAR(y[i], expected[i], 1e-15) << "y" << i + 1;
}

TEST(EvalStatic, ZeroSpecGivesZero) {
    auto spec = make_zero_spec({2, 4, 0, 0}, TimeHorizon{0.0, 1.0, {}, {}});
    spec.dynamic.x0 = {3.0, -2.0};
    const auto y = eval_static(spec, spec.dynamic.x0, 0.5).y;
    EXPECT_EQ(y, std::vector<double>(4, 0.0));
}

TEST(EvalStatic, ReciprocalPairInNonrecursiveMode) {
    const auto spec = st::reciprocal_pair();
    const auto y = eval_static(spec, {}, 0.0).y;
    EXPECT_NEAR(y[0], 4.0 / 3.0, 1e-14);
    EXPECT_NEAR(y[1], 2.0 / 3.0, 1e-14);
}

TEST(SolveNonrecursive, DirectPath) {
    SimultaneousOptions opts;
    opts.method = SimultaneousMethod::Direct;
    const auto y = solve_nonrecursive(st::reciprocal_pair(), {}, 0.0, DisturbanceField::none(), opts).y;
    EXPECT_NEAR(y[0], 4.0 / 3.0, 4 * std::numeric_limits<double>::epsilon());
    EXPECT_NEAR(y[1], 2.0 / 3.0, 4 * std::numeric_limits<double>::epsilon());
}

TEST(SolveNonrecursive, DampedIteration) {
    SimultaneousOptions opts;
    opts.method = SimultaneousMethod::DampedIteration;
    const auto y = solve_nonrecursive(st::reciprocal_pair(), {}, 0.0, DisturbanceField::none(), opts).y;
    EXPECT_NEAR(y[0], 4.0 / 3.0, 1e-10);
    EXPECT_NEAR(y[1], 2.0 / 3.0, 1e-10);
}

TEST(SolveNonrecursive, SingularSystem) {
    const auto spec = st::reciprocal_pair(1.0, 1.0, 1.0);
    for (auto method : {SimultaneousMethod::Auto, SimultaneousMethod::Direct,
                        SimultaneousMethod::DampedIteration}) {
        SimultaneousOptions opts;
        opts.method = method;
        try {
            (void)solve_nonrecursive(spec, {}, 0.0, DisturbanceField::none(), opts);
            ADD_FAILURE() << "expected failure";
        } catch (const SingularSystem&) {
        } catch (const NonConvergence&) {
        }
    }
}

TEST(SolveNonrecursive, RejectsSdRestrictedSpecs) {
    EXPECT_THROW((void)solve_nonrecursive(st::bundled("limits_to_growth"), kOne, 0.0), Error);
}

TEST(SolveNonrecursive, NonlinearCycleUsesIteration) {
    // y1 = 1 + 0.2 y2^2 and y2 = 0.5 y1 give y1 = 1 + 0.05 y1^2; the attracting root
    // is (1 - sqrt(0.8)) / 0.1.
    auto spec = st::reciprocal_pair(0.2, 0.5, 1.0);
    spec.statics.Gamma3(0, 1) = 2.0;
    const auto y = eval_static(spec, {}, 0.0).y;
    const double y1 = (1.0 - std::sqrt(0.8)) / 0.1;
    EXPECT_NEAR(y[0], y1, 1e-9);
    EXPECT_NEAR(y[1], 0.5 * y1, 1e-9);
}

TEST(EvalStatic, DomainErrors) {
    TimeHorizon h{0.0, 1.0, {}, {}};
    auto spec = make_zero_spec({1, 1, 0, 0}, h);
    spec.statics.B2(0, 0) = 1.0;
    spec.statics.Gamma2(0, 0) = 0.5;
    const std::vector<double> negative{-1.0};
    EXPECT_THROW((void)eval_static(spec, negative, 0.0), DomainError);
    spec.statics.Gamma2(0, 0) = -1.0;
    const std::vector<double> zero{0.0};
    EXPECT_THROW((void)eval_static(spec, zero, 0.0), DomainError);
}

TEST(EvalStatic, ZeroCoefficientNeverRaises) {
    TimeHorizon h{0.0, 1.0, {}, {}};
    auto spec = make_zero_spec({1, 2, 0, 0}, h);
    spec.statics.Gamma2(0, 0) = 0.5;   // padding with a hostile exponent
    spec.statics.Gamma3(1, 0) = -1.0;
    const std::vector<double> negative{-1.0};
    const auto y = eval_static(spec, negative, 0.0).y;
    EXPECT_EQ(y, (std::vector<double>{0.0, 0.0}));
}

TEST(EvalStatic, OverflowIsReported) {
    TimeHorizon h{0.0, 1.0, {}, {}};
    auto spec = make_zero_spec({1, 1, 0, 0}, h);
    spec.statics.B2(0, 0) = 1.0;
    spec.statics.Gamma2(0, 0) = 400.0;
    const std::vector<double> big{10.0};
    EXPECT_THROW((void)eval_static(spec, big, 0.0), OverflowError);
}

TEST(EvalStatic, DisturbancesAddAfterThePolynomial) {
    auto spec = st::linear_population();
    spec.disturbances.push_back({0, DisturbanceKind::Step, 2.0, 3.0, 0.0, 0.0, 0});
    spec.disturbances.push_back({0, DisturbanceKind::Pulse, 5.0, 4.0, 1.0, 0.0, 0});
    const DisturbanceField field(spec);
    const std::vector<double> x{10.0};
    EXPECT_DOUBLE_EQ(eval_static(spec, x, 2.9, field).y[0], 0.5);
    EXPECT_DOUBLE_EQ(eval_static(spec, x, 3.0, field).y[0], 2.5);
    EXPECT_DOUBLE_EQ(eval_static(spec, x, 4.5, field).y[0], 7.5);
    EXPECT_DOUBLE_EQ(eval_static(spec, x, 5.0, field).y[0], 2.5);
}

TEST(EvalStatic, NoiseIsKeyedByTimeNotCallOrder) {
    auto spec = st::linear_population();
    spec.disturbances.push_back({0, DisturbanceKind::Noise, 0.0, 0.0, 0.0, 1.0, 11});
    const DisturbanceField field(spec);
    const std::vector<double> x{10.0};
    const double a = eval_static(spec, x, 1.25, field).y[0];
    const double b = eval_static(spec, x, 7.5, field).y[0];
    EXPECT_NE(a, b);
    EXPECT_EQ(eval_static(spec, x, 7.5, field).y[0], b);
    EXPECT_EQ(eval_static(spec, x, 1.25, field).y[0], a);
}

TEST(StaticProperties, OrderInvariance) {
    const auto spec = st::bundled("limits_to_growth");
    const StaticEvaluator canonical(spec);
    // Another valid order: y9 first, y8 early.
    const StaticEvaluator moved(spec, {8, 2, 3, 0, 1, 7, 4, 5, 6});
    for (double x : {0.5, 1.0, 30.0, 66.0}) {
        const std::vector<double> xs{x};
        EXPECT_EQ(canonical.evaluate(xs, 0.0, DisturbanceField::none()).y,
                  moved.evaluate(xs, 0.0, DisturbanceField::none()).y);
    }
    EXPECT_THROW(StaticEvaluator(spec, {6, 0, 1, 2, 3, 4, 5, 7, 8}), Error);
}

TEST(StaticProperties, OracleEquivalence) {
    std::size_t checked = 0;
    for (const auto& spec : linear_sd_specs(60, 99)) {
        const StaticEvaluator eval(spec);
        ASSERT_TRUE(eval.is_linear());
        const auto& x = spec.dynamic.x0;
        const auto y = eval.evaluate(x, 0.0, DisturbanceField::none()).y;
        const auto ref = st::linear_static_oracle(spec, x);
        SimultaneousOptions direct;
        direct.method = SimultaneousMethod::Direct;
        const auto lin = eval.solve_simultaneous(x, 0.0, DisturbanceField::none(), direct).y;
        double scale = 1e-300;
        for (double v : ref) scale = std::max(scale, std::abs(v));
        for (std::size_t i = 0; i < y.size(); ++i) {
            EXPECT_LE(std::abs(y[i] - ref[i]), 1e-10 * scale);
            EXPECT_LE(std::abs(lin[i] - ref[i]), 1e-10 * scale);
        }
        ++checked;
    }
    EXPECT_EQ(checked, 60u);
}

TEST(StaticProperties, Homogeneity) {
    TimeHorizon h{0.0, 1.0, {}, {}};
    auto spec = make_zero_spec({3, 2, 0, 0}, h);
    spec.dynamic.x0 = {1.5, -0.7, 2.25};
    for (std::size_t j = 0; j < 3; ++j) {
        spec.statics.B2(0, j) = 0.3 * static_cast<double>(j + 1);
        spec.statics.Gamma2(0, j) = 1.0;
    }
    spec.statics.B2(1, 0) = 4.0;
    spec.statics.Gamma2(1, 0) = 1.0;
    const auto base = eval_static(spec, spec.dynamic.x0, 0.0).y;
    for (std::size_t j = 0; j < 3; ++j) spec.statics.B2(0, j) *= 2.0;
    const auto doubled = eval_static(spec, spec.dynamic.x0, 0.0).y;
    EXPECT_EQ(doubled[0], 2.0 * base[0]);
    EXPECT_EQ(doubled[1], base[1]);
}

TEST(StaticProperties, Determinism) {
    auto spec = st::bundled("political_democracy");
    const DisturbanceField field(spec);
    const StaticEvaluator eval(spec);
    for (double t : {0.0, 3.0, 41.0}) {
        EXPECT_EQ(eval.evaluate({}, t, field).y, eval_static(spec, {}, t, field).y);
    }
}

TEST(StaticEvaluator, RejectsInvalidSpecs) {
    auto spec = st::reciprocal_pair();
    spec.mode = Mode::SdRestricted;
    EXPECT_THROW(StaticEvaluator{spec}, ValidationError);
}
