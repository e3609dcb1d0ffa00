#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <random>

#include "sdsem/model.hpp"
#include "sdsem/spec_io.hpp"
#include "support/fixtures.hpp"

using namespace sdsem;
using sdsem::testing::bundled;
using sdsem::testing::spec_path;

namespace {

bool cites(const ValidationReport& report, const std::string& rule) {
    return std::any_of(report.begin(), report.end(),
                       [&](const Violation& v) { return v.rule == rule; });
}

ModelSpec cyclic_statics(Mode mode) {
    TimeHorizon h{0.0, 10.0, 0.5, {}};
    auto spec = make_zero_spec({1, 3, 0, 0}, h, mode);
    spec.dynamic.B1(0, 0) = 1.0;
    spec.dynamic.Gamma1(0, 0) = 1.0;
    // y3 <-> y2 (1-based): B3[2][1] and B3[1][2] with unit exponents.
    spec.statics.B3(2, 1) = 0.4;
    spec.statics.Gamma3(2, 1) = 1.0;
    spec.statics.B3(1, 2) = 0.3;
    spec.statics.Gamma3(1, 2) = 1.0;
    return spec;
}

std::size_t position(const std::vector<std::size_t>& order, std::size_t one_based) {
    return static_cast<std::size_t>(std::find(order.begin(), order.end(), one_based - 1) -
                                    order.begin());
}

}  // namespace

TEST(Validate, LimitsToGrowthIsAdmissible) {
    const auto spec = load_spec_unvalidated(spec_path("limits_to_growth"));
    EXPECT_TRUE(validate(spec).empty());
}

TEST(Validate, TwoCycleRejectedInSdRestrictedMode) {
    const auto report = validate(cyclic_statics(Mode::SdRestricted));
    ASSERT_EQ(report.size(), 1u);
    EXPECT_EQ(report[0].rule, "static_cycle");
    EXPECT_NE(report[0].message.find("cycle"), std::string::npos);
}

TEST(Validate, TwoCycleAllowedInNonrecursiveMode) {
    EXPECT_TRUE(validate(cyclic_statics(Mode::Nonrecursive)).empty());
}

TEST(Validate, ZeroExponentDiagonalIsAConstantNotALoop) {
    auto spec = cyclic_statics(Mode::SdRestricted);
    spec.statics.B3(1, 2) = 0.0;
    spec.statics.B3(0, 0) = 7.0;  // exponent stays 0
    EXPECT_TRUE(validate(spec).empty());
    spec.statics.Gamma3(0, 0) = 1.0;  // now a genuine self-loop
    EXPECT_TRUE(cites(validate(spec), "static_cycle"));
}

TEST(Validate, InteractionThroughSelfIsACycle) {
    auto spec = cyclic_statics(Mode::SdRestricted);
    spec.statics.B3(1, 2) = 0.0;
    spec.statics.B4.push_back({1, 0, 1, 2.0});
    EXPECT_TRUE(cites(validate(spec), "static_cycle"));
}

TEST(Validate, ReportsEveryViolation) {
    auto spec = cyclic_statics(Mode::SdRestricted);
    spec.horizon.dt = 50.0;
    spec.dynamic.x0 = {std::nan("")};
    spec.statics.B4.push_back({0, 2, 1, 1.0});
    const auto report = validate(spec);
    EXPECT_TRUE(cites(report, "horizon"));
    EXPECT_TRUE(cites(report, "finite"));
    EXPECT_TRUE(cites(report, "interaction"));
    EXPECT_TRUE(cites(report, "static_cycle"));
}

TEST(Validate, DimensionAndMeasurementRules) {
    TimeHorizon h{0.0, 5.0, 1.0, {1.0, 1.0}};
    auto spec = make_zero_spec({1, 1, 1, 2}, h);
    spec.measurement.ThetaX(0, 0) = -1.0;
    spec.measurement.epsilon_sd[0] = -0.1;
    spec.disturbances.push_back({0, DisturbanceKind::Pulse, 1.0, 9.0, 0.0, 0.0, 0});
    const auto report = validate(spec);
    EXPECT_TRUE(cites(report, "delay"));
    EXPECT_TRUE(cites(report, "error_sd"));
    EXPECT_TRUE(cites(report, "disturbance"));
    EXPECT_TRUE(std::any_of(report.begin(), report.end(), [](const Violation& v) {
        return v.message.find("strictly increasing") != std::string::npos;
    }));

    auto no_obs = make_zero_spec({1, 1, 1, 0}, TimeHorizon{0.0, 1.0, {}, {}});
    EXPECT_TRUE(cites(validate(no_obs), "dims"));
    auto no_statics = make_zero_spec({1, 0, 0, 0}, TimeHorizon{0.0, 1.0, {}, {}});
    EXPECT_TRUE(cites(validate(no_statics), "dims"));
}

TEST(TopologicalOrder, LimitsToGrowthDependencies) {
    const auto order = topological_order(bundled("limits_to_growth"));
    ASSERT_EQ(order.size(), 9u);
    EXPECT_LT(position(order, 3), position(order, 4));
    EXPECT_LT(position(order, 4), position(order, 5));
    EXPECT_LT(position(order, 1), position(order, 6));
    EXPECT_LT(position(order, 9), position(order, 6));
    EXPECT_LT(position(order, 5), position(order, 7));
    EXPECT_LT(position(order, 6), position(order, 7));
    EXPECT_LT(position(order, 2), position(order, 8));
    // Deterministic smallest-index-first tie breaking.
    EXPECT_EQ(order, (std::vector<std::size_t>{0, 1, 2, 3, 8, 4, 5, 6, 7}));
}

TEST(TopologicalOrder, NoEdgesGivesIdentity) {
    auto spec = make_zero_spec({0, 5, 0, 0}, TimeHorizon{0.0, 1.0, {}, {}});
    EXPECT_EQ(topological_order(spec), (std::vector<std::size_t>{0, 1, 2, 3, 4}));
}

TEST(TopologicalOrder, CycleThrows) {
    EXPECT_THROW((void)topological_order(cyclic_statics(Mode::Nonrecursive)), CycleError);
}

TEST(TopologicalOrder, RespectsEveryEdgeOnRandomDags) {
    std::mt19937_64 gen(42);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + gen() % 9;
        auto spec = make_zero_spec({0, n, 0, 0}, TimeHorizon{0.0, 1.0, {}, {}});
        // Random permutation defines a hidden DAG orientation.
        std::vector<std::size_t> perm(n);
        for (std::size_t i = 0; i < n; ++i) perm[i] = i;
        std::shuffle(perm.begin(), perm.end(), gen);
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t b = a + 1; b < n; ++b) {
                if (gen() % 3 == 0) {
                    spec.statics.B3(perm[b], perm[a]) = 1.0;
                    spec.statics.Gamma3(perm[b], perm[a]) = 1.0;
                }
            }
        }
        ASSERT_TRUE(validate(spec).empty());  // mode soundness: valid => ordering succeeds
        const auto order = topological_order(spec);
        for (const auto& e : static_dependence_edges(spec)) {
            EXPECT_LT(position(order, e.from + 1), position(order, e.to + 1));
        }
    }
}

TEST(ConstantEncoding, TableConstantsHaveNoInboundEdges) {
    const auto spec = bundled("limits_to_growth");
    const auto edges = static_dependence_edges(spec);
    for (std::size_t i : {0u, 1u, 2u}) {
        EXPECT_TRUE(is_constant_static(spec, i)) << "y" << i + 1;
        EXPECT_TRUE(std::none_of(edges.begin(), edges.end(),
                                 [&](const StaticEdge& e) { return e.to == i; }));
    }
    EXPECT_FALSE(is_constant_static(spec, 4));  // 1 - y4*y9 carries a constant and an interaction
    EXPECT_FALSE(is_constant_static(spec, 8));
}

TEST(SpecIo, BundledLimitsToGrowth) {
    const auto spec = bundled("limits_to_growth");
    EXPECT_EQ(spec.dims.m, 1u);
    EXPECT_EQ(spec.dims.n, 9u);
    EXPECT_EQ(spec.dynamic.x0, std::vector<double>{1.0});
    EXPECT_EQ(spec.mode, Mode::SdRestricted);
}

TEST(SpecIo, BundledPoliticalDemocracy) {
    const auto spec = bundled("political_democracy");
    EXPECT_EQ(spec.dims.m, 0u);
    EXPECT_EQ(spec.dims.n, 3u);
    EXPECT_EQ(spec.dims.p, 11u);
    EXPECT_EQ(spec.dims.q, 75u);
    EXPECT_NE(spec.description.find("placeholder"), std::string::npos);
}

TEST(SpecIo, DescriptionIsOptionalAndTyped) {
    auto spec = bundled("linear_population");
    EXPECT_TRUE(spec.description.empty());
    EXPECT_EQ(serialize_spec(spec).find("description"), std::string::npos);
    spec.description = "note";
    EXPECT_EQ(parse_spec(serialize_spec(spec)).description, "note");
    auto text = serialize_spec(spec);
    text.replace(text.find("\"note\""), 6, "42");
    EXPECT_THROW((void)parse_spec(text), SchemaError);
}

TEST(SpecIo, LabelsMustBeCsvSafe) {
    auto spec = bundled("linear_population");
    spec.names.z = {"a,b"};
    EXPECT_THROW((void)parse_spec(serialize_spec(spec)), SchemaError);
    spec.names.z = {""};
    EXPECT_THROW((void)parse_spec(serialize_spec(spec)), SchemaError);
}

TEST(SpecIo, NegativeDtIsASchemaErrorNamingTheField) {
    auto text = serialize_spec(bundled("linear_population"));
    const auto at = text.find("\"dt\": 0.01");
    ASSERT_NE(at, std::string::npos);
    text.replace(at, 10, "\"dt\": -0.01");
    try {
        (void)parse_spec(text);
        FAIL() << "expected SchemaError";
    } catch (const SchemaError& e) {
        EXPECT_EQ(e.field(), "horizon.dt");
    }
}

TEST(SpecIo, MalformedAndSchemaErrors) {
    EXPECT_THROW((void)parse_spec("{ not json"), ParseError);
    EXPECT_THROW((void)parse_spec("{}"), SchemaError);

    auto text = serialize_spec(bundled("linear_population"));
    auto extra = text;
    extra.insert(1, "\"surprise\": 1,");
    EXPECT_THROW((void)parse_spec(extra), SchemaError);

    auto wrong_shape = serialize_spec(bundled("limits_to_growth"));
    const auto at = wrong_shape.find("\"B1\": [");
    wrong_shape.insert(at + 7, "[1.0],");
    EXPECT_THROW((void)parse_spec(wrong_shape), SchemaError);

    EXPECT_THROW((void)load_spec("/nonexistent/spec.json"), ParseError);
}

TEST(SpecIo, ValidationErrorCarriesReport) {
    const auto text = serialize_spec(cyclic_statics(Mode::SdRestricted));
    try {
        (void)parse_spec(text);
        FAIL() << "expected ValidationError";
    } catch (const ValidationError& e) {
        ASSERT_FALSE(e.report().empty());
        EXPECT_EQ(e.report().front().rule, "static_cycle");
    }
    EXPECT_NO_THROW((void)parse_spec_unvalidated(text));
}

TEST(SpecIo, RoundTripIsBitExact) {
    // Awkward doubles (subnormal, non-terminating binary fractions, huge
    // magnitudes) must survive save -> load unchanged.
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (const char* name : {"limits_to_growth", "political_democracy", "linear_population",
                             "single_factor"}) {
        auto spec = bundled(name);
        for (std::size_t i = 0; i < spec.dims.n; ++i) {
            for (std::size_t j = 0; j < spec.dims.m; ++j) {
                spec.statics.B2(i, j) = u(gen) * 1e-7 + (spec.statics.B2(i, j) != 0.0 ? 1.0 / 3.0 : 0.0);
            }
        }
        for (std::size_t r = 0; r < spec.dims.p; ++r) {
            spec.measurement.epsilon_sd[r] = std::abs(u(gen)) * 1e300;
        }
        spec.horizon.t_final += 4.9406564584124654e-324;
        spec.disturbances.push_back({0, DisturbanceKind::Noise, 0.0, 0.0, 0.0, 0.1,
                                     18446744073709551615ull});
        const auto dir = std::filesystem::temp_directory_path() / "sdsem_roundtrip";
        const auto path = dir / (std::string(name) + ".json");
        save_spec(spec, path);
        EXPECT_EQ(load_spec(path), spec) << name;
        EXPECT_EQ(serialize_spec(load_spec(path)), serialize_spec(spec));
    }
}

TEST(SpecIo, MissingDtFallsBackToDefault) {
    auto spec = bundled("linear_population");
    spec.horizon.dt.reset();
    const auto reloaded = parse_spec(serialize_spec(spec));
    EXPECT_FALSE(reloaded.horizon.dt.has_value());
    EXPECT_DOUBLE_EQ(default_dt(reloaded.horizon), 0.0625);
    EXPECT_DOUBLE_EQ(default_dt(TimeHorizon{0.0, 2.0, {}, {}}), 2.0 / 64.0);
}
