#pragma once

#include <filesystem>
#include <string>

#include "sdsem/model.hpp"
#include "sdsem/spec_io.hpp"

#ifndef SDSEM_TEST_SPEC_DIR
#error "SDSEM_TEST_SPEC_DIR must point at the bundled specs"
#endif

namespace sdsem::testing {

inline std::filesystem::path spec_path(const std::string& name) {
    return std::filesystem::path(SDSEM_TEST_SPEC_DIR) / (name + ".json");
}

inline ModelSpec bundled(const std::string& name) { return load_spec(spec_path(name)); }

/// Two static variables with y1 = 1 + 0.5 y2 and y2 = 0.5 y1 (nonrecursive).
inline ModelSpec reciprocal_pair(double a = 0.5, double b = 0.5, double constant = 1.0) {
    TimeHorizon h{0.0, 1.0, 0.1, {}};
    auto spec = make_zero_spec({0, 2, 0, 0}, h, Mode::Nonrecursive);
    spec.statics.B3(0, 0) = constant;  // zero exponent: constant term
    spec.statics.B3(0, 1) = a;
    spec.statics.Gamma3(0, 1) = 1.0;
    spec.statics.B3(1, 0) = b;
    spec.statics.Gamma3(1, 0) = 1.0;
    return spec;
}

/// d pop/dt = c * pop via births = c * pop.
inline ModelSpec linear_population(double pop0 = 10.0, double c = 0.05, double t_final = 10.0) {
    TimeHorizon h{0.0, t_final, 0.01, {}};
    auto spec = make_zero_spec({1, 1, 0, 0}, h);
    spec.dynamic.B1(0, 0) = 1.0;
    spec.dynamic.Gamma1(0, 0) = 1.0;
    spec.dynamic.x0 = {pop0};
    spec.statics.B2(0, 0) = c;
    spec.statics.Gamma2(0, 0) = 1.0;
    return spec;
}

/// Two stocks exchanging material through one flow: dx1 = -flow, dx2 = +flow,
/// flow = k * x1.
inline ModelSpec transfer_pair(double k = 0.3, double x1 = 50.0, double x2 = 5.0) {
    TimeHorizon h{0.0, 20.0, 0.05, {}};
    auto spec = make_zero_spec({2, 1, 0, 0}, h);
    spec.dynamic.B1(0, 0) = -1.0;
    spec.dynamic.Gamma1(0, 0) = 1.0;
    spec.dynamic.B1(1, 0) = 1.0;
    spec.dynamic.Gamma1(1, 0) = 1.0;
    spec.dynamic.x0 = {x1, x2};
    spec.statics.B2(0, 0) = k;
    spec.statics.Gamma2(0, 0) = 1.0;
    return spec;
}

}  // namespace sdsem::testing
