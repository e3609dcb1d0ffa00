#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sdsem/dynamics.hpp"
#include "sdsem/model.hpp"

namespace sdsem {

/// p x q indicator data; column k belongs to times[k].
struct ObservationMatrix {
    Matrix values;
    std::vector<double> times;
    std::vector<std::string> indicator_labels;

    bool operator==(const ObservationMatrix&) const = default;
};

/// Indicator values at the spec's observation times.
///
/// z_p(t_k) = sum_i LambdaX[p][i] x_i(t_k - ThetaX[p][i])
///          + sum_i LambdaY[p][i] y_i(t_k - ThetaY[p][i]) + eps_p,
/// with delayed values linearly interpolated from the trajectory (clamped to
/// the initial sample before t_I) and eps_p ~ Normal(0, sd_p^2) keyed by
/// (seed, indicator, observation index).
[[nodiscard]] ObservationMatrix observe(const ModelSpec& spec, const Trajectory& trajectory,
                                        std::uint64_t seed);

/// Unbiased (divisor q - 1) covariance of the indicators across observations.
[[nodiscard]] Matrix sample_covariance(const ObservationMatrix& obs);

}  // namespace sdsem
