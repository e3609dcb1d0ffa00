#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "sdsem/dynamics.hpp"
#include "sdsem/measurement.hpp"

namespace sdsem {

/// Whether the comparison series is observed data o(t) or a reference mode r(t).
enum class SeriesRole { VsObserved, VsReference };

struct SeriesPair {
    std::vector<double> times;
    std::vector<double> simulated;
    std::vector<double> observed;
    SeriesRole role = SeriesRole::VsObserved;
};

struct TheilComponents {
    double bias = 0.0;         // U^M
    double variance = 0.0;     // U^S
    double covariance = 0.0;   // U^C
    bool constant_series = false;  // correlation forced to 0
};

struct FitReport {
    double mse = 0.0;
    double rmse = 0.0;
    double r_squared = 0.0;
    double mape = 0.0;       // percent, over nonzero observed values
    double theil_um = 0.0;
    double theil_us = 0.0;
    double theil_uc = 0.0;
    std::size_t mape_skipped = 0;
    std::vector<std::string> flags;

    [[nodiscard]] bool has_flag(const std::string& flag) const;
};

/// Theil inequality split of the MSE with population (divisor q) moments.
/// Throws PerfectFit when MSE = 0 and LengthMismatch on unequal series.
[[nodiscard]] TheilComponents theil_decomposition(const SeriesPair& pair);

/// MSE, RMSE, R^2 (about the observed mean, unclamped), MAPE, and Theil terms.
///
/// An exact fit is flagged `perfect_fit` with zero Theil terms. A constant
/// observed series reports R^2 = -inf and `r2_undefined`. Throws
/// LengthMismatch, InsufficientData (q < 2), or AllZeroObserved.
[[nodiscard]] FitReport basic_fit(const SeriesPair& pair);

/// Pairs a simulated latent with one indicator row by observation time.
[[nodiscard]] SeriesPair align(const Trajectory& sim, const ObservationMatrix& obs,
                               std::size_t indicator, LatentRef latent,
                               SeriesRole role = SeriesRole::VsObserved);

/// `key=value` lines with keys mse, rmse, r2, mape, u_m, u_s, u_c, flags.
[[nodiscard]] std::string to_key_value(const FitReport& report);

/// Header line and a single data row with the same keys.
[[nodiscard]] std::string to_csv(const FitReport& report);

}  // namespace sdsem
