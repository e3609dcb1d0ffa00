#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "sdsem/model.hpp"
#include "sdsem/static_solver.hpp"

namespace sdsem {

enum class IntegrationMethod { Euler, Rk4 };

struct IntegratorConfig {
    IntegrationMethod method = IntegrationMethod::Rk4;
    /// Overrides the spec's dt; when both are unset default_dt() applies.
    std::optional<double> dt;
    double overflow_guard = 1e12;
};

/// Step actually used for `spec` under `config`.
[[nodiscard]] double effective_dt(const ModelSpec& spec, const IntegratorConfig& config);

/// t_I, t_I + dt, ... with a short final step landing exactly on t_F.
[[nodiscard]] std::vector<double> make_grid(double t_initial, double t_final, double dt);

/// Selects one latent series: a stock x_i or a static variable y_i (0-based).
struct LatentRef {
    enum class Kind { Stock, Static };
    Kind kind = Kind::Stock;
    std::size_t index = 0;

    bool operator==(const LatentRef&) const = default;
};

/// Latent state x(t) and static values y(t) on a time grid.
class Trajectory {
public:
    Trajectory() = default;
    Trajectory(std::vector<double> grid, Matrix x_samples, Matrix y_samples);

    [[nodiscard]] const std::vector<double>& grid() const noexcept { return grid_; }
    [[nodiscard]] const Matrix& x_samples() const noexcept { return x_; }
    [[nodiscard]] const Matrix& y_samples() const noexcept { return y_; }
    [[nodiscard]] std::size_t stocks() const noexcept { return x_.cols(); }
    [[nodiscard]] std::size_t statics() const noexcept { return y_.cols(); }
    [[nodiscard]] std::size_t size() const noexcept { return grid_.size(); }

    /// Linear interpolation between grid points. Times before the first grid
    /// point clamp to the initial sample; times past the last throw OutOfSpan.
    [[nodiscard]] double value_at(LatentRef latent, double t) const;

    /// Sample stored at grid index k.
    [[nodiscard]] double sample(LatentRef latent, std::size_t k) const;

    bool operator==(const Trajectory&) const = default;

private:
    std::vector<double> grid_;
    Matrix x_;
    Matrix y_;
};

/// Dynamic subsystem compiled for repeated derivative evaluation.
class DynamicSystem {
public:
    explicit DynamicSystem(const ModelSpec& spec);

    /// dx at (x, t); `y_out`, when non-empty, receives the static values used.
    void derivative_into(std::span<const double> x, double t, std::span<double> dx,
                         std::span<double> y_out = {}) const;

    [[nodiscard]] const StaticEvaluator& statics() const noexcept { return statics_; }
    [[nodiscard]] const DisturbanceField& disturbances() const noexcept { return disturbances_; }
    [[nodiscard]] std::size_t stocks() const noexcept { return m_; }

private:
    struct RateTerm {
        std::size_t index;
        double coef;
        double exponent;
    };

    std::size_t m_ = 0;
    StaticEvaluator statics_;
    DisturbanceField disturbances_;
    std::vector<std::vector<RateTerm>> rates_;
};

/// dx_i = sum_j B1[i][j] * y_j^Gamma1[i][j] with y from the static subsystem.
[[nodiscard]] std::vector<double> derivative(const ModelSpec& spec, std::span<const double> x,
                                             double t);

/// Integrates x from x0 over [t_I, t_F]. Throws OverflowError when any |x_i|
/// exceeds the guard or a value turns non-finite.
[[nodiscard]] Trajectory simulate(const ModelSpec& spec, const IntegratorConfig& config = {});

/// Static values evaluated at the given times with x held at x0 (m = 0 specs).
[[nodiscard]] Trajectory static_series(const ModelSpec& spec, std::span<const double> times);

/// pop0 * e^(c t): closed-form solution of d pop/dt = c * pop.
[[nodiscard]] double analytic_linear_population(double pop0, double c, double t);

/// Reference solution of the stocks as a function of time.
using StockOracle = std::function<std::vector<double>(double)>;

/// Least-squares slope of log(max error) against log(dt).
///
/// `dt_list` needs at least three entries, each half the previous one. Throws
/// OracleMismatch when the errors do not strictly decrease (including all-zero errors).
[[nodiscard]] double convergence_order(const ModelSpec& spec, const StockOracle& oracle,
                                       IntegrationMethod method, std::span<const double> dt_list);

}  // namespace sdsem
