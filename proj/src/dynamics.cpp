#include "sdsem/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace sdsem {

double effective_dt(const ModelSpec& spec, const IntegratorConfig& config) {
    if (config.dt) return *config.dt;
    if (spec.horizon.dt) return *spec.horizon.dt;
    return default_dt(spec.horizon);
}

std::vector<double> make_grid(double t_initial, double t_final, double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw Error("integration step must be positive and finite");
    }
    if (!(t_final > t_initial)) {
        throw Error("t_final must exceed t_initial");
    }
    const double span = t_final - t_initial;
    const auto full_steps = static_cast<std::size_t>(std::floor(span / dt));
    std::vector<double> grid;
    grid.reserve(full_steps + 2);
    for (std::size_t k = 0; k <= full_steps; ++k) {
        grid.push_back(t_initial + static_cast<double>(k) * dt);
    }
    // Snap a near-coincident last point onto t_F instead of adding a sliver step.
    if (t_final - grid.back() <= 1e-9 * dt) {
        if (grid.size() == 1) {
            grid.push_back(t_final);
        } else {
            grid.back() = t_final;
        }
    } else {
        grid.push_back(t_final);
    }
    return grid;
}

Trajectory::Trajectory(std::vector<double> grid, Matrix x_samples, Matrix y_samples)
    : grid_(std::move(grid)), x_(std::move(x_samples)), y_(std::move(y_samples)) {
    if (x_.rows() != grid_.size() || y_.rows() != grid_.size()) {
        throw DimensionError("trajectory sample rows must match the grid");
    }
    for (std::size_t k = 1; k < grid_.size(); ++k) {
        if (!(grid_[k] > grid_[k - 1])) {
            throw Error("trajectory grid must be strictly increasing");
        }
    }
}

double Trajectory::sample(LatentRef latent, std::size_t k) const {
    const Matrix& mat = latent.kind == LatentRef::Kind::Stock ? x_ : y_;
    if (latent.index >= mat.cols()) {
        throw DimensionError("latent index out of range");
    }
    return mat(k, latent.index);
}

double Trajectory::value_at(LatentRef latent, double t) const {
    if (grid_.empty()) {
        throw OutOfSpan("empty trajectory");
    }
    if (t <= grid_.front()) {
        return sample(latent, 0);
    }
    const double last = grid_.back();
    const double tol = 1e-9 * std::max(1.0, std::abs(last));
    if (t > last + tol) {
        std::ostringstream os;
        os << "time " << t << " is past the trajectory end " << last;
        throw OutOfSpan(os.str());
    }
    auto upper = std::upper_bound(grid_.begin(), grid_.end(), t);
    if (upper == grid_.end()) {
        return sample(latent, grid_.size() - 1);
    }
    const auto hi = static_cast<std::size_t>(upper - grid_.begin());
    const auto lo = hi - 1;
    const double h = grid_[hi] - grid_[lo];
    // Times within round-off of a grid point read that sample exactly.
    const double snap = 1e-9 * h;
    if (t - grid_[lo] <= snap) return sample(latent, lo);
    if (grid_[hi] - t <= snap) return sample(latent, hi);
    const double w = (t - grid_[lo]) / h;
    const double a = sample(latent, lo);
    const double b = sample(latent, hi);
    return a + w * (b - a);
}

DynamicSystem::DynamicSystem(const ModelSpec& spec)
    : m_(spec.dims.m), statics_(spec), disturbances_(spec), rates_(spec.dims.m) {
    for (std::size_t i = 0; i < m_; ++i) {
        for (std::size_t j = 0; j < spec.dims.n; ++j) {
            const double coef = spec.dynamic.B1(i, j);
            if (coef != 0.0) {
                rates_[i].push_back({j, coef, spec.dynamic.Gamma1(i, j)});
            }
        }
    }
}

void DynamicSystem::derivative_into(std::span<const double> x, double t, std::span<double> dx,
                                    std::span<double> y_out) const {
    std::vector<double> local;
    std::span<double> y = y_out;
    if (y.empty()) {
        local.resize(statics_.size());
        y = local;
    }
    statics_.evaluate_into(x, t, disturbances_, y);
    for (std::size_t i = 0; i < m_; ++i) {
        double sum = 0.0;
        for (const auto& term : rates_[i]) {
            sum += term.coef * power_term(y[term.index], term.exponent);
        }
        if (!std::isfinite(sum)) {
            throw OverflowError("non-finite rate for stock x" + std::to_string(i + 1), t);
        }
        dx[i] = sum;
    }
}

std::vector<double> derivative(const ModelSpec& spec, std::span<const double> x, double t) {
    DynamicSystem system(spec);
    std::vector<double> dx(spec.dims.m);
    system.derivative_into(x, t, dx);
    return dx;
}

namespace {

void check_guard(std::span<const double> x, double guard, double t) {
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i]) || std::abs(x[i]) > guard) {
            std::ostringstream os;
            os << "stock x" << i + 1 << " diverged (|x| > " << guard << ") at t = " << t;
            throw OverflowError(os.str(), t);
        }
    }
}

}  // namespace

Trajectory simulate(const ModelSpec& spec, const IntegratorConfig& config) {
    const DynamicSystem system(spec);
    const std::size_t m = spec.dims.m;
    const std::size_t n = spec.dims.n;
    auto grid = make_grid(spec.horizon.t_initial, spec.horizon.t_final, effective_dt(spec, config));
    const std::size_t points = grid.size();

    Matrix xs(points, m);
    Matrix ys(points, n);
    std::vector<double> x(spec.dynamic.x0);
    std::vector<double> k1(m), k2(m), k3(m), k4(m), stage(m);
    check_guard(x, config.overflow_guard, grid.front());

    for (std::size_t k = 0; k < points; ++k) {
        const double t = grid[k];
        std::copy(x.begin(), x.end(), xs.row(k).begin());
        // Stage 1 evaluates y at the grid point, which is exactly the stored sample.
        system.derivative_into(x, t, k1, ys.row(k));
        if (k + 1 == points) {
            break;
        }
        const double h = grid[k + 1] - t;
        if (config.method == IntegrationMethod::Euler) {
            for (std::size_t i = 0; i < m; ++i) x[i] += h * k1[i];
        } else {
            for (std::size_t i = 0; i < m; ++i) stage[i] = x[i] + 0.5 * h * k1[i];
            system.derivative_into(stage, t + 0.5 * h, k2);
            for (std::size_t i = 0; i < m; ++i) stage[i] = x[i] + 0.5 * h * k2[i];
            system.derivative_into(stage, t + 0.5 * h, k3);
            for (std::size_t i = 0; i < m; ++i) stage[i] = x[i] + h * k3[i];
            system.derivative_into(stage, grid[k + 1], k4);
            for (std::size_t i = 0; i < m; ++i) {
                x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        }
        check_guard(x, config.overflow_guard, grid[k + 1]);
    }
    return Trajectory(std::move(grid), std::move(xs), std::move(ys));
}

Trajectory static_series(const ModelSpec& spec, std::span<const double> times) {
    const StaticEvaluator statics(spec);
    const DisturbanceField disturbances(spec);
    const std::size_t m = spec.dims.m;
    Matrix xs(times.size(), m);
    Matrix ys(times.size(), spec.dims.n);
    for (std::size_t k = 0; k < times.size(); ++k) {
        std::copy(spec.dynamic.x0.begin(), spec.dynamic.x0.end(), xs.row(k).begin());
        statics.evaluate_into(spec.dynamic.x0, times[k], disturbances, ys.row(k));
    }
    return Trajectory(std::vector<double>(times.begin(), times.end()), std::move(xs),
                      std::move(ys));
}

double analytic_linear_population(double pop0, double c, double t) { return pop0 * std::exp(c * t); }

double convergence_order(const ModelSpec& spec, const StockOracle& oracle,
                         IntegrationMethod method, std::span<const double> dt_list) {
    if (dt_list.size() < 3) {
        throw Error("convergence_order needs at least three step sizes");
    }
    for (std::size_t i = 1; i < dt_list.size(); ++i) {
        if (std::abs(dt_list[i] * 2.0 - dt_list[i - 1]) > 1e-9 * dt_list[i - 1]) {
            throw Error("each step size must halve the previous one");
        }
    }
    std::vector<double> errors;
    for (double dt : dt_list) {
        IntegratorConfig config;
        config.method = method;
        config.dt = dt;
        const auto traj = simulate(spec, config);
        double worst = 0.0;
        for (std::size_t k = 0; k < traj.size(); ++k) {
            const auto expected = oracle(traj.grid()[k]);
            if (expected.size() != traj.stocks()) {
                throw OracleMismatch("oracle returned the wrong number of stocks");
            }
            for (std::size_t i = 0; i < expected.size(); ++i) {
                worst = std::max(worst, std::abs(traj.x_samples()(k, i) - expected[i]));
            }
        }
        errors.push_back(worst);
    }
    for (std::size_t i = 0; i < errors.size(); ++i) {
        if (!(errors[i] > 0.0) || (i > 0 && !(errors[i] < errors[i - 1]))) {
            throw OracleMismatch("errors do not decrease monotonically with dt");
        }
    }
    // Ordinary least squares on (log dt, log err).
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double count = static_cast<double>(errors.size());
    for (std::size_t i = 0; i < errors.size(); ++i) {
        const double lx = std::log(dt_list[i]);
        const double ly = std::log(errors[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (count * sxy - sx * sy) / (count * sxx - sx * sx);
}

}  // namespace sdsem
