#include "sdsem/static_solver.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sdsem/random.hpp"

namespace sdsem {

double power_term(double base, double exponent) {
    if (exponent == 0.0) {
        return PowerTermPolicy::zero_to_zero;
    }
    if (exponent == 1.0) {
        return base;
    }
    if (base == 0.0 && exponent < 0.0) {
        throw DomainError("0 raised to negative exponent " + std::to_string(exponent));
    }
    if (base < 0.0 && std::trunc(exponent) != exponent) {
        std::ostringstream os;
        os << "negative base " << base << " raised to non-integer exponent " << exponent;
        throw DomainError(os.str());
    }
    return std::pow(base, exponent);
}

DisturbanceField::DisturbanceField(const ModelSpec& spec) : disturbances_(spec.disturbances) {}

const DisturbanceField& DisturbanceField::none() {
    static const DisturbanceField empty;
    return empty;
}

double DisturbanceField::at(std::size_t target, double t) const {
    double total = 0.0;
    for (const auto& d : disturbances_) {
        if (d.target != target) {
            continue;
        }
        switch (d.kind) {
            case DisturbanceKind::Step:
                if (t >= d.onset) total += d.height;
                break;
            case DisturbanceKind::Pulse:
                if (t >= d.onset && t < d.onset + d.width) total += d.height;
                break;
            case DisturbanceKind::Noise:
                if (d.sd > 0.0) {
                    total += d.sd * rng::normal_from_key(rng::hash_key(d.seed, d.target,
                                                                       rng::time_key(t)));
                }
                break;
        }
    }
    return total;
}

void DisturbanceField::add_to(std::span<double> y, double t) const {
    for (std::size_t i = 0; i < y.size() && !disturbances_.empty(); ++i) {
        y[i] += at(i, t);
    }
}

namespace {

std::vector<std::size_t> validated_order(const ModelSpec& spec) {
    if (auto report = validate(spec); !report.empty()) {
        throw ValidationError(std::move(report));
    }
    return spec.mode == Mode::SdRestricted ? topological_order(spec) : std::vector<std::size_t>{};
}

}  // namespace

StaticEvaluator::StaticEvaluator(const ModelSpec& spec) : StaticEvaluator(spec, validated_order(spec)) {}

StaticEvaluator::StaticEvaluator(const ModelSpec& spec, std::vector<std::size_t> order)
    : m_(spec.dims.m), n_(spec.dims.n), mode_(spec.mode), rows_(spec.dims.n),
      order_(std::move(order)) {
    if (auto report = validate(spec); !report.empty()) {
        throw ValidationError(std::move(report));
    }
    if (order_.empty()) {
        order_.resize(n_);
        for (std::size_t i = 0; i < n_; ++i) order_[i] = i;
    }
    const auto& s = spec.statics;
    for (std::size_t i = 0; i < n_; ++i) {
        auto& row = rows_[i];
        for (std::size_t j = 0; j < m_; ++j) {
            if (s.B2(i, j) != 0.0) {
                row.stock_terms.push_back({j, s.B2(i, j), s.Gamma2(i, j)});
            }
        }
        for (std::size_t j = 0; j < n_; ++j) {
            if (s.B3(i, j) != 0.0) {
                const double g = s.Gamma3(i, j);
                row.static_terms.push_back({j, s.B3(i, j), g});
                linear_ = linear_ && (g == 0.0 || g == 1.0);
            }
        }
    }
    for (const auto& term : s.B4) {
        if (term.beta != 0.0) {
            rows_[term.i].products.push_back({term.j, term.k, term.beta});
            linear_ = false;
        }
    }
    if (mode_ == Mode::SdRestricted) {
        // A caller-supplied order must respect every dependence edge.
        std::vector<std::size_t> position(n_);
        for (std::size_t k = 0; k < order_.size(); ++k) position.at(order_[k]) = k;
        if (order_.size() != n_) {
            throw Error("evaluation order must list every static variable once");
        }
        for (const auto& e : static_dependence_edges(spec)) {
            if (position[e.from] >= position[e.to]) {
                throw CycleError("evaluation order violates dependence y" +
                                 std::to_string(e.from + 1) + " -> y" + std::to_string(e.to + 1));
            }
        }
    }
}

double StaticEvaluator::row_value(const Row& row, std::span<const double> x,
                                  std::span<const double> y, double t) const {
    double sum = 0.0;
    for (const auto& term : row.stock_terms) {
        sum += term.coef * power_term(x[term.index], term.exponent);
    }
    for (const auto& term : row.static_terms) {
        sum += term.coef * power_term(y[term.index], term.exponent);
    }
    for (const auto& term : row.products) {
        sum += term.coef * y[term.j] * y[term.k];
    }
    if (!std::isfinite(sum)) {
        throw OverflowError("non-finite static value", t);
    }
    return sum;
}

void StaticEvaluator::rhs(std::span<const double> x, std::span<const double> y, double t,
                          const DisturbanceField& disturbances, std::span<double> out) const {
    for (std::size_t i = 0; i < n_; ++i) {
        out[i] = row_value(rows_[i], x, y, t) + disturbances.at(i, t);
    }
}

void StaticEvaluator::evaluate_into(std::span<const double> x, double t,
                                    const DisturbanceField& disturbances,
                                    std::span<double> y) const {
    if (x.size() != m_ || y.size() != n_) {
        throw DimensionError("static evaluation expects x of length " + std::to_string(m_));
    }
    if (mode_ == Mode::Nonrecursive) {
        auto state = solve_simultaneous(x, t, disturbances);
        std::copy(state.y.begin(), state.y.end(), y.begin());
        return;
    }
    std::fill(y.begin(), y.end(), 0.0);
    for (auto i : order_) {
        double value = row_value(rows_[i], x, y, t);
        if (!disturbances.empty()) {
            value += disturbances.at(i, t);
        }
        y[i] = value;
    }
}

StaticState StaticEvaluator::evaluate(std::span<const double> x, double t,
                                      const DisturbanceField& disturbances) const {
    StaticState state{std::vector<double>(n_), t};
    evaluate_into(x, t, disturbances, state.y);
    return state;
}

StaticState StaticEvaluator::solve_simultaneous(std::span<const double> x, double t,
                                                const DisturbanceField& disturbances,
                                                const SimultaneousOptions& options) const {
    if (x.size() != m_) {
        throw DimensionError("static evaluation expects x of length " + std::to_string(m_));
    }
    switch (options.method) {
        case SimultaneousMethod::Direct:
            if (!linear_) {
                throw NotLinear("direct solve requires exponents in {0, 1} and no interactions");
            }
            return solve_direct(x, t, disturbances, options);
        case SimultaneousMethod::DampedIteration:
            return solve_iterative(x, t, disturbances, options);
        case SimultaneousMethod::Auto:
            break;
    }
    return linear_ ? solve_direct(x, t, disturbances, options)
                   : solve_iterative(x, t, disturbances, options);
}

StaticState StaticEvaluator::solve_direct(std::span<const double> x, double t,
                                          const DisturbanceField& disturbances,
                                          const SimultaneousOptions& options) const {
    const auto n = static_cast<Eigen::Index>(n_);
    Eigen::MatrixXd system = Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd constant = Eigen::VectorXd::Zero(n);
    for (std::size_t i = 0; i < n_; ++i) {
        const auto& row = rows_[i];
        const auto r = static_cast<Eigen::Index>(i);
        for (const auto& term : row.stock_terms) {
            constant(r) += term.coef * power_term(x[term.index], term.exponent);
        }
        for (const auto& term : row.static_terms) {
            if (term.exponent == 0.0) {
                constant(r) += term.coef;
            } else {
                system(r, static_cast<Eigen::Index>(term.index)) -= term.coef;
            }
        }
        constant(r) += disturbances.at(i, t);
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(system);
    const auto& sv = svd.singularValues();
    const double smallest = sv(sv.size() - 1);
    if (smallest == 0.0 || sv(0) / smallest > options.condition_limit) {
        throw SingularSystem("(I - L) is numerically singular (condition estimate " +
                             (smallest == 0.0 ? std::string("inf")
                                              : std::to_string(sv(0) / smallest)) +
                             ")");
    }
    const Eigen::VectorXd solution = system.fullPivLu().solve(constant);
    StaticState state{std::vector<double>(solution.data(), solution.data() + n), t};
    for (double v : state.y) {
        if (!std::isfinite(v)) throw OverflowError("non-finite static value", t);
    }
    return state;
}

StaticState StaticEvaluator::solve_iterative(std::span<const double> x, double t,
                                             const DisturbanceField& disturbances,
                                             const SimultaneousOptions& options) const {
    std::vector<double> y(n_, 0.0);
    std::vector<double> next(n_, 0.0);
    double previous_step = 0.0;
    for (int iter = 0; iter <= options.max_iterations; ++iter) {
        rhs(x, y, t, disturbances, next);
        double residual = 0.0;
        double scale = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            residual = std::max(residual, std::abs(y[i] - next[i]));
            scale = std::max(scale, std::abs(y[i]));
        }
        // Distance to the fixed point is bounded by step / (1 - rho), with rho
        // the observed contraction of successive steps; the factor 0.1 absorbs
        // noise in that estimate.
        const double step = options.damping * residual;
        const double rho = previous_step > 0.0 ? step / previous_step : 1.0;
        if (residual == 0.0 ||
            (rho < 1.0 && step / (1.0 - rho) <= 0.1 * options.tolerance * std::max(1.0, scale))) {
            return {std::move(y), t};
        }
        previous_step = step;
        if (iter == options.max_iterations) {
            break;
        }
        for (std::size_t i = 0; i < n_; ++i) {
            y[i] = (1.0 - options.damping) * y[i] + options.damping * next[i];
            if (!std::isfinite(y[i])) {
                throw OverflowError("damped iteration diverged", t);
            }
        }
    }
    throw NonConvergence("static solve did not reach tolerance within " +
                         std::to_string(options.max_iterations) + " damped iterations");
}

StaticState eval_static(const ModelSpec& spec, std::span<const double> x, double t,
                        const DisturbanceField& disturbances) {
    return StaticEvaluator(spec).evaluate(x, t, disturbances);
}

StaticState solve_nonrecursive(const ModelSpec& spec, std::span<const double> x, double t,
                               const DisturbanceField& disturbances,
                               const SimultaneousOptions& options) {
    if (spec.mode != Mode::Nonrecursive) {
        throw Error("solve_nonrecursive requires a nonrecursive spec");
    }
    return StaticEvaluator(spec).solve_simultaneous(x, t, disturbances, options);
}

}  // namespace sdsem
