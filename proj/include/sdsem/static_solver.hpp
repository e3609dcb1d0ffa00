#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sdsem/model.hpp"

namespace sdsem {

/// Edge cases of base^exponent inside polynomial terms.
///
/// 0^0 is 1 so zero-exponent constants hold at a zero base. A negative base
/// with a non-integer exponent, or 0 with a negative exponent, is a DomainError.
struct PowerTermPolicy {
    static constexpr double zero_to_zero = 1.0;
    static constexpr bool negative_base_fractional_exponent_is_error = true;
};

[[nodiscard]] double power_term(double base, double exponent);

/// Sum of the active disturbances on each static variable at time t.
class DisturbanceField {
public:
    DisturbanceField() = default;
    explicit DisturbanceField(const ModelSpec& spec);

    [[nodiscard]] double at(std::size_t target, double t) const;
    void add_to(std::span<double> y, double t) const;
    [[nodiscard]] bool empty() const noexcept { return disturbances_.empty(); }

    /// No perturbations; oracles and pure structural checks use this.
    static const DisturbanceField& none();

private:
    std::vector<DisturbanceSpec> disturbances_;
};

struct StaticState {
    std::vector<double> y;
    double t = 0.0;
};

enum class SimultaneousMethod { Auto, Direct, DampedIteration };

struct SimultaneousOptions {
    SimultaneousMethod method = SimultaneousMethod::Auto;
    double tolerance = 1e-10;      // iterative accuracy: |y - y*| <= tol * max(1, max|y|)
    int max_iterations = 10'000;
    double damping = 0.5;          // y <- (1 - damping) * y + damping * rhs(y)
    double condition_limit = 1e12;
};

/// Precompiled static subsystem: sparse term lists plus the evaluation order.
///
/// Construction validates the spec. In SD-restricted mode one pass in
/// topological order solves the system; in nonrecursive mode evaluation
/// dispatches to the simultaneous solver.
class StaticEvaluator {
public:
    explicit StaticEvaluator(const ModelSpec& spec);

    /// Evaluates in a caller-chosen order (must be a valid topological order).
    StaticEvaluator(const ModelSpec& spec, std::vector<std::size_t> order);

    [[nodiscard]] StaticState evaluate(std::span<const double> x, double t,
                                       const DisturbanceField& disturbances) const;

    /// Hot-path variant writing into `y` (size n).
    void evaluate_into(std::span<const double> x, double t, const DisturbanceField& disturbances,
                       std::span<double> y) const;

    /// Solves y = rhs(y) simultaneously regardless of the spec's mode.
    [[nodiscard]] StaticState solve_simultaneous(std::span<const double> x, double t,
                                                 const DisturbanceField& disturbances,
                                                 const SimultaneousOptions& options = {}) const;

    /// Right-hand side of every static equation at the given y.
    void rhs(std::span<const double> x, std::span<const double> y, double t,
             const DisturbanceField& disturbances, std::span<double> out) const;

    /// All exponents in {0, 1} and no interactions: the system is linear in y.
    [[nodiscard]] bool is_linear() const noexcept { return linear_; }

    [[nodiscard]] const std::vector<std::size_t>& order() const noexcept { return order_; }
    [[nodiscard]] std::size_t size() const noexcept { return n_; }
    [[nodiscard]] Mode mode() const noexcept { return mode_; }

private:
    struct PowerTerm {
        std::size_t index;
        double coef;
        double exponent;
    };
    struct ProductTerm {
        std::size_t j;
        std::size_t k;
        double coef;
    };
    struct Row {
        std::vector<PowerTerm> stock_terms;
        std::vector<PowerTerm> static_terms;
        std::vector<ProductTerm> products;
    };

    [[nodiscard]] double row_value(const Row& row, std::span<const double> x,
                                   std::span<const double> y, double t) const;
    [[nodiscard]] StaticState solve_direct(std::span<const double> x, double t,
                                           const DisturbanceField& disturbances,
                                           const SimultaneousOptions& options) const;
    [[nodiscard]] StaticState solve_iterative(std::span<const double> x, double t,
                                              const DisturbanceField& disturbances,
                                              const SimultaneousOptions& options) const;

    std::size_t m_ = 0;
    std::size_t n_ = 0;
    Mode mode_ = Mode::SdRestricted;
    bool linear_ = true;
    std::vector<Row> rows_;
    std::vector<std::size_t> order_;
};

/// y = g(x, y) at time t; one-pass in SD-restricted mode.
[[nodiscard]] StaticState eval_static(const ModelSpec& spec, std::span<const double> x, double t,
                                      const DisturbanceField& disturbances = DisturbanceField::none());

/// Simultaneous solve for nonrecursive specs; throws Error if the mode is SD-restricted.
[[nodiscard]] StaticState solve_nonrecursive(const ModelSpec& spec, std::span<const double> x,
                                             double t,
                                             const DisturbanceField& disturbances = DisturbanceField::none(),
                                             const SimultaneousOptions& options = {});

}  // namespace sdsem
