#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sdsem/errors.hpp"

namespace sdsem {

/// Dense row-major matrix of doubles. Zero rows or zero columns are legal.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    [[nodiscard]] std::span<const double> row(std::size_t r) const {
        return {data_.data() + r * cols_, cols_};
    }
    [[nodiscard]] std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }

    [[nodiscard]] std::span<const double> data() const noexcept { return data_; }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

struct Dimensions {
    std::size_t m = 0;  // stocks
    std::size_t n = 1;  // static variables
    std::size_t p = 0;  // indicators
    std::size_t q = 0;  // observation times

    bool operator==(const Dimensions&) const = default;
};

struct TimeHorizon {
    double t_initial = 0.0;
    double t_final = 1.0;
    /// Integration step; unset means "use the engine default".
    std::optional<double> dt;
    std::vector<double> observation_times;

    [[nodiscard]] double length() const noexcept { return t_final - t_initial; }
    bool operator==(const TimeHorizon&) const = default;
};

/// Default step when neither the spec nor the caller chose one.
[[nodiscard]] double default_dt(const TimeHorizon& horizon) noexcept;

struct DynamicSpec {
    Matrix B1;      // m x n
    Matrix Gamma1;  // m x n
    std::vector<double> x0;

    bool operator==(const DynamicSpec&) const = default;
};

/// One y_j * y_k term feeding y_i (j < k, 0-based).
struct InteractionTerm {
    std::size_t i = 0;
    std::size_t j = 0;
    std::size_t k = 0;
    double beta = 0.0;

    bool operator==(const InteractionTerm&) const = default;
};

struct StaticSpec {
    Matrix B2;      // n x m
    Matrix Gamma2;  // n x m
    Matrix B3;      // n x n
    Matrix Gamma3;  // n x n
    std::vector<InteractionTerm> B4;

    bool operator==(const StaticSpec&) const = default;
};

struct MeasurementSpec {
    Matrix LambdaX;  // p x m
    Matrix LambdaY;  // p x n
    Matrix ThetaX;   // p x m, delays in model time units
    Matrix ThetaY;   // p x n
    std::vector<double> epsilon_sd;

    bool operator==(const MeasurementSpec&) const = default;
};

enum class DisturbanceKind { Step, Pulse, Noise };

/// Additive perturbation on one static variable.
///
/// Step: `height` from `onset` on. Pulse: `height` on [onset, onset + width).
/// Noise: Normal(0, sd^2), drawn from a counter keyed by (seed, target, t).
struct DisturbanceSpec {
    std::size_t target = 0;
    DisturbanceKind kind = DisturbanceKind::Step;
    double height = 0.0;
    double onset = 0.0;
    double width = 0.0;
    double sd = 0.0;
    std::uint64_t seed = 0;

    bool operator==(const DisturbanceSpec&) const = default;
};

enum class Mode { SdRestricted, Nonrecursive };

struct Names {
    std::vector<std::string> x;
    std::vector<std::string> y;
    std::vector<std::string> z;

    bool operator==(const Names&) const = default;
};

struct ModelSpec {
    Dimensions dims;
    TimeHorizon horizon;
    DynamicSpec dynamic;
    StaticSpec statics;
    MeasurementSpec measurement;
    std::vector<DisturbanceSpec> disturbances;
    Mode mode = Mode::SdRestricted;
    Names names;
    /// Free-text note, not used in computation.
    std::string description;

    bool operator==(const ModelSpec&) const = default;
};

/// Empty spec with every matrix shaped for `dims` and zero-filled.
[[nodiscard]] ModelSpec make_zero_spec(const Dimensions& dims, const TimeHorizon& horizon,
                                       Mode mode = Mode::SdRestricted);

// --- structure ------------------------------------------------------------

/// Directed edge y_from -> y_to in the static dependence graph.
struct StaticEdge {
    std::size_t from = 0;
    std::size_t to = 0;
    bool operator==(const StaticEdge&) const = default;
};

/// Edges of the static dependence graph, sorted and de-duplicated.
///
/// B3[i][j] creates an edge only with a nonzero exponent; a zero exponent
/// turns the term into an additive constant. Every nonzero interaction
/// (i, j, k) creates j -> i and k -> i.
[[nodiscard]] std::vector<StaticEdge> static_dependence_edges(const ModelSpec& spec);

/// True when y_i is fed only by zero-exponent B3 entries (no x terms, no edges).
[[nodiscard]] bool is_constant_static(const ModelSpec& spec, std::size_t i);

/// Every invariant violation; empty means the spec is admissible for its mode.
[[nodiscard]] ValidationReport validate(const ModelSpec& spec);

/// Evaluation order for the static subsystem (ties broken by ascending index).
/// Throws CycleError if the dependence graph is cyclic.
[[nodiscard]] std::vector<std::size_t> topological_order(const ModelSpec& spec);

[[nodiscard]] std::string to_string(Mode mode);
[[nodiscard]] std::string to_string(DisturbanceKind kind);

}  // namespace sdsem
