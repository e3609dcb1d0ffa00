#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <vector>

#include "sdsem/model.hpp"

namespace sdsem {

/// LISREL parameter bundle.
///
///   eta = alpha_eta + B eta + Gamma xi + zeta,   Cov(xi) = Phi, Cov(zeta) = Psi
///   y   = nu_y + LambdaY eta + eps,              Cov(eps)   = ThetaEps
///   x   = nu_x + LambdaX xi  + delta,            Cov(delta) = ThetaDelta
///
/// Intercepts are carried for completeness; covariance algebra ignores them.
struct LisrelSpec {
    Eigen::MatrixXd B;           // m_eta x m_eta
    Eigen::MatrixXd Gamma;       // m_eta x n_xi
    Eigen::MatrixXd Phi;         // n_xi x n_xi
    Eigen::MatrixXd Psi;         // m_eta x m_eta
    Eigen::MatrixXd LambdaY;     // p_y x m_eta
    Eigen::MatrixXd LambdaX;     // p_x x n_xi
    Eigen::MatrixXd ThetaEps;    // p_y x p_y, diagonal
    Eigen::MatrixXd ThetaDelta;  // p_x x p_x, diagonal
    Eigen::VectorXd alpha_eta;
    Eigen::VectorXd kappa_xi;    // means of the exogenous latents
    Eigen::VectorXd nu_y;
    Eigen::VectorXd nu_x;

    [[nodiscard]] Eigen::Index endogenous() const noexcept { return B.rows(); }
    [[nodiscard]] Eigen::Index exogenous() const noexcept { return Phi.rows(); }
    [[nodiscard]] Eigen::Index y_indicators() const noexcept { return LambdaY.rows(); }
    [[nodiscard]] Eigen::Index x_indicators() const noexcept { return LambdaX.rows(); }
};

/// Zero-filled bundle with consistent shapes.
[[nodiscard]] LisrelSpec make_lisrel(Eigen::Index m_eta, Eigen::Index n_xi, Eigen::Index p_y,
                                     Eigen::Index p_x);

/// Model-implied indicator covariance, ordered [y-indicators, x-indicators].
struct ImpliedCovariance {
    Eigen::MatrixXd sigma;
    LisrelSpec source;
};

/// Sigma from the standard LISREL closed form with A = (I - B)^-1.
/// Throws ShapeError on inconsistent blocks, SingularSystem when (I - B) is singular.
[[nodiscard]] ImpliedCovariance implied_covariance(const LisrelSpec& l);

/// How a general-framework spec mapped onto LISREL blocks (all indices 0-based).
struct LisrelMapping {
    std::vector<std::size_t> eta_statics;       // static variable behind each eta
    std::vector<std::size_t> xi_statics;        // static variable behind each xi
    std::vector<std::size_t> y_indicators;      // spec indicator behind each y row
    std::vector<std::size_t> x_indicators;      // spec indicator behind each x row
    std::vector<std::string> warnings;

    /// Indicator order of Sigma's rows: y_indicators then x_indicators.
    [[nodiscard]] std::vector<std::size_t> sigma_order() const;
};

struct LisrelBridge {
    LisrelSpec lisrel;
    LisrelMapping mapping;
};

/// Maps a linear static spec (m = 0, exponents in {0, 1}, no interactions) to LISREL.
///
/// Static variables with no inbound edges are exogenous. Zero-exponent terms
/// become intercepts, noise disturbances supply Phi/Psi variances, and
/// squared error sds give ThetaEps/ThetaDelta. An endogenous latent without a
/// noise source gets Psi = 0 and a warning.
/// Throws HasStocks, NotLinear, or ShapeError (indicator loading on both partitions).
[[nodiscard]] LisrelBridge to_lisrel(const ModelSpec& spec);

/// Sigma permuted back into the spec's indicator order.
[[nodiscard]] Eigen::MatrixXd in_indicator_order(const Eigen::MatrixXd& sigma,
                                                 const LisrelMapping& mapping);

/// F = ln|Sigma| + tr(S Sigma^-1) - ln|S| - dim. Throws NotPositiveDefinite.
[[nodiscard]] double ml_discrepancy(const Eigen::MatrixXd& sample, const Eigen::MatrixXd& implied);

/// Copies a Matrix into an Eigen matrix.
[[nodiscard]] Eigen::MatrixXd to_eigen(const Matrix& m);

}  // namespace sdsem
