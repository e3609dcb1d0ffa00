#include "sdsem/sem.hpp"

#include <cmath>
#include <sstream>

namespace sdsem {

LisrelSpec make_lisrel(Eigen::Index m_eta, Eigen::Index n_xi, Eigen::Index p_y, Eigen::Index p_x) {
    LisrelSpec l;
    l.B = Eigen::MatrixXd::Zero(m_eta, m_eta);
    l.Gamma = Eigen::MatrixXd::Zero(m_eta, n_xi);
    l.Phi = Eigen::MatrixXd::Zero(n_xi, n_xi);
    l.Psi = Eigen::MatrixXd::Zero(m_eta, m_eta);
    l.LambdaY = Eigen::MatrixXd::Zero(p_y, m_eta);
    l.LambdaX = Eigen::MatrixXd::Zero(p_x, n_xi);
    l.ThetaEps = Eigen::MatrixXd::Zero(p_y, p_y);
    l.ThetaDelta = Eigen::MatrixXd::Zero(p_x, p_x);
    l.alpha_eta = Eigen::VectorXd::Zero(m_eta);
    l.kappa_xi = Eigen::VectorXd::Zero(n_xi);
    l.nu_y = Eigen::VectorXd::Zero(p_y);
    l.nu_x = Eigen::VectorXd::Zero(p_x);
    return l;
}

namespace {

void expect_shape(const Eigen::MatrixXd& mat, Eigen::Index rows, Eigen::Index cols,
                  const char* name) {
    if (mat.rows() != rows || mat.cols() != cols) {
        std::ostringstream os;
        os << name << " is " << mat.rows() << "x" << mat.cols() << ", expected " << rows << "x"
           << cols;
        throw ShapeError(os.str());
    }
}

}  // namespace

ImpliedCovariance implied_covariance(const LisrelSpec& l) {
    const Eigen::Index ne = l.B.rows();
    const Eigen::Index nx = l.Phi.rows();
    const Eigen::Index py = l.LambdaY.rows();
    const Eigen::Index px = l.LambdaX.rows();
    expect_shape(l.B, ne, ne, "B");
    expect_shape(l.Gamma, ne, nx, "Gamma");
    expect_shape(l.Phi, nx, nx, "Phi");
    expect_shape(l.Psi, ne, ne, "Psi");
    expect_shape(l.LambdaY, py, ne, "LambdaY");
    expect_shape(l.LambdaX, px, nx, "LambdaX");
    expect_shape(l.ThetaEps, py, py, "ThetaEps");
    expect_shape(l.ThetaDelta, px, px, "ThetaDelta");

    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(ne, ne);
    if (ne > 0) {
        const Eigen::MatrixXd i_minus_b = Eigen::MatrixXd::Identity(ne, ne) - l.B;
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(i_minus_b);
        const auto& sv = svd.singularValues();
        const double smallest = sv(ne - 1);
        if (smallest == 0.0 || sv(0) / smallest > 1e12) {
            throw SingularSystem("(I - B) is singular; the structural model has no unique solution");
        }
        A = i_minus_b.fullPivLu().inverse();
    }

    const Eigen::MatrixXd cov_eta = A * (l.Gamma * l.Phi * l.Gamma.transpose() + l.Psi) * A.transpose();
    const Eigen::MatrixXd s_yy = l.LambdaY * cov_eta * l.LambdaY.transpose() + l.ThetaEps;
    const Eigen::MatrixXd s_xx = l.LambdaX * l.Phi * l.LambdaX.transpose() + l.ThetaDelta;
    const Eigen::MatrixXd s_yx = l.LambdaY * A * l.Gamma * l.Phi * l.LambdaX.transpose();

    Eigen::MatrixXd sigma(py + px, py + px);
    sigma.topLeftCorner(py, py) = s_yy;
    sigma.topRightCorner(py, px) = s_yx;
    sigma.bottomLeftCorner(px, py) = s_yx.transpose();
    sigma.bottomRightCorner(px, px) = s_xx;
    // Mirror the upper triangle so the result is bitwise symmetric.
    for (Eigen::Index i = 0; i < sigma.rows(); ++i) {
        for (Eigen::Index j = 0; j < i; ++j) {
            sigma(i, j) = sigma(j, i);
        }
    }
    return {std::move(sigma), l};
}

std::vector<std::size_t> LisrelMapping::sigma_order() const {
    std::vector<std::size_t> order(y_indicators);
    order.insert(order.end(), x_indicators.begin(), x_indicators.end());
    return order;
}

LisrelBridge to_lisrel(const ModelSpec& spec) {
    if (spec.dims.m > 0) {
        throw HasStocks("LISREL bridge needs a static-only spec; this one has " +
                        std::to_string(spec.dims.m) + " stock(s)");
    }
    if (auto report = validate(spec); !report.empty()) {
        throw ValidationError(std::move(report));
    }
    const std::size_t n = spec.dims.n;
    const std::size_t p = spec.dims.p;
    const auto& st = spec.statics;
    for (const auto& term : st.B4) {
        if (term.beta != 0.0) {
            throw NotLinear("interaction term on y" + std::to_string(term.i + 1) +
                            " is not linear");
        }
    }
    std::vector<bool> has_inbound(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (st.B3(i, j) == 0.0) continue;
            const double g = st.Gamma3(i, j);
            if (g != 0.0 && g != 1.0) {
                std::ostringstream os;
                os << "exponent " << g << " on y" << j + 1 << " in the equation for y" << i + 1
                   << " is not linear";
                throw NotLinear(os.str());
            }
            if (g == 1.0) has_inbound[i] = true;
        }
    }

    LisrelMapping map;
    std::vector<Eigen::Index> slot(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto& list = has_inbound[i] ? map.eta_statics : map.xi_statics;
        slot[i] = static_cast<Eigen::Index>(list.size());
        list.push_back(i);
    }

    for (std::size_t ind = 0; ind < p; ++ind) {
        bool on_eta = false;
        bool on_xi = false;
        for (std::size_t i = 0; i < n; ++i) {
            if (spec.measurement.LambdaY(ind, i) != 0.0) {
                (has_inbound[i] ? on_eta : on_xi) = true;
            }
            if (spec.measurement.ThetaY(ind, i) != 0.0 && spec.measurement.LambdaY(ind, i) != 0.0) {
                map.warnings.push_back("delay on indicator z" + std::to_string(ind + 1) +
                                       " ignored by covariance algebra");
            }
        }
        if (on_eta && on_xi) {
            throw ShapeError("indicator z" + std::to_string(ind + 1) +
                             " loads on both exogenous and endogenous latents");
        }
        (on_xi ? map.x_indicators : map.y_indicators).push_back(ind);
    }

    const auto ne = static_cast<Eigen::Index>(map.eta_statics.size());
    const auto nx = static_cast<Eigen::Index>(map.xi_statics.size());
    const auto py = static_cast<Eigen::Index>(map.y_indicators.size());
    const auto px = static_cast<Eigen::Index>(map.x_indicators.size());
    auto l = make_lisrel(ne, nx, py, px);

    for (std::size_t i = 0; i < n; ++i) {
        double constant = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double b = st.B3(i, j);
            if (b == 0.0) continue;
            if (st.Gamma3(i, j) == 0.0) {
                constant += b;
            } else if (has_inbound[j]) {
                l.B(slot[i], slot[j]) = b;
            } else {
                l.Gamma(slot[i], slot[j]) = b;
            }
        }
        (has_inbound[i] ? l.alpha_eta : l.kappa_xi)(slot[i]) = constant;
    }

    std::vector<double> variance(n, 0.0);
    for (const auto& d : spec.disturbances) {
        if (d.kind == DisturbanceKind::Noise) {
            variance[d.target] += d.sd * d.sd;
        } else {
            map.warnings.push_back("deterministic disturbance on y" + std::to_string(d.target + 1) +
                                   " shifts means only; ignored");
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (has_inbound[i]) {
            l.Psi(slot[i], slot[i]) = variance[i];
            if (variance[i] == 0.0) {
                map.warnings.push_back("endogenous y" + std::to_string(i + 1) +
                                       " has no stochastic source; Psi entry set to 0");
            }
        } else {
            l.Phi(slot[i], slot[i]) = variance[i];
        }
    }

    for (Eigen::Index r = 0; r < py; ++r) {
        const auto ind = map.y_indicators[static_cast<std::size_t>(r)];
        for (std::size_t i = 0; i < n; ++i) {
            if (has_inbound[i]) l.LambdaY(r, slot[i]) = spec.measurement.LambdaY(ind, i);
        }
        const double sd = spec.measurement.epsilon_sd[ind];
        l.ThetaEps(r, r) = sd * sd;
    }
    for (Eigen::Index r = 0; r < px; ++r) {
        const auto ind = map.x_indicators[static_cast<std::size_t>(r)];
        for (std::size_t i = 0; i < n; ++i) {
            if (!has_inbound[i]) l.LambdaX(r, slot[i]) = spec.measurement.LambdaY(ind, i);
        }
        const double sd = spec.measurement.epsilon_sd[ind];
        l.ThetaDelta(r, r) = sd * sd;
    }
    return {std::move(l), std::move(map)};
}

Eigen::MatrixXd in_indicator_order(const Eigen::MatrixXd& sigma, const LisrelMapping& mapping) {
    const auto order = mapping.sigma_order();
    const auto size = static_cast<Eigen::Index>(order.size());
    if (sigma.rows() != size || sigma.cols() != size) {
        throw ShapeError("covariance does not match the indicator mapping");
    }
    Eigen::MatrixXd out(size, size);
    for (Eigen::Index a = 0; a < size; ++a) {
        for (Eigen::Index b = 0; b < size; ++b) {
            out(static_cast<Eigen::Index>(order[a]), static_cast<Eigen::Index>(order[b])) =
                sigma(a, b);
        }
    }
    return out;
}

namespace {

Eigen::LLT<Eigen::MatrixXd> positive_definite_factor(const Eigen::MatrixXd& mat, const char* name) {
    if (mat.rows() != mat.cols() || mat.rows() == 0) {
        throw ShapeError(std::string(name) + " must be a nonempty square matrix");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(mat, Eigen::EigenvaluesOnly);
    const auto& ev = eig.eigenvalues();
    const double scale = ev.cwiseAbs().maxCoeff();
    if (!(ev.minCoeff() > 1e-12 * scale)) {
        throw NotPositiveDefinite(std::string(name) + " is not positive definite");
    }
    Eigen::LLT<Eigen::MatrixXd> llt(mat);
    if (llt.info() != Eigen::Success) {
        throw NotPositiveDefinite(std::string(name) + " is not positive definite");
    }
    return llt;
}

double log_det(const Eigen::LLT<Eigen::MatrixXd>& llt) {
    return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

}  // namespace

double ml_discrepancy(const Eigen::MatrixXd& sample, const Eigen::MatrixXd& implied) {
    if (sample.rows() != implied.rows() || sample.cols() != implied.cols()) {
        throw ShapeError("sample and implied covariance differ in shape");
    }
    const auto s = positive_definite_factor(sample, "sample covariance");
    const auto sig = positive_definite_factor(implied, "implied covariance");
    const double trace = sig.solve(sample).trace();
    const double f = log_det(sig) + trace - log_det(s) - static_cast<double>(sample.rows());
    // F >= 0 analytically; clamp the round-off residue at a perfect match.
    return f < 0.0 && f > -1e-12 ? 0.0 : f;
}

Eigen::MatrixXd to_eigen(const Matrix& m) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols()));
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c) {
            out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = m(r, c);
        }
    }
    return out;
}

}  // namespace sdsem
