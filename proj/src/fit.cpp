#include "sdsem/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "sdsem/csv.hpp"

namespace sdsem {

namespace {

void check_lengths(const SeriesPair& pair) {
    if (pair.simulated.size() != pair.observed.size() ||
        (!pair.times.empty() && pair.times.size() != pair.observed.size())) {
        throw LengthMismatch("simulated and observed series differ in length");
    }
}

struct Moments {
    double mean_s = 0.0;
    double mean_o = 0.0;
    double sd_s = 0.0;
    double sd_o = 0.0;
    double cov = 0.0;
    double mse = 0.0;
};

Moments moments(const SeriesPair& pair) {
    const auto q = static_cast<double>(pair.observed.size());
    Moments mo;
    for (std::size_t k = 0; k < pair.observed.size(); ++k) {
        mo.mean_s += pair.simulated[k];
        mo.mean_o += pair.observed[k];
    }
    mo.mean_s /= q;
    mo.mean_o /= q;
    double var_s = 0.0;
    double var_o = 0.0;
    for (std::size_t k = 0; k < pair.observed.size(); ++k) {
        const double ds = pair.simulated[k] - mo.mean_s;
        const double dobs = pair.observed[k] - mo.mean_o;
        var_s += ds * ds;
        var_o += dobs * dobs;
        mo.cov += ds * dobs;
        const double err = pair.simulated[k] - pair.observed[k];
        mo.mse += err * err;
    }
    mo.sd_s = std::sqrt(var_s / q);
    mo.sd_o = std::sqrt(var_o / q);
    mo.cov /= q;
    mo.mse /= q;
    return mo;
}

}  // namespace

bool FitReport::has_flag(const std::string& flag) const {
    return std::find(flags.begin(), flags.end(), flag) != flags.end();
}

TheilComponents theil_decomposition(const SeriesPair& pair) {
    check_lengths(pair);
    if (pair.observed.empty()) {
        throw InsufficientData("Theil decomposition needs at least one observation");
    }
    const auto mo = moments(pair);
    if (mo.mse == 0.0) {
        throw PerfectFit("MSE is zero; the Theil decomposition is undefined for an exact fit");
    }
    TheilComponents out;
    double r = 0.0;
    if (mo.sd_s == 0.0 || mo.sd_o == 0.0) {
        out.constant_series = true;
    } else {
        r = std::clamp(mo.cov / (mo.sd_s * mo.sd_o), -1.0, 1.0);
    }
    const double bias = mo.mean_s - mo.mean_o;
    const double spread = mo.sd_s - mo.sd_o;
    out.bias = bias * bias / mo.mse;
    out.variance = spread * spread / mo.mse;
    out.covariance = 2.0 * (1.0 - r) * mo.sd_s * mo.sd_o / mo.mse;
    return out;
}

FitReport basic_fit(const SeriesPair& pair) {
    check_lengths(pair);
    const std::size_t q = pair.observed.size();
    if (q < 2) {
        throw InsufficientData("fit statistics need at least two points");
    }
    FitReport rep;
    const auto mo = moments(pair);
    rep.mse = mo.mse;
    rep.rmse = std::sqrt(mo.mse);

    double sse = 0.0;
    double sst = 0.0;
    double ape = 0.0;
    std::size_t used = 0;
    for (std::size_t k = 0; k < q; ++k) {
        const double err = pair.simulated[k] - pair.observed[k];
        const double dev = pair.observed[k] - mo.mean_o;
        sse += err * err;
        sst += dev * dev;
        if (pair.observed[k] != 0.0) {
            ape += std::abs(err / pair.observed[k]);
            ++used;
        }
    }
    if (used == 0) {
        throw AllZeroObserved("MAPE is undefined when every observed value is zero");
    }
    rep.mape = 100.0 * ape / static_cast<double>(used);
    rep.mape_skipped = q - used;
    if (rep.mape_skipped > 0) {
        rep.flags.push_back("mape_skipped_zeros");
    }

    if (sst == 0.0) {
        rep.r_squared = sse == 0.0 ? 1.0 : -std::numeric_limits<double>::infinity();
        if (sse != 0.0) rep.flags.push_back("r2_undefined");
    } else {
        rep.r_squared = 1.0 - sse / sst;
    }

    if (mo.mse == 0.0) {
        rep.flags.push_back("perfect_fit");
    } else {
        const auto theil = theil_decomposition(pair);
        rep.theil_um = theil.bias;
        rep.theil_us = theil.variance;
        rep.theil_uc = theil.covariance;
        if (theil.constant_series) rep.flags.push_back("constant_series");
    }
    if (pair.role == SeriesRole::VsReference) {
        rep.flags.push_back("vs_reference");
    }
    return rep;
}

SeriesPair align(const Trajectory& sim, const ObservationMatrix& obs, std::size_t indicator,
                 LatentRef latent, SeriesRole role) {
    if (indicator >= obs.values.rows()) {
        throw DimensionError("indicator index out of range");
    }
    if (sim.size() == 0) {
        throw OutOfSpan("empty trajectory");
    }
    const double first = sim.grid().front();
    const double last = sim.grid().back();
    const double tol = 1e-9 * std::max(1.0, std::abs(last));
    SeriesPair pair;
    pair.role = role;
    for (std::size_t k = 0; k < obs.times.size(); ++k) {
        const double t = obs.times[k];
        if (t < first - tol || t > last + tol) {
            std::ostringstream os;
            os << "observation time " << t << " lies outside the simulated span [" << first
               << ", " << last << "]";
            throw OutOfSpan(os.str());
        }
        pair.times.push_back(t);
        pair.simulated.push_back(sim.value_at(latent, t));
        pair.observed.push_back(obs.values(indicator, k));
    }
    return pair;
}

namespace {

std::string flag_list(const FitReport& report) {
    std::string out;
    for (const auto& f : report.flags) {
        if (!out.empty()) out += ';';
        out += f;
    }
    return out;
}

}  // namespace

std::string to_key_value(const FitReport& report) {
    std::ostringstream os;
    os << "mse=" << format_double(report.mse) << '\n'
       << "rmse=" << format_double(report.rmse) << '\n'
       << "r2=" << format_double(report.r_squared) << '\n'
       << "mape=" << format_double(report.mape) << '\n'
       << "u_m=" << format_double(report.theil_um) << '\n'
       << "u_s=" << format_double(report.theil_us) << '\n'
       << "u_c=" << format_double(report.theil_uc) << '\n'
       << "flags=" << flag_list(report) << '\n';
    return os.str();
}

std::string to_csv(const FitReport& report) {
    std::ostringstream os;
    os << "mse,rmse,r2,mape,u_m,u_s,u_c,flags\n"
       << format_double(report.mse) << ',' << format_double(report.rmse) << ','
       << format_double(report.r_squared) << ',' << format_double(report.mape) << ','
       << format_double(report.theil_um) << ',' << format_double(report.theil_us) << ','
       << format_double(report.theil_uc) << ',' << flag_list(report) << '\n';
    return os.str();
}

}  // namespace sdsem
