#include "sdsem/measurement.hpp"

#include "sdsem/random.hpp"

namespace sdsem {

ObservationMatrix observe(const ModelSpec& spec, const Trajectory& trajectory, std::uint64_t seed) {
    const auto& d = spec.dims;
    const auto& ms = spec.measurement;
    if (trajectory.stocks() != d.m || trajectory.statics() != d.n) {
        throw DimensionError("trajectory has " + std::to_string(trajectory.stocks()) + " stocks and " +
                             std::to_string(trajectory.statics()) + " statics; spec expects " +
                             std::to_string(d.m) + " and " + std::to_string(d.n));
    }
    if (ms.LambdaX.rows() != d.p || ms.LambdaX.cols() != d.m || ms.LambdaY.rows() != d.p ||
        ms.LambdaY.cols() != d.n || ms.ThetaX.rows() != d.p || ms.ThetaY.rows() != d.p ||
        ms.epsilon_sd.size() != d.p || spec.horizon.observation_times.size() != d.q) {
        throw DimensionError("measurement matrices do not match the spec dimensions");
    }

    const auto& times = spec.horizon.observation_times;
    ObservationMatrix obs{Matrix(d.p, d.q), times, {}};
    for (std::size_t ind = 0; ind < d.p; ++ind) {
        obs.indicator_labels.push_back(ind < spec.names.z.size() ? spec.names.z[ind]
                                                                 : "z_" + std::to_string(ind + 1));
    }

    for (std::size_t ind = 0; ind < d.p; ++ind) {
        for (std::size_t k = 0; k < d.q; ++k) {
            const double t = times[k];
            double z = 0.0;
            for (std::size_t i = 0; i < d.m; ++i) {
                const double loading = ms.LambdaX(ind, i);
                if (loading != 0.0) {
                    z += loading * trajectory.value_at({LatentRef::Kind::Stock, i},
                                                       t - ms.ThetaX(ind, i));
                }
            }
            for (std::size_t i = 0; i < d.n; ++i) {
                const double loading = ms.LambdaY(ind, i);
                if (loading != 0.0) {
                    z += loading * trajectory.value_at({LatentRef::Kind::Static, i},
                                                       t - ms.ThetaY(ind, i));
                }
            }
            if (const double sd = ms.epsilon_sd[ind]; sd > 0.0) {
                z += sd * rng::normal_from_key(rng::hash_key(seed, ind, k));
            }
            obs.values(ind, k) = z;
        }
    }
    return obs;
}

Matrix sample_covariance(const ObservationMatrix& obs) {
    const std::size_t p = obs.values.rows();
    const std::size_t q = obs.values.cols();
    if (q < 2) {
        throw InsufficientData("sample covariance needs at least two observations");
    }
    std::vector<double> mean(p, 0.0);
    for (std::size_t i = 0; i < p; ++i) {
        for (double v : obs.values.row(i)) mean[i] += v;
        mean[i] /= static_cast<double>(q);
    }
    Matrix cov(p, p);
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double sum = 0.0;
            for (std::size_t k = 0; k < q; ++k) {
                sum += (obs.values(i, k) - mean[i]) * (obs.values(j, k) - mean[j]);
            }
            cov(i, j) = cov(j, i) = sum / static_cast<double>(q - 1);
        }
    }
    return cov;
}

}  // namespace sdsem
