#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "sdsem/dynamics.hpp"
#include "sdsem/measurement.hpp"

namespace sdsem {

/// Shortest decimal that parses back to the same double.
[[nodiscard]] std::string format_double(double value);

/// Strict decimal parse; throws ParseError naming `context` on failure.
[[nodiscard]] double parse_double(std::string_view text, std::string_view context = "value");

/// Header plus numeric rows.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    /// Column position by header name; throws ParseError when absent.
    [[nodiscard]] std::size_t column(std::string_view name) const;
};

[[nodiscard]] CsvTable parse_csv_table(std::string_view text);
[[nodiscard]] CsvTable read_csv_table(const std::filesystem::path& path);

/// Header `t,x_1..x_m,y_1..y_n`; one row per grid point.
[[nodiscard]] std::string trajectory_to_csv(const Trajectory& trajectory);
[[nodiscard]] Trajectory trajectory_from_csv(std::string_view text);

/// Header `t,z_1..z_p`; one row per observation time (transposed from p x q).
[[nodiscard]] std::string observations_to_csv(const ObservationMatrix& obs);

/// Any `t,<label>...` table; each non-time column becomes one indicator row.
[[nodiscard]] ObservationMatrix observations_from_csv(std::string_view text);

/// Symmetric matrix with labels on the header row and first column.
[[nodiscard]] std::string covariance_to_csv(const Eigen::MatrixXd& cov,
                                            const std::vector<std::string>& labels);
[[nodiscard]] Eigen::MatrixXd covariance_from_csv(std::string_view text,
                                                  std::vector<std::string>* labels = nullptr);

/// Long-format `series,t,value` rows for external plotting tools.
[[nodiscard]] std::string trajectory_plot_data(const Trajectory& trajectory);
[[nodiscard]] std::string observation_plot_data(const ObservationMatrix& obs);

}  // namespace sdsem
