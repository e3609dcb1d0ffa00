#include "sdsem/csv.hpp"

#include <charconv>
#include <sstream>

#include "sdsem/spec_io.hpp"

namespace sdsem {

std::string format_double(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return {buf, res.ptr};
}

double parse_double(std::string_view text, std::string_view context) {
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r'))
        text.remove_suffix(1);
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    double value = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
        throw ParseError("cannot parse " + std::string(context) + " '" + std::string(text) +
                         "' as a number");
    }
    return value;
}

namespace {

std::vector<std::string> split_line(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        auto field = line.substr(start, comma == std::string_view::npos ? line.npos : comma - start);
        while (!field.empty() && (field.front() == ' ' || field.front() == '\t'))
            field.remove_prefix(1);
        while (!field.empty() && (field.back() == ' ' || field.back() == '\r' || field.back() == '\t'))
            field.remove_suffix(1);
        out.emplace_back(field);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

std::string default_label(char prefix, std::size_t i) {
    return std::string(1, prefix) + "_" + std::to_string(i + 1);
}

}  // namespace

std::size_t CsvTable::column(std::string_view name) const {
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c] == name) return c;
    }
    throw ParseError("no column named '" + std::string(name) + "'");
}

CsvTable parse_csv_table(std::string_view text) {
    CsvTable table;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        auto line = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
        auto fields = split_line(line);
        if (table.header.empty()) {
            table.header = std::move(fields);
            continue;
        }
        if (fields.size() != table.header.size()) {
            throw ParseError("line " + std::to_string(line_no) + ": expected " +
                             std::to_string(table.header.size()) + " fields, got " +
                             std::to_string(fields.size()));
        }
        std::vector<double> row;
        row.reserve(fields.size());
        for (std::size_t c = 0; c < fields.size(); ++c) {
            row.push_back(parse_double(fields[c], "line " + std::to_string(line_no) + " column '" +
                                                      table.header[c] + "'"));
        }
        table.rows.push_back(std::move(row));
    }
    if (table.header.empty()) {
        throw ParseError("empty CSV document");
    }
    return table;
}

CsvTable read_csv_table(const std::filesystem::path& path) {
    return parse_csv_table(read_text_file(path));
}

std::string trajectory_to_csv(const Trajectory& trajectory) {
    std::ostringstream os;
    os << 't';
    for (std::size_t i = 0; i < trajectory.stocks(); ++i) os << ',' << default_label('x', i);
    for (std::size_t i = 0; i < trajectory.statics(); ++i) os << ',' << default_label('y', i);
    os << '\n';
    for (std::size_t k = 0; k < trajectory.size(); ++k) {
        os << format_double(trajectory.grid()[k]);
        for (double v : trajectory.x_samples().row(k)) os << ',' << format_double(v);
        for (double v : trajectory.y_samples().row(k)) os << ',' << format_double(v);
        os << '\n';
    }
    return os.str();
}

Trajectory trajectory_from_csv(std::string_view text) {
    const auto table = parse_csv_table(text);
    if (table.header.front() != "t") {
        throw ParseError("trajectory CSV must start with a 't' column");
    }
    std::size_t m = 0;
    std::size_t n = 0;
    for (std::size_t c = 1; c < table.header.size(); ++c) {
        const auto& name = table.header[c];
        if (name == default_label('x', m) && n == 0) {
            ++m;
        } else if (name == default_label('y', n)) {
            ++n;
        } else {
            throw ParseError("unexpected trajectory column '" + name + "'");
        }
    }
    std::vector<double> grid;
    Matrix xs(table.rows.size(), m);
    Matrix ys(table.rows.size(), n);
    for (std::size_t k = 0; k < table.rows.size(); ++k) {
        const auto& row = table.rows[k];
        grid.push_back(row[0]);
        for (std::size_t i = 0; i < m; ++i) xs(k, i) = row[1 + i];
        for (std::size_t i = 0; i < n; ++i) ys(k, i) = row[1 + m + i];
    }
    try {
        return Trajectory(std::move(grid), std::move(xs), std::move(ys));
    } catch (const Error& e) {
        throw ParseError(std::string("invalid trajectory: ") + e.what());
    }
}

std::string observations_to_csv(const ObservationMatrix& obs) {
    std::ostringstream os;
    os << 't';
    for (std::size_t i = 0; i < obs.values.rows(); ++i) {
        os << ',' << (i < obs.indicator_labels.size() ? obs.indicator_labels[i] : default_label('z', i));
    }
    os << '\n';
    for (std::size_t k = 0; k < obs.times.size(); ++k) {
        os << format_double(obs.times[k]);
        for (std::size_t i = 0; i < obs.values.rows(); ++i) {
            os << ',' << format_double(obs.values(i, k));
        }
        os << '\n';
    }
    return os.str();
}

ObservationMatrix observations_from_csv(std::string_view text) {
    const auto table = parse_csv_table(text);
    if (table.header.front() != "t") {
        throw ParseError("observation CSV must start with a 't' column");
    }
    const std::size_t p = table.header.size() - 1;
    ObservationMatrix obs{Matrix(p, table.rows.size()), {}, {}};
    obs.indicator_labels.assign(table.header.begin() + 1, table.header.end());
    for (std::size_t k = 0; k < table.rows.size(); ++k) {
        const auto& row = table.rows[k];
        if (k > 0 && !(row[0] > obs.times.back())) {
            throw ParseError("observation times must be strictly increasing");
        }
        obs.times.push_back(row[0]);
        for (std::size_t i = 0; i < p; ++i) obs.values(i, k) = row[1 + i];
    }
    return obs;
}

std::string covariance_to_csv(const Eigen::MatrixXd& cov, const std::vector<std::string>& labels) {
    if (labels.size() != static_cast<std::size_t>(cov.rows()) || cov.rows() != cov.cols()) {
        throw ShapeError("covariance labels do not match the matrix");
    }
    std::ostringstream os;
    os << "indicator";
    for (const auto& l : labels) os << ',' << l;
    os << '\n';
    for (Eigen::Index r = 0; r < cov.rows(); ++r) {
        os << labels[static_cast<std::size_t>(r)];
        for (Eigen::Index c = 0; c < cov.cols(); ++c) os << ',' << format_double(cov(r, c));
        os << '\n';
    }
    return os.str();
}

Eigen::MatrixXd covariance_from_csv(std::string_view text, std::vector<std::string>* labels) {
    std::vector<std::vector<std::string>> lines;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto nl = text.find('\n', pos);
        auto line = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() : nl + 1;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
        lines.push_back(split_line(line));
    }
    if (lines.empty()) throw ParseError("empty covariance CSV");
    const auto size = static_cast<Eigen::Index>(lines.front().size() - 1);
    if (static_cast<Eigen::Index>(lines.size()) != size + 1) {
        throw ParseError("covariance CSV is not square");
    }
    Eigen::MatrixXd cov(size, size);
    for (Eigen::Index r = 0; r < size; ++r) {
        const auto& row = lines[static_cast<std::size_t>(r) + 1];
        if (static_cast<Eigen::Index>(row.size()) != size + 1 ||
            row.front() != lines.front()[static_cast<std::size_t>(r) + 1]) {
            throw ParseError("covariance row " + std::to_string(r + 1) + " is malformed");
        }
        for (Eigen::Index c = 0; c < size; ++c) {
            cov(r, c) = parse_double(row[static_cast<std::size_t>(c) + 1], "covariance entry");
        }
    }
    if (labels) labels->assign(lines.front().begin() + 1, lines.front().end());
    return cov;
}

std::string trajectory_plot_data(const Trajectory& trajectory) {
    std::ostringstream os;
    os << "series,t,value\n";
    auto emit = [&](const std::string& name, const Matrix& mat, std::size_t col) {
        for (std::size_t k = 0; k < trajectory.size(); ++k) {
            os << name << ',' << format_double(trajectory.grid()[k]) << ','
               << format_double(mat(k, col)) << '\n';
        }
    };
    for (std::size_t i = 0; i < trajectory.stocks(); ++i)
        emit(default_label('x', i), trajectory.x_samples(), i);
    for (std::size_t i = 0; i < trajectory.statics(); ++i)
        emit(default_label('y', i), trajectory.y_samples(), i);
    return os.str();
}

std::string observation_plot_data(const ObservationMatrix& obs) {
    std::ostringstream os;
    os << "series,t,value\n";
    for (std::size_t i = 0; i < obs.values.rows(); ++i) {
        for (std::size_t k = 0; k < obs.times.size(); ++k) {
            os << default_label('z', i) << ',' << format_double(obs.times[k]) << ','
               << format_double(obs.values(i, k)) << '\n';
        }
    }
    return os.str();
}

}  // namespace sdsem
