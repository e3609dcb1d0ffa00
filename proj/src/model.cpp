#include "sdsem/model.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>
#include <set>
#include <sstream>
#include <tuple>

namespace sdsem {

ValidationError::ValidationError(ValidationReport report)
    : Error([&] {
          std::ostringstream os;
          os << "spec failed validation (" << report.size() << " violation"
             << (report.size() == 1 ? "" : "s") << ")";
          if (!report.empty()) {
              os << ": " << report.front().location << ": " << report.front().message;
          }
          return os.str();
      }()),
      report_(std::move(report)) {}

double default_dt(const TimeHorizon& horizon) noexcept {
    return std::min(0.0625, horizon.length() / 64.0);
}

ModelSpec make_zero_spec(const Dimensions& dims, const TimeHorizon& horizon, Mode mode) {
    ModelSpec spec;
    spec.dims = dims;
    spec.horizon = horizon;
    spec.mode = mode;
    spec.dynamic.B1 = Matrix(dims.m, dims.n);
    spec.dynamic.Gamma1 = Matrix(dims.m, dims.n);
    spec.dynamic.x0.assign(dims.m, 0.0);
    spec.statics.B2 = Matrix(dims.n, dims.m);
    spec.statics.Gamma2 = Matrix(dims.n, dims.m);
    spec.statics.B3 = Matrix(dims.n, dims.n);
    spec.statics.Gamma3 = Matrix(dims.n, dims.n);
    spec.measurement.LambdaX = Matrix(dims.p, dims.m);
    spec.measurement.LambdaY = Matrix(dims.p, dims.n);
    spec.measurement.ThetaX = Matrix(dims.p, dims.m);
    spec.measurement.ThetaY = Matrix(dims.p, dims.n);
    spec.measurement.epsilon_sd.assign(dims.p, 0.0);
    return spec;
}

std::vector<StaticEdge> static_dependence_edges(const ModelSpec& spec) {
    std::set<std::pair<std::size_t, std::size_t>> edges;
    const auto& B3 = spec.statics.B3;
    const auto& G3 = spec.statics.Gamma3;
    const std::size_t n = std::min({spec.dims.n, B3.rows(), G3.rows()});
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < std::min(B3.cols(), G3.cols()); ++j) {
            if (B3(i, j) != 0.0 && G3(i, j) != 0.0) {
                edges.emplace(j, i);
            }
        }
    }
    for (const auto& term : spec.statics.B4) {
        if (term.beta == 0.0) {
            continue;
        }
        edges.emplace(term.j, term.i);
        edges.emplace(term.k, term.i);
    }
    std::vector<StaticEdge> out;
    out.reserve(edges.size());
    for (const auto& [from, to] : edges) {
        out.push_back({from, to});
    }
    return out;
}

bool is_constant_static(const ModelSpec& spec, std::size_t i) {
    const auto& s = spec.statics;
    bool has_constant = false;
    for (std::size_t j = 0; j < s.B2.cols(); ++j) {
        if (s.B2(i, j) != 0.0) {
            return false;
        }
    }
    for (std::size_t j = 0; j < s.B3.cols(); ++j) {
        if (s.B3(i, j) == 0.0) {
            continue;
        }
        if (s.Gamma3(i, j) != 0.0) {
            return false;
        }
        has_constant = true;
    }
    for (const auto& term : s.B4) {
        if (term.i == i && term.beta != 0.0) {
            return false;
        }
    }
    return has_constant;
}

namespace {

class Reporter {
public:
    void add(std::string location, std::string rule, std::string message) {
        report_.push_back({std::move(location), std::move(rule), std::move(message)});
    }
    ValidationReport take() { return std::move(report_); }

private:
    ValidationReport report_;
};

std::string cell(const std::string& name, std::size_t r, std::size_t c) {
    return name + "[" + std::to_string(r) + "][" + std::to_string(c) + "]";
}

/// Shape check; returns false (and reports) on mismatch.
bool check_shape(Reporter& rep, const std::string& name, const Matrix& mat, std::size_t rows,
                 std::size_t cols) {
    if (mat.rows() == rows && mat.cols() == cols) {
        return true;
    }
    rep.add(name, "shape",
            "expected " + std::to_string(rows) + "x" + std::to_string(cols) + ", got " +
                std::to_string(mat.rows()) + "x" + std::to_string(mat.cols()));
    return false;
}

void check_finite(Reporter& rep, const std::string& name, const Matrix& mat) {
    for (std::size_t r = 0; r < mat.rows(); ++r) {
        for (std::size_t c = 0; c < mat.cols(); ++c) {
            if (!std::isfinite(mat(r, c))) {
                rep.add(cell(name, r, c), "finite", "entry is not finite");
            }
        }
    }
}

void check_delays(Reporter& rep, const std::string& name, const Matrix& mat) {
    for (std::size_t r = 0; r < mat.rows(); ++r) {
        for (std::size_t c = 0; c < mat.cols(); ++c) {
            const double v = mat(r, c);
            if (!std::isfinite(v) || v < 0.0) {
                rep.add(cell(name, r, c), "delay", "delay must be finite and >= 0");
            }
        }
    }
}

/// Finds one cycle (as a vertex list) with a deterministic DFS, or empty.
std::vector<std::size_t> find_cycle(std::size_t n, const std::vector<StaticEdge>& edges) {
    std::vector<std::vector<std::size_t>> adj(n);
    for (const auto& e : edges) {
        if (e.from < n && e.to < n) {
            adj[e.from].push_back(e.to);
        }
    }
    enum class Color { White, Grey, Black };
    std::vector<Color> color(n, Color::White);
    std::vector<std::size_t> stack;
    std::vector<std::size_t> cycle;

    std::function<bool(std::size_t)> visit = [&](std::size_t u) {
        color[u] = Color::Grey;
        stack.push_back(u);
        for (auto v : adj[u]) {
            if (color[v] == Color::Grey) {
                auto it = std::find(stack.begin(), stack.end(), v);
                cycle.assign(it, stack.end());
                return true;
            }
            if (color[v] == Color::White && visit(v)) {
                return true;
            }
        }
        stack.pop_back();
        color[u] = Color::Black;
        return false;
    };
    for (std::size_t u = 0; u < n; ++u) {
        if (color[u] == Color::White && visit(u)) {
            break;
        }
    }
    return cycle;
}

std::string describe_cycle(const std::vector<std::size_t>& cycle) {
    std::ostringstream os;
    for (auto v : cycle) {
        os << "y" << v + 1 << " -> ";
    }
    os << "y" << cycle.front() + 1;
    return os.str();
}

}  // namespace

ValidationReport validate(const ModelSpec& spec) {
    Reporter rep;
    const auto& d = spec.dims;
    const auto& h = spec.horizon;

    if (d.n < 1) {
        rep.add("dims.n", "dims", "at least one static variable is required");
    }
    if ((d.p == 0) != (d.q == 0)) {
        rep.add("dims", "dims", "p = 0 if and only if q = 0");
    }

    if (!std::isfinite(h.t_initial) || !std::isfinite(h.t_final) || !(h.t_final > h.t_initial)) {
        rep.add("horizon", "horizon", "t_final must exceed t_initial (both finite)");
    }
    if (h.dt) {
        if (!std::isfinite(*h.dt) || *h.dt <= 0.0) {
            rep.add("horizon.dt", "horizon", "dt must be > 0");
        } else if (*h.dt > h.length()) {
            rep.add("horizon.dt", "horizon", "dt must not exceed t_final - t_initial");
        }
    }
    if (h.observation_times.size() != d.q) {
        rep.add("horizon.observation_times", "dims",
                "expected q = " + std::to_string(d.q) + " observation times, got " +
                    std::to_string(h.observation_times.size()));
    }
    for (std::size_t k = 0; k < h.observation_times.size(); ++k) {
        const double t = h.observation_times[k];
        const std::string loc = "horizon.observation_times[" + std::to_string(k) + "]";
        if (!std::isfinite(t) || t < h.t_initial || t > h.t_final) {
            rep.add(loc, "horizon", "observation time outside [t_initial, t_final]");
        }
        if (k > 0 && !(t > h.observation_times[k - 1])) {
            rep.add(loc, "horizon", "observation times must be strictly increasing");
        }
    }

    const auto& dyn = spec.dynamic;
    if (check_shape(rep, "dynamic.B1", dyn.B1, d.m, d.n)) check_finite(rep, "dynamic.B1", dyn.B1);
    if (check_shape(rep, "dynamic.Gamma1", dyn.Gamma1, d.m, d.n))
        check_finite(rep, "dynamic.Gamma1", dyn.Gamma1);
    if (dyn.x0.size() != d.m) {
        rep.add("dynamic.x0", "shape", "expected length " + std::to_string(d.m));
    }
    for (std::size_t i = 0; i < dyn.x0.size(); ++i) {
        if (!std::isfinite(dyn.x0[i])) {
            rep.add("dynamic.x0[" + std::to_string(i) + "]", "finite", "entry is not finite");
        }
    }

    const auto& st = spec.statics;
    bool static_shapes_ok = true;
    static_shapes_ok &= check_shape(rep, "static.B2", st.B2, d.n, d.m);
    static_shapes_ok &= check_shape(rep, "static.Gamma2", st.Gamma2, d.n, d.m);
    static_shapes_ok &= check_shape(rep, "static.B3", st.B3, d.n, d.n);
    static_shapes_ok &= check_shape(rep, "static.Gamma3", st.Gamma3, d.n, d.n);
    check_finite(rep, "static.B2", st.B2);
    check_finite(rep, "static.Gamma2", st.Gamma2);
    check_finite(rep, "static.B3", st.B3);
    check_finite(rep, "static.Gamma3", st.Gamma3);

    std::set<std::tuple<std::size_t, std::size_t, std::size_t>> seen;
    for (std::size_t t = 0; t < st.B4.size(); ++t) {
        const auto& term = st.B4[t];
        const std::string loc = "static.B4[" + std::to_string(t) + "]";
        if (term.i >= d.n || term.j >= d.n || term.k >= d.n) {
            rep.add(loc, "index", "interaction index out of range");
            static_shapes_ok = false;
        }
        if (!(term.j < term.k)) {
            rep.add(loc, "interaction", "interaction pairs require j < k");
        }
        if (!std::isfinite(term.beta)) {
            rep.add(loc, "finite", "coefficient is not finite");
        }
        if (!seen.emplace(term.i, term.j, term.k).second) {
            rep.add(loc, "interaction", "duplicate interaction term");
        }
    }

    const auto& ms = spec.measurement;
    if (check_shape(rep, "measurement.LambdaX", ms.LambdaX, d.p, d.m))
        check_finite(rep, "measurement.LambdaX", ms.LambdaX);
    if (check_shape(rep, "measurement.LambdaY", ms.LambdaY, d.p, d.n))
        check_finite(rep, "measurement.LambdaY", ms.LambdaY);
    if (check_shape(rep, "measurement.ThetaX", ms.ThetaX, d.p, d.m))
        check_delays(rep, "measurement.ThetaX", ms.ThetaX);
    if (check_shape(rep, "measurement.ThetaY", ms.ThetaY, d.p, d.n))
        check_delays(rep, "measurement.ThetaY", ms.ThetaY);
    if (ms.epsilon_sd.size() != d.p) {
        rep.add("measurement.epsilon_sd", "shape", "expected length " + std::to_string(d.p));
    }
    for (std::size_t i = 0; i < ms.epsilon_sd.size(); ++i) {
        if (!std::isfinite(ms.epsilon_sd[i]) || ms.epsilon_sd[i] < 0.0) {
            rep.add("measurement.epsilon_sd[" + std::to_string(i) + "]", "error_sd",
                    "measurement error sd must be finite and >= 0");
        }
    }

    for (std::size_t k = 0; k < spec.disturbances.size(); ++k) {
        const auto& dist = spec.disturbances[k];
        const std::string loc = "disturbances[" + std::to_string(k) + "]";
        if (dist.target >= d.n) {
            rep.add(loc + ".target", "index", "target is not a static variable");
        }
        switch (dist.kind) {
            case DisturbanceKind::Step:
            case DisturbanceKind::Pulse:
                if (!std::isfinite(dist.height)) {
                    rep.add(loc + ".height", "finite", "height is not finite");
                }
                if (!(dist.onset >= h.t_initial && dist.onset <= h.t_final)) {
                    rep.add(loc + ".onset", "disturbance", "onset outside [t_initial, t_final]");
                }
                if (dist.kind == DisturbanceKind::Pulse && !(dist.width > 0.0)) {
                    rep.add(loc + ".width", "disturbance", "pulse width must be > 0");
                }
                break;
            case DisturbanceKind::Noise:
                if (!std::isfinite(dist.sd) || dist.sd < 0.0) {
                    rep.add(loc + ".sd", "disturbance", "noise sd must be finite and >= 0");
                }
                break;
        }
    }

    if (spec.names.x.size() > d.m || spec.names.y.size() > d.n || spec.names.z.size() > d.p) {
        rep.add("names", "names", "more labels than variables");
    }

    if (spec.mode == Mode::SdRestricted && static_shapes_ok) {
        const auto cycle = find_cycle(d.n, static_dependence_edges(spec));
        if (!cycle.empty()) {
            rep.add("static", "static_cycle",
                    "static dependence cycle " + describe_cycle(cycle) +
                        " (every feedback loop must pass through a stock; use nonrecursive mode "
                        "for simultaneous equations)");
        }
    }
    return rep.take();
}

std::vector<std::size_t> topological_order(const ModelSpec& spec) {
    const std::size_t n = spec.dims.n;
    const auto edges = static_dependence_edges(spec);
    std::vector<std::vector<std::size_t>> adj(n);
    std::vector<std::size_t> indegree(n, 0);
    for (const auto& e : edges) {
        if (e.from >= n || e.to >= n) {
            throw CycleError("dependence edge references a missing static variable");
        }
        adj[e.from].push_back(e.to);
        ++indegree[e.to];
    }
    std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
    for (std::size_t i = 0; i < n; ++i) {
        if (indegree[i] == 0) {
            ready.push(i);
        }
    }
    std::vector<std::size_t> order;
    order.reserve(n);
    while (!ready.empty()) {
        const auto u = ready.top();
        ready.pop();
        order.push_back(u);
        for (auto v : adj[u]) {
            if (--indegree[v] == 0) {
                ready.push(v);
            }
        }
    }
    if (order.size() != n) {
        const auto cycle = find_cycle(n, edges);
        throw CycleError("static dependence graph is cyclic: " + describe_cycle(cycle));
    }
    return order;
}

std::string to_string(Mode mode) {
    return mode == Mode::SdRestricted ? "sd_restricted" : "nonrecursive";
}

std::string to_string(DisturbanceKind kind) {
    switch (kind) {
        case DisturbanceKind::Step: return "step";
        case DisturbanceKind::Pulse: return "pulse";
        case DisturbanceKind::Noise: return "noise";
    }
    return "step";
}

}  // namespace sdsem
