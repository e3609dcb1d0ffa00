#include "sdsem/generator.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "sdsem/dynamics.hpp"
#include "sdsem/spec_io.hpp"

namespace sdsem {

using Json = nlohmann::ordered_json;

namespace {

void check_probability(double v, const char* field) {
    if (!(v >= 0.0 && v <= 1.0)) throw SchemaError(field, "probability must lie in [0, 1]");
}

void check_range(const ValueRange& r, const char* field) {
    if (!std::isfinite(r.lo) || !std::isfinite(r.hi) || r.lo > r.hi) {
        throw SchemaError(field, "range must be finite with lo <= hi");
    }
}

void check_range(const CountRange& r, const char* field) {
    if (r.lo > r.hi) throw SchemaError(field, "range must have lo <= hi");
}

}  // namespace

void check_config(const GeneratorConfig& c) {
    check_range(c.m, "m");
    check_range(c.n, "n");
    check_range(c.p, "p");
    if (c.n.lo < 1) throw SchemaError("n", "at least one static variable is required");
    if (c.p.hi > 0 && c.observations == 0) {
        throw SchemaError("observations", "indicators need at least one observation time");
    }
    check_probability(c.sparsity.B1, "sparsity.B1");
    check_probability(c.sparsity.B2, "sparsity.B2");
    check_probability(c.sparsity.B3, "sparsity.B3");
    check_probability(c.sparsity.B4, "sparsity.B4");
    check_probability(c.sparsity.Lambda, "sparsity.Lambda");
    check_range(c.coef, "coef");
    check_range(c.delay, "delay");
    check_range(c.error_sd, "error_sd");
    check_range(c.initial, "initial");
    if (c.delay.lo < 0.0) throw SchemaError("delay", "delays must be >= 0");
    if (c.error_sd.lo < 0.0) throw SchemaError("error_sd", "sds must be >= 0");
    if (c.exponent_pool.empty()) throw SchemaError("exponent_pool", "pool must be nonempty");
    for (double e : c.exponent_pool) {
        if (!std::isfinite(e)) throw SchemaError("exponent_pool", "exponents must be finite");
    }
    if (c.dt && !(*c.dt > 0.0)) throw SchemaError("dt", "must be > 0");
    if (c.rejection.max_attempts < 1) {
        throw SchemaError("rejection.max_attempts", "must be >= 1");
    }
    if (!(c.rejection.horizon > 0.0)) throw SchemaError("rejection.horizon", "must be > 0");
    if (c.dt && *c.dt > c.rejection.horizon) {
        throw SchemaError("dt", "must not exceed rejection.horizon");
    }
    if (!(c.rejection.overflow_guard > 0.0)) {
        throw SchemaError("rejection.overflow_guard", "must be > 0");
    }
}

namespace {

void allow_keys(const Json& j, const std::string& field, std::initializer_list<const char*> keys) {
    if (!j.is_object()) throw SchemaError(field.empty() ? "config" : field, "expected an object");
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [key, value] : j.items()) {
        if (!allowed.contains(key)) {
            throw SchemaError(field.empty() ? key : field + "." + key, "unknown field");
        }
    }
}

double number(const Json& j, const std::string& field) {
    if (!j.is_number()) throw SchemaError(field, "expected a number");
    return j.get<double>();
}

std::uint64_t unsigned_integer(const Json& j, const std::string& field) {
    if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0)) {
        throw SchemaError(field, "expected a nonnegative integer");
    }
    return j.get<std::uint64_t>();
}

template <typename Range, typename Read>
Range pair_range(const Json& j, const std::string& field, Read read) {
    if (!j.is_array() || j.size() != 2) throw SchemaError(field, "expected [lo, hi]");
    return Range{read(j[0], field + "[0]"), read(j[1], field + "[1]")};
}

ValueRange value_range(const Json& j, const std::string& field) {
    return pair_range<ValueRange>(j, field, number);
}

CountRange count_range(const Json& j, const std::string& field) {
    return pair_range<CountRange>(j, field, [](const Json& v, const std::string& f) {
        return static_cast<std::size_t>(unsigned_integer(v, f));
    });
}

}  // namespace

GeneratorConfig parse_generator_config(std::string_view json_text) {
    Json doc;
    try {
        doc = Json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("malformed generator config: ") + e.what());
    }
    allow_keys(doc, "",
               {"m", "n", "p", "observations", "sparsity", "coef", "exponent_pool", "delay",
                "error_sd", "initial", "dt", "mode", "seed", "rejection"});
    GeneratorConfig c;
    if (doc.contains("m")) c.m = count_range(doc["m"], "m");
    if (doc.contains("n")) c.n = count_range(doc["n"], "n");
    if (doc.contains("p")) c.p = count_range(doc["p"], "p");
    if (doc.contains("observations"))
        c.observations = static_cast<std::size_t>(unsigned_integer(doc["observations"], "observations"));
    if (doc.contains("sparsity")) {
        const auto& s = doc["sparsity"];
        allow_keys(s, "sparsity", {"B1", "B2", "B3", "B4", "Lambda"});
        if (s.contains("B1")) c.sparsity.B1 = number(s["B1"], "sparsity.B1");
        if (s.contains("B2")) c.sparsity.B2 = number(s["B2"], "sparsity.B2");
        if (s.contains("B3")) c.sparsity.B3 = number(s["B3"], "sparsity.B3");
        if (s.contains("B4")) c.sparsity.B4 = number(s["B4"], "sparsity.B4");
        if (s.contains("Lambda")) c.sparsity.Lambda = number(s["Lambda"], "sparsity.Lambda");
    }
    if (doc.contains("coef")) c.coef = value_range(doc["coef"], "coef");
    if (doc.contains("exponent_pool")) {
        const auto& pool = doc["exponent_pool"];
        if (!pool.is_array()) throw SchemaError("exponent_pool", "expected an array");
        c.exponent_pool.clear();
        for (std::size_t i = 0; i < pool.size(); ++i) {
            c.exponent_pool.push_back(number(pool[i], "exponent_pool[" + std::to_string(i) + "]"));
        }
    }
    if (doc.contains("delay")) c.delay = value_range(doc["delay"], "delay");
    if (doc.contains("error_sd")) c.error_sd = value_range(doc["error_sd"], "error_sd");
    if (doc.contains("initial")) c.initial = value_range(doc["initial"], "initial");
    if (doc.contains("dt") && !doc["dt"].is_null()) c.dt = number(doc["dt"], "dt");
    if (doc.contains("mode")) {
        if (doc["mode"] == "sd_restricted") {
            c.mode = Mode::SdRestricted;
        } else if (doc["mode"] == "nonrecursive") {
            c.mode = Mode::Nonrecursive;
        } else {
            throw SchemaError("mode", "expected \"sd_restricted\" or \"nonrecursive\"");
        }
    }
    if (doc.contains("seed")) c.seed = unsigned_integer(doc["seed"], "seed");
    if (doc.contains("rejection")) {
        const auto& r = doc["rejection"];
        allow_keys(r, "rejection", {"max_attempts", "horizon", "overflow_guard"});
        if (r.contains("max_attempts"))
            c.rejection.max_attempts =
                static_cast<int>(unsigned_integer(r["max_attempts"], "rejection.max_attempts"));
        if (r.contains("horizon")) c.rejection.horizon = number(r["horizon"], "rejection.horizon");
        if (r.contains("overflow_guard"))
            c.rejection.overflow_guard = number(r["overflow_guard"], "rejection.overflow_guard");
    }
    check_config(c);
    return c;
}

std::string serialize_generator_config(const GeneratorConfig& c) {
    Json doc = Json::object();
    doc["m"] = {c.m.lo, c.m.hi};
    doc["n"] = {c.n.lo, c.n.hi};
    doc["p"] = {c.p.lo, c.p.hi};
    doc["observations"] = c.observations;
    doc["sparsity"] = {{"B1", c.sparsity.B1}, {"B2", c.sparsity.B2}, {"B3", c.sparsity.B3},
                       {"B4", c.sparsity.B4}, {"Lambda", c.sparsity.Lambda}};
    doc["coef"] = {c.coef.lo, c.coef.hi};
    doc["exponent_pool"] = c.exponent_pool;
    doc["delay"] = {c.delay.lo, c.delay.hi};
    doc["error_sd"] = {c.error_sd.lo, c.error_sd.hi};
    doc["initial"] = {c.initial.lo, c.initial.hi};
    if (c.dt) doc["dt"] = *c.dt;
    doc["mode"] = to_string(c.mode);
    doc["seed"] = c.seed;
    doc["rejection"] = {{"max_attempts", c.rejection.max_attempts},
                        {"horizon", c.rejection.horizon},
                        {"overflow_guard", c.rejection.overflow_guard}};
    return doc.dump(2) + "\n";
}

ModelSpec propose(const GeneratorConfig& c, rng::Stream& rs) {
    Dimensions dims;
    dims.m = static_cast<std::size_t>(rs.integer(static_cast<std::int64_t>(c.m.lo),
                                                 static_cast<std::int64_t>(c.m.hi)));
    dims.n = static_cast<std::size_t>(rs.integer(static_cast<std::int64_t>(c.n.lo),
                                                 static_cast<std::int64_t>(c.n.hi)));
    dims.p = static_cast<std::size_t>(rs.integer(static_cast<std::int64_t>(c.p.lo),
                                                 static_cast<std::int64_t>(c.p.hi)));
    dims.q = dims.p > 0 ? c.observations : 0;

    TimeHorizon horizon;
    horizon.t_initial = 0.0;
    horizon.t_final = c.rejection.horizon;
    horizon.dt = c.dt;
    for (std::size_t k = 0; k < dims.q; ++k) {
        horizon.observation_times.push_back(
            dims.q == 1 ? horizon.t_final
                        : horizon.t_final * static_cast<double>(k) / static_cast<double>(dims.q - 1));
    }

    auto spec = make_zero_spec(dims, horizon, c.mode);
    auto coef = [&] { return rs.uniform(c.coef.lo, c.coef.hi); };
    auto exponent = [&] {
        const auto idx = rs.integer(0, static_cast<std::int64_t>(c.exponent_pool.size()) - 1);
        return c.exponent_pool[static_cast<std::size_t>(idx)];
    };
    const bool sd = c.mode == Mode::SdRestricted;

    for (std::size_t i = 0; i < dims.m; ++i) {
        spec.dynamic.x0[i] = rs.uniform(c.initial.lo, c.initial.hi);
        for (std::size_t j = 0; j < dims.n; ++j) {
            if (rs.bernoulli(c.sparsity.B1)) {
                spec.dynamic.B1(i, j) = coef();
                spec.dynamic.Gamma1(i, j) = exponent();
            }
        }
    }
    auto& st = spec.statics;
    for (std::size_t i = 0; i < dims.n; ++i) {
        for (std::size_t j = 0; j < dims.m; ++j) {
            if (rs.bernoulli(c.sparsity.B2)) {
                st.B2(i, j) = coef();
                st.Gamma2(i, j) = exponent();
            }
        }
        for (std::size_t j = 0; j < dims.n; ++j) {
            if (j == i) {
                // Zero-exponent diagonal: an additive constant, never a self-loop.
                if (rs.bernoulli(c.sparsity.B3)) st.B3(i, i) = coef();
                continue;
            }
            if (sd && j > i) continue;
            if (rs.bernoulli(c.sparsity.B3)) {
                st.B3(i, j) = coef();
                st.Gamma3(i, j) = exponent();
            }
        }
        for (std::size_t j = 0; j < dims.n; ++j) {
            for (std::size_t k = j + 1; k < dims.n; ++k) {
                if (sd ? k >= i : (j == i || k == i)) continue;
                if (rs.bernoulli(c.sparsity.B4)) st.B4.push_back({i, j, k, coef()});
            }
        }
    }
    auto& ms = spec.measurement;
    for (std::size_t ind = 0; ind < dims.p; ++ind) {
        for (std::size_t i = 0; i < dims.m; ++i) {
            if (rs.bernoulli(c.sparsity.Lambda)) {
                ms.LambdaX(ind, i) = coef();
                ms.ThetaX(ind, i) = rs.uniform(c.delay.lo, c.delay.hi);
            }
        }
        for (std::size_t i = 0; i < dims.n; ++i) {
            if (rs.bernoulli(c.sparsity.Lambda)) {
                ms.LambdaY(ind, i) = coef();
                ms.ThetaY(ind, i) = rs.uniform(c.delay.lo, c.delay.hi);
            }
        }
        ms.epsilon_sd[ind] = rs.uniform(c.error_sd.lo, c.error_sd.hi);
    }
    return spec;
}

std::optional<std::string> rejection_cause(const ModelSpec& spec, const RejectionConfig& rejection) {
    if (!validate(spec).empty()) return rejection::kValidation;
    for (std::size_t i = 0; i < spec.dims.m; ++i) {
        bool any = false;
        for (double b : spec.dynamic.B1.row(i)) any = any || b != 0.0;
        if (!any) return rejection::kNoFlow;
    }
    IntegratorConfig config;
    config.overflow_guard = rejection.overflow_guard;
    try {
        (void)simulate(spec, config);
    } catch (const OverflowError&) {
        return rejection::kOverflow;
    } catch (const DomainError&) {
        return rejection::kDomain;
    } catch (const NonConvergence&) {
        return rejection::kNonConvergence;
    } catch (const SingularSystem&) {
        return rejection::kNonConvergence;
    }
    return std::nullopt;
}

namespace {

std::string describe_causes(const std::map<std::string, int>& causes) {
    std::ostringstream os;
    bool first = true;
    for (const auto& [cause, count] : causes) {
        os << (first ? "" : ", ") << (cause == rejection::kNoFlow ? "stock has no flow" : cause)
           << ": " << count;
        first = false;
    }
    return os.str();
}

}  // namespace

GeneratedSystem generate(const GeneratorConfig& config) {
    check_config(config);
    rng::Stream stream(config.seed);
    Provenance prov;
    prov.seed = config.seed;
    for (int attempt = 1; attempt <= config.rejection.max_attempts; ++attempt) {
        auto spec = propose(config, stream);
        prov.attempts = attempt;
        if (auto cause = rejection_cause(spec, config.rejection)) {
            ++prov.rejections[*cause];
            continue;
        }
        return {std::move(spec), std::move(prov)};
    }
    throw ExhaustedAttempts("no admissible system after " +
                                std::to_string(config.rejection.max_attempts) +
                                " attempts (" + describe_causes(prov.rejections) + ")",
                            prov.rejections);
}

std::uint64_t sub_seed(std::uint64_t seed, std::size_t index) noexcept {
    return rng::hash_key(seed, index);
}

BatchResult batch(const GeneratorConfig& config, std::size_t count, unsigned threads) {
    if (count < 1) throw Error("batch count must be >= 1");
    check_config(config);
    BatchResult result;
    result.items.resize(count);

    auto run_item = [&](std::size_t index) {
        auto& item = result.items[index];
        item.index = index;
        item.seed = sub_seed(config.seed, index);
        GeneratorConfig local = config;
        local.seed = item.seed;
        try {
            auto sys = generate(local);
            item.attempts = sys.provenance.attempts;
            item.rejections = sys.provenance.rejections;
            item.system = std::move(sys);
        } catch (const ExhaustedAttempts& e) {
            item.attempts = config.rejection.max_attempts;
            item.rejections = e.causes();
        }
    };

    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
    if (threads == 1) {
        for (std::size_t i = 0; i < count; ++i) run_item(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < threads; ++w) {
            pool.emplace_back([&] {
                for (auto i = next.fetch_add(1); i < count; i = next.fetch_add(1)) run_item(i);
            });
        }
    }

    for (const auto& item : result.items) {
        result.attempted += static_cast<std::size_t>(item.attempts);
        if (item.system) ++result.accepted;
        for (const auto& [cause, n] : item.rejections) result.causes[cause] += n;
    }
    if (result.accepted == 0) {
        throw ExhaustedAttempts("every batch item exhausted its attempts (" +
                                    describe_causes(result.causes) + ")",
                                result.causes);
    }
    return result;
}

std::vector<std::filesystem::path> write_batch(const BatchResult& result,
                                               const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> written;
    std::ostringstream manifest;
    manifest << "index,sub_seed,attempts,accepted\n";
    for (const auto& item : result.items) {
        manifest << item.index << ',' << item.seed << ',' << item.attempts << ','
                 << (item.system ? 1 : 0) << '\n';
        if (!item.system) continue;
        char name[32];
        std::snprintf(name, sizeof(name), "spec_%05zu.json", item.index);
        const auto path = dir / name;
        save_spec(item.system->spec, path);
        written.push_back(path);
    }
    write_text_file(dir / "manifest.csv", manifest.str());
    return written;
}

}  // namespace sdsem
