#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sdsem/model.hpp"
#include "sdsem/random.hpp"

namespace sdsem {

struct CountRange {
    std::size_t lo = 0;
    std::size_t hi = 0;
};

struct ValueRange {
    double lo = 0.0;
    double hi = 0.0;
};

/// Bernoulli inclusion probability per matrix cell.
struct Sparsity {
    double B1 = 0.5;
    double B2 = 0.4;
    double B3 = 0.3;
    double B4 = 0.1;
    double Lambda = 0.4;
};

struct RejectionConfig {
    int max_attempts = 1000;
    double horizon = 10.0;         // simulated time units per candidate
    double overflow_guard = 1e6;
};

/// Distributions random systems are drawn from. Every choice here is ours;
/// nothing about it is canonical.
struct GeneratorConfig {
    CountRange m{1, 3};
    CountRange n{2, 6};
    CountRange p{0, 4};
    std::size_t observations = 10;  // q whenever p > 0
    Sparsity sparsity;
    ValueRange coef{-0.5, 0.5};
    std::vector<double> exponent_pool{0.0, 1.0, 2.0, -1.0};
    ValueRange delay{0.0, 2.0};
    ValueRange error_sd{0.0, 0.5};
    ValueRange initial{0.5, 2.0};
    std::optional<double> dt;       // default: engine default for the horizon
    Mode mode = Mode::SdRestricted;
    std::uint64_t seed = 0;
    RejectionConfig rejection;
};

/// Throws SchemaError naming the first invalid field.
void check_config(const GeneratorConfig& config);

/// JSON object whose keys mirror GeneratorConfig; omitted keys keep defaults.
[[nodiscard]] GeneratorConfig parse_generator_config(std::string_view json_text);
[[nodiscard]] std::string serialize_generator_config(const GeneratorConfig& config);

/// Rejection cause keys.
namespace rejection {
inline constexpr const char* kValidation = "validation_failure";
inline constexpr const char* kNoFlow = "no_flow";
inline constexpr const char* kOverflow = "overflow";
inline constexpr const char* kDomain = "domain_error";
inline constexpr const char* kNonConvergence = "nonconvergence";
}  // namespace rejection

struct Provenance {
    std::uint64_t seed = 0;
    int attempts = 0;  // proposals drawn, including the accepted one
    std::map<std::string, int> rejections;
};

struct GeneratedSystem {
    ModelSpec spec;
    Provenance provenance;
};

/// One raw proposal, before any rejection test.
[[nodiscard]] ModelSpec propose(const GeneratorConfig& config, rng::Stream& stream);

/// Reason a proposal is rejected, or nullopt when it is acceptable.
[[nodiscard]] std::optional<std::string> rejection_cause(const ModelSpec& spec,
                                                         const RejectionConfig& rejection);

/// Draws proposals from config.seed until one passes every check.
/// Throws ExhaustedAttempts with the cause histogram after max_attempts.
[[nodiscard]] GeneratedSystem generate(const GeneratorConfig& config);

/// Seed for batch item `index`; items are independent of batch size.
[[nodiscard]] std::uint64_t sub_seed(std::uint64_t seed, std::size_t index) noexcept;

struct BatchItem {
    std::size_t index = 0;
    std::uint64_t seed = 0;
    int attempts = 0;
    std::optional<GeneratedSystem> system;
    std::map<std::string, int> rejections;
};

struct BatchResult {
    std::vector<BatchItem> items;
    std::size_t accepted = 0;
    std::size_t attempted = 0;
    std::map<std::string, int> causes;

    [[nodiscard]] double acceptance_rate() const noexcept {
        return attempted == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(attempted);
    }
};

/// `count` systems from per-index sub-seeds, optionally on several threads.
/// Items that exhaust their attempts are recorded; throws ExhaustedAttempts only
/// when every item fails.
[[nodiscard]] BatchResult batch(const GeneratorConfig& config, std::size_t count,
                                unsigned threads = 1);

/// Writes spec_NNNNN.json per accepted item plus manifest.csv
/// (index, sub_seed, attempts, accepted). Returns the written spec paths.
std::vector<std::filesystem::path> write_batch(const BatchResult& result,
                                               const std::filesystem::path& dir);

}  // namespace sdsem
