#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "sdsem/model.hpp"

namespace sdsem {

/// Parses a spec document without running invariant checks.
/// Throws ParseError (not JSON) or SchemaError (missing, extra, or ill-typed field).
[[nodiscard]] ModelSpec parse_spec_unvalidated(std::string_view json_text);

/// parse_spec_unvalidated followed by validate(); throws ValidationError on violations.
[[nodiscard]] ModelSpec parse_spec(std::string_view json_text);

[[nodiscard]] ModelSpec load_spec_unvalidated(const std::filesystem::path& path);
[[nodiscard]] ModelSpec load_spec(const std::filesystem::path& path);

/// Serialized form; doubles are written shortest-round-trip so a reload is bit-exact.
[[nodiscard]] std::string serialize_spec(const ModelSpec& spec);
void save_spec(const ModelSpec& spec, const std::filesystem::path& path);

/// Reads a whole file, throwing ParseError when it cannot be opened.
[[nodiscard]] std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace sdsem
