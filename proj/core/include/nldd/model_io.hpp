#pragma once

#include <filesystem>
#include <string>
#include <variant>

#include "nldd/br.hpp"
#include "nldd/nldd.hpp"

namespace nldd {

inline constexpr int kModelFormatVersion = 1;

using ModelFile = std::variant<BRModel, NlddModel>;

/// Versioned JSON with fixed field order and shortest round-trip numbers.
std::string serialize_model(const ModelFile& model);
/// Throws DataError for malformed documents or an unknown format_version.
ModelFile deserialize_model(std::string_view text);

void save_model(const ModelFile& model, const std::filesystem::path& path);
ModelFile load_model(const std::filesystem::path& path);

}  // namespace nldd
