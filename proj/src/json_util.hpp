#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "gerk/types.hpp"

namespace gerk::detail {

using Json = nlohmann::json;

Json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j);

/// `.json` paths are written as indented text, every other path as CBOR.
void write_document(const std::filesystem::path& path, const Json& doc);
Json read_document(const std::filesystem::path& path);

/// Checks the `format` tag of a container and throws ConfigError otherwise.
void expect_format(const Json& doc, const std::string& tag, const std::filesystem::path& path);

}  // namespace gerk::detail
