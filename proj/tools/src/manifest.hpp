#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace phi::cli {

/// Lower-case hex SHA-256 of a file's contents.
std::string sha256_file(const std::filesystem::path& path);

/// ISO-8601 UTC. Uses SOURCE_DATE_EPOCH when set.
std::string build_timestamp();

struct RunManifest {
    std::string command;
    std::vector<std::pair<std::string, std::filesystem::path>> inputs;
    std::optional<std::uint64_t> seed;
    nlohmann::ordered_json parameters = nlohmann::ordered_json::object();
    std::string config_text;

    nlohmann::ordered_json to_json() const;
};

} // namespace phi::cli
