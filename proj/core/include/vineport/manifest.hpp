#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace vineport {

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::string& path);

/// ISO-8601 UTC time. Honors SOURCE_DATE_EPOCH so manifests can be made
/// reproducible.
std::string utc_timestamp();

struct RunManifest {
    std::string command;
    std::string version;
    std::uint64_t seed = 0;
    std::string config_json;      ///< full config snapshot
    std::string input_path;
    std::string input_sha256;
    std::string started;
    std::string finished;
    std::vector<std::pair<std::string, std::string>> outputs;   ///< path, sha256
};

std::string manifest_to_json(const RunManifest& m);
std::string library_version();

} // namespace vineport
