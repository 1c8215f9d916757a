#include "vineport/manifest.hpp"

#include "vineport/serialize.hpp"

#include <fmt/format.h>
#include <json.hpp>
#include <openssl/evp.h>

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <memory>
#include <stdexcept>

#ifndef VINEPORT_VERSION
#define VINEPORT_VERSION "0.0.0"
#endif

namespace vineport {

std::string sha256_hex(const std::string& bytes) {
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 || EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1)
        throw std::runtime_error("sha256 failed");
    std::string out;
    for (unsigned int i = 0; i < len; ++i) out += fmt::format("{:02x}", digest[i]);
    return out;
}

std::string sha256_file(const std::string& path) { return sha256_hex(read_file(path)); }

std::string utc_timestamp() {
    std::time_t t = 0;
    if (const char* env = std::getenv("SOURCE_DATE_EPOCH")) {
        char* end = nullptr;
        const long long v = std::strtoll(env, &end, 10);
        if (end && *end == '\0' && v >= 0) t = static_cast<std::time_t>(v);
        else t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    } else {
        t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    }
    std::tm tm{};
    gmtime_r(&t, &tm);
    return fmt::format("{:04d}-{:02d}-{:02d}T{:02d}:{:02d}:{:02d}Z", tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday,
                       tm.tm_hour, tm.tm_min, tm.tm_sec);
}

std::string library_version() { return VINEPORT_VERSION; }

std::string manifest_to_json(const RunManifest& m) {
    nlohmann::json j;
    j["command"] = m.command;
    j["version"] = m.version;
    j["seed"] = m.seed;
    j["config"] = m.config_json.empty() ? nlohmann::json::object() : nlohmann::json::parse(m.config_json);
    j["input"] = {{"path", m.input_path}, {"sha256", m.input_sha256}};
    j["started"] = m.started;
    j["finished"] = m.finished;
    nlohmann::json outs = nlohmann::json::array();
    for (const auto& [p, h] : m.outputs) outs.push_back({{"path", p}, {"sha256", h}});
    j["outputs"] = outs;
    return j.dump(2) + "\n";
}

} // namespace vineport
