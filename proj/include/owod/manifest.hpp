#pragma once

#include <chrono>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "owod/errors.hpp"

namespace owod {

inline constexpr const char* kToolName = "owod";
inline constexpr const char* kToolVersion = "0.1.0";

/// FNV-1a 64-bit over raw bytes.  Used for reproducibility digests of
/// configs and input files, not for security.
inline std::uint64_t fnv1a64(const void* data, std::size_t n,
                             std::uint64_t h = 0xcbf29ce484222325ULL) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string digest_hex(std::uint64_t h) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "fnv1a64:%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::string digest_string(const std::string& s) {
    return digest_hex(fnv1a64(s.data(), s.size()));
}

inline std::string digest_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof(buf));
        h = fnv1a64(buf, static_cast<std::size_t>(in.gcount()), h);
    }
    return digest_hex(h);
}

inline std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// Run provenance written next to every command's outputs.  Timestamps live
/// in dedicated fields so reruns stay diffable.
struct RunManifest {
    std::string command;
    std::string config_digest;
    std::vector<std::pair<std::string, std::string>> inputs;  // path, digest
    std::vector<std::string> outputs;
    std::uint64_t seed = 0;
    bool seeded = false;
    std::string created_utc;
    double elapsed_seconds = 0.0;

    void add_input(const std::string& path) { inputs.emplace_back(path, digest_file(path)); }

    nlohmann::json to_json() const {
        nlohmann::json in = nlohmann::json::array();
        for (const auto& [path, digest] : inputs)
            in.push_back({{"path", path}, {"digest", digest}});
        nlohmann::json j = {{"tool", kToolName},
                            {"version", kToolVersion},
                            {"command", command},
                            {"config_digest", config_digest},
                            {"inputs", in},
                            {"outputs", outputs},
                            {"created_utc", created_utc},
                            {"elapsed_seconds", elapsed_seconds}};
        if (seeded) j["seed"] = seed;
        return j;
    }
};

}  // namespace owod
