#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "srct/rng.hpp"

namespace srct {

inline constexpr const char* kVersion = "0.1.0";

// Misconfiguration (bad provider setup, missing credentials, bad paths).
// Distinguished from std::invalid_argument (bad inputs/preconditions) so
// the CLI can map them to different exit codes.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path);
}

// Content fingerprint used by run manifests to detect tampered inputs.
inline std::string content_hash(const std::string& bytes) {
    const std::uint64_t h = rng::mix64(rng::fnv1a(bytes));
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string("fnv1a64:") + buf;
}

}  // namespace srct
