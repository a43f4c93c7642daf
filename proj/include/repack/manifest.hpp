#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace repack {

inline constexpr const char* kToolVersion = "0.1.0";

// FNV-1a 64-bit content fingerprint, hex encoded.
std::string fnv1a64_file(const std::string& path);

// One record per CLI invocation, written as <output>.manifest beside
// every file the invocation produced. Plain text, one field per line.
struct RunManifest {
    std::string command;
    std::vector<std::uint64_t> seeds;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    double wall_time_s = 0.0;

    // Hashes are computed at write time from the current file contents.
    void write_beside_outputs() const;
};

}  // namespace repack
