#include "repack/manifest.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "repack/error.hpp"

namespace repack {

std::string fnv1a64_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot hash missing file: " + path);
    std::uint64_t hash = 0xcbf29ce484222325ull;
    char buf[65536];
    while (f.read(buf, sizeof buf) || f.gcount() > 0) {
        const std::streamsize n = f.gcount();
        for (std::streamsize i = 0; i < n; ++i) {
            hash ^= static_cast<unsigned char>(buf[i]);
            hash *= 0x100000001b3ull;
        }
    }
    char out[17];
    std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(hash));
    return out;
}

void RunManifest::write_beside_outputs() const {
    std::ostringstream body;
    body << "# repack run manifest\n";
    body << "tool_version=" << kToolVersion << "\n";
    body << "command=" << command << "\n";
    for (auto s : seeds) body << "seed=" << s << "\n";
    for (const auto& in : inputs) body << "input=" << in << " fnv1a64=" << fnv1a64_file(in) << "\n";
    for (const auto& out : outputs)
        body << "output=" << out << " fnv1a64=" << fnv1a64_file(out) << "\n";
    char wt[32];
    std::snprintf(wt, sizeof wt, "%.3f", wall_time_s);
    body << "wall_time_s=" << wt << "\n";

    for (const auto& out : outputs) {
        std::ofstream f(out + ".manifest", std::ios::trunc);
        if (!f) throw IoError("cannot write manifest: " + out + ".manifest");
        f << body.str();
    }
}

}  // namespace repack
