#include "repack/tensor_io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace repack {
namespace {

void put_u16(std::ostream& os, std::uint16_t v) {
    unsigned char b[2] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>(v >> 8)};
    os.write(reinterpret_cast<const char*>(b), 2);
}

void put_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    os.write(reinterpret_cast<const char*>(b), 4);
}

void put_f32(std::ostream& os, float v) {
    static_assert(sizeof(float) == 4);
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(os, bits);
}

std::uint16_t get_u16(std::istream& is) {
    unsigned char b[2];
    if (!is.read(reinterpret_cast<char*>(b), 2))
        throw FormatError("truncated header");
    return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

std::uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4))
        throw FormatError("truncated header");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

std::uint8_t get_u8(std::istream& is) {
    char c;
    if (!is.get(c)) throw FormatError("truncated header");
    return static_cast<std::uint8_t>(c);
}

}  // namespace

void write_tensor(const FeatureTensor& t, std::ostream& os) {
    validate_tensor(t);
    if (t.dims.size() > 255)
        throw ValidationError("tensor rank exceeds format limit of 255");
    os.write(kMagic, 4);
    put_u16(os, kFormatVersion);
    os.put(static_cast<char>(kDtypeFloat32));
    os.put(static_cast<char>(t.dims.size()));
    for (auto d : t.dims) put_u32(os, d);
    for (float v : t.data) put_f32(os, v);
    if (!os) throw IoError("write failed");
}

void write_tensor(const FeatureTensor& t, const std::string& path) {
    validate_tensor(t);  // validate before touching the filesystem
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open for writing: " + path);
    write_tensor(t, f);
    f.flush();
    if (!f) throw IoError("write failed: " + path);
}

FeatureTensor read_tensor(std::istream& is) {
    char magic[4];
    if (!is.read(magic, 4)) throw FormatError("file too short for magic");
    if (std::memcmp(magic, kMagic, 4) != 0)
        throw FormatError("bad magic, not an RPK1 tensor");
    const std::uint16_t version = get_u16(is);
    if (version != kFormatVersion)
        throw FormatError("unsupported RPK1 version " + std::to_string(version));
    const std::uint8_t dtype = get_u8(is);
    if (dtype != kDtypeFloat32)
        throw FormatError("unsupported dtype code " + std::to_string(dtype));
    const std::uint8_t ndim = get_u8(is);
    if (ndim == 0) throw FormatError("tensor with zero dimensions");

    FeatureTensor t;
    t.dims.resize(ndim);
    std::uint64_t numel = 1;
    for (std::uint8_t i = 0; i < ndim; ++i) {
        t.dims[i] = get_u32(is);
        if (t.dims[i] == 0) throw FormatError("zero-sized dimension");
        numel *= t.dims[i];
        if (numel > (1ull << 34))
            throw FormatError("declared tensor size is implausibly large");
    }
    t.data.resize(numel);
    for (std::uint64_t i = 0; i < numel; ++i) {
        unsigned char b[4];
        if (!is.read(reinterpret_cast<char*>(b), 4))
            throw FormatError("truncated payload: expected " + std::to_string(numel) +
                              " floats, got " + std::to_string(i));
        std::uint32_t bits = 0;
        for (int k = 0; k < 4; ++k) bits |= static_cast<std::uint32_t>(b[k]) << (8 * k);
        float v;
        std::memcpy(&v, &bits, 4);
        t.data[i] = v;
    }
    return t;
}

FeatureTensor read_tensor(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open: " + path);
    return read_tensor(f);
}

void write_tensor_map(const std::map<std::string, FeatureTensor>& tensors,
                      const std::string& path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open for writing: " + path);
    f.write("RPKM", 4);
    put_u16(f, kFormatVersion);
    put_u32(f, static_cast<std::uint32_t>(tensors.size()));
    for (const auto& [name, t] : tensors) {
        if (name.size() > 0xffff) throw ValidationError("tensor name too long");
        put_u16(f, static_cast<std::uint16_t>(name.size()));
        f.write(name.data(), static_cast<std::streamsize>(name.size()));
        write_tensor(t, f);
    }
    f.flush();
    if (!f) throw IoError("write failed: " + path);
}

std::map<std::string, FeatureTensor> read_tensor_map(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open: " + path);
    char magic[4];
    if (!f.read(magic, 4)) throw FormatError("file too short for magic");
    if (std::memcmp(magic, "RPKM", 4) != 0)
        throw FormatError("bad magic, not an RPKM container");
    const std::uint16_t version = get_u16(f);
    if (version != kFormatVersion)
        throw FormatError("unsupported RPKM version " + std::to_string(version));
    const std::uint32_t count = get_u32(f);
    std::map<std::string, FeatureTensor> out;
    for (std::uint32_t i = 0; i < count; ++i) {
        const std::uint16_t len = get_u16(f);
        std::string name(len, '\0');
        if (!f.read(name.data(), len)) throw FormatError("truncated tensor name");
        out[name] = read_tensor(f);
    }
    return out;
}

void write_tensor_csv(const FeatureTensor& t, const std::string& path) {
    validate_tensor(t);
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw IoError("cannot open for writing: " + path);
    f << "dims";
    for (auto d : t.dims) f << "," << d;
    f << "\n";
    const std::size_t cols = t.dims.back();
    const std::size_t rows = t.numel() / cols;
    char buf[48];
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            std::snprintf(buf, sizeof buf, "%.9g", static_cast<double>(t.data[i * cols + j]));
            f << (j ? "," : "") << buf;
        }
        f << "\n";
    }
    if (!f) throw IoError("write failed: " + path);
}

FeatureTensor read_tensor_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open: " + path);
    std::string line;
    if (!std::getline(f, line)) throw FormatError("empty csv");
    std::stringstream header(line);
    std::string tok;
    std::getline(header, tok, ',');
    if (tok != "dims") throw FormatError("csv missing dims header");
    FeatureTensor t;
    while (std::getline(header, tok, ','))
        t.dims.push_back(static_cast<std::uint32_t>(std::stoul(tok)));
    if (t.dims.empty()) throw FormatError("csv dims header has no dimensions");
    t.data.reserve(t.numel());
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::stringstream row(line);
        while (std::getline(row, tok, ','))
            t.data.push_back(std::stof(tok));
    }
    validate_tensor(t);
    return t;
}

}  // namespace repack
