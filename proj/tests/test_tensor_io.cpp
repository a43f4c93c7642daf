#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "repack/tensor_io.hpp"

using namespace repack;
namespace fs = std::filesystem;

namespace {

std::string temp_path(const std::string& name) {
    return (fs::temp_directory_path() / name).string();
}

std::vector<unsigned char> file_bytes(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    REQUIRE(f.good());
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("rpk1 header layout is fixed by the format") {
    FeatureTensor t({2, 3}, {0, 1, 2, 3, 4, 5});
    const std::string path = temp_path("rpk_header.rpk");
    write_tensor(t, path);
    const auto bytes = file_bytes(path);
    // magic, version u16 LE, dtype u8, ndim u8, dims u32 LE
    const std::vector<unsigned char> header = {0x52, 0x50, 0x4B, 0x31, 0x01, 0x00, 0x00, 0x02,
                                               0x02, 0x00, 0x00, 0x00, 0x03, 0x00, 0x00, 0x00};
    REQUIRE(bytes.size() == header.size() + 6 * 4);
    for (std::size_t i = 0; i < header.size(); ++i) CHECK(bytes[i] == header[i]);
    // payload starts with 0.0f then 1.0f = 00 00 80 3F little-endian
    CHECK(bytes[16] == 0x00);
    CHECK(bytes[17] == 0x00);
    CHECK(bytes[18] == 0x00);
    CHECK(bytes[19] == 0x00);
    CHECK(bytes[20] == 0x00);
    CHECK(bytes[21] == 0x00);
    CHECK(bytes[22] == 0x80);
    CHECK(bytes[23] == 0x3F);
    fs::remove(path);
}

TEST_CASE("write then read roundtrips bit-exactly") {
    std::mt19937_64 rng(42);
    std::uniform_int_distribution<std::uint32_t> dim(1, 6);
    std::uniform_real_distribution<float> value(-100.0f, 100.0f);
    for (int iter = 0; iter < 50; ++iter) {
        FeatureTensor t;
        const int rank = 1 + static_cast<int>(rng() % 4);
        for (int i = 0; i < rank; ++i) t.dims.push_back(dim(rng));
        t.data.resize(t.numel());
        for (auto& v : t.data) v = value(rng);
        const std::string path = temp_path("rpk_roundtrip.rpk");
        write_tensor(t, path);
        CHECK(read_tensor(path) == t);
        fs::remove(path);
    }
}

TEST_CASE("non-finite data is rejected before any file is written") {
    FeatureTensor t({2, 2}, {1.0f, 2.0f, std::nanf(""), 4.0f});
    const std::string path = temp_path("rpk_nan.rpk");
    fs::remove(path);
    CHECK_THROWS_AS(write_tensor(t, path), ValidationError);
    CHECK_FALSE(fs::exists(path));
}

TEST_CASE("bad magic is a format error") {
    std::stringstream ss;
    ss << "XXXX" << std::string(32, '\0');
    CHECK_THROWS_AS(read_tensor(ss), FormatError);
}

TEST_CASE("truncated payload is a format error") {
    FeatureTensor t({4, 4}, std::vector<float>(16, 1.0f));
    std::stringstream ss;
    write_tensor(t, ss);
    std::string raw = ss.str();
    raw.resize(raw.size() - 4);  // drop the 16th float
    std::stringstream cut(raw);
    CHECK_THROWS_AS(read_tensor(cut), FormatError);
}

TEST_CASE("unsupported version and dtype are format errors") {
    FeatureTensor t({1}, {1.0f});
    std::stringstream ss;
    write_tensor(t, ss);
    std::string raw = ss.str();

    std::string bad_version = raw;
    bad_version[4] = 2;
    std::stringstream v(bad_version);
    CHECK_THROWS_AS(read_tensor(v), FormatError);

    std::string bad_dtype = raw;
    bad_dtype[6] = 9;
    std::stringstream d(bad_dtype);
    CHECK_THROWS_AS(read_tensor(d), FormatError);
}

TEST_CASE("shape/data mismatch is rejected") {
    FeatureTensor t({2, 3}, {1.0f, 2.0f});
    CHECK_THROWS_AS(validate_tensor(t), ValidationError);
    std::stringstream ss;
    CHECK_THROWS_AS(write_tensor(t, ss), ValidationError);
}

TEST_CASE("tensor map container roundtrips") {
    std::map<std::string, FeatureTensor> m;
    m["alpha"] = FeatureTensor({2, 2}, {1, 2, 3, 4});
    m["beta"] = FeatureTensor({3}, {5, 6, 7});
    const std::string path = temp_path("rpk_container.rpkm");
    write_tensor_map(m, path);
    const auto back = read_tensor_map(path);
    REQUIRE(back.size() == 2);
    CHECK(back.at("alpha") == m["alpha"]);
    CHECK(back.at("beta") == m["beta"]);
    fs::remove(path);
}

TEST_CASE("csv conversion preserves float32 values") {
    FeatureTensor t({2, 3}, {0.1f, -2.5f, 3.14159f, 1e-7f, 4096.0f, -0.0f});
    const std::string csv = temp_path("rpk_conv.csv");
    write_tensor_csv(t, csv);
    const FeatureTensor back = read_tensor_csv(csv);
    CHECK(back.dims == t.dims);
    for (std::size_t i = 0; i < t.data.size(); ++i) CHECK(back.data[i] == t.data[i]);
    fs::remove(csv);
}

TEST_CASE("flatten_spatial lays out rows in patch order") {
    // 2x2x3 with distinct values
    FeatureTensor t({2, 2, 3}, {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11});
    const FeatureTensor flat = flatten_spatial(t);
    CHECK(flat.dims == std::vector<std::uint32_t>{4, 3});
    // row (i*w + j) is the channel vector at (i,j)
    CHECK(flat.data[3 * 3 + 0] == 9.0f);  // (1,1) channel 0
    CHECK(unflatten_spatial(flat, 2, 2) == t);

    FeatureTensor big({16, 16, 768}, std::vector<float>(16 * 16 * 768, 0.5f));
    CHECK(flatten_spatial(big).dims == std::vector<std::uint32_t>{256, 768});

    CHECK_THROWS_AS(flatten_spatial(flat), ShapeError);
    CHECK_THROWS_AS(unflatten_spatial(flat, 3, 2), ShapeError);
}
