#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstring>
#include <limits>

#include "semcom/archive.hpp"

using namespace semcom;

TEST_CASE("archive round-trips arrays bit-exactly including odd floats") {
    Archive a;
    a.manifest["kind"] = "test";
    a.manifest["note"] = "round trip";
    std::vector<float> odd{0.0f, -0.0f, std::numeric_limits<float>::quiet_NaN(),
                           std::numeric_limits<float>::infinity(), std::numeric_limits<float>::denorm_min(), 1.5f};
    a.add("odd", odd);
    std::vector<std::int32_t> ints{-1, 0, 42, std::numeric_limits<std::int32_t>::min()};
    a.add("ints", ints);
    MatF m(2, 3);
    m << 1, 2, 3, 4, 5, 6;
    a.add("mat", m);

    auto bytes = a.to_bytes();
    Archive b = Archive::from_bytes(bytes);
    REQUIRE(b.manifest.at("note") == "round trip");
    auto odd_back = b.get<float>("odd");
    REQUIRE(odd_back.size() == odd.size());
    REQUIRE(std::memcmp(odd_back.data(), odd.data(), odd.size() * 4) == 0);
    REQUIRE(b.get<std::int32_t>("ints") == ints);
    MatF m_back = b.get_mat<float>("mat");
    REQUIRE(m_back == m);
    REQUIRE(b.to_bytes() == bytes);
}

TEST_CASE("archive file save/load") {
    Archive a;
    a.manifest["kind"] = "filetest";
    a.add("v", std::vector<double>{1.0, 2.5, -3.25});
    const std::string path = "archive_roundtrip.bin";
    a.save(path);
    Archive b = Archive::load(path);
    REQUIRE(b.get<double>("v") == std::vector<double>{1.0, 2.5, -3.25});
    REQUIRE(b.digest() == a.digest());
    std::remove(path.c_str());
}

TEST_CASE("archive rejects corrupt inputs") {
    Archive a;
    a.add("x", std::vector<float>{1.0f});
    auto bytes = a.to_bytes();

    auto bad_magic = bytes;
    bad_magic[0] = 'X';
    CHECK_THROWS_AS(Archive::from_bytes(bad_magic), IoError);

    auto bad_version = bytes;
    bad_version[4] = 0x7f;
    CHECK_THROWS_AS(Archive::from_bytes(bad_version), IoError);

    auto truncated = bytes;
    truncated.pop_back();
    CHECK_THROWS_AS(Archive::from_bytes(truncated), IoError);

    auto trailing = bytes;
    trailing.push_back(0);
    CHECK_THROWS_AS(Archive::from_bytes(trailing), IoError);

    CHECK_THROWS_AS(a.get<float>("missing"), IoError);
    CHECK_THROWS_AS(a.get<double>("x"), IoError);  // dtype mismatch
    CHECK_THROWS_AS(Archive::load("no_such_file.bin"), IoError);
}

TEST_CASE("digest reacts to content changes") {
    Archive a;
    a.add("x", std::vector<float>{1.0f, 2.0f});
    Archive b;
    b.add("x", std::vector<float>{1.0f, 2.00001f});
    CHECK(a.digest() != b.digest());
}
