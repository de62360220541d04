#include "doctest.h"

#include <cstdio>
#include <filesystem>

#include "planeqc/rng.hpp"
#include "planeqc/strq.hpp"

using namespace planeqc;

namespace {
std::string temp_path(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}
}  // namespace

TEST_CASE("container round-trips tensors bit-exactly") {
    Rng rng(3);
    TensorContainer c;
    c.put_scalar("meta.version", 1.0f);
    std::vector<float> data(24);
    for (auto& v : data) v = static_cast<float>(rng.normal());
    c.put("block.w", Shape{2, 3, 4}, data);
    c.put("empty_shape_scalar", Shape{}, {42.5f});

    const std::string path = temp_path("planeqc_strq_test.strq");
    c.save(path);
    TensorContainer back = TensorContainer::load(path);
    CHECK(back.size() == 3);
    CHECK(back.get("block.w").shape == Shape{2, 3, 4});
    for (size_t i = 0; i < data.size(); ++i) CHECK(back.get("block.w").data[i] == data[i]);
    CHECK(back.get_scalar("empty_shape_scalar") == 42.5f);
    CHECK(back.content_hash() == c.content_hash());
    std::remove(path.c_str());
}

TEST_CASE("container header layout") {
    TensorContainer c;
    c.put("t", Shape{2}, {1.0f, 2.0f});
    auto bytes = c.serialize();
    CHECK(bytes[0] == 'S');
    CHECK(bytes[1] == 'T');
    CHECK(bytes[2] == 'R');
    CHECK(bytes[3] == 'Q');
    // version 1, count 1, name length 1
    CHECK(bytes[4] == 1);
    CHECK(bytes[8] == 1);
    CHECK(bytes[12] == 1);
    CHECK(bytes[14] == 't');
    CHECK(bytes[15] == 1);  // ndim
}

TEST_CASE("malformed payloads rejected") {
    TensorContainer c;
    c.put("t", Shape{4}, {1, 2, 3, 4});
    auto bytes = c.serialize();

    auto truncated = bytes;
    truncated.resize(bytes.size() - 5);
    CHECK_THROWS_AS(TensorContainer::deserialize(truncated), FormatError);

    auto bad_magic = bytes;
    bad_magic[0] = 'X';
    CHECK_THROWS_AS(TensorContainer::deserialize(bad_magic), FormatError);

    CHECK_THROWS_AS(TensorContainer::load("/nonexistent/p.strq"), FormatError);
}

TEST_CASE("missing tensor lookups raise") {
    TensorContainer c;
    CHECK_THROWS_AS(c.get("absent"), StateError);
}
