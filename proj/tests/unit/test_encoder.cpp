#include "doctest.h"

#include <cstring>

#include "planeqc/encoder.hpp"
#include "planeqc/model.hpp"
#include "planeqc/synth.hpp"

using namespace planeqc;

namespace {

Tensor<float> test_image_tensor(size_t size, uint64_t seed) {
    Image img = render_plane_image(0, size, seed);
    return image_tensor<float>(img.pixels, img.height, img.width);
}

}  // namespace

TEST_CASE("same seed yields identical frozen weights") {
    EncoderConfig cfg;
    cfg.seed = 99;
    Encoder<float> a(cfg), b(cfg);
    for (size_t l = 0; l < 3; ++l) {
        CHECK(std::memcmp(a.stage(l).conv_w.data().data(), b.stage(l).conv_w.data().data(),
                          a.stage(l).conv_w.size() * sizeof(float)) == 0);
        CHECK(std::memcmp(a.projection(l).data().data(), b.projection(l).data().data(),
                          a.projection(l).size() * sizeof(float)) == 0);
    }
    EncoderConfig other;
    other.seed = 100;
    Encoder<float> c(other);
    CHECK(std::memcmp(a.stage(0).conv_w.data().data(), c.stage(0).conv_w.data().data(),
                      a.stage(0).conv_w.size() * sizeof(float)) != 0);
}

TEST_CASE("feature shapes follow the stride arithmetic") {
    Encoder<float> enc(EncoderConfig{});
    auto img = Tensor<float>::zeros({1, 128, 128});
    auto feats = enc.forward_raw(img);
    CHECK(feats[0].shape() == Shape{16, 64, 64});
    CHECK(feats[1].shape() == Shape{32, 32, 32});
    CHECK(feats[2].shape() == Shape{64, 16, 16});
}

TEST_CASE("backward never writes gradients into frozen weights") {
    Model<float> model{[] {
        ModelConfig mc;
        mc.image_size = 32;
        mc.channels = {4, 8, 8};
        mc.rank = 2;
        mc.alpha = 2;
        mc.num_planes = 2;
        return mc;
    }()};
    GradientTape<float> tape;
    GradientTape<float>::Scope scope(tape);
    auto img = test_image_tensor(32, 3);
    auto feats = model.extract_train(img, 0);
    tape.backward(sum(feats.adapted[2]));
    for (auto& t : model.encoder().frozen_tensors()) CHECK_FALSE(t.has_grad());
    // trainable adapter matrices did receive gradients
    CHECK(model.oks(2).planes[0].b.has_grad());
}

TEST_CASE("empty adapters reproduce the frozen projection exactly") {
    Encoder<float> enc(EncoderConfig{{8, 8, 8}, 5});
    auto img = test_image_tensor(32, 4);
    std::array<LevelAdapter<float>, 3> none;
    auto a = enc.extract(img, none);
    for (size_t l = 0; l < 3; ++l) {
        auto base = channel_map(enc.projection(l), a.raw[l]);
        for (size_t i = 0; i < base.size(); ++i) CHECK(a.adapted[l].data()[i] == base.data()[i]);
    }
}

TEST_CASE("adapter contribution is additive and linear in the scale") {
    Encoder<float> enc(EncoderConfig{{4, 4, 4}, 6});
    Rng rng(8);
    auto img = test_image_tensor(32, 5);

    std::array<LevelAdapter<float>, 3> none;
    std::array<LevelAdapter<float>, 3> ad1, ad2;
    for (size_t l = 0; l < 3; ++l) {
        auto a = Tensor<float>::zeros({2, 4});
        auto b = Tensor<float>::zeros({4, 2});
        for (auto& v : a.mutable_data()) v = static_cast<float>(rng.normal());
        for (auto& v : b.mutable_data()) v = static_cast<float>(rng.normal());
        ad1[l].terms.push_back({a, b});
        ad1[l].scale = 1.0f;
        ad2[l].terms.push_back({a, b});
        ad2[l].scale = 2.0f;
    }

    auto base = enc.extract(img, none);
    auto one = enc.extract(img, ad1);
    auto two = enc.extract(img, ad2);
    for (size_t l = 0; l < 3; ++l) {
        for (size_t i = 0; i < base.adapted[l].size(); ++i) {
            const float d1 = one.adapted[l].data()[i] - base.adapted[l].data()[i];
            const float d2 = two.adapted[l].data()[i] - base.adapted[l].data()[i];
            CHECK(d2 == doctest::Approx(2.0f * d1).epsilon(1e-4));
        }
    }

    // zero scale equals the no-adapter output
    std::array<LevelAdapter<float>, 3> ad0 = ad1;
    for (auto& a : ad0) a.scale = 0.0f;
    auto zero = enc.extract(img, ad0);
    for (size_t l = 0; l < 3; ++l)
        for (size_t i = 0; i < base.adapted[l].size(); ++i)
            CHECK(zero.adapted[l].data()[i] == base.adapted[l].data()[i]);
}

TEST_CASE("extraction is deterministic (siamese property)") {
    Encoder<float> enc(EncoderConfig{{8, 8, 8}, 7});
    auto img = test_image_tensor(32, 6);
    std::array<LevelAdapter<float>, 3> none;
    auto a = enc.extract(img, none);
    auto b = enc.extract(img, none);
    for (size_t l = 0; l < 3; ++l)
        CHECK(std::memcmp(a.adapted[l].data().data(), b.adapted[l].data().data(),
                          a.adapted[l].size() * sizeof(float)) == 0);
}

TEST_CASE("adapter dimension mismatches are rejected") {
    Encoder<float> enc(EncoderConfig{{4, 4, 4}, 9});
    auto img = test_image_tensor(32, 9);
    std::array<LevelAdapter<float>, 3> bad;
    bad[0].terms.push_back({Tensor<float>::zeros({2, 6}), Tensor<float>::zeros({6, 2})});
    CHECK_THROWS_AS(enc.extract(img, bad), ConfigError);
}
