#pragma once

/**
 * @file encoder.hpp
 * @brief Frozen hierarchical Siamese feature extractor.
 *
 * Three stages, each a stride-2 3x3 convolution followed by one residual
 * block (two 3x3 convolutions with a skip). Weights are He-initialized from
 * a seed and never trained. Each level's output passes through a frozen 1x1
 * channel projection; low-rank adapter terms supplied by the caller are the
 * only trainable part of the feature path.
 */

#include <array>
#include <utility>
#include <vector>

#include "planeqc/nnops.hpp"
#include "planeqc/rng.hpp"
#include "planeqc/tensor.hpp"

namespace planeqc {

struct EncoderConfig {
    std::array<size_t, 3> channels{16, 32, 64};
    uint64_t seed = 1;
};

// Low-rank update terms applied on top of one level's frozen projection:
// out = W0 x + scale * sum_k B_k A_k x.
template <typename T>
struct LevelAdapter {
    std::vector<std::pair<Tensor<T>, Tensor<T>>> terms;  // (A [m,d], B [d,m])
    T scale = T(1);

    bool active() const { return !terms.empty(); }
};

template <typename T>
struct EncoderFeatures {
    std::array<Tensor<T>, 3> adapted;     // per-level adapted maps
    std::array<Tensor<T>, 3> raw;         // backbone maps before projection
    std::array<Tensor<T>, 3> pooled_raw;  // GAP of raw maps (adapter selection input)
};

template <typename T>
class Encoder {
public:
    Encoder() = default;

    explicit Encoder(const EncoderConfig& cfg) : cfg_(cfg) {
        Rng rng(mix_seed(cfg.seed, 0x656e63));
        size_t cin = 1;
        for (size_t l = 0; l < 3; ++l) {
            const size_t cout = cfg.channels[l];
            stages_[l].conv_w = he(cout, cin, rng);
            stages_[l].conv_b = Tensor<T>::zeros({cout});
            stages_[l].res1_w = he(cout, cout, rng);
            stages_[l].res1_b = Tensor<T>::zeros({cout});
            stages_[l].res2_w = he(cout, cout, rng);
            stages_[l].res2_b = Tensor<T>::zeros({cout});
            proj_[l] = proj_init(cout, rng);
            cin = cout;
        }
    }

    // Backbone features for a [1,H,W] image tensor. All weights are frozen,
    // so nothing here lands on the tape.
    std::array<Tensor<T>, 3> forward_raw(const Tensor<T>& img) const {
        if (img.ndim() != 3 || img.dim(0) != 1)
            throw DimensionError("encoder: expects [1,H,W] input");
        std::array<Tensor<T>, 3> feats;
        Tensor<T> x = img;
        for (size_t l = 0; l < 3; ++l) {
            Tensor<T> y = relu(conv3x3(x, stages_[l].conv_w, &stages_[l].conv_b, 2));
            Tensor<T> r = relu(conv3x3(y, stages_[l].res1_w, &stages_[l].res1_b, 1));
            r = conv3x3(r, stages_[l].res2_w, &stages_[l].res2_b, 1);
            y = relu(add(y, r));
            feats[l] = y;
            x = y;
        }
        return feats;
    }

    // Applies the per-level frozen projection plus adapter terms to raw maps.
    std::array<Tensor<T>, 3> adapt(const std::array<Tensor<T>, 3>& raw,
                                   const std::array<LevelAdapter<T>, 3>& adapters) const {
        std::array<Tensor<T>, 3> adapted;
        for (size_t l = 0; l < 3; ++l) {
            Tensor<T> base = channel_map(proj_[l], raw[l]);
            const auto& ad = adapters[l];
            if (!ad.active()) {
                adapted[l] = base;
                continue;
            }
            Tensor<T> acc;
            for (const auto& [a, b] : ad.terms) {
                if (a.dim(1) != cfg_.channels[l])
                    throw ConfigError("adapter: expert dim " + std::to_string(a.dim(1)) +
                                      " does not match level channels " +
                                      std::to_string(cfg_.channels[l]));
                Tensor<T> z = channel_map(a, raw[l]);
                Tensor<T> upd = channel_map(b, z);
                acc = acc.defined() ? add(acc, upd) : upd;
            }
            adapted[l] = add(base, mul(acc, ad.scale));
        }
        return adapted;
    }

    EncoderFeatures<T> extract(const Tensor<T>& img,
                               const std::array<LevelAdapter<T>, 3>& adapters) const {
        EncoderFeatures<T> out;
        out.raw = forward_raw(img);
        for (size_t l = 0; l < 3; ++l) out.pooled_raw[l] = global_avg_pool(out.raw[l]);
        out.adapted = adapt(out.raw, adapters);
        return out;
    }

    // Plane-level descriptor: GAP of the level-3 projection without adapter
    // terms. Used for anchor selection.
    Tensor<T> embed(const Tensor<T>& img) const {
        std::array<LevelAdapter<T>, 3> none;
        EncoderFeatures<T> f = extract(img, none);
        return global_avg_pool(f.adapted[2]);
    }

    const EncoderConfig& config() const { return cfg_; }
    size_t level_channels(size_t l) const { return cfg_.channels[l]; }

    struct Stage {
        Tensor<T> conv_w, conv_b, res1_w, res1_b, res2_w, res2_b;
    };

    Stage& stage(size_t l) { return stages_[l]; }
    const Stage& stage(size_t l) const { return stages_[l]; }
    Tensor<T>& projection(size_t l) { return proj_[l]; }
    const Tensor<T>& projection(size_t l) const { return proj_[l]; }

    std::vector<Tensor<T>> frozen_tensors() {
        std::vector<Tensor<T>> all;
        for (size_t l = 0; l < 3; ++l) {
            all.push_back(stages_[l].conv_w);
            all.push_back(stages_[l].conv_b);
            all.push_back(stages_[l].res1_w);
            all.push_back(stages_[l].res1_b);
            all.push_back(stages_[l].res2_w);
            all.push_back(stages_[l].res2_b);
            all.push_back(proj_[l]);
        }
        return all;
    }

private:
    static Tensor<T> he(size_t cout, size_t cin, Rng& rng) {
        const T stddev = std::sqrt(T(2) / static_cast<T>(cin * 9));
        Tensor<T> w = Tensor<T>::zeros({cout, cin, 3, 3});
        for (auto& v : w.mutable_data()) v = static_cast<T>(rng.normal()) * stddev;
        return w;
    }

    static Tensor<T> proj_init(size_t c, Rng& rng) {
        const T stddev = std::sqrt(T(1) / static_cast<T>(c));
        Tensor<T> w = Tensor<T>::zeros({c, c});
        for (auto& v : w.mutable_data()) v = static_cast<T>(rng.normal()) * stddev;
        return w;
    }

    EncoderConfig cfg_;
    std::array<Stage, 3> stages_;
    std::array<Tensor<T>, 3> proj_;
};

// [H,W] pixel array in [0,1] -> [1,H,W] tensor.
template <typename T>
Tensor<T> image_tensor(const std::vector<float>& pixels, size_t h, size_t w) {
    std::vector<T> data(pixels.size());
    for (size_t i = 0; i < pixels.size(); ++i) data[i] = static_cast<T>(pixels[i]);
    return Tensor<T>::from({1, h, w}, std::move(data));
}

}  // namespace planeqc
