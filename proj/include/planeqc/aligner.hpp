#pragma once

/**
 * @file aligner.hpp
 * @brief Cascaded affine alignment in feature space.
 *
 * Per level, a small localisation network predicts an affine transform from
 * the concatenated source features of the two streams. The transform warps
 * the moving stream and its inverse warps the reference stream; warped maps
 * seed the next level's sources after 2x average pooling.
 *
 * Coordinates are normalized to [-1,1] with corner pixels at exactly +-1, so
 * an identity theta reproduces the input feature map bit-exactly.
 */

#include <array>
#include <cmath>

#include "planeqc/nnops.hpp"
#include "planeqc/rng.hpp"
#include "planeqc/tensor.hpp"

namespace planeqc {

enum class TransformMode {
    Affine,
    Translation,
    Rotation,
    Scale,
    Shear,
    RotationScale,
    TranslationScale,
    RotationTranslation,
};

inline int param_count(TransformMode mode) {
    switch (mode) {
        case TransformMode::Affine: return 6;
        case TransformMode::Translation: return 2;
        case TransformMode::Rotation: return 1;
        case TransformMode::Scale: return 2;
        case TransformMode::Shear: return 2;
        case TransformMode::RotationScale: return 3;
        case TransformMode::TranslationScale: return 4;
        case TransformMode::RotationTranslation: return 3;
    }
    return 0;
}

inline const char* mode_name(TransformMode mode) {
    switch (mode) {
        case TransformMode::Affine: return "affine";
        case TransformMode::Translation: return "translation";
        case TransformMode::Rotation: return "rotation";
        case TransformMode::Scale: return "scale";
        case TransformMode::Shear: return "shear";
        case TransformMode::RotationScale: return "rotation_scale";
        case TransformMode::TranslationScale: return "translation_scale";
        case TransformMode::RotationTranslation: return "rotation_translation";
    }
    return "?";
}

inline TransformMode mode_from_name(const std::string& name) {
    for (TransformMode m :
         {TransformMode::Affine, TransformMode::Translation, TransformMode::Rotation,
          TransformMode::Scale, TransformMode::Shear, TransformMode::RotationScale,
          TransformMode::TranslationScale, TransformMode::RotationTranslation})
        if (name == mode_name(m)) return m;
    throw ConfigError("unknown transform mode '" + name + "'");
}

// Raw parameter values that produce the identity transform for a mode.
template <typename T>
std::vector<T> identity_params(TransformMode mode) {
    switch (mode) {
        case TransformMode::Affine: return {1, 0, 0, 0, 1, 0};
        case TransformMode::Translation: return {0, 0};
        case TransformMode::Rotation: return {0};
        case TransformMode::Scale: return {1, 1};
        case TransformMode::Shear: return {0, 0};
        case TransformMode::RotationScale: return {0, 1, 1};
        case TransformMode::TranslationScale: return {1, 1, 0, 0};
        case TransformMode::RotationTranslation: return {0, 0, 0};
    }
    return {};
}

// Assembles the 2x3 matrix from a mode's raw parameters. Differentiable in
// the parameters.
template <typename T>
Tensor<T> assemble_theta(TransformMode mode, const Tensor<T>& params) {
    if (params.ndim() != 1 || params.dim(0) != static_cast<size_t>(param_count(mode)))
        throw ContractError(std::string("assemble_theta: mode ") + mode_name(mode) + " needs " +
                            std::to_string(param_count(mode)) + " params, got " +
                            shape_str(params.shape()));
    auto p = params.data();
    Tensor<T> out = Tensor<T>::zeros({2, 3}, params.requires_grad());
    auto t = out.mutable_data();
    switch (mode) {
        case TransformMode::Affine:
            t[0] = p[0]; t[1] = p[1]; t[2] = p[2];
            t[3] = p[3]; t[4] = p[4]; t[5] = p[5];
            break;
        case TransformMode::Translation:
            t[0] = 1; t[4] = 1; t[2] = p[0]; t[5] = p[1];
            break;
        case TransformMode::Rotation: {
            T c = std::cos(p[0]), s = std::sin(p[0]);
            t[0] = c; t[1] = -s; t[3] = s; t[4] = c;
            break;
        }
        case TransformMode::Scale:
            t[0] = p[0]; t[4] = p[1];
            break;
        case TransformMode::Shear:
            t[0] = 1; t[4] = 1; t[1] = p[0]; t[3] = p[1];
            break;
        case TransformMode::RotationScale: {
            T c = std::cos(p[0]), s = std::sin(p[0]);
            t[0] = p[1] * c; t[1] = -s; t[3] = s; t[4] = p[2] * c;
            break;
        }
        case TransformMode::TranslationScale:
            t[0] = p[0]; t[4] = p[1]; t[2] = p[2]; t[5] = p[3];
            break;
        case TransformMode::RotationTranslation: {
            T c = std::cos(p[0]), s = std::sin(p[0]);
            t[0] = c; t[1] = -s; t[3] = s; t[4] = c; t[2] = p[1]; t[5] = p[2];
            break;
        }
    }
    if (detail::tape_wants(out)) {
        Tensor<T> cp = params, co = out;
        detail::record_op<T>(out, [cp, co, mode]() mutable {
            auto g = co.grad();
            auto gp = cp.grad_buffer();
            auto p2 = cp.data();
            switch (mode) {
                case TransformMode::Affine:
                    for (int i = 0; i < 6; ++i) gp[i] += g[i];
                    break;
                case TransformMode::Translation:
                    gp[0] += g[2]; gp[1] += g[5];
                    break;
                case TransformMode::Rotation: {
                    T c = std::cos(p2[0]), s = std::sin(p2[0]);
                    gp[0] += -s * g[0] - c * g[1] + c * g[3] - s * g[4];
                    break;
                }
                case TransformMode::Scale:
                    gp[0] += g[0]; gp[1] += g[4];
                    break;
                case TransformMode::Shear:
                    gp[0] += g[1]; gp[1] += g[3];
                    break;
                case TransformMode::RotationScale: {
                    T c = std::cos(p2[0]), s = std::sin(p2[0]);
                    gp[0] += -p2[1] * s * g[0] - c * g[1] + c * g[3] - p2[2] * s * g[4];
                    gp[1] += c * g[0];
                    gp[2] += c * g[4];
                    break;
                }
                case TransformMode::TranslationScale:
                    gp[0] += g[0]; gp[1] += g[4]; gp[2] += g[2]; gp[3] += g[5];
                    break;
                case TransformMode::RotationTranslation: {
                    T c = std::cos(p2[0]), s = std::sin(p2[0]);
                    gp[0] += -s * g[0] - c * g[1] + c * g[3] - s * g[4];
                    gp[1] += g[2]; gp[2] += g[5];
                    break;
                }
            }
        });
    }
    return out;
}

// One predicted transform: theta plus the raw parameters that generated it.
template <typename T>
struct AffineTransform {
    Tensor<T> theta;  // [2,3]
    TransformMode mode = TransformMode::Affine;
    Tensor<T> raw;  // mode's raw parameters
};

template <typename T>
AffineTransform<T> build_affine(TransformMode mode, const Tensor<T>& raw) {
    return {assemble_theta(mode, raw), mode, raw};
}

template <typename T>
AffineTransform<T> build_affine(TransformMode mode, std::vector<T> raw) {
    const size_t n = raw.size();
    Tensor<T> r = Tensor<T>::from({n}, std::move(raw));
    return build_affine(mode, r);
}

template <typename T>
Tensor<T> identity_theta() {
    return Tensor<T>::from({2, 3}, {1, 0, 0, 0, 1, 0});
}

// Plain (non-differentiable) composition: (a o b)(p) = a(b(p)).
template <typename T>
Tensor<T> compose_theta(const Tensor<T>& a, const Tensor<T>& b) {
    auto ad = a.data();
    auto bd = b.data();
    std::vector<T> r(6);
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j)
            r[static_cast<size_t>(i * 3 + j)] = ad[i * 3 + 0] * bd[0 + j] + ad[i * 3 + 1] * bd[3 + j];
        r[static_cast<size_t>(i * 3 + 2)] =
            ad[i * 3 + 0] * bd[2] + ad[i * 3 + 1] * bd[5] + ad[i * 3 + 2];
    }
    return Tensor<T>::from({2, 3}, std::move(r));
}

template <typename T>
T theta_distance_from_identity(const Tensor<T>& theta) {
    auto t = theta.data();
    T d00 = t[0] - 1, d11 = t[4] - 1;
    return std::sqrt(d00 * d00 + t[1] * t[1] + t[2] * t[2] + t[3] * t[3] + d11 * d11 +
                     t[5] * t[5]);
}

// Inverse of the affine map p -> Ap + t. Differentiable.
template <typename T>
Tensor<T> affine_inverse(const Tensor<T>& theta) {
    if (theta.ndim() != 2 || theta.dim(0) != 2 || theta.dim(1) != 3)
        throw DimensionError("affine_inverse: expects [2,3]");
    auto t = theta.data();
    T det = t[0] * t[4] - t[1] * t[3];
    if (std::abs(det) < T(1e-9)) throw DomainError("affine_inverse: singular transform");
    T b00 = t[4] / det, b01 = -t[1] / det, b10 = -t[3] / det, b11 = t[0] / det;
    Tensor<T> out = Tensor<T>::from(
        {2, 3}, {b00, b01, -(b00 * t[2] + b01 * t[5]), b10, b11, -(b10 * t[2] + b11 * t[5])},
        theta.requires_grad());
    if (detail::tape_wants(out)) {
        Tensor<T> ct = theta, co = out;
        detail::record_op<T>(out, [ct, co]() mutable {
            auto g = co.grad();
            auto od = co.data();
            auto td = ct.data();
            auto gt = ct.grad_buffer();
            // B = A^-1, s = -B t. Fold ds into dB, then dA = -B^T dB B^T.
            T gB[4] = {g[0], g[1], g[3], g[4]};
            T gs[2] = {g[2], g[5]};
            gB[0] += -gs[0] * td[2];
            gB[1] += -gs[0] * td[5];
            gB[2] += -gs[1] * td[2];
            gB[3] += -gs[1] * td[5];
            T B[4] = {od[0], od[1], od[3], od[4]};
            // M = B^T gB
            T M[4] = {B[0] * gB[0] + B[2] * gB[2], B[0] * gB[1] + B[2] * gB[3],
                      B[1] * gB[0] + B[3] * gB[2], B[1] * gB[1] + B[3] * gB[3]};
            // dA = -(M B^T)
            gt[0] += -(M[0] * B[0] + M[1] * B[1]);
            gt[1] += -(M[0] * B[2] + M[1] * B[3]);
            gt[3] += -(M[2] * B[0] + M[3] * B[1]);
            gt[4] += -(M[2] * B[2] + M[3] * B[3]);
            // dt from s = -B t
            gt[2] += -(B[0] * gs[0] + B[2] * gs[1]);
            gt[5] += -(B[1] * gs[0] + B[3] * gs[1]);
        });
    }
    return out;
}

// Squared Frobenius norm of the displacement Jacobian A - I. For an affine
// field this is constant over the domain, so the mean equals the value.
template <typename T>
Tensor<T> jacobian_sq_norm(const Tensor<T>& theta) {
    auto t = theta.data();
    T d00 = t[0] - 1, d01 = t[1], d10 = t[3], d11 = t[4] - 1;
    Tensor<T> out = Tensor<T>::scalar(d00 * d00 + d01 * d01 + d10 * d10 + d11 * d11,
                                      theta.requires_grad());
    if (detail::tape_wants(out)) {
        Tensor<T> ct = theta, co = out;
        detail::record_op<T>(out, [ct, co]() mutable {
            T g = co.grad()[0];
            auto td = ct.data();
            auto gt = ct.grad_buffer();
            gt[0] += g * 2 * (td[0] - 1);
            gt[1] += g * 2 * td[1];
            gt[3] += g * 2 * td[3];
            gt[4] += g * 2 * (td[4] - 1);
        });
    }
    return out;
}

// Sampling grid of target coordinates mapped through theta: grid(p) = theta *
// [p_x, p_y, 1]^T, p normalized with corners at exactly +-1. Output [H,W,2],
// last axis (x, y).
template <typename T>
Tensor<T> affine_grid(const Tensor<T>& theta, size_t h, size_t w) {
    if (h < 1 || w < 1) throw DimensionError("affine_grid: empty target");
    auto t = theta.data();
    Tensor<T> out = Tensor<T>::zeros({h, w, 2}, theta.requires_grad());
    auto od = out.mutable_data();
    for (size_t i = 0; i < h; ++i) {
        T py = h > 1 ? T(-1) + T(2) * static_cast<T>(i) / static_cast<T>(h - 1) : T(0);
        for (size_t j = 0; j < w; ++j) {
            T px = w > 1 ? T(-1) + T(2) * static_cast<T>(j) / static_cast<T>(w - 1) : T(0);
            od[(i * w + j) * 2 + 0] = t[0] * px + t[1] * py + t[2];
            od[(i * w + j) * 2 + 1] = t[3] * px + t[4] * py + t[5];
        }
    }
    if (detail::tape_wants(out)) {
        Tensor<T> ct = theta, co = out;
        detail::record_op<T>(out, [ct, co, h, w]() mutable {
            auto g = co.grad();
            auto gt = ct.grad_buffer();
            for (size_t i = 0; i < h; ++i) {
                T py = h > 1 ? T(-1) + T(2) * static_cast<T>(i) / static_cast<T>(h - 1) : T(0);
                for (size_t j = 0; j < w; ++j) {
                    T px = w > 1 ? T(-1) + T(2) * static_cast<T>(j) / static_cast<T>(w - 1) : T(0);
                    T gx = g[(i * w + j) * 2 + 0];
                    T gy = g[(i * w + j) * 2 + 1];
                    gt[0] += gx * px;
                    gt[1] += gx * py;
                    gt[2] += gx;
                    gt[3] += gy * px;
                    gt[4] += gy * py;
                    gt[5] += gy;
                }
            }
        });
    }
    return out;
}

namespace detail {

// Normalized -> pixel coordinate. Done in double with an integer snap that
// covers single-precision grid storage rounding (~eps32 * extent) yet stays
// an order of magnitude below finite-difference steps (1e-5 in grid units,
// i.e. 5e-6 * extent in pixels), so identity grids hit pixel centers exactly
// without disturbing gradient checks.
inline double grid_to_pixel(double g, size_t extent) {
    if (extent <= 1) return 0.0;
    double f = (g + 1.0) * (static_cast<double>(extent - 1) / 2.0);
    double r = std::nearbyint(f);
    if (std::abs(f - r) < 3e-7 * static_cast<double>(extent - 1)) f = r;
    return f;
}

}  // namespace detail

// Bilinear sampling with zero padding outside [-1,1]. Differentiable in both
// the feature map and the grid.
template <typename T>
Tensor<T> sample_bilinear(const Tensor<T>& feat, const Tensor<T>& grid) {
    if (feat.ndim() != 3 || grid.ndim() != 3 || grid.dim(2) != 2)
        throw DimensionError("sample_bilinear: feat [C,H,W], grid [H',W',2]");
    const size_t c = feat.dim(0), h = feat.dim(1), w = feat.dim(2);
    const size_t oh = grid.dim(0), ow = grid.dim(1);
    for (T v : grid.data())
        if (!std::isfinite(v)) throw DomainError("sample_bilinear: non-finite grid");

    Tensor<T> out =
        Tensor<T>::zeros({c, oh, ow}, feat.requires_grad() || grid.requires_grad());
    auto fd = feat.data();
    auto gd = grid.data();
    auto od = out.mutable_data();

    auto fetch = [&](size_t ch, long y, long x) -> double {
        if (y < 0 || y >= static_cast<long>(h) || x < 0 || x >= static_cast<long>(w)) return 0.0;
        return static_cast<double>(
            fd[ch * h * w + static_cast<size_t>(y) * w + static_cast<size_t>(x)]);
    };

    for (size_t p = 0; p < oh * ow; ++p) {
        const double fx = detail::grid_to_pixel(static_cast<double>(gd[p * 2 + 0]), w);
        const double fy = detail::grid_to_pixel(static_cast<double>(gd[p * 2 + 1]), h);
        // fully outside the padded support: all corners vanish
        if (fx <= -1.0 || fx >= static_cast<double>(w) || fy <= -1.0 ||
            fy >= static_cast<double>(h))
            continue;
        const long x0 = static_cast<long>(std::floor(fx));
        const long y0 = static_cast<long>(std::floor(fy));
        const double ax = fx - static_cast<double>(x0);
        const double ay = fy - static_cast<double>(y0);
        for (size_t ch = 0; ch < c; ++ch) {
            if (ax == 0.0 && ay == 0.0 && x0 >= 0 && y0 >= 0 && x0 < static_cast<long>(w) &&
                y0 < static_cast<long>(h)) {
                od[ch * oh * ow + p] = fd[ch * h * w + static_cast<size_t>(y0) * w +
                                          static_cast<size_t>(x0)];
                continue;
            }
            const double v00 = fetch(ch, y0, x0), v01 = fetch(ch, y0, x0 + 1);
            const double v10 = fetch(ch, y0 + 1, x0), v11 = fetch(ch, y0 + 1, x0 + 1);
            od[ch * oh * ow + p] = static_cast<T>((1.0 - ay) * ((1.0 - ax) * v00 + ax * v01) +
                                                  ay * ((1.0 - ax) * v10 + ax * v11));
        }
    }

    if (detail::tape_wants(out)) {
        Tensor<T> cf = feat, cg = grid, co = out;
        detail::record_op<T>(out, [cf, cg, co, c, h, w, oh, ow]() mutable {
            auto g = co.grad();
            auto fd2 = cf.data();
            auto gd2 = cg.data();
            const bool want_f = cf.requires_grad();
            const bool want_g = cg.requires_grad();
            std::span<T> gf, gg;
            if (want_f) gf = cf.grad_buffer();
            if (want_g) gg = cg.grad_buffer();
            const double sx = w > 1 ? static_cast<double>(w - 1) / 2.0 : 0.0;
            const double sy = h > 1 ? static_cast<double>(h - 1) / 2.0 : 0.0;
            auto fetch2 = [&](size_t ch, long y, long x) -> double {
                if (y < 0 || y >= static_cast<long>(h) || x < 0 || x >= static_cast<long>(w))
                    return 0.0;
                return static_cast<double>(
                    fd2[ch * h * w + static_cast<size_t>(y) * w + static_cast<size_t>(x)]);
            };
            auto scatter = [&](size_t ch, long y, long x, double val) {
                if (y < 0 || y >= static_cast<long>(h) || x < 0 || x >= static_cast<long>(w))
                    return;
                gf[ch * h * w + static_cast<size_t>(y) * w + static_cast<size_t>(x)] +=
                    static_cast<T>(val);
            };
            for (size_t p = 0; p < oh * ow; ++p) {
                const double fx = detail::grid_to_pixel(static_cast<double>(gd2[p * 2 + 0]), w);
                const double fy = detail::grid_to_pixel(static_cast<double>(gd2[p * 2 + 1]), h);
                if (fx <= -1.0 || fx >= static_cast<double>(w) || fy <= -1.0 ||
                    fy >= static_cast<double>(h))
                    continue;
                const long x0 = static_cast<long>(std::floor(fx));
                const long y0 = static_cast<long>(std::floor(fy));
                const double ax = fx - static_cast<double>(x0);
                const double ay = fy - static_cast<double>(y0);
                double dfx = 0.0, dfy = 0.0;
                for (size_t ch = 0; ch < c; ++ch) {
                    const double go = static_cast<double>(g[ch * oh * ow + p]);
                    if (go == 0.0) continue;
                    if (want_f) {
                        scatter(ch, y0, x0, go * (1.0 - ay) * (1.0 - ax));
                        scatter(ch, y0, x0 + 1, go * (1.0 - ay) * ax);
                        scatter(ch, y0 + 1, x0, go * ay * (1.0 - ax));
                        scatter(ch, y0 + 1, x0 + 1, go * ay * ax);
                    }
                    if (want_g) {
                        const double v00 = fetch2(ch, y0, x0), v01 = fetch2(ch, y0, x0 + 1);
                        const double v10 = fetch2(ch, y0 + 1, x0), v11 = fetch2(ch, y0 + 1, x0 + 1);
                        dfx += go * ((1.0 - ay) * (v01 - v00) + ay * (v11 - v10));
                        dfy += go * ((1.0 - ax) * (v10 - v00) + ax * (v11 - v01));
                    }
                }
                if (want_g) {
                    gg[p * 2 + 0] += static_cast<T>(dfx * sx);
                    gg[p * 2 + 1] += static_cast<T>(dfy * sy);
                }
            }
        });
    }
    return out;
}

/**
 * Localisation network: two stride-2 3x3 convolutions with tanh, global
 * average pooling, and a linear head sized to the mode's parameter count.
 * The head is zero-initialized so a fresh net predicts the identity.
 */
template <typename T>
class LocNet {
public:
    LocNet() = default;

    LocNet(size_t in_channels, size_t hidden, TransformMode mode, Rng& rng)
        : mode_(mode), in_channels_(in_channels) {
        const size_t np = static_cast<size_t>(param_count(mode));
        conv1_w_ = he_init(hidden, in_channels, rng);
        conv1_b_ = Tensor<T>::zeros({hidden}, true);
        conv2_w_ = he_init(hidden, hidden, rng);
        conv2_b_ = Tensor<T>::zeros({hidden}, true);
        head_w_ = Tensor<T>::zeros({np, hidden}, true);
        head_b_ = Tensor<T>::zeros({np}, true);
        identity_ = Tensor<T>::from({np}, identity_params<T>(mode));
    }

    AffineTransform<T> predict(const Tensor<T>& concat_sources) const {
        if (concat_sources.dim(0) != in_channels_)
            throw DimensionError("locnet: expected " + std::to_string(in_channels_) +
                                 " input channels, got " + shape_str(concat_sources.shape()));
        Tensor<T> x = tanh(conv3x3(concat_sources, conv1_w_, &conv1_b_, 2));
        x = tanh(conv3x3(x, conv2_w_, &conv2_b_, 2));
        Tensor<T> pooled = global_avg_pool(x);
        Tensor<T> delta = linear(head_w_, pooled, &head_b_);
        Tensor<T> raw = add(delta, identity_);
        return build_affine(mode_, raw);
    }

    std::vector<Tensor<T>> parameters() const {
        return {conv1_w_, conv1_b_, conv2_w_, conv2_b_, head_w_, head_b_};
    }
    TransformMode mode() const { return mode_; }
    size_t in_channels() const { return in_channels_; }

    Tensor<T>& head_weight() { return head_w_; }
    Tensor<T>& head_bias() { return head_b_; }

private:
    static Tensor<T> he_init(size_t cout, size_t cin, Rng& rng) {
        const T stddev = std::sqrt(T(2) / static_cast<T>(cin * 9));
        Tensor<T> w = Tensor<T>::zeros({cout, cin, 3, 3}, true);
        auto d = w.mutable_data();
        for (auto& v : d) v = static_cast<T>(rng.normal()) * stddev;
        return w;
    }

    TransformMode mode_ = TransformMode::Affine;
    size_t in_channels_ = 0;
    Tensor<T> conv1_w_, conv1_b_, conv2_w_, conv2_b_, head_w_, head_b_;
    Tensor<T> identity_;
};

template <typename T>
struct CascadeResult {
    std::array<Tensor<T>, 3> aligned_a;
    std::array<Tensor<T>, 3> aligned_b;
    std::array<AffineTransform<T>, 3> thetas;
};

/**
 * Cascaded alignment over three levels. Level-1 sources are the level-1
 * feature maps; at deeper levels the previous warped maps, pooled to the
 * current resolution, act as sources. Theta warps the moving stream (B) and
 * its inverse warps the reference stream (A).
 */
template <typename T>
CascadeResult<T> cascade_align(const std::array<Tensor<T>, 3>& feats_a,
                               const std::array<Tensor<T>, 3>& feats_b,
                               std::array<LocNet<T>, 3>& nets) {
    CascadeResult<T> result;
    Tensor<T> src_a, src_b;
    for (size_t l = 0; l < 3; ++l) {
        if (l == 0) {
            src_a = feats_a[0];
            src_b = feats_b[0];
        } else {
            src_a = avg_pool2(result.aligned_a[l - 1]);
            src_b = avg_pool2(result.aligned_b[l - 1]);
        }
        AffineTransform<T> tf = nets[l].predict(concat_channels(src_a, src_b));
        const size_t h = feats_a[l].dim(1), w = feats_a[l].dim(2);
        Tensor<T> grid_b = affine_grid(tf.theta, h, w);
        Tensor<T> grid_a = affine_grid(affine_inverse(tf.theta), h, w);
        result.aligned_a[l] = sample_bilinear(feats_a[l], grid_a);
        result.aligned_b[l] = sample_bilinear(feats_b[l], grid_b);
        result.thetas[l] = tf;
    }
    return result;
}

}  // namespace planeqc
