#pragma once

/**
 * @file image.hpp
 * @brief Image container, PGM I/O, augmentation, and graded deformations.
 */

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "planeqc/errors.hpp"
#include "planeqc/rng.hpp"

namespace planeqc {

struct Image {
    size_t height = 0, width = 0;
    std::vector<float> pixels;  // row-major, values in [0,1]
    int plane = -1;
    std::optional<float> severity;  // 0 = pristine
    std::optional<float> score;     // reference quality in [0,1]

    float at(size_t y, size_t x) const { return pixels[y * width + x]; }
    float& at(size_t y, size_t x) { return pixels[y * width + x]; }
};

// H, W >= 32 and every pixel in [0,1].
void validate_image(const Image& img);

Image load_pgm(const std::string& path);
void save_pgm(const Image& img, const std::string& path);

// 2x3 affine on centered pixel coordinates; maps input content points to
// output positions.
struct Affine2 {
    double m[6] = {1, 0, 0, 0, 1, 0};

    static Affine2 identity() { return {}; }
    static Affine2 rotation(double radians);
    static Affine2 translation(double dx, double dy);
    static Affine2 scaling(double sx, double sy);

    bool is_identity() const;
    // (*this)(inner(p))
    Affine2 compose(const Affine2& inner) const;
    Affine2 inverted() const;
    void apply(double x, double y, double& ox, double& oy) const;
};

// Warps image content by the forward transform (inverse-mapped bilinear
// sampling, zero fill outside). Identity transforms pass pixels through
// bit-exactly.
Image warp_affine(const Image& img, const Affine2& forward);

struct AugmentConfig {
    float contrast_min = 0.8f, contrast_max = 1.2f;
    float rotation_min_deg = -20.0f, rotation_max_deg = 20.0f;
    float translation_min_frac = -0.2f, translation_max_frac = 0.2f;
    float scale_min = 0.8f, scale_max = 1.2f;
    float noise_sigma = 0.02f;

    static AugmentConfig none() {
        return {1.0f, 1.0f, 0.0f, 0.0f, 0.0f, 0.0f, 1.0f, 1.0f, 0.0f};
    }
};

// Sampled contrast, rotation, translation, scale, and Gaussian noise applied
// in that order; the three geometric terms compose into one warp. Output is
// clipped to [0,1].
Image augment(const Image& img, const AugmentConfig& cfg, uint64_t seed);

enum class DeformKind { Rigid, NonRigid };

inline const char* deform_kind_name(DeformKind k) {
    return k == DeformKind::Rigid ? "rigid" : "nonrigid";
}

// Rigid deformation parameters at a severity: rotation up to 45 deg * s,
// translation up to 30% * s of each dimension, scale within 1 +- 0.4 s.
Affine2 rigid_deform_affine(float severity, uint64_t seed, size_t height, size_t width);

// Backward-mapped pixel displacement field.
struct WarpField {
    size_t height = 0, width = 0;
    std::vector<float> dx, dy;

    double mean_displacement() const;
};

// Sinusoidal warp with amplitude 0.25 * s * width and 2-4 spatial periods.
WarpField sinusoidal_warp(float severity, uint64_t seed, size_t height, size_t width);

Image apply_warp(const Image& img, const WarpField& field);

// Severity-graded deformation; records severity (and score = 1 - severity)
// in the result. Severity 0 returns the input unchanged.
Image deform(const Image& img, DeformKind kind, float severity, uint64_t seed);

double psnr(const Image& a, const Image& b);

}  // namespace planeqc
