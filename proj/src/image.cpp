#include "planeqc/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace planeqc {

namespace {
constexpr double kPi = 3.14159265358979323846;

inline float clip01(float v) { return v < 0.0f ? 0.0f : (v > 1.0f ? 1.0f : v); }
}  // namespace

void validate_image(const Image& img) {
    if (img.height < 32 || img.width < 32)
        throw DomainError("image: dimensions must be at least 32x32");
    if (img.pixels.size() != img.height * img.width)
        throw DimensionError("image: pixel buffer does not match dimensions");
    for (float v : img.pixels)
        if (!(v >= 0.0f && v <= 1.0f)) throw DomainError("image: pixel outside [0,1]");
}

Image load_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("pgm: cannot open '" + path + "'");
    std::string magic;
    in >> magic;
    if (magic != "P5")
        throw FormatError("pgm: unsupported magic '" + magic + "' (binary P5 required)");

    auto next_token = [&]() -> long {
        // skip whitespace and '#' comments
        while (true) {
            int ch = in.peek();
            if (ch == '#') {
                std::string line;
                std::getline(in, line);
            } else if (std::isspace(ch)) {
                in.get();
            } else {
                break;
            }
            if (!in) throw FormatError("pgm: truncated header");
        }
        long v = -1;
        in >> v;
        if (!in || v < 0) throw FormatError("pgm: malformed header");
        return v;
    };

    const long w = next_token();
    const long h = next_token();
    const long maxval = next_token();
    if (maxval != 255) throw FormatError("pgm: only maxval 255 supported");
    in.get();  // single whitespace before payload

    Image img;
    img.width = static_cast<size_t>(w);
    img.height = static_cast<size_t>(h);
    std::vector<uint8_t> raw(img.width * img.height);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<long>(raw.size()));
    if (static_cast<size_t>(in.gcount()) != raw.size())
        throw FormatError("pgm: truncated payload");
    img.pixels.resize(raw.size());
    for (size_t i = 0; i < raw.size(); ++i)
        img.pixels[i] = static_cast<float>(raw[i]) / 255.0f;
    return img;
}

void save_pgm(const Image& img, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("pgm: cannot open '" + path + "' for writing");
    out << "P5\n" << img.width << " " << img.height << "\n255\n";
    std::vector<uint8_t> raw(img.pixels.size());
    for (size_t i = 0; i < raw.size(); ++i) {
        const float v = clip01(img.pixels[i]);
        raw[i] = static_cast<uint8_t>(std::lround(v * 255.0f));
    }
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<long>(raw.size()));
}

Affine2 Affine2::rotation(double radians) {
    const double c = std::cos(radians), s = std::sin(radians);
    Affine2 a;
    a.m[0] = c;
    a.m[1] = -s;
    a.m[3] = s;
    a.m[4] = c;
    return a;
}

Affine2 Affine2::translation(double dx, double dy) {
    Affine2 a;
    a.m[2] = dx;
    a.m[5] = dy;
    return a;
}

Affine2 Affine2::scaling(double sx, double sy) {
    Affine2 a;
    a.m[0] = sx;
    a.m[4] = sy;
    return a;
}

bool Affine2::is_identity() const {
    return m[0] == 1 && m[1] == 0 && m[2] == 0 && m[3] == 0 && m[4] == 1 && m[5] == 0;
}

Affine2 Affine2::compose(const Affine2& inner) const {
    Affine2 r;
    r.m[0] = m[0] * inner.m[0] + m[1] * inner.m[3];
    r.m[1] = m[0] * inner.m[1] + m[1] * inner.m[4];
    r.m[2] = m[0] * inner.m[2] + m[1] * inner.m[5] + m[2];
    r.m[3] = m[3] * inner.m[0] + m[4] * inner.m[3];
    r.m[4] = m[3] * inner.m[1] + m[4] * inner.m[4];
    r.m[5] = m[3] * inner.m[2] + m[4] * inner.m[5] + m[5];
    return r;
}

Affine2 Affine2::inverted() const {
    const double det = m[0] * m[4] - m[1] * m[3];
    if (std::abs(det) < 1e-12) throw DomainError("affine: singular transform");
    Affine2 r;
    r.m[0] = m[4] / det;
    r.m[1] = -m[1] / det;
    r.m[3] = -m[3] / det;
    r.m[4] = m[0] / det;
    r.m[2] = -(r.m[0] * m[2] + r.m[1] * m[5]);
    r.m[5] = -(r.m[3] * m[2] + r.m[4] * m[5]);
    return r;
}

void Affine2::apply(double x, double y, double& ox, double& oy) const {
    ox = m[0] * x + m[1] * y + m[2];
    oy = m[3] * x + m[4] * y + m[5];
}

namespace {

float sample_pixel(const Image& img, double fx, double fy) {
    // bilinear with zero fill
    if (fx <= -1.0 || fy <= -1.0 || fx >= static_cast<double>(img.width) ||
        fy >= static_cast<double>(img.height))
        return 0.0f;
    const long x0 = static_cast<long>(std::floor(fx));
    const long y0 = static_cast<long>(std::floor(fy));
    const double ax = fx - static_cast<double>(x0);
    const double ay = fy - static_cast<double>(y0);
    auto fetch = [&](long y, long x) -> double {
        if (y < 0 || x < 0 || y >= static_cast<long>(img.height) ||
            x >= static_cast<long>(img.width))
            return 0.0;
        return static_cast<double>(img.pixels[static_cast<size_t>(y) * img.width +
                                              static_cast<size_t>(x)]);
    };
    const double v = (1.0 - ay) * ((1.0 - ax) * fetch(y0, x0) + ax * fetch(y0, x0 + 1)) +
                     ay * ((1.0 - ax) * fetch(y0 + 1, x0) + ax * fetch(y0 + 1, x0 + 1));
    return static_cast<float>(v);
}

}  // namespace

Image warp_affine(const Image& img, const Affine2& forward) {
    if (forward.is_identity()) return img;
    const Affine2 inv = forward.inverted();
    Image out = img;
    const double cx = (static_cast<double>(img.width) - 1.0) / 2.0;
    const double cy = (static_cast<double>(img.height) - 1.0) / 2.0;
    for (size_t y = 0; y < img.height; ++y) {
        for (size_t x = 0; x < img.width; ++x) {
            double sx, sy;
            inv.apply(static_cast<double>(x) - cx, static_cast<double>(y) - cy, sx, sy);
            out.pixels[y * img.width + x] = sample_pixel(img, sx + cx, sy + cy);
        }
    }
    return out;
}

Image augment(const Image& img, const AugmentConfig& cfg, uint64_t seed) {
    Rng rng(mix_seed(seed, 0x617567));
    const float contrast = static_cast<float>(rng.uniform(cfg.contrast_min, cfg.contrast_max));
    const double rot = rng.uniform(cfg.rotation_min_deg, cfg.rotation_max_deg) * kPi / 180.0;
    const double tx =
        rng.uniform(cfg.translation_min_frac, cfg.translation_max_frac) *
        static_cast<double>(img.width);
    const double ty =
        rng.uniform(cfg.translation_min_frac, cfg.translation_max_frac) *
        static_cast<double>(img.height);
    const double sc = rng.uniform(cfg.scale_min, cfg.scale_max);

    Image out = img;
    if (contrast != 1.0f)
        for (float& v : out.pixels) v = clip01(0.5f + (v - 0.5f) * contrast);

    Affine2 geo = Affine2::scaling(sc, sc)
                      .compose(Affine2::translation(tx, ty))
                      .compose(Affine2::rotation(rot));
    out = warp_affine(out, geo);

    if (cfg.noise_sigma > 0.0f) {
        for (float& v : out.pixels)
            v = clip01(v + static_cast<float>(rng.normal(0.0, cfg.noise_sigma)));
    }
    return out;
}

Affine2 rigid_deform_affine(float severity, uint64_t seed, size_t height, size_t width) {
    if (!(severity >= 0.0f && severity <= 1.0f))
        throw DomainError("deform: severity outside [0,1]");
    if (severity == 0.0f) return Affine2::identity();
    // severity sets the magnitudes (rotation 45 deg * s, translation 30% * s,
    // scale 1 +- 0.4 s); the seed draws only their directions, so the realized
    // deformation tracks the severity axis
    Rng rng(mix_seed(seed, 0x726967));
    const double s = severity;
    const double rot_sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
    const double rot = rot_sign * 45.0 * s * kPi / 180.0;
    const double tdir = rng.uniform(0.0, 2.0 * kPi);
    const double tx = std::cos(tdir) * 0.3 * s * static_cast<double>(width);
    const double ty = std::sin(tdir) * 0.3 * s * static_cast<double>(height);
    const double sc = rng.uniform() < 0.5 ? 1.0 - 0.4 * s : 1.0 + 0.4 * s;
    return Affine2::scaling(sc, sc)
        .compose(Affine2::translation(tx, ty))
        .compose(Affine2::rotation(rot));
}

double WarpField::mean_displacement() const {
    double total = 0;
    for (size_t i = 0; i < dx.size(); ++i)
        total += std::sqrt(static_cast<double>(dx[i]) * dx[i] +
                           static_cast<double>(dy[i]) * dy[i]);
    return dx.empty() ? 0.0 : total / static_cast<double>(dx.size());
}

WarpField sinusoidal_warp(float severity, uint64_t seed, size_t height, size_t width) {
    if (!(severity >= 0.0f && severity <= 1.0f))
        throw DomainError("deform: severity outside [0,1]");
    Rng rng(mix_seed(seed, 0x6e6f6e));
    WarpField f;
    f.height = height;
    f.width = width;
    f.dx.assign(height * width, 0.0f);
    f.dy.assign(height * width, 0.0f);
    if (severity == 0.0f) return f;
    const double amp = 0.25 * severity * static_cast<double>(width);
    const double ky = rng.uniform(2.0, 4.0);
    const double kx = rng.uniform(2.0, 4.0);
    const double p1 = rng.uniform(0.0, 2.0 * kPi);
    const double p2 = rng.uniform(0.0, 2.0 * kPi);
    for (size_t y = 0; y < height; ++y) {
        const double wy = std::sin(2.0 * kPi * ky * static_cast<double>(y) /
                                       static_cast<double>(height) + p1);
        for (size_t x = 0; x < width; ++x) {
            const double wx = std::sin(2.0 * kPi * kx * static_cast<double>(x) /
                                           static_cast<double>(width) + p2);
            f.dx[y * width + x] = static_cast<float>(amp * wy);
            f.dy[y * width + x] = static_cast<float>(amp * wx);
        }
    }
    return f;
}

Image apply_warp(const Image& img, const WarpField& field) {
    if (field.height != img.height || field.width != img.width)
        throw DimensionError("warp: field does not match image");
    Image out = img;
    for (size_t y = 0; y < img.height; ++y)
        for (size_t x = 0; x < img.width; ++x) {
            const size_t i = y * img.width + x;
            if (field.dx[i] == 0.0f && field.dy[i] == 0.0f) continue;
            out.pixels[i] = sample_pixel(img, static_cast<double>(x) - field.dx[i],
                                         static_cast<double>(y) - field.dy[i]);
        }
    return out;
}

Image deform(const Image& img, DeformKind kind, float severity, uint64_t seed) {
    if (!(severity >= 0.0f && severity <= 1.0f))
        throw DomainError("deform: severity outside [0,1]");
    Image out;
    if (severity == 0.0f) {
        out = img;
    } else if (kind == DeformKind::Rigid) {
        out = warp_affine(img, rigid_deform_affine(severity, seed, img.height, img.width));
    } else {
        out = apply_warp(img, sinusoidal_warp(severity, seed, img.height, img.width));
    }
    out.severity = severity;
    out.score = 1.0f - severity;
    return out;
}

double psnr(const Image& a, const Image& b) {
    if (a.height != b.height || a.width != b.width)
        throw DimensionError("psnr: size mismatch");
    double mse = 0;
    for (size_t i = 0; i < a.pixels.size(); ++i) {
        const double d = static_cast<double>(a.pixels[i]) - static_cast<double>(b.pixels[i]);
        mse += d * d;
    }
    mse /= static_cast<double>(a.pixels.size());
    if (mse <= 0) return 1e9;
    return 10.0 * std::log10(1.0 / mse);
}

}  // namespace planeqc
