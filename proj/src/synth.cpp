#include "planeqc/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace planeqc {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Blob {
    double cx, cy;      // center, fraction of size
    double ax, ay;      // semi-axes, fraction of size
    double angle;       // radians
    double intensity;   // pre-speckle brightness
    bool crescent;
    double notch_dx, notch_dy;  // crescent notch offset, fraction of ax/ay
};

std::vector<Blob> plane_archetype(int plane) {
    Rng rng(mix_seed(0x706c616e, static_cast<uint64_t>(plane)));
    const int count = 3 + static_cast<int>(rng.next_u64() % 3);  // 3..5
    // rotate layout centers by a per-plane offset so distinct planes place
    // structure in distinct regions
    const double layout_angle = static_cast<double>(plane) * 2.39996 + rng.uniform(0.0, 0.5);
    std::vector<Blob> blobs;
    for (int i = 0; i < count; ++i) {
        Blob b{};
        const double ring = 0.12 + 0.16 * rng.uniform();
        const double theta = layout_angle + 2.0 * kPi * (static_cast<double>(i) + rng.uniform(0.0, 0.4)) /
                                                 static_cast<double>(count);
        b.cx = 0.5 + ring * std::cos(theta);
        b.cy = 0.5 + ring * std::sin(theta);
        b.ax = rng.uniform(0.08, 0.2);
        b.ay = rng.uniform(0.08, 0.2);
        b.angle = rng.uniform(0.0, kPi);
        b.intensity = rng.uniform(1.0, 2.0);
        b.crescent = rng.uniform() < 0.4;
        b.notch_dx = rng.uniform(-0.5, 0.5);
        b.notch_dy = rng.uniform(-0.5, 0.5);
        blobs.push_back(b);
    }
    return blobs;
}

double blob_value(const Blob& b, double x, double y, double size) {
    auto ellipse = [&](double cx, double cy, double ax, double ay) {
        const double dx = x - cx * size;
        const double dy = y - cy * size;
        const double c = std::cos(b.angle), s = std::sin(b.angle);
        const double u = c * dx + s * dy;
        const double v = -s * dx + c * dy;
        const double r = std::sqrt((u * u) / (ax * size * ax * size) +
                                   (v * v) / (ay * size * ay * size));
        return std::clamp((1.0 - r) / 0.15, 0.0, 1.0);
    };
    double v = ellipse(b.cx, b.cy, b.ax, b.ay);
    if (b.crescent) {
        const double ncx = b.cx + b.notch_dx * b.ax;
        const double ncy = b.cy + b.notch_dy * b.ay;
        v = std::max(0.0, v - ellipse(ncx, ncy, b.ax * 0.6, b.ay * 0.6));
    }
    return v * b.intensity;
}

Image render_blobs(const std::vector<Blob>& blobs, size_t size, double background) {
    Image img;
    img.height = size;
    img.width = size;
    img.pixels.assign(size * size, 0.0f);
    for (size_t y = 0; y < size; ++y)
        for (size_t x = 0; x < size; ++x) {
            double v = background;
            for (const Blob& b : blobs)
                v = std::max(v, blob_value(b, static_cast<double>(x), static_cast<double>(y),
                                           static_cast<double>(size)));
            img.pixels[y * size + x] = static_cast<float>(std::min(v, 1.0));
        }
    return img;
}

Image box_blur3(const Image& img) {
    Image out = img;
    const long h = static_cast<long>(img.height), w = static_cast<long>(img.width);
    for (long y = 0; y < h; ++y)
        for (long x = 0; x < w; ++x) {
            double acc = 0;
            int n = 0;
            for (long dy = -1; dy <= 1; ++dy)
                for (long dx = -1; dx <= 1; ++dx) {
                    const long yy = y + dy, xx = x + dx;
                    if (yy < 0 || xx < 0 || yy >= h || xx >= w) continue;
                    acc += img.pixels[static_cast<size_t>(yy * w + xx)];
                    ++n;
                }
            out.pixels[static_cast<size_t>(y * w + x)] = static_cast<float>(acc / n);
        }
    return out;
}

}  // namespace

void CorpusSpec::validate() const {
    if (plane_names.empty()) throw ConfigError("corpus: no planes");
    for (size_t i = 0; i < plane_names.size(); ++i)
        for (size_t j = i + 1; j < plane_names.size(); ++j)
            if (plane_names[i] == plane_names[j])
                throw ConfigError("corpus: duplicate plane name '" + plane_names[i] + "'");
    if (image_size < 32) throw ConfigError("corpus: image size must be at least 32");
    if (anchors.count == 0 || train.count == 0 || query.count == 0)
        throw ConfigError("corpus: all splits need at least one image");
    if (static_cast<double>(anchors.count) > static_cast<double>(train.count) / 5.0)
        throw ConfigError("corpus: anchor split k1=" + std::to_string(anchors.count) +
                          " must satisfy k1 <= k2/5 with k2=" + std::to_string(train.count));
}

Image render_canonical(int plane, size_t size) {
    Image img = render_blobs(plane_archetype(plane), size, 0.15);
    img.plane = plane;
    return img;
}

Image render_plane_image(int plane, size_t size, uint64_t seed) {
    Rng rng(mix_seed(seed, 0x696d67));
    std::vector<Blob> blobs = plane_archetype(plane);
    for (Blob& b : blobs) {
        b.cx += rng.uniform(-0.015, 0.015);
        b.cy += rng.uniform(-0.015, 0.015);
        b.ax *= rng.uniform(0.95, 1.05);
        b.ay *= rng.uniform(0.95, 1.05);
        b.intensity *= rng.uniform(0.9, 1.1);
    }
    Image img = render_blobs(blobs, size, 0.15);
    // multiplicative Rayleigh speckle, sigma 0.25 (mean ~0.313 darkens the
    // raised pre-speckle intensities back into [0,1])
    for (float& v : img.pixels)
        v = std::min(1.0f, v * 2.4f * static_cast<float>(rng.rayleigh(0.25)));
    img = box_blur3(img);
    for (float& v : img.pixels) v = std::clamp(v, 0.0f, 1.0f);
    img.plane = plane;
    img.severity = 0.0f;
    img.score = 1.0f;
    return img;
}

namespace {

Image make_member(int plane, const CorpusSpec& spec, const SplitSpec& split, uint64_t seed) {
    Image img = render_plane_image(plane, spec.image_size, seed);
    Rng rng(mix_seed(seed, 0x646566));
    if (split.deformed_fraction > 0.0f && rng.uniform() < split.deformed_fraction) {
        const float sev =
            static_cast<float>(static_cast<double>(split.max_severity) * rng.uniform(0.15, 1.0));
        const DeformKind kind = rng.uniform() < 0.5 ? DeformKind::Rigid : DeformKind::NonRigid;
        img = deform(img, kind, sev, rng.next_u64());
        img.plane = plane;
    }
    return img;
}

}  // namespace

namespace {

const char* split_name(int s) { return s == 0 ? "anchors" : (s == 1 ? "train" : "query"); }

std::string member_path(const std::string& plane, int split, size_t idx) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "img_%05zu.pgm", idx);
    return plane + "/" + split_name(split) + "/" + buf;
}

}  // namespace

DatasetSplit gen_synthetic_corpus(const CorpusSpec& spec, uint64_t seed) {
    spec.validate();
    DatasetSplit out;
    out.plane_names = spec.plane_names;
    out.k1 = spec.anchors.count;
    out.k2 = spec.train.count;
    const size_t planes = spec.plane_names.size();
    out.anchors.resize(planes);
    out.train.resize(planes);
    out.query.resize(planes);
    out.anchor_paths.resize(planes);
    out.train_paths.resize(planes);
    out.query_paths.resize(planes);
    for (size_t p = 0; p < planes; ++p) {
        const struct {
            const SplitSpec* s;
            std::vector<Image>* dst;
            std::vector<std::string>* paths;
            int tag;
        } splits[3] = {{&spec.anchors, &out.anchors[p], &out.anchor_paths[p], 0},
                       {&spec.train, &out.train[p], &out.train_paths[p], 1},
                       {&spec.query, &out.query[p], &out.query_paths[p], 2}};
        for (const auto& sp : splits)
            for (size_t i = 0; i < sp.s->count; ++i) {
                sp.dst->push_back(make_member(
                    static_cast<int>(p), spec, *sp.s,
                    mix_seed(seed, (p << 24) ^ (static_cast<uint64_t>(sp.tag) << 20) ^ i)));
                sp.paths->push_back(member_path(spec.plane_names[p], sp.tag, i));
            }
    }
    return out;
}

void write_corpus(const DatasetSplit& split, const std::string& root) {
    namespace fs = std::filesystem;
    fs::create_directories(root);
    std::ofstream manifest(root + "/manifest.csv");
    if (!manifest) throw FormatError("corpus: cannot write manifest in '" + root + "'");
    manifest << "path,plane,split,severity,score\n";
    for (size_t p = 0; p < split.plane_names.size(); ++p) {
        const std::vector<Image>* groups[3] = {&split.anchors[p], &split.train[p],
                                               &split.query[p]};
        for (int s = 0; s < 3; ++s) {
            fs::create_directories(fs::path(root) / split.plane_names[p] / split_name(s));
            for (size_t i = 0; i < groups[s]->size(); ++i) {
                const Image& img = (*groups[s])[i];
                const std::string rel = member_path(split.plane_names[p], s, i);
                save_pgm(img, root + "/" + rel);
                char sev[32] = "", sco[32] = "";
                if (img.severity) std::snprintf(sev, sizeof(sev), "%.6g", *img.severity);
                if (img.score) std::snprintf(sco, sizeof(sco), "%.6g", *img.score);
                manifest << rel << "," << split.plane_names[p] << "," << split_name(s) << ","
                         << sev << "," << sco << "\n";
            }
        }
    }
}

DatasetSplit load_corpus(const std::string& root) {
    std::ifstream manifest(root + "/manifest.csv");
    if (!manifest) throw FormatError("corpus: no manifest.csv under '" + root + "'");
    std::string line;
    if (!std::getline(manifest, line) || line.rfind("path,plane,split", 0) != 0)
        throw FormatError("corpus: malformed manifest header");

    DatasetSplit out;
    auto plane_id = [&](const std::string& name) -> size_t {
        for (size_t i = 0; i < out.plane_names.size(); ++i)
            if (out.plane_names[i] == name) return i;
        out.plane_names.push_back(name);
        out.anchors.emplace_back();
        out.train.emplace_back();
        out.query.emplace_back();
        out.anchor_paths.emplace_back();
        out.train_paths.emplace_back();
        out.query_paths.emplace_back();
        return out.plane_names.size() - 1;
    };

    while (std::getline(manifest, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string path, plane, split, sev, sco;
        std::getline(ss, path, ',');
        std::getline(ss, plane, ',');
        std::getline(ss, split, ',');
        std::getline(ss, sev, ',');
        std::getline(ss, sco, ',');
        Image img = load_pgm(root + "/" + path);
        const size_t p = plane_id(plane);
        img.plane = static_cast<int>(p);
        if (!sev.empty()) img.severity = std::stof(sev);
        if (!sco.empty()) img.score = std::stof(sco);
        if (split == "anchors") {
            out.anchors[p].push_back(std::move(img));
            out.anchor_paths[p].push_back(path);
        } else if (split == "train") {
            out.train[p].push_back(std::move(img));
            out.train_paths[p].push_back(path);
        } else if (split == "query") {
            out.query[p].push_back(std::move(img));
            out.query_paths[p].push_back(path);
        } else {
            throw FormatError("corpus: unknown split '" + split + "'");
        }
    }
    for (size_t p = 0; p < out.plane_names.size(); ++p) {
        out.k1 = std::max(out.k1, out.anchors[p].size());
        out.k2 = std::max(out.k2, out.train[p].size());
    }
    return out;
}

}  // namespace planeqc
