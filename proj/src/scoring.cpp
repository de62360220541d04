#include "planeqc/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "planeqc/parallel.hpp"

namespace planeqc {

CalibrationStats::CalibrationStats(size_t num_planes) : window_(num_planes) {}

void CalibrationStats::observe(size_t plane, int term, double value) {
    if (frozen_) throw StateError("calibration: observe after freeze");
    if (!std::isfinite(value)) throw DomainError("calibration: non-finite loss value");
    Window& w = window_.at(plane).at(static_cast<size_t>(term));
    if (!w.seen) {
        w.lo = w.hi = value;
        w.seen = true;
    } else {
        w.lo = std::min(w.lo, value);
        w.hi = std::max(w.hi, value);
    }
}

void CalibrationStats::freeze() {
    for (size_t p = 0; p < window_.size(); ++p)
        for (const auto& w : window_[p])
            if (!w.seen)
                throw StateError("calibration: plane " + std::to_string(p) +
                                 " has no observations");
    frozen_ = true;
}

double CalibrationStats::term_min(size_t plane, int term) const {
    return window_.at(plane).at(static_cast<size_t>(term)).lo;
}

double CalibrationStats::term_max(size_t plane, int term) const {
    return window_.at(plane).at(static_cast<size_t>(term)).hi;
}

CalibrationStats CalibrationStats::merged(const CalibrationStats& a, const CalibrationStats& b) {
    if (a.window_.size() != b.window_.size())
        throw DimensionError("calibration: merge of different plane counts");
    CalibrationStats out(a.window_.size());
    for (size_t p = 0; p < a.window_.size(); ++p)
        for (size_t t = 0; t < 3; ++t) {
            const Window& wa = a.window_[p][t];
            const Window& wb = b.window_[p][t];
            Window& wo = out.window_[p][t];
            if (wa.seen && wb.seen) {
                wo = {std::min(wa.lo, wb.lo), std::max(wa.hi, wb.hi), true};
            } else if (wa.seen || wb.seen) {
                wo = wa.seen ? wa : wb;
            }
        }
    return out;
}

void CalibrationStats::save(TensorContainer& c,
                            const std::vector<std::string>& plane_names) const {
    if (plane_names.size() != window_.size())
        throw DimensionError("calibration: plane name count mismatch");
    for (size_t p = 0; p < window_.size(); ++p)
        for (int t = 0; t < 3; ++t) {
            const std::string base =
                "calib." + plane_names[p] + "." + score_term_name(t) + ".";
            c.put_scalar(base + "min", static_cast<float>(term_min(p, t)));
            c.put_scalar(base + "max", static_cast<float>(term_max(p, t)));
        }
}

CalibrationStats CalibrationStats::load(const TensorContainer& c,
                                        const std::vector<std::string>& plane_names) {
    CalibrationStats out(plane_names.size());
    for (size_t p = 0; p < plane_names.size(); ++p)
        for (int t = 0; t < 3; ++t) {
            const std::string base =
                "calib." + plane_names[p] + "." + score_term_name(t) + ".";
            out.observe(p, t, c.get_scalar(base + "min"));
            out.observe(p, t, c.get_scalar(base + "max"));
        }
    out.freeze();
    return out;
}

double phi(double value, int term, size_t plane, const CalibrationStats& stats) {
    if (!stats.frozen()) throw StateError("phi: calibration stats not frozen");
    const double lo = stats.term_min(plane, term);
    const double hi = stats.term_max(plane, term);
    if (hi == lo) return 0.0;  // degenerate window carries no information
    return std::clamp((value - lo) / (hi - lo), 0.0, 1.0);
}

namespace {

// u64 round-trips through two f32 bit patterns so the hash can live in the
// tensor container.
void hash_to_floats(uint64_t h, float& a, float& b) {
    uint32_t lo = static_cast<uint32_t>(h & 0xffffffffULL);
    uint32_t hi = static_cast<uint32_t>(h >> 32);
    std::memcpy(&a, &lo, 4);
    std::memcpy(&b, &hi, 4);
}

uint64_t floats_to_hash(float a, float b) {
    uint32_t lo, hi;
    std::memcpy(&lo, &a, 4);
    std::memcpy(&hi, &b, 4);
    return (static_cast<uint64_t>(hi) << 32) | lo;
}

}  // namespace

void AnchorCache::save(const std::string& path,
                       const std::vector<std::string>& plane_names) const {
    TensorContainer c;
    float ha, hb;
    hash_to_floats(checkpoint_hash, ha, hb);
    c.put("cache.meta.hash", Shape{2}, std::vector<float>{ha, hb});
    for (size_t p = 0; p < features.size(); ++p) {
        for (size_t a = 0; a < features[p].size(); ++a) {
            const std::string base =
                "cache." + plane_names.at(p) + ".anchor" + std::to_string(a) + ".";
            for (size_t l = 0; l < 3; ++l) {
                c.put(base + "l" + std::to_string(l + 1), features[p][a].adapted[l]);
                c.put(base + "raw" + std::to_string(l + 1), features[p][a].raw[l]);
                c.put(base + "pool" + std::to_string(l + 1), features[p][a].pooled_raw[l]);
            }
        }
    }
    c.save(path);
}

AnchorCache AnchorCache::load(const std::string& path,
                              const std::vector<std::string>& plane_names,
                              uint64_t expected_hash) {
    TensorContainer c = TensorContainer::load(path);
    const TensorRecord& hrec = c.get("cache.meta.hash");
    AnchorCache out;
    out.checkpoint_hash = floats_to_hash(hrec.data.at(0), hrec.data.at(1));
    if (out.checkpoint_hash != expected_hash)
        throw StateError("anchor cache: stale cache (checkpoint hash mismatch)");
    out.features.resize(plane_names.size());
    for (size_t p = 0; p < plane_names.size(); ++p) {
        for (size_t a = 0;; ++a) {
            const std::string base =
                "cache." + plane_names[p] + ".anchor" + std::to_string(a) + ".";
            if (!c.contains(base + "l1")) break;
            EncoderFeatures<float> f;
            for (size_t l = 0; l < 3; ++l) {
                f.adapted[l] = c.get_tensor<float>(base + "l" + std::to_string(l + 1));
                f.raw[l] = c.get_tensor<float>(base + "raw" + std::to_string(l + 1));
                f.pooled_raw[l] = c.get_tensor<float>(base + "pool" + std::to_string(l + 1));
            }
            out.features[p].push_back(std::move(f));
        }
    }
    return out;
}

AnchorCache build_anchor_cache(Model<float>& model,
                               const std::vector<std::vector<Image>>& anchors_per_plane) {
    AnchorCache cache;
    cache.checkpoint_hash = model.checkpoint_hash();
    cache.features.resize(anchors_per_plane.size());
    for (size_t p = 0; p < anchors_per_plane.size(); ++p) {
        for (const Image& img : anchors_per_plane[p]) {
            Tensor<float> t = image_tensor<float>(img.pixels, img.height, img.width);
            cache.features[p].push_back(model.extract_infer(t));
        }
    }
    return cache;
}

CalibrationStats calibrate(Model<float>& model, const DatasetSplit& data,
                           const AnchorCache& cache, int threads) {
    const size_t planes = data.plane_names.size();
    if (cache.features.size() != planes)
        throw ConfigError("calibrate: cache plane count mismatch");
    CalibrationStats stats(planes);
    for (size_t p = 0; p < planes; ++p) {
        if (data.train[p].empty())
            throw ConfigError("calibrate: plane '" + data.plane_names[p] +
                              "' has no training images");
        if (cache.features[p].empty())
            throw ConfigError("calibrate: plane '" + data.plane_names[p] + "' has no anchors");
        const auto& imgs = data.train[p];
        std::vector<std::vector<std::array<double, 3>>> terms(imgs.size());
        parallel_for(imgs.size(), threads, [&](size_t i) {
            const Image& img = imgs[i];
            Tensor<float> t = image_tensor<float>(img.pixels, img.height, img.width);
            EncoderFeatures<float> qf = model.extract_infer(t);
            for (const auto& af : cache.features[p]) {
                auto pt = model.pair_terms(af.adapted, qf.adapted);
                terms[i].push_back({pt.sim, pt.ncc, pt.smooth});
            }
        });
        for (const auto& per_img : terms)
            for (const auto& v : per_img) {
                stats.observe(p, kTermSim, v[0]);
                stats.observe(p, kTermNcc, v[1]);
                stats.observe(p, kTermSmooth, v[2]);
            }
    }
    stats.freeze();
    return stats;
}

double score_from_normalized(const std::vector<std::array<double, 3>>& per_anchor,
                             const ScoreWeights& weights) {
    if (per_anchor.empty()) throw ConfigError("score: no anchors");
    double sum_over_anchors = 0.0;
    for (const auto& t : per_anchor) {
        double inner = weights.sim * t[0] + weights.ncc * t[1] + weights.smooth * t[2];
        if (!weights.literal_formula) inner /= weights.total();
        sum_over_anchors += inner;
    }
    return 1.0 - sum_over_anchors / static_cast<double>(per_anchor.size());
}

QualityReport quality_score(Model<float>& model, const EncoderFeatures<float>& query_feats,
                            size_t plane, const AnchorCache& cache,
                            const CalibrationStats& stats, const ScoreWeights& weights,
                            double tau) {
    if (!stats.frozen()) throw StateError("quality_score: calibration stats not frozen");
    if (plane >= cache.features.size() || cache.features[plane].empty())
        throw ConfigError("quality_score: plane " + std::to_string(plane) + " has no anchors");
    QualityReport report;
    report.plane = plane;
    report.tau = tau;

    std::vector<std::array<double, 3>> norms;
    QualityReport::Terms mean{};
    for (const auto& af : cache.features[plane]) {
        auto pt = model.pair_terms(af.adapted, query_feats.adapted);
        QualityReport::Terms t;
        t.sim_raw = pt.sim;
        t.ncc_raw = pt.ncc;
        t.smooth_raw = pt.smooth;
        t.sim_norm = phi(pt.sim, kTermSim, plane, stats);
        t.ncc_norm = phi(pt.ncc, kTermNcc, plane, stats);
        t.smooth_norm = phi(pt.smooth, kTermSmooth, plane, stats);
        norms.push_back({t.sim_norm, t.ncc_norm, t.smooth_norm});
        mean.sim_raw += t.sim_raw;
        mean.ncc_raw += t.ncc_raw;
        mean.smooth_raw += t.smooth_raw;
        mean.sim_norm += t.sim_norm;
        mean.ncc_norm += t.ncc_norm;
        mean.smooth_norm += t.smooth_norm;
        report.per_anchor.push_back(t);
    }
    const double k1 = static_cast<double>(report.per_anchor.size());
    mean.sim_raw /= k1;
    mean.ncc_raw /= k1;
    mean.smooth_raw /= k1;
    mean.sim_norm /= k1;
    mean.ncc_norm /= k1;
    mean.smooth_norm /= k1;
    report.mean = mean;
    report.q = score_from_normalized(norms, weights);
    report.accepted = decide(report.q, tau);
    return report;
}

QualityReport quality_score_image(Model<float>& model, const Image& query, size_t plane,
                                  const AnchorCache& cache, const CalibrationStats& stats,
                                  const ScoreWeights& weights, double tau) {
    Tensor<float> t = image_tensor<float>(query.pixels, query.height, query.width);
    EncoderFeatures<float> qf = model.extract_infer(t);
    return quality_score(model, qf, plane, cache, stats, weights, tau);
}

}  // namespace planeqc
