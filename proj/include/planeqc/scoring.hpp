#pragma once

/**
 * @file scoring.hpp
 * @brief Per-plane min-max calibration, anchor feature caching, and the
 *        consistency-based quality score.
 */

#include <array>
#include <string>
#include <vector>

#include "planeqc/image.hpp"
#include "planeqc/model.hpp"
#include "planeqc/strq.hpp"
#include "planeqc/synth.hpp"

namespace planeqc {

enum ScoreTerm { kTermSim = 0, kTermNcc = 1, kTermSmooth = 2 };
inline const char* score_term_name(int term) {
    return term == kTermSim ? "sim" : (term == kTermNcc ? "ncc" : "smooth");
}

// Per-plane, per-term (min, max) windows learned on the training split and
// frozen before inference.
class CalibrationStats {
public:
    CalibrationStats() = default;
    explicit CalibrationStats(size_t num_planes);

    void observe(size_t plane, int term, double value);
    void freeze();
    bool frozen() const { return frozen_; }
    size_t num_planes() const { return window_.size(); }

    double term_min(size_t plane, int term) const;
    double term_max(size_t plane, int term) const;

    // Merge of per-shard windows; equals the window of the concatenated pass.
    static CalibrationStats merged(const CalibrationStats& a, const CalibrationStats& b);

    void save(TensorContainer& c, const std::vector<std::string>& plane_names) const;
    static CalibrationStats load(const TensorContainer& c,
                                 const std::vector<std::string>& plane_names);

private:
    struct Window {
        double lo = 0, hi = 0;
        bool seen = false;
    };
    std::vector<std::array<Window, 3>> window_;
    bool frozen_ = false;
};

// Min-max normalization, clamped to [0,1]; a degenerate window returns 0.
double phi(double value, int term, size_t plane, const CalibrationStats& stats);

// Precomputed adapted features and selection vectors per anchor, keyed by the
// model checkpoint hash.
struct AnchorCache {
    uint64_t checkpoint_hash = 0;
    // [plane][anchor]
    std::vector<std::vector<EncoderFeatures<float>>> features;

    void save(const std::string& path, const std::vector<std::string>& plane_names) const;
    static AnchorCache load(const std::string& path,
                            const std::vector<std::string>& plane_names,
                            uint64_t expected_hash);
};

AnchorCache build_anchor_cache(Model<float>& model,
                               const std::vector<std::vector<Image>>& anchors_per_plane);

// Forward-only registration of every training image against every same-plane
// anchor, recording running extrema per term. Result is frozen.
CalibrationStats calibrate(Model<float>& model, const DatasetSplit& data,
                           const AnchorCache& cache, int threads = 1);

struct ScoreWeights {
    double sim = 1.0, ncc = 1.0, smooth = 1.0;
    bool literal_formula = false;  // skip the sum-of-weights normalization

    double total() const { return sim + ncc + smooth; }
};

// Q from per-anchor normalized terms [sim, ncc, smooth]. The inner weighted
// sum divides by the weight total unless literal_formula is set.
double score_from_normalized(const std::vector<std::array<double, 3>>& per_anchor,
                             const ScoreWeights& weights);

struct QualityReport {
    std::string id;
    size_t plane = 0;
    struct Terms {
        double sim_raw = 0, ncc_raw = 0, smooth_raw = 0;
        double sim_norm = 0, ncc_norm = 0, smooth_norm = 0;
    };
    std::vector<Terms> per_anchor;
    Terms mean;  // averages over anchors
    double q = 0;
    double tau = 0.5;
    bool accepted = false;
};

// Q = 1 - (1/k1) sum_j sum_m w_m phi(L_m(query, anchor_j)) with the inner sum
// divided by sum_m w_m unless literal_formula is set.
QualityReport quality_score(Model<float>& model, const EncoderFeatures<float>& query_feats,
                            size_t plane, const AnchorCache& cache,
                            const CalibrationStats& stats, const ScoreWeights& weights,
                            double tau);

QualityReport quality_score_image(Model<float>& model, const Image& query, size_t plane,
                                  const AnchorCache& cache, const CalibrationStats& stats,
                                  const ScoreWeights& weights, double tau);

inline bool decide(double q, double tau) { return q > tau; }

}  // namespace planeqc
