#pragma once

/**
 * @file sweep.hpp
 * @brief Deformation-severity sweep: score response across graded rigid and
 *        non-rigid deformations.
 */

#include <string>
#include <vector>

#include "planeqc/scoring.hpp"

namespace planeqc {

struct SweepRow {
    std::string image;
    DeformKind kind = DeformKind::Rigid;
    float severity = 0.0f;
    double q = 0.0;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    // SRCC(severity, Q) per kind; only filled when >= 2 distinct severities
    double srcc_rigid = 0.0, srcc_nonrigid = 0.0;
    bool has_correlations = false;
};

// Bases carry their plane ids; every (base, kind, level) cell is deformed,
// scored, and recorded.
SweepResult severity_sweep(Model<float>& model, const AnchorCache& cache,
                           const CalibrationStats& stats,
                           const std::vector<Image>& bases,
                           const std::vector<std::string>& base_names,
                           const std::vector<DeformKind>& kinds,
                           const std::vector<float>& levels, const ScoreWeights& weights,
                           double tau, uint64_t seed, int threads = 1);

void write_sweep_csv(const SweepResult& result, const std::string& path);

}  // namespace planeqc
