#pragma once

/**
 * @file trainer.hpp
 * @brief Sequential per-plane training of the aligner and subspace experts.
 */

#include <functional>
#include <string>
#include <vector>

#include "planeqc/image.hpp"
#include "planeqc/model.hpp"
#include "planeqc/synth.hpp"

namespace planeqc {

struct TrainConfig {
    double lr = 1e-4;
    size_t epochs_per_plane = 30;
    size_t batch_size = 4;
    size_t steps_per_epoch = 8;
    uint64_t seed = 7;
    double lambda = 0.5;
    bool orth_all_planes = false;  // let L_orth also step non-current experts
    AugmentConfig augment;
    size_t checkpoint_every = 0;  // epochs; 0 checkpoints only at the end
    std::string checkpoint_path;  // empty disables checkpoint files
    std::function<void(size_t epoch, size_t plane)> epoch_hook;  // after each epoch
};

struct EpochLog {
    size_t epoch = 0;  // global epoch counter
    size_t plane = 0;
    double sim = 0, ncc = 0, smooth = 0, orth = 0, total = 0;
};

struct TrainResult {
    std::vector<EpochLog> log;
};

void write_train_log(const std::vector<EpochLog>& log, const std::string& path);

// Plane blocks run in ascending plane order. Each block snapshots the
// plane's experts, optimizes the localisation nets and the plane experts
// with Adam, applies the masked projected rule to the general expert, and
// commits the task vector, conflict mask, and knowledge row at block end.
TrainResult train(Model<float>& model, const DatasetSplit& data,
                  const std::vector<std::vector<size_t>>& anchor_ids, const TrainConfig& cfg);

}  // namespace planeqc
