#pragma once

/**
 * @file synth.hpp
 * @brief Procedural ultrasound-like corpus with graded deformations.
 *
 * Each plane gets a fixed archetype of 3-5 ellipse/crescent blobs; images of
 * that plane render the archetype with small jitter, multiplicative Rayleigh
 * speckle, and a 3x3 box blur. Reference quality is score = 1 - severity.
 */

#include <string>
#include <vector>

#include "planeqc/image.hpp"

namespace planeqc {

struct SplitSpec {
    size_t count = 0;
    float max_severity = 0.0f;     // severity ceiling for deformed members
    float deformed_fraction = 0.0f;
};

struct CorpusSpec {
    std::vector<std::string> plane_names{"plane0", "plane1"};
    size_t image_size = 128;
    SplitSpec anchors{10, 0.5f, 0.3f};
    SplitSpec train{50, 0.9f, 0.6f};
    SplitSpec query{20, 0.9f, 0.5f};

    void validate() const;
};

struct DatasetSplit {
    std::vector<std::string> plane_names;
    // indexed [plane][image]
    std::vector<std::vector<Image>> anchors, train, query;
    // corpus-relative paths, same indexing
    std::vector<std::vector<std::string>> anchor_paths, train_paths, query_paths;
    size_t k1 = 0, k2 = 0;

    size_t num_planes() const { return plane_names.size(); }
};

// Blob layout without speckle or blur; fixed per plane id.
Image render_canonical(int plane, size_t size);

// One corpus member: jittered layout, speckle, blur.
Image render_plane_image(int plane, size_t size, uint64_t seed);

// Pure function of (spec, seed).
DatasetSplit gen_synthetic_corpus(const CorpusSpec& spec, uint64_t seed);

// Directory layout <root>/<plane>/<split>/img_%05d.pgm plus manifest.csv with
// header path,plane,split,severity,score.
void write_corpus(const DatasetSplit& split, const std::string& root);
DatasetSplit load_corpus(const std::string& root);

}  // namespace planeqc
