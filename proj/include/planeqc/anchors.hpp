#pragma once

/**
 * @file anchors.hpp
 * @brief Reference-anchor selection: variance-spectrum criterion plus
 *        random, k-medoids, and k-center-greedy baselines.
 */

#include <cstdint>
#include <string>
#include <vector>

#include "planeqc/errors.hpp"

namespace planeqc {

struct AnchorScore {
    size_t id = 0;
    std::vector<float> embedding;
    double sigma2 = 0.0;  // mean squared deviation from the plane mean
};

enum class AnchorStrategy { Variance, Random, KMedoids, KCenter };

const char* anchor_strategy_name(AnchorStrategy s);
AnchorStrategy anchor_strategy_from_name(const std::string& name);

// sigma2 per image within one plane: |e - mu|^2 / d.
std::vector<AnchorScore> anchor_scores(const std::vector<std::vector<float>>& embeddings);

// The k1 images with smallest sigma2 (exact subset argmin of the separable
// objective), ties broken by lowest id. k1 >= n returns every id.
std::vector<size_t> select_variance_spectrum(const std::vector<AnchorScore>& scores, size_t k1);

std::vector<size_t> select_random(size_t n, size_t k1, uint64_t seed);

// PAM with up to 50 swap iterations on Euclidean distances.
std::vector<size_t> select_kmedoids(const std::vector<std::vector<float>>& embeddings,
                                    size_t k1, uint64_t seed);

// Farthest-first traversal seeded by the point nearest the centroid.
std::vector<size_t> select_kcenter_greedy(const std::vector<std::vector<float>>& embeddings,
                                          size_t k1, uint64_t seed);

std::vector<size_t> select_anchors(AnchorStrategy strategy,
                                   const std::vector<std::vector<float>>& embeddings,
                                   size_t k1, uint64_t seed);

// Sum of distances from each point to its nearest medoid.
double kmedoids_objective(const std::vector<std::vector<float>>& embeddings,
                          const std::vector<size_t>& medoids);

}  // namespace planeqc
