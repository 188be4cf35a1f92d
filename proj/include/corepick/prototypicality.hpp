#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "corepick/dataset.hpp"

namespace corepick {

struct KMeansConfig {
    std::size_t k = 1;          // must satisfy 1 <= k <= n
    std::uint64_t seed = 0;
    std::size_t max_iter = 100;
    double tol = 1e-6;          // relative distortion improvement threshold
};

struct KMeansModel {
    std::size_t k = 0;
    std::size_t dim = 0;
    std::vector<double> centroids;          // row-major k x dim
    std::vector<std::size_t> assignments;   // per-sample cluster index
    double distortion = 0.0;                // mean squared distance to assigned centroid
    std::vector<double> distortion_history; // one entry per Lloyd iteration, non-increasing

    std::span<const double> centroid(std::size_t c) const {
        return std::span<const double>(centroids.data() + c * dim, dim);
    }
};

// Lloyd iterations from k-means++ seeding. Deterministic for fixed
// (features, config) regardless of thread count. Empty clusters are refilled
// with the farthest member of the largest cluster.
KMeansModel kmeans_fit(const FeatureMatrix& features, const KMeansConfig& config,
                       int threads = 0);

// Prototypicality score: Euclidean (not squared) distance from each sample to
// its nearest centroid.
std::vector<double> ps_score(const FeatureMatrix& features, const KMeansModel& model,
                             int threads = 0);

} // namespace corepick
