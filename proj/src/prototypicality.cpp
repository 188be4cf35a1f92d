#include "corepick/prototypicality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "corepick/error.hpp"
#include "corepick/parallel.hpp"
#include "corepick/rng.hpp"

namespace corepick {

namespace {

double dist2(std::span<const double> a, std::span<const double> b) {
    double sum = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double diff = a[j] - b[j];
        sum += diff * diff;
    }
    return sum;
}

std::span<const double> centroid_row(const std::vector<double>& centroids,
                                     std::size_t dim, std::size_t c) {
    return std::span<const double>(centroids.data() + c * dim, dim);
}

// k-means++: first centroid uniform, each next one drawn with probability
// proportional to the squared distance to the nearest already-chosen one.
std::vector<double> seed_centroids(const FeatureMatrix& features,
                                   const KMeansConfig& config, Rng& rng,
                                   int threads) {
    const std::size_t n = features.rows();
    const std::size_t dim = features.cols();
    const std::size_t k = config.k;

    std::vector<double> centroids;
    centroids.reserve(k * dim);
    std::vector<char> chosen(n, 0);
    std::vector<double> d2(n, 0.0);

    auto append_centroid = [&](std::size_t idx) {
        const auto row = features.row(idx);
        centroids.insert(centroids.end(), row.begin(), row.end());
        chosen[idx] = 1;
    };

    const std::size_t first = rng.index(n);
    append_centroid(first);
    parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            d2[i] = dist2(features.row(i), features.row(first));
        }
    });

    for (std::size_t c = 1; c < k; ++c) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) total += d2[i];

        std::size_t pick = n;
        if (total > 0.0) {
            const double r = rng.uniform01() * total;
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (d2[i] <= 0.0) continue;
                acc += d2[i];
                if (acc > r) {
                    pick = i;
                    break;
                }
                pick = i; // keeps the last positive-mass point as fallback
            }
        } else {
            // Every point coincides with a chosen centroid; any unchosen
            // point works (duplicates included).
            for (std::size_t i = 0; i < n; ++i) {
                if (!chosen[i]) {
                    pick = i;
                    break;
                }
            }
        }
        if (pick == n) fail("k-means++ seeding failed to pick centroid ", c);

        append_centroid(pick);
        parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i) {
                const double d = dist2(features.row(i), features.row(pick));
                if (d < d2[i]) d2[i] = d;
            }
        });
    }
    return centroids;
}

void assign_nearest(const FeatureMatrix& features, const std::vector<double>& centroids,
                    std::size_t k, int threads, std::vector<std::size_t>& assignments,
                    std::vector<double>& d2) {
    const std::size_t dim = features.cols();
    parallel_for(features.rows(), threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const auto row = features.row(i);
            std::size_t best = 0;
            double best_d = dist2(row, centroid_row(centroids, dim, 0));
            for (std::size_t c = 1; c < k; ++c) {
                const double d = dist2(row, centroid_row(centroids, dim, c));
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            assignments[i] = best;
            d2[i] = best_d;
        }
    });
}

} // namespace

KMeansModel kmeans_fit(const FeatureMatrix& features, const KMeansConfig& config,
                       int threads) {
    const std::size_t n = features.rows();
    const std::size_t dim = features.cols();
    if (n == 0) fail("k-means needs at least one sample");
    if (dim == 0) fail("k-means needs at least one feature dimension");
    if (config.k < 1) fail("k-means needs k >= 1");
    if (config.k > n) fail("k-means k=", config.k, " exceeds sample count ", n);
    if (config.max_iter < 1) fail("k-means needs max_iter >= 1");
    if (config.tol < 0.0) fail("k-means tol must be non-negative");
    const std::size_t k = config.k;

    Rng rng(config.seed);
    std::vector<double> centroids = seed_centroids(features, config, rng, threads);

    std::vector<std::size_t> assignments(n, 0);
    std::vector<std::size_t> prev_assignments;
    std::vector<double> d2(n, 0.0);
    std::vector<double> history;
    history.reserve(config.max_iter);

    for (std::size_t iter = 0; iter < config.max_iter; ++iter) {
        assign_nearest(features, centroids, k, threads, assignments, d2);

        // Empty clusters: snap their centroid onto the farthest member of
        // the largest cluster and reassign. Adding a centroid on top of a
        // data point can only lower per-point minima, so the recorded
        // distortion stays non-increasing through repairs.
        for (std::size_t round = 0; round < k; ++round) {
            std::vector<std::size_t> sizes(k, 0);
            for (std::size_t i = 0; i < n; ++i) ++sizes[assignments[i]];

            std::size_t empty = k;
            for (std::size_t c = 0; c < k; ++c) {
                if (sizes[c] == 0) {
                    empty = c;
                    break;
                }
            }
            if (empty == k) break;

            std::size_t largest = 0;
            for (std::size_t c = 1; c < k; ++c) {
                if (sizes[c] > sizes[largest]) largest = c;
            }
            if (sizes[largest] <= 1) break;

            std::size_t farthest = n;
            double far_d = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (assignments[i] == largest && d2[i] > far_d) {
                    far_d = d2[i];
                    farthest = i;
                }
            }
            if (farthest == n || far_d <= 0.0) break;

            const auto row = features.row(farthest);
            std::copy(row.begin(), row.end(), centroids.begin() + empty * dim);
            assign_nearest(features, centroids, k, threads, assignments, d2);
            assignments[farthest] = empty;
            d2[farthest] = 0.0;
        }

        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i) sum += d2[i];
        const double distortion = sum / static_cast<double>(n);
        if (!history.empty() &&
            distortion > history.back() + 1e-9 * std::max(1.0, history.back())) {
            fail("internal: k-means distortion increased from ", history.back(),
                 " to ", distortion);
        }
        history.push_back(distortion);

        const bool stable = !prev_assignments.empty() && assignments == prev_assignments;
        bool converged = false;
        if (history.size() >= 2) {
            const double prev = history[history.size() - 2];
            const double improvement = prev - distortion;
            converged = prev <= 0.0 || improvement <= config.tol * prev;
        }
        if (stable || converged || iter + 1 == config.max_iter) break;
        prev_assignments = assignments;

        std::vector<double> next(k * dim, 0.0);
        std::vector<std::size_t> sizes(k, 0);
        for (std::size_t i = 0; i < n; ++i) {
            const auto row = features.row(i);
            double* target = next.data() + assignments[i] * dim;
            for (std::size_t j = 0; j < dim; ++j) target[j] += row[j];
            ++sizes[assignments[i]];
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (sizes[c] == 0) {
                // Degenerate repair bail-out left it empty; keep the old spot.
                std::copy(centroids.begin() + c * dim, centroids.begin() + (c + 1) * dim,
                          next.begin() + c * dim);
                continue;
            }
            for (std::size_t j = 0; j < dim; ++j) {
                next[c * dim + j] /= static_cast<double>(sizes[c]);
            }
        }
        centroids = std::move(next);
    }

    KMeansModel model;
    model.k = k;
    model.dim = dim;
    model.centroids = std::move(centroids);
    model.assignments = std::move(assignments);
    model.distortion = history.back();
    model.distortion_history = std::move(history);
    return model;
}

std::vector<double> ps_score(const FeatureMatrix& features, const KMeansModel& model,
                             int threads) {
    if (model.k == 0) fail("ps_score needs a fitted model");
    if (features.cols() != model.dim) {
        fail("ps_score: feature dimension ", features.cols(),
             " does not match centroid dimension ", model.dim);
    }

    std::vector<double> scores(features.rows(), 0.0);
    parallel_for(features.rows(), threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const auto row = features.row(i);
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < model.k; ++c) {
                const double d = dist2(row, model.centroid(c));
                if (d < best) best = d;
            }
            scores[i] = std::sqrt(best);
        }
    });
    return scores;
}

} // namespace corepick
