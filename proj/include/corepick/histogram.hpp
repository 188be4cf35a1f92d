#pragma once

#include <optional>
#include <span>
#include <vector>

#include "corepick/dataset.hpp"

namespace corepick {

// Normalized distribution of ground-truth class labels over one mask.
struct LabelHistogram {
    std::vector<double> probs;        // sums to 1 when counted_pixels > 0
    std::size_t counted_pixels = 0;   // pixels remaining after ignore filtering

    std::size_t num_classes() const { return probs.size(); }
};

// probs[c] = count(c) / counted_pixels, ignore_index pixels excluded.
// Labels >= num_classes (other than the ignored one) are an error naming the
// label and pixel offset; an all-ignored mask is an error too.
LabelHistogram histogram(const MaskBuffer& mask, std::size_t num_classes,
                         std::optional<int> ignore_index);

// Jensen-Shannon divergence in nats: 0.5*KL(p||m) + 0.5*KL(q||m) with
// m = (p+q)/2 and 0*log(0/...) = 0. Symmetric by construction; result
// clamped to [0, ln 2] to keep the bound exact under rounding.
double jsd(std::span<const double> p, std::span<const double> q);
double jsd(const LabelHistogram& p, const LabelHistogram& q);

// sqrt(jsd); satisfies the triangle inequality, available as the alternate
// graph distance.
double jsd_distance(std::span<const double> p, std::span<const double> q);

// One histogram row per manifest record (mask required for every record).
FeatureMatrix histogram_matrix(const DatasetManifest& manifest,
                               std::size_t num_classes,
                               std::optional<int> ignore_index,
                               int threads = 0);

} // namespace corepick
