#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "corepick/dataset.hpp"

namespace corepick {

// Desk-scale benchmark: a seeded 2-D Gaussian mixture whose high scores all
// sit in a compact core of cluster 0, plus a small center-peaked baseline
// score inside every cluster. Score-only selection is therefore pinned to
// cluster 0 by construction, while graph selection suppresses each core it
// touches and rotates across clusters.
struct SynthConfig {
    std::size_t clusters = 5;
    std::size_t per_cluster = 100;
    std::size_t select_count = 10;
    std::size_t knn = 10;
    std::uint64_t seed = 1;
    std::size_t hot_count = 0;   // 0 = auto: min(per_cluster, select_count + 5)
    double cluster_std = 1.0;
    double center_radius = 10.0; // cluster centers sit on this circle
    double core_rho = 0.25;      // decay radius of the baseline score bump
    double hot_score = 10.0;     // additive boost for the hot core
    double sigma = 2.0;          // fixed kernel bandwidth for the synth graph
    int threads = 0;
};

struct SynthPolicyResult {
    std::vector<std::size_t> picks;              // selected sample indices, pick order
    std::vector<std::size_t> per_cluster_counts; // picks per generator cluster
    std::size_t clusters_covered = 0;
};

struct SynthReport {
    SynthConfig config;
    std::size_t total_points = 0;
    SynthPolicyResult score_only;
    SynthPolicyResult with_graph;

    std::string to_text(const std::string& echo) const;
};

SynthReport run_synth(const SynthConfig& config);

} // namespace corepick
