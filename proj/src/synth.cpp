#include "corepick/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "corepick/error.hpp"
#include "corepick/knn_graph.hpp"
#include "corepick/numeric.hpp"
#include "corepick/rng.hpp"
#include "corepick/sampler.hpp"
#include "corepick/scores.hpp"

namespace corepick {

namespace {

SynthPolicyResult tally(const std::vector<std::size_t>& picks,
                        std::size_t clusters, std::size_t per_cluster) {
    SynthPolicyResult result;
    result.picks = picks;
    result.per_cluster_counts.assign(clusters, 0);
    for (std::size_t idx : picks) {
        ++result.per_cluster_counts[idx / per_cluster];
    }
    for (std::size_t count : result.per_cluster_counts) {
        if (count > 0) ++result.clusters_covered;
    }
    return result;
}

std::vector<std::size_t> entry_indices(const Selection& selection) {
    std::vector<std::size_t> indices;
    indices.reserve(selection.entries.size());
    for (const auto& entry : selection.entries) {
        indices.push_back(static_cast<std::size_t>(std::stoull(entry.id)));
    }
    return indices;
}

} // namespace

SynthReport run_synth(const SynthConfig& config) {
    if (config.clusters < 1) fail("synth needs at least 1 cluster");
    if (config.per_cluster < 1) fail("synth needs at least 1 point per cluster");
    const std::size_t n = config.clusters * config.per_cluster;
    if (config.select_count < 1 || config.select_count > n) {
        fail("synth select count ", config.select_count, " out of range [1, ", n, "]");
    }
    if (n < 2) fail("synth needs at least 2 points to build a graph");
    if (config.knn < 1 || config.knn > n - 1) {
        fail("synth K=", config.knn, " out of range [1, ", n - 1, "]");
    }
    if (!(config.sigma > 0.0)) fail("synth sigma must be positive");
    if (!(config.core_rho > 0.0)) fail("synth core_rho must be positive");
    if (config.cluster_std < 0.0) fail("synth cluster_std must be non-negative");
    if (config.hot_score < 0.0) fail("synth hot_score must be non-negative");

    SynthConfig resolved = config;
    if (resolved.hot_count == 0) {
        resolved.hot_count = std::min(resolved.per_cluster, resolved.select_count + 5);
    }
    if (resolved.hot_count > resolved.per_cluster) {
        fail("synth hot_count ", resolved.hot_count, " exceeds per_cluster ",
             resolved.per_cluster);
    }

    // Cluster-major generation: point i belongs to cluster i / per_cluster.
    Rng rng(resolved.seed);
    const double tau = 2.0 * 3.14159265358979323846;
    FeatureMatrix points(n, 2);
    std::vector<double> center_dist(n, 0.0);
    for (std::size_t c = 0; c < resolved.clusters; ++c) {
        const double angle = tau * static_cast<double>(c) /
                             static_cast<double>(resolved.clusters);
        const double cx = resolved.center_radius * std::cos(angle);
        const double cy = resolved.center_radius * std::sin(angle);
        for (std::size_t p = 0; p < resolved.per_cluster; ++p) {
            const std::size_t i = c * resolved.per_cluster + p;
            const double dx = resolved.cluster_std * rng.gaussian();
            const double dy = resolved.cluster_std * rng.gaussian();
            points.at(i, 0) = cx + dx;
            points.at(i, 1) = cy + dy;
            center_dist[i] = std::sqrt(dx * dx + dy * dy);
        }
    }

    // Baseline score: a sharp bump at each cluster's own center, so one pick
    // near a center suppresses that whole core. The hot boost goes to the
    // hot_count cluster-0 points closest to their center, which makes the
    // score-only top-m stay inside cluster 0 whenever hot_count >= m.
    std::vector<double> scores(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        scores[i] = std::exp(-(center_dist[i] * center_dist[i]) /
                             (2.0 * resolved.core_rho * resolved.core_rho));
    }
    std::vector<std::size_t> order(resolved.per_cluster);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return center_dist[a] < center_dist[b];
    });
    for (std::size_t r = 0; r < resolved.hot_count; ++r) {
        scores[order[r]] += resolved.hot_score;
    }

    const Ranking ranking = rank(scores, Order::Descending);
    const Selection score_only =
        top_m(ranking, scores, {}, resolved.select_count);

    const DirectedKnn directed =
        pairwise_knn(points, MetricKind::Euclidean, resolved.knn, resolved.threads);
    const KnnGraph graph =
        build_graph(directed, Bandwidth::fixed_sigma(resolved.sigma));
    const Selection with_graph =
        graph_select(graph, scores, {}, resolved.select_count, Order::Descending);

    SynthReport report;
    report.config = resolved;
    report.total_points = n;
    report.score_only = tally(entry_indices(score_only), resolved.clusters,
                              resolved.per_cluster);
    report.with_graph = tally(entry_indices(with_graph), resolved.clusters,
                              resolved.per_cluster);
    return report;
}

std::string SynthReport::to_text(const std::string& echo) const {
    std::ostringstream os;
    if (!echo.empty()) os << "# " << echo << '\n';
    os << "points=" << total_points
       << " clusters=" << config.clusters
       << " per_cluster=" << config.per_cluster
       << " select=" << config.select_count
       << " knn=" << config.knn
       << " seed=" << config.seed
       << " hot_count=" << config.hot_count
       << " hot_score=" << format_double(config.hot_score)
       << " cluster_std=" << format_double(config.cluster_std)
       << " center_radius=" << format_double(config.center_radius)
       << " core_rho=" << format_double(config.core_rho)
       << " sigma=" << format_double(config.sigma) << '\n';

    auto policy_line = [&](const char* name, const SynthPolicyResult& result) {
        os << name << ": clusters_covered=" << result.clusters_covered << '/'
           << config.clusters << " per_cluster=[";
        for (std::size_t c = 0; c < result.per_cluster_counts.size(); ++c) {
            if (c > 0) os << ',';
            os << result.per_cluster_counts[c];
        }
        os << "] picks=[";
        for (std::size_t p = 0; p < result.picks.size(); ++p) {
            if (p > 0) os << ',';
            os << result.picks[p];
        }
        os << "]\n";
    };
    policy_line("score_only", score_only);
    policy_line("with_graph", with_graph);
    return os.str();
}

} // namespace corepick
