#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "corepick/dataset.hpp"

namespace corepick {

enum class MetricKind {
    Euclidean, // L2 over feature rows
    Jsd,       // Jensen-Shannon divergence over histogram rows
    JsdSqrt,   // sqrt(JSD), the metric-valid variant
};

MetricKind parse_metric(const std::string& text);
const char* to_string(MetricKind metric);

// Kernel bandwidth: median of retained edge distances, or a fixed value.
struct Bandwidth {
    std::optional<double> fixed; // nullopt = median policy

    static Bandwidth median() { return Bandwidth{std::nullopt}; }
    static Bandwidth fixed_sigma(double sigma) { return Bandwidth{sigma}; }
};

Bandwidth parse_bandwidth(const std::string& text); // "median" | float

struct DirectedKnn {
    std::size_t n = 0;
    std::size_t k = 0;
    MetricKind metric = MetricKind::Euclidean;
    // Per node: the k nearest (neighbor, distance), nearest first, distance
    // ties broken by ascending neighbor index.
    std::vector<std::vector<std::pair<std::size_t, double>>> neighbors;
};

// Exact brute-force top-K neighbor lists. Requires n >= 2 and 1 <= K <= n-1.
DirectedKnn pairwise_knn(const FeatureMatrix& points, MetricKind metric,
                         std::size_t k, int threads = 0);

struct NeighborEdge {
    std::size_t neighbor = 0;
    double distance = 0.0;
    double weight = 0.0; // exp(-d^2 / (2 sigma^2)), in (0, 1]
};

// Symmetric weighted K-NN graph. Adjacency holds both directions of every
// retained undirected edge with identical distance and weight.
struct KnnGraph {
    std::size_t n = 0;
    std::size_t k = 0;      // directed K used during construction (0 = edgeless)
    double sigma = 0.0;
    MetricKind metric = MetricKind::Euclidean;
    std::vector<std::vector<NeighborEdge>> adjacency; // sorted by neighbor index

    std::size_t undirected_edge_count() const;
};

// Symmetrizes by edge union and applies the Gaussian kernel. Median policy:
// sigma = median of retained undirected edge distances, floored at 1e-12 when
// the median is zero; all-zero distances are an error (use a fixed sigma).
KnnGraph build_graph(const DirectedKnn& directed, const Bandwidth& bandwidth);

// n isolated nodes; graph_select over it degenerates to pure ranking.
KnnGraph edgeless_graph(std::size_t n);

struct UndirectedEdge {
    std::size_t i = 0;
    std::size_t j = 0;
    double distance = 0.0;
    double weight = 0.0;
};

// Builds a graph from explicit undirected edges (fixtures, loaded dumps).
KnnGraph graph_from_edges(std::size_t n, std::span<const UndirectedEdge> edges,
                          std::size_t k, double sigma, MetricKind metric);

// CSV dump: one row per undirected edge (i < j), "i,j,distance,weight".
void write_graph_csv(const KnnGraph& graph, const std::filesystem::path& path,
                     const std::string& echo);
KnnGraph load_graph_csv(const std::filesystem::path& path);

} // namespace corepick
