#pragma once

#include <span>
#include <string>
#include <vector>

#include "corepick/dataset.hpp"
#include "corepick/knn_graph.hpp"
#include "corepick/scores.hpp"

namespace corepick {

// Greedy diversity-aware selection via reverse message passing.
//
// Descending: m times, pick the unselected node with the highest working
// score (ties: higher pre-update score, then lower index); every unselected
// neighbor j of the pick i is suppressed with s_j *= (1 - w_ij), so close
// neighbors lose more than distant ones.
//
// Ascending: the working scores are reflected (s' = max(s) - s) and the same
// descending loop runs, which selects lowest-original-score nodes and
// up-weights their neighbors' pick priority. original_score in the output is
// always the raw input score; final_score is the working score at the moment
// of selection (reflected units in ascending mode).
//
// Descending mode requires non-negative scores so the multiplicative rule
// keeps working scores non-negative.
Selection graph_select(const KnnGraph& graph, std::span<const double> scores,
                       std::span<const std::string> ids, std::size_t m,
                       Order order);

struct CoverageReport {
    std::size_t selected = 0;
    std::size_t pair_count = 0;        // reachable selected pairs
    std::size_t unreachable_pairs = 0; // selected pairs with no connecting path
    double mean_pairwise_distance = 0.0; // over reachable pairs (shortest-path)
    double min_pairwise_distance = 0.0;  // over reachable pairs
    double one_hop_coverage = 0.0;       // fraction of nodes selected or adjacent
};

// Diversity diagnostics for a selection. Pairwise distances are shortest-path
// distances over the graph's edge distances (the only distances the graph
// itself defines between non-adjacent nodes).
CoverageReport coverage_stats(const KnnGraph& graph,
                              std::span<const std::size_t> selected);

} // namespace corepick
