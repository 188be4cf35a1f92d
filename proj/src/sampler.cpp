#include "corepick/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "corepick/error.hpp"

namespace corepick {

Selection graph_select(const KnnGraph& graph, std::span<const double> scores,
                       std::span<const std::string> ids, std::size_t m,
                       Order order) {
    const std::size_t n = graph.n;
    if (scores.size() != n) {
        fail("graph_select: ", scores.size(), " scores for a graph of ", n, " nodes");
    }
    if (!ids.empty() && ids.size() != n) {
        fail("graph_select: ", ids.size(), " ids for a graph of ", n, " nodes");
    }
    if (m < 1 || m > n) {
        fail("graph_select: m=", m, " out of range [1, ", n, "]");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(scores[i])) {
            if (!ids.empty()) fail("graph_select: non-finite score for sample \"", ids[i], "\"");
            fail("graph_select: non-finite score at index ", i);
        }
    }

    // Ascending mode reflects the scores and runs the same descending loop:
    // the lowest-scored node becomes the argmax, and suppressing its
    // neighbors' reflected scores is exactly the up-weighting of their
    // originals.
    std::vector<double> working(scores.begin(), scores.end());
    if (order == Order::Ascending) {
        const double top = *std::max_element(working.begin(), working.end());
        for (double& s : working) s = top - s;
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            if (working[i] < 0.0) {
                if (!ids.empty()) {
                    fail("graph_select: descending mode requires non-negative scores; sample \"",
                         ids[i], "\" has ", working[i]);
                }
                fail("graph_select: descending mode requires non-negative scores; index ",
                     i, " has ", working[i]);
            }
        }
    }
    const std::vector<double> initial = working;

    std::vector<char> selected(n, 0);
    Selection selection;
    selection.entries.reserve(m);

    for (std::size_t step = 0; step < m; ++step) {
        std::size_t best = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (selected[i]) continue;
            if (best == n || working[i] > working[best] ||
                (working[i] == working[best] && initial[i] > initial[best])) {
                best = i;
            }
        }

        selected[best] = 1;
        SelectionEntry entry;
        entry.id = ids.empty() ? std::to_string(best) : ids[best];
        entry.original_score = scores[best];
        entry.final_score = working[best];
        selection.entries.push_back(std::move(entry));

        for (const auto& edge : graph.adjacency[best]) {
            if (!selected[edge.neighbor]) {
                working[edge.neighbor] *= 1.0 - edge.weight;
            }
        }
    }
    return selection;
}

namespace {

// Single-source shortest paths over edge distances (binary heap, lazy pops).
std::vector<double> dijkstra(const KnnGraph& graph, std::size_t source) {
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(graph.n, inf);
    dist[source] = 0.0;

    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
    heap.emplace(0.0, source);
    while (!heap.empty()) {
        const auto [d, node] = heap.top();
        heap.pop();
        if (d > dist[node]) continue;
        for (const auto& edge : graph.adjacency[node]) {
            const double candidate = d + edge.distance;
            if (candidate < dist[edge.neighbor]) {
                dist[edge.neighbor] = candidate;
                heap.emplace(candidate, edge.neighbor);
            }
        }
    }
    return dist;
}

} // namespace

CoverageReport coverage_stats(const KnnGraph& graph,
                              std::span<const std::size_t> selected) {
    if (selected.empty()) fail("coverage_stats: empty selection");
    std::vector<char> is_selected(graph.n, 0);
    for (std::size_t idx : selected) {
        if (idx >= graph.n) {
            fail("coverage_stats: selected index ", idx, " out of range for ",
                 graph.n, " nodes");
        }
        if (is_selected[idx]) fail("coverage_stats: duplicate selected index ", idx);
        is_selected[idx] = 1;
    }

    CoverageReport report;
    report.selected = selected.size();

    std::vector<char> covered = is_selected;
    for (std::size_t idx : selected) {
        for (const auto& edge : graph.adjacency[idx]) {
            covered[edge.neighbor] = 1;
        }
    }
    std::size_t covered_count = 0;
    for (char c : covered) covered_count += c;
    report.one_hop_coverage =
        graph.n == 0 ? 0.0
                     : static_cast<double>(covered_count) / static_cast<double>(graph.n);

    double sum = 0.0;
    double min_d = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < selected.size(); ++a) {
        const auto dist = dijkstra(graph, selected[a]);
        for (std::size_t b = a + 1; b < selected.size(); ++b) {
            const double d = dist[selected[b]];
            if (std::isinf(d)) {
                ++report.unreachable_pairs;
                continue;
            }
            ++report.pair_count;
            sum += d;
            if (d < min_d) min_d = d;
        }
    }
    if (report.pair_count > 0) {
        report.mean_pairwise_distance = sum / static_cast<double>(report.pair_count);
        report.min_pairwise_distance = min_d;
    }
    return report;
}

} // namespace corepick
