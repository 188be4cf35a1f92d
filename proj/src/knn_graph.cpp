#include "corepick/knn_graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "corepick/error.hpp"
#include "corepick/histogram.hpp"
#include "corepick/numeric.hpp"
#include "corepick/parallel.hpp"

namespace corepick {

namespace {

double euclidean(std::span<const double> a, std::span<const double> b) {
    double sum = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double diff = a[j] - b[j];
        sum += diff * diff;
    }
    return std::sqrt(sum);
}

double gaussian_weight(double distance, double sigma) {
    const double z = distance / sigma;
    double w = std::exp(-0.5 * z * z);
    // exp underflows to 0 for extreme distance/sigma ratios; the invariant
    // w in (0, 1] must survive that.
    if (w <= 0.0) w = std::numeric_limits<double>::denorm_min();
    if (w > 1.0) w = 1.0;
    return w;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

} // namespace

MetricKind parse_metric(const std::string& text) {
    if (text == "l2") return MetricKind::Euclidean;
    if (text == "jsd") return MetricKind::Jsd;
    if (text == "jsd-sqrt") return MetricKind::JsdSqrt;
    fail("unknown metric \"", text, "\" (use l2, jsd or jsd-sqrt)");
}

const char* to_string(MetricKind metric) {
    switch (metric) {
    case MetricKind::Euclidean: return "l2";
    case MetricKind::Jsd: return "jsd";
    default: return "jsd-sqrt";
    }
}

Bandwidth parse_bandwidth(const std::string& text) {
    if (text == "median") return Bandwidth::median();
    const double sigma = parse_finite_double(text, "--sigma");
    if (sigma <= 0.0) fail("sigma must be positive, got ", text);
    return Bandwidth::fixed_sigma(sigma);
}

DirectedKnn pairwise_knn(const FeatureMatrix& points, MetricKind metric,
                         std::size_t k, int threads) {
    const std::size_t n = points.rows();
    if (n < 2) fail("K-NN graph needs at least 2 points, got ", n);
    if (k < 1 || k > n - 1) {
        fail("K=", k, " out of range [1, ", n - 1, "] for ", n, " points");
    }

    DirectedKnn result;
    result.n = n;
    result.k = k;
    result.metric = metric;
    result.neighbors.resize(n);

    parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
        std::vector<std::pair<double, std::size_t>> candidates;
        candidates.reserve(n - 1);
        for (std::size_t i = begin; i < end; ++i) {
            candidates.clear();
            const auto row = points.row(i);
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                double d = 0.0;
                switch (metric) {
                case MetricKind::Euclidean: d = euclidean(row, points.row(j)); break;
                case MetricKind::Jsd: d = jsd(row, points.row(j)); break;
                case MetricKind::JsdSqrt: d = jsd_distance(row, points.row(j)); break;
                }
                if (!std::isfinite(d)) {
                    fail("non-finite distance between points ", i, " and ", j);
                }
                candidates.emplace_back(d, j);
            }
            // (distance, index) pairs sort ties toward the lower index.
            std::partial_sort(candidates.begin(), candidates.begin() + k,
                              candidates.end());
            auto& out = result.neighbors[i];
            out.reserve(k);
            for (std::size_t r = 0; r < k; ++r) {
                out.emplace_back(candidates[r].second, candidates[r].first);
            }
        }
    });
    return result;
}

KnnGraph build_graph(const DirectedKnn& directed, const Bandwidth& bandwidth) {
    if (directed.n == 0) fail("cannot build a graph over 0 nodes");

    std::vector<UndirectedEdge> edges;
    edges.reserve(directed.n * directed.k);
    for (std::size_t i = 0; i < directed.n; ++i) {
        for (const auto& [j, d] : directed.neighbors[i]) {
            if (j == i) fail("self-loop in K-NN list of node ", i);
            if (j >= directed.n) fail("neighbor index ", j, " out of range");
            UndirectedEdge edge;
            edge.i = std::min(i, j);
            edge.j = std::max(i, j);
            edge.distance = d;
            edges.push_back(edge);
        }
    }
    std::sort(edges.begin(), edges.end(), [](const auto& a, const auto& b) {
        return a.i != b.i ? a.i < b.i : a.j < b.j;
    });
    edges.erase(std::unique(edges.begin(), edges.end(),
                            [](const auto& a, const auto& b) {
                                return a.i == b.i && a.j == b.j;
                            }),
                edges.end());

    double sigma = 0.0;
    if (bandwidth.fixed) {
        sigma = *bandwidth.fixed;
        if (!(sigma > 0.0) || !std::isfinite(sigma)) {
            fail("fixed sigma must be positive and finite, got ", sigma);
        }
    } else {
        std::vector<double> distances;
        distances.reserve(edges.size());
        for (const auto& edge : edges) distances.push_back(edge.distance);
        if (distances.empty()) fail("cannot take a median over 0 edges");
        std::sort(distances.begin(), distances.end());
        const std::size_t mid = distances.size() / 2;
        const double median = distances.size() % 2 == 1
                                  ? distances[mid]
                                  : 0.5 * (distances[mid - 1] + distances[mid]);
        if (distances.back() <= 0.0) {
            fail("all edge distances are zero; the median bandwidth is undefined "
                 "(pass a fixed sigma instead)");
        }
        sigma = median > 0.0 ? median : 1e-12;
    }

    for (auto& edge : edges) {
        edge.weight = gaussian_weight(edge.distance, sigma);
    }
    return graph_from_edges(directed.n, edges, directed.k, sigma, directed.metric);
}

KnnGraph edgeless_graph(std::size_t n) {
    KnnGraph graph;
    graph.n = n;
    graph.k = 0;
    graph.sigma = 0.0;
    graph.adjacency.resize(n);
    return graph;
}

KnnGraph graph_from_edges(std::size_t n, std::span<const UndirectedEdge> edges,
                          std::size_t k, double sigma, MetricKind metric) {
    KnnGraph graph;
    graph.n = n;
    graph.k = k;
    graph.sigma = sigma;
    graph.metric = metric;
    graph.adjacency.resize(n);

    for (const auto& edge : edges) {
        if (edge.i >= edge.j) {
            fail("undirected edge (", edge.i, ",", edge.j, ") must satisfy i < j");
        }
        if (edge.j >= n) {
            fail("edge (", edge.i, ",", edge.j, ") out of range for ", n, " nodes");
        }
        if (!(edge.distance >= 0.0) || !std::isfinite(edge.distance)) {
            fail("edge (", edge.i, ",", edge.j, ") has invalid distance");
        }
        if (!(edge.weight > 0.0) || edge.weight > 1.0) {
            fail("edge (", edge.i, ",", edge.j, ") weight ", edge.weight,
                 " outside (0, 1]");
        }
        graph.adjacency[edge.i].push_back(NeighborEdge{edge.j, edge.distance, edge.weight});
        graph.adjacency[edge.j].push_back(NeighborEdge{edge.i, edge.distance, edge.weight});
    }
    for (std::size_t i = 0; i < n; ++i) {
        auto& list = graph.adjacency[i];
        std::sort(list.begin(), list.end(),
                  [](const NeighborEdge& a, const NeighborEdge& b) {
                      return a.neighbor < b.neighbor;
                  });
        for (std::size_t e = 1; e < list.size(); ++e) {
            if (list[e].neighbor == list[e - 1].neighbor) {
                fail("duplicate edge between ", i, " and ", list[e].neighbor);
            }
        }
    }
    return graph;
}

std::size_t KnnGraph::undirected_edge_count() const {
    std::size_t total = 0;
    for (const auto& list : adjacency) total += list.size();
    return total / 2;
}

void write_graph_csv(const KnnGraph& graph, const std::filesystem::path& path,
                     const std::string& echo) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail("cannot open file for writing: ", path.string());
    if (!echo.empty()) out << "# " << echo << '\n';
    out << "# graph: n=" << graph.n << " k=" << graph.k
        << " sigma=" << format_double(graph.sigma)
        << " metric=" << to_string(graph.metric) << '\n';
    out << "i,j,distance,weight\n";
    for (std::size_t i = 0; i < graph.n; ++i) {
        for (const auto& edge : graph.adjacency[i]) {
            if (edge.neighbor <= i) continue;
            out << i << ',' << edge.neighbor << ','
                << format_double(edge.distance) << ','
                << format_double(edge.weight) << '\n';
        }
    }
    out.flush();
    if (!out) fail("write failed: ", path.string());
}

KnnGraph load_graph_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot open file: ", path.string());

    std::size_t n = 0;
    std::size_t k = 0;
    double sigma = 0.0;
    MetricKind metric = MetricKind::Euclidean;
    bool have_meta = false;

    std::vector<UndirectedEdge> edges;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            const std::string meta_prefix = "# graph: ";
            if (line.rfind(meta_prefix, 0) == 0) {
                std::size_t pos = meta_prefix.size();
                auto take = [&](const std::string& key) {
                    const std::size_t at = line.find(key, pos);
                    if (at == std::string::npos) {
                        fail(path.string(), ":", line_no, ": graph metadata missing ", key);
                    }
                    const std::size_t start = at + key.size();
                    const std::size_t stop = line.find(' ', start);
                    return line.substr(start, stop == std::string::npos ? stop : stop - start);
                };
                n = static_cast<std::size_t>(
                    parse_finite_double(take("n="), cat(path.string(), " metadata n")));
                k = static_cast<std::size_t>(
                    parse_finite_double(take("k="), cat(path.string(), " metadata k")));
                sigma = parse_finite_double(take("sigma="), cat(path.string(), " metadata sigma"));
                metric = parse_metric(take("metric="));
                have_meta = true;
            }
            continue;
        }
        if (!header_seen) {
            if (line != "i,j,distance,weight") {
                fail(path.string(), ":", line_no,
                     ": missing graph header \"i,j,distance,weight\"");
            }
            header_seen = true;
            continue;
        }
        const auto fields = split_csv_line(line);
        if (fields.size() != 4) {
            fail(path.string(), ":", line_no, ": expected 4 fields, got ", fields.size());
        }
        UndirectedEdge edge;
        edge.i = static_cast<std::size_t>(
            parse_finite_double(fields[0], cat(path.string(), ":", line_no, " column i")));
        edge.j = static_cast<std::size_t>(
            parse_finite_double(fields[1], cat(path.string(), ":", line_no, " column j")));
        edge.distance = parse_finite_double(fields[2], cat(path.string(), ":", line_no, " distance"));
        edge.weight = parse_finite_double(fields[3], cat(path.string(), ":", line_no, " weight"));
        edges.push_back(edge);
    }
    if (!have_meta) {
        fail(path.string(), ": missing \"# graph: n=... k=... sigma=... metric=...\" metadata line");
    }
    if (!header_seen) {
        fail(path.string(), ": missing graph header \"i,j,distance,weight\"");
    }
    return graph_from_edges(n, edges, k, sigma, metric);
}

} // namespace corepick
