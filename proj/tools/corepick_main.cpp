#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <CLI11.hpp>

#include "corepick/bpp.hpp"
#include "corepick/dataset.hpp"
#include "corepick/error.hpp"
#include "corepick/histogram.hpp"
#include "corepick/knn_graph.hpp"
#include "corepick/numeric.hpp"
#include "corepick/prototypicality.hpp"
#include "corepick/sampler.hpp"
#include "corepick/scores.hpp"
#include "corepick/synth.hpp"

namespace {

using namespace corepick;

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail("cannot open file for writing: ", path.string());
    out << text;
    out.flush();
    if (!out) fail("write failed: ", path.string());
}

ChromaSubsampling parse_subsampling(const std::string& text) {
    if (text == "none") return ChromaSubsampling::None;
    if (text == "420") return ChromaSubsampling::S420;
    fail("unknown subsampling \"", text, "\" (use none or 420)");
}

std::optional<int> resolve_ignore_index(int ignore_index) {
    if (ignore_index < 0) return std::nullopt;
    return ignore_index;
}

// --- score ---

struct ScoreArgs {
    std::string manifest;
    std::string which;
    std::string out;
    int quality = 100;
    std::string subsampling = "none";
    bool stored = false;
    std::string features;
    std::size_t k = 0;
    std::uint64_t seed = 0;
    std::size_t max_iter = 100;
    double tol = 1e-6;
    std::string scores;
    int threads = 0;
};

int cmd_score(const ScoreArgs& args) {
    const DatasetManifest manifest = load_manifest(args.manifest);
    const std::vector<std::string> ids = manifest.ids();

    ScoreTable table = std::filesystem::exists(args.out)
                           ? load_score_table(args.out, ids)
                           : ScoreTable(ids);

    if (args.which == "bpp") {
        BppConfig config;
        config.jpeg_quality = args.quality;
        config.subsampling = parse_subsampling(args.subsampling);
        config.use_stored_size = args.stored;
        const std::string echo =
            cat("corepick score --manifest ", args.manifest, " --which bpp --quality ",
                args.quality, " --subsampling ", args.subsampling,
                args.stored ? " --stored" : "", " --out ", args.out);
        table.set_column("bpp", score_dataset_bpp(manifest, config, args.threads), echo);
        std::cout << "wrote " << args.out << " (bpp, " << ids.size() << " samples)\n";
    } else if (args.which == "ps") {
        if (args.features.empty()) fail("ps requires --features");
        if (args.k == 0) fail("ps requires --k (cluster count >= 1)");
        const FeatureMatrix features = load_features(args.features, ids);
        KMeansConfig config;
        config.k = args.k;
        config.seed = args.seed;
        config.max_iter = args.max_iter;
        config.tol = args.tol;
        const KMeansModel model = kmeans_fit(features, config, args.threads);
        const std::string echo =
            cat("corepick score --manifest ", args.manifest, " --which ps --features ",
                args.features, " --k ", args.k, " --seed ", args.seed, " --max-iter ",
                args.max_iter, " --tol ", format_double(args.tol), " --out ", args.out);
        table.set_column("ps", ps_score(features, model, args.threads), echo);
        std::cout << "wrote " << args.out << " (ps, " << ids.size() << " samples, "
                  << model.distortion_history.size() << " iterations)\n";
    } else if (args.which == "cpx") {
        if (!table.has_column("nll")) {
            fail("cpx requires nll: merge an external nll column first (--which external)");
        }
        if (!table.has_column("bpp")) {
            fail("cpx requires bpp: compute it first (--which bpp)");
        }
        const std::string echo = cat("corepick score --manifest ", args.manifest,
                                     " --which cpx --out ", args.out);
        table.set_column("cpx", cpx_column(table.column("nll"), table.column("bpp")), echo);
        std::cout << "wrote " << args.out << " (cpx, " << ids.size() << " samples)\n";
    } else if (args.which == "external") {
        if (args.scores.empty()) fail("external merge requires --scores");
        const ScoreTable external = load_score_table(args.scores, ids);
        const std::string echo =
            cat("corepick score --manifest ", args.manifest, " --which external --scores ",
                args.scores, " --out ", args.out);
        for (const auto& column : external.columns()) {
            table.set_column(column.name, column.values, echo);
        }
        std::cout << "wrote " << args.out << " (" << external.columns().size()
                  << " external columns, " << ids.size() << " samples)\n";
    } else {
        fail("unknown score \"", args.which, "\" (use bpp, ps, cpx or external)");
    }

    write_score_table(table, args.out);
    return 0;
}

// --- graph ---

struct GraphArgs {
    std::string manifest;
    std::string kind;
    std::string out;
    std::string features;
    std::size_t knn = 0;
    std::string sigma = "median";
    std::size_t num_classes = 0;
    int ignore_index = 255;
    bool jsd_sqrt = false;
    int threads = 0;
};

KnnGraph build_cli_graph(const DatasetManifest& manifest, const GraphArgs& args) {
    const Bandwidth bandwidth = parse_bandwidth(args.sigma);
    if (args.kind == "features") {
        if (args.features.empty()) fail("--graph features requires --features");
        const FeatureMatrix features = load_features(args.features, manifest.ids());
        return build_graph(
            pairwise_knn(features, MetricKind::Euclidean, args.knn, args.threads),
            bandwidth);
    }
    if (args.kind == "histogram") {
        if (args.num_classes == 0) fail("--graph histogram requires --num-classes");
        const FeatureMatrix histograms = histogram_matrix(
            manifest, args.num_classes, resolve_ignore_index(args.ignore_index),
            args.threads);
        const MetricKind metric = args.jsd_sqrt ? MetricKind::JsdSqrt : MetricKind::Jsd;
        return build_graph(pairwise_knn(histograms, metric, args.knn, args.threads),
                           bandwidth);
    }
    fail("unknown graph kind \"", args.kind, "\" (use features or histogram)");
}

std::string graph_echo(const GraphArgs& args, const char* subcommand_name,
                       const std::string& extra) {
    std::string echo = cat("corepick ", subcommand_name, " --manifest ", args.manifest,
                           " --graph ", args.kind);
    if (args.kind == "features") {
        echo += cat(" --features ", args.features);
    } else if (args.kind == "histogram") {
        echo += cat(" --num-classes ", args.num_classes, " --ignore-index ",
                    args.ignore_index);
        if (args.jsd_sqrt) echo += " --jsd-sqrt";
    }
    echo += cat(" --knn ", args.knn, " --sigma ", args.sigma, extra);
    return echo;
}

int cmd_graph(const GraphArgs& args) {
    const DatasetManifest manifest = load_manifest(args.manifest);
    const KnnGraph graph = build_cli_graph(manifest, args);
    write_graph_csv(graph, args.out, graph_echo(args, "graph", cat(" --out ", args.out)));
    std::cout << "wrote " << args.out << " (" << graph.n << " nodes, "
              << graph.undirected_edge_count() << " edges, sigma="
              << format_double(graph.sigma) << ")\n";
    return 0;
}

// --- select ---

struct SelectArgs {
    std::string manifest;
    std::string scores;
    std::string score;
    std::string order;
    std::string out;
    GraphArgs graph;
    std::string graph_file;
    std::size_t count = 0;
    double fraction = 0.0;
    bool count_given = false;
    bool fraction_given = false;
};

int cmd_select(const SelectArgs& args) {
    const DatasetManifest manifest = load_manifest(args.manifest);
    const std::vector<std::string> ids = manifest.ids();
    const std::size_t n = ids.size();

    const ScoreTable table = load_score_table(args.scores, ids);
    if (!table.has_column(args.score)) {
        fail("score column \"", args.score, "\" not found in ", args.scores);
    }
    const std::vector<double>& values = table.column(args.score);
    const Order order = parse_order(args.order);

    if (args.count_given == args.fraction_given) {
        fail("exactly one of --count and --fraction is required");
    }
    std::size_t m = args.count;
    if (args.fraction_given) {
        if (!(args.fraction > 0.0) || args.fraction > 1.0) {
            fail("--fraction must be in (0, 1], got ", format_double(args.fraction));
        }
        m = static_cast<std::size_t>(args.fraction * static_cast<double>(n) + 0.5);
        if (m < 1) m = 1;
        if (m > n) m = n;
    }

    std::string echo = cat("corepick select --manifest ", args.manifest, " --scores ",
                           args.scores, " --score ", args.score, " --order ", args.order,
                           " --graph ", args.graph.kind);
    Selection selection;
    if (args.graph.kind == "none") {
        const Ranking ranking = rank(values, order, ids, args.score);
        selection = top_m(ranking, values, ids, m);
    } else {
        KnnGraph graph;
        if (args.graph.kind == "file") {
            if (args.graph_file.empty()) fail("--graph file requires --graph-file");
            graph = load_graph_csv(args.graph_file);
            if (graph.n != n) {
                fail("graph file ", args.graph_file, " has ", graph.n,
                     " nodes but the manifest has ", n, " samples");
            }
            echo += cat(" --graph-file ", args.graph_file);
        } else {
            graph = build_cli_graph(manifest, args.graph);
            if (args.graph.kind == "features") {
                echo += cat(" --features ", args.graph.features);
            } else {
                echo += cat(" --num-classes ", args.graph.num_classes,
                            " --ignore-index ", args.graph.ignore_index);
                if (args.graph.jsd_sqrt) echo += " --jsd-sqrt";
            }
            echo += cat(" --knn ", args.graph.knn, " --sigma ", args.graph.sigma);
        }
        selection = graph_select(graph, values, ids, m, order);
    }
    echo += cat(" --count ", m, " --out ", args.out);
    selection.params_echo = echo;
    write_selection(selection, args.out);
    std::cout << "wrote " << args.out << " (" << selection.entries.size() << " of "
              << n << " samples, " << args.score << " " << args.order << ")\n";
    return 0;
}

// --- stats ---

struct StatsArgs {
    std::string manifest;
    std::string scores;
    std::string score;
    std::string selection;
    std::string graph_file;
    std::string out;
};

int cmd_stats(const StatsArgs& args) {
    std::string text;
    if (!args.selection.empty()) {
        if (args.graph_file.empty()) fail("coverage stats require --graph-file");
        if (args.manifest.empty()) fail("coverage stats require --manifest");
        const DatasetManifest manifest = load_manifest(args.manifest);
        const KnnGraph graph = load_graph_csv(args.graph_file);
        if (graph.n != manifest.size()) {
            fail("graph file ", args.graph_file, " has ", graph.n,
                 " nodes but the manifest has ", manifest.size(), " samples");
        }
        const Selection selection = load_selection(args.selection);

        std::unordered_map<std::string, std::size_t> index_of;
        for (std::size_t i = 0; i < manifest.size(); ++i) {
            index_of[manifest.records[i].id] = i;
        }
        std::vector<std::size_t> selected;
        selected.reserve(selection.entries.size());
        for (const auto& entry : selection.entries) {
            auto it = index_of.find(entry.id);
            if (it == index_of.end()) {
                fail("selection id \"", entry.id, "\" not present in the manifest");
            }
            selected.push_back(it->second);
        }

        const CoverageReport report = coverage_stats(graph, selected);
        std::string echo = cat("corepick stats --manifest ", args.manifest,
                               " --selection ", args.selection, " --graph-file ",
                               args.graph_file);
        if (!args.out.empty()) echo += cat(" --out ", args.out);
        text = cat("# ", echo, "\n",
                   "selected=", report.selected, " pairs=", report.pair_count,
                   " unreachable_pairs=", report.unreachable_pairs, "\n",
                   "mean_pairwise_distance=", format_double(report.mean_pairwise_distance), "\n",
                   "min_pairwise_distance=", format_double(report.min_pairwise_distance), "\n",
                   "one_hop_coverage=", format_double(report.one_hop_coverage), "\n");
    } else {
        if (args.scores.empty()) fail("stats needs --scores (or --selection with --graph-file)");
        if (args.score.empty()) fail("stats needs --score");
        const ScoreTable table = load_score_table(args.scores);
        if (!table.has_column(args.score)) {
            fail("score column \"", args.score, "\" not found in ", args.scores);
        }
        const std::vector<double>& values = table.column(args.score);
        const ScoreSummary summary = summarize_scores(values);
        const std::vector<std::size_t> outliers = low_score_outliers(values);

        std::string echo = cat("corepick stats --scores ", args.scores, " --score ",
                               args.score);
        if (!args.out.empty()) echo += cat(" --out ", args.out);
        text = cat("# ", echo, "\n",
                   "column=", args.score, " count=", summary.count,
                   " mean=", format_double(summary.mean),
                   " stddev=", format_double(summary.stddev),
                   " min=", format_double(summary.min),
                   " q1=", format_double(summary.q1),
                   " median=", format_double(summary.median),
                   " q3=", format_double(summary.q3),
                   " max=", format_double(summary.max), "\n",
                   "low_outliers=", outliers.size(), "\n");
        for (std::size_t idx : outliers) {
            text += cat("outlier: ", table.ids()[idx], " ", format_double(values[idx]), "\n");
        }
    }

    std::cout << text;
    if (!args.out.empty()) write_text_file(args.out, text);
    return 0;
}

// --- synth ---

struct SynthArgs {
    SynthConfig config;
    std::string out;
};

int cmd_synth(const SynthArgs& args) {
    const SynthReport report = run_synth(args.config);
    std::string echo = cat("corepick synth --clusters ", report.config.clusters,
                           " --per-cluster ", report.config.per_cluster,
                           " --count ", report.config.select_count,
                           " --knn ", report.config.knn,
                           " --seed ", report.config.seed,
                           " --hot-count ", report.config.hot_count,
                           " --hot-score ", format_double(report.config.hot_score),
                           " --cluster-std ", format_double(report.config.cluster_std),
                           " --center-radius ", format_double(report.config.center_radius),
                           " --core-rho ", format_double(report.config.core_rho),
                           " --sigma ", format_double(report.config.sigma));
    if (!args.out.empty()) echo += cat(" --out ", args.out);

    const std::string text = report.to_text(echo);
    std::cout << text;
    if (!args.out.empty()) write_text_file(args.out, text);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"coreset scoring, K-NN graphs and diversity-aware selection"};
    app.require_subcommand(1);

    ScoreArgs score_args;
    CLI::App* score = app.add_subcommand("score", "compute or merge a score column");
    score->add_option("--manifest", score_args.manifest)->required();
    score->add_option("--which", score_args.which, "bpp | ps | cpx | external")->required();
    score->add_option("--out", score_args.out)->required();
    score->add_option("--quality", score_args.quality, "JPEG quality (bpp)");
    score->add_option("--subsampling", score_args.subsampling, "none | 420 (bpp)");
    score->add_flag("--stored", score_args.stored, "use stored JPEG sizes (bpp)");
    score->add_option("--features", score_args.features, "feature CSV (ps)");
    score->add_option("--k", score_args.k, "cluster count (ps)");
    score->add_option("--seed", score_args.seed, "k-means seed (ps)");
    score->add_option("--max-iter", score_args.max_iter, "k-means iteration cap (ps)");
    score->add_option("--tol", score_args.tol, "k-means relative tolerance (ps)");
    score->add_option("--scores", score_args.scores, "external score CSV (external)");
    score->add_option("--threads", score_args.threads, "worker cap (0 = hardware)");

    SelectArgs select_args;
    GraphArgs graph_args;
    CLI::App* graph = app.add_subcommand("graph", "build and dump the K-NN graph");
    graph->add_option("--manifest", graph_args.manifest)->required();
    graph->add_option("--graph", graph_args.kind, "features | histogram")->required();
    graph->add_option("--out", graph_args.out)->required();
    graph->add_option("--features", graph_args.features, "feature CSV (features graph)");
    graph->add_option("--knn", graph_args.knn, "neighbors per node")->required();
    graph->add_option("--sigma", graph_args.sigma, "median | positive float");
    graph->add_option("--num-classes", graph_args.num_classes, "classes (histogram graph)");
    graph->add_option("--ignore-index", graph_args.ignore_index,
                      "mask label excluded from histograms; negative disables");
    graph->add_flag("--jsd-sqrt", graph_args.jsd_sqrt, "use sqrt(JSD) distances");
    graph->add_option("--threads", graph_args.threads, "worker cap (0 = hardware)");

    CLI::App* select = app.add_subcommand("select", "pick the coreset");
    select->add_option("--manifest", select_args.manifest)->required();
    select->add_option("--scores", select_args.scores, "score CSV")->required();
    select->add_option("--score", select_args.score, "score column")->required();
    select->add_option("--order", select_args.order, "asc | desc")->required();
    select->add_option("--graph", select_args.graph.kind,
                       "none | features | histogram | file")->required();
    select->add_option("--graph-file", select_args.graph_file, "graph CSV dump");
    select->add_option("--features", select_args.graph.features, "feature CSV");
    select->add_option("--knn", select_args.graph.knn, "neighbors per node");
    select->add_option("--sigma", select_args.graph.sigma, "median | positive float");
    select->add_option("--num-classes", select_args.graph.num_classes);
    select->add_option("--ignore-index", select_args.graph.ignore_index);
    select->add_flag("--jsd-sqrt", select_args.graph.jsd_sqrt);
    auto* count_opt = select->add_option("--count", select_args.count, "subset size");
    auto* fraction_opt =
        select->add_option("--fraction", select_args.fraction, "subset fraction (0,1]");
    select->add_option("--out", select_args.out)->required();
    select->add_option("--threads", select_args.graph.threads, "worker cap (0 = hardware)");

    StatsArgs stats_args;
    CLI::App* stats = app.add_subcommand("stats", "score summary or selection coverage");
    stats->add_option("--scores", stats_args.scores, "score CSV (summary mode)");
    stats->add_option("--score", stats_args.score, "score column (summary mode)");
    stats->add_option("--manifest", stats_args.manifest, "manifest (coverage mode)");
    stats->add_option("--selection", stats_args.selection, "selection CSV (coverage mode)");
    stats->add_option("--graph-file", stats_args.graph_file, "graph CSV (coverage mode)");
    stats->add_option("--out", stats_args.out, "also write the report here");

    SynthArgs synth_args;
    CLI::App* synth = app.add_subcommand("synth", "synthetic diversity benchmark");
    synth->add_option("--clusters", synth_args.config.clusters);
    synth->add_option("--per-cluster", synth_args.config.per_cluster);
    synth->add_option("--count", synth_args.config.select_count, "picks per policy");
    synth->add_option("--knn", synth_args.config.knn);
    synth->add_option("--seed", synth_args.config.seed);
    synth->add_option("--hot-count", synth_args.config.hot_count,
                      "hot-core size (0 = auto)");
    synth->add_option("--hot-score", synth_args.config.hot_score);
    synth->add_option("--cluster-std", synth_args.config.cluster_std);
    synth->add_option("--center-radius", synth_args.config.center_radius);
    synth->add_option("--core-rho", synth_args.config.core_rho);
    synth->add_option("--sigma", synth_args.config.sigma);
    synth->add_option("--threads", synth_args.config.threads, "worker cap (0 = hardware)");
    synth->add_option("--out", synth_args.out, "also write the report here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }

    try {
        if (score->parsed()) return cmd_score(score_args);
        if (graph->parsed()) return cmd_graph(graph_args);
        if (select->parsed()) {
            select_args.count_given = count_opt->count() > 0;
            select_args.fraction_given = fraction_opt->count() > 0;
            return cmd_select(select_args);
        }
        if (stats->parsed()) return cmd_stats(stats_args);
        if (synth->parsed()) return cmd_synth(synth_args);
        std::cerr << "error: no subcommand given\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
