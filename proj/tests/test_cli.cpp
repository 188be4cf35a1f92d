#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "corepick/bpp.hpp"
#include "corepick/dataset.hpp"
#include "corepick/error.hpp"
#include "corepick/knn_graph.hpp"
#include "corepick/sampler.hpp"
#include "corepick/scores.hpp"
#include "fixtures.hpp"

using namespace corepick;
using namespace corepick::testing;

namespace {

struct CliResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

CliResult run_cli(const TmpDir& tmp, const std::string& args) {
    const auto out_path = tmp.file("cli_stdout.txt");
    const auto err_path = tmp.file("cli_stderr.txt");
    const std::string command = cat(COREPICK_CLI_PATH, " ", args, " >",
                                    out_path.string(), " 2>", err_path.string());
    const int status = std::system(command.c_str());
    CliResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.out = read_text(out_path);
    result.err = read_text(err_path);
    return result;
}

// Four JPEG samples of increasing complexity, three-class masks and 2-D
// features forming two well-separated pairs.
struct CliFixture {
    TmpDir tmp;
    std::vector<std::string> ids = {"a", "b", "c", "d"};
    std::string manifest;
    std::string features;

    CliFixture() {
        write_jpeg_file(tmp.file("a.jpg"), constant_image(16, 16, 3, 128));
        write_jpeg_file(tmp.file("b.jpg"), gradient_image(16, 16, 3));
        write_jpeg_file(tmp.file("c.jpg"), noise_image(16, 16, 3, 5));
        write_jpeg_file(tmp.file("d.jpg"), noise_image(16, 16, 3, 9));

        std::vector<std::uint8_t> mask(16 * 16);
        for (std::size_t offset = 0; offset < mask.size(); ++offset) {
            mask[offset] = static_cast<std::uint8_t>(offset % 3);
        }
        for (const auto& id : ids) {
            write_png_gray8(tmp.file(id + "_m.png"), 16, 16, mask);
            // Shift the label mix so the per-sample histograms differ.
            for (auto& label : mask) label = static_cast<std::uint8_t>((label + 1) % 3);
        }

        std::string lines;
        for (const auto& id : ids) {
            lines += cat("{\"id\":\"", id, "\",\"image\":\"", id,
                         ".jpg\",\"mask\":\"", id, "_m.png\"}\n");
        }
        manifest = tmp.file("manifest.jsonl").string();
        write_text(manifest, lines);

        features = tmp.file("features.csv").string();
        write_text(features,
                   "id,f0,f1\n"
                   "a,0,0\n"
                   "b,1,0\n"
                   "c,10,0\n"
                   "d,11,0\n");
    }

    std::string path(const std::string& name) const { return tmp.file(name).string(); }
};

} // namespace

TEST_CASE("score bpp writes a table and re-runs byte-identically") {
    CliFixture fx;
    const std::string out = fx.path("scores.csv");
    const auto first =
        run_cli(fx.tmp, cat("score --manifest ", fx.manifest, " --which bpp --out ", out));
    REQUIRE(first.exit_code == 0);
    CHECK(first.out.find("wrote") != std::string::npos);
    CHECK(first.err.empty());

    const auto table = load_score_table(out, fx.ids);
    REQUIRE(table.has_column("bpp"));
    const auto expected = score_dataset_bpp(load_manifest(fx.manifest), BppConfig{});
    CHECK(table.column("bpp") == expected);
    const auto* column = table.find_column("bpp");
    REQUIRE(column != nullptr);
    CHECK(column->provenance.find("--which bpp") != std::string::npos);

    const std::string bytes = read_text(out);
    const auto second =
        run_cli(fx.tmp, cat("score --manifest ", fx.manifest, " --which bpp --out ", out));
    REQUIRE(second.exit_code == 0);
    CHECK(read_text(out) == bytes);
}

TEST_CASE("cpx demands nll and bpp columns before it runs") {
    CliFixture fx;
    const std::string out = fx.path("scores.csv");

    const auto no_nll =
        run_cli(fx.tmp, cat("score --manifest ", fx.manifest, " --which cpx --out ", out));
    CHECK(no_nll.exit_code == 1);
    CHECK(no_nll.err ==
          "error: cpx requires nll: merge an external nll column first (--which external)\n");

    const std::string external = fx.path("nll.csv");
    write_text(external, "id,nll\na,4.5\nb,3.25\nc,6\nd,2.75\n");
    const auto merge = run_cli(fx.tmp, cat("score --manifest ", fx.manifest,
                                           " --which external --scores ", external,
                                           " --out ", out));
    REQUIRE(merge.exit_code == 0);

    const auto no_bpp =
        run_cli(fx.tmp, cat("score --manifest ", fx.manifest, " --which cpx --out ", out));
    CHECK(no_bpp.exit_code == 1);
    CHECK(no_bpp.err.find("cpx requires bpp") != std::string::npos);

    REQUIRE(run_cli(fx.tmp, cat("score --manifest ", fx.manifest,
                                " --which bpp --out ", out))
                .exit_code == 0);
    const auto cpx_run =
        run_cli(fx.tmp, cat("score --manifest ", fx.manifest, " --which cpx --out ", out));
    REQUIRE(cpx_run.exit_code == 0);

    const auto table = load_score_table(out, fx.ids);
    REQUIRE(table.has_column("cpx"));
    const auto& nll = table.column("nll");
    const auto& bpp = table.column("bpp");
    const auto& cpx_vals = table.column("cpx");
    for (std::size_t i = 0; i < fx.ids.size(); ++i) {
        CHECK(cpx_vals[i] == nll[i] - bpp[i]);
    }
}

TEST_CASE("a dumped graph drives select --graph file") {
    CliFixture fx;
    const std::string scores = fx.path("scores.csv");
    const std::string graph_csv = fx.path("graph.csv");
    const std::string selection_csv = fx.path("selection.csv");

    REQUIRE(run_cli(fx.tmp, cat("score --manifest ", fx.manifest, " --which bpp --out ",
                                scores))
                .exit_code == 0);
    const auto graph_run = run_cli(
        fx.tmp, cat("graph --manifest ", fx.manifest, " --graph features --features ",
                    fx.features, " --knn 2 --out ", graph_csv));
    REQUIRE(graph_run.exit_code == 0);
    CHECK(graph_run.out.find("4 nodes") != std::string::npos);

    const auto graph = load_graph_csv(graph_csv);
    CHECK(graph.n == 4);
    CHECK(graph.k == 2);

    const auto select_run = run_cli(
        fx.tmp, cat("select --manifest ", fx.manifest, " --scores ", scores,
                    " --score bpp --order desc --graph file --graph-file ", graph_csv,
                    " --count 2 --out ", selection_csv));
    REQUIRE(select_run.exit_code == 0);

    const auto expected = graph_select(graph, load_score_table(scores, fx.ids).column("bpp"),
                                       fx.ids, 2, Order::Descending);
    const auto selection = load_selection(selection_csv);
    REQUIRE(selection.entries.size() == 2);
    for (std::size_t t = 0; t < 2; ++t) {
        CHECK(selection.entries[t].id == expected.entries[t].id);
        CHECK(selection.entries[t].original_score == expected.entries[t].original_score);
        CHECK(selection.entries[t].final_score == expected.entries[t].final_score);
    }

    // The same graph file refuses a manifest of a different size.
    const std::string small = fx.path("small.jsonl");
    write_text(small, "{\"id\":\"a\",\"image\":\"a.jpg\"}\n"
                      "{\"id\":\"b\",\"image\":\"b.jpg\"}\n");
    const std::string small_scores = fx.path("small_scores.csv");
    write_text(small_scores, "id,bpp\na,1\nb,2\n");
    const auto mismatch = run_cli(
        fx.tmp, cat("select --manifest ", small, " --scores ", small_scores,
                    " --score bpp --order desc --graph file --graph-file ", graph_csv,
                    " --count 1 --out ", fx.path("unused.csv")));
    CHECK(mismatch.exit_code == 1);
    CHECK(mismatch.err.find("4 nodes") != std::string::npos);
    CHECK(mismatch.err.find("2 samples") != std::string::npos);
}

TEST_CASE("histogram graphs build from masks on the command line") {
    CliFixture fx;
    const std::string graph_csv = fx.path("hist_graph.csv");
    const auto run = run_cli(fx.tmp, cat("graph --manifest ", fx.manifest,
                                         " --graph histogram --num-classes 3 --knn 1",
                                         " --out ", graph_csv));
    REQUIRE(run.exit_code == 0);
    CHECK(load_graph_csv(graph_csv).metric == MetricKind::Jsd);

    const auto rooted = run_cli(fx.tmp, cat("graph --manifest ", fx.manifest,
                                            " --graph histogram --num-classes 3 --knn 1",
                                            " --jsd-sqrt --out ", graph_csv));
    REQUIRE(rooted.exit_code == 0);
    CHECK(load_graph_csv(graph_csv).metric == MetricKind::JsdSqrt);
}

TEST_CASE("select --graph none is plain ranking in both orders") {
    CliFixture fx;
    const std::string scores = fx.path("scores.csv");
    REQUIRE(run_cli(fx.tmp, cat("score --manifest ", fx.manifest, " --which bpp --out ",
                                scores))
                .exit_code == 0);
    const auto table = load_score_table(scores, fx.ids);
    const auto& values = table.column("bpp");

    for (const std::string order : {"asc", "desc"}) {
        const std::string out = fx.path("rank_" + order + ".csv");
        const auto run = run_cli(fx.tmp, cat("select --manifest ", fx.manifest,
                                             " --scores ", scores,
                                             " --score bpp --order ", order,
                                             " --graph none --count 3 --out ", out));
        REQUIRE(run.exit_code == 0);
        const auto expected =
            top_m(rank(values, parse_order(order), fx.ids), values, fx.ids, 3);
        const auto selection = load_selection(out);
        REQUIRE(selection.entries.size() == 3);
        for (std::size_t t = 0; t < 3; ++t) {
            CHECK(selection.entries[t].id == expected.entries[t].id);
        }
    }
}

TEST_CASE("--fraction resolves to the echoed --count") {
    CliFixture fx;
    const std::string scores = fx.path("scores.csv");
    REQUIRE(run_cli(fx.tmp, cat("score --manifest ", fx.manifest, " --which bpp --out ",
                                scores))
                .exit_code == 0);

    const std::string by_fraction = fx.path("half.csv");
    REQUIRE(run_cli(fx.tmp, cat("select --manifest ", fx.manifest, " --scores ", scores,
                                " --score bpp --order desc --graph none --fraction 0.5",
                                " --out ", by_fraction))
                .exit_code == 0);
    const std::string fraction_bytes = read_text(by_fraction);
    CHECK(fraction_bytes.find("--count 2") != std::string::npos);
    CHECK(load_selection(by_fraction).entries.size() == 2);

    // Re-running with the echoed count gives byte-identical output.
    REQUIRE(run_cli(fx.tmp, cat("select --manifest ", fx.manifest, " --scores ", scores,
                                " --score bpp --order desc --graph none --count 2",
                                " --out ", by_fraction))
                .exit_code == 0);
    CHECK(read_text(by_fraction) == fraction_bytes);

    const auto both = run_cli(fx.tmp, cat("select --manifest ", fx.manifest, " --scores ",
                                          scores, " --score bpp --order desc --graph none",
                                          " --count 2 --fraction 0.5 --out ", by_fraction));
    CHECK(both.exit_code == 1);
    CHECK(both.err.find("exactly one of --count and --fraction") != std::string::npos);

    const auto neither = run_cli(fx.tmp, cat("select --manifest ", fx.manifest,
                                             " --scores ", scores,
                                             " --score bpp --order desc --graph none",
                                             " --out ", by_fraction));
    CHECK(neither.exit_code == 1);

    const auto zero = run_cli(fx.tmp, cat("select --manifest ", fx.manifest, " --scores ",
                                          scores, " --score bpp --order desc --graph none",
                                          " --fraction 0 --out ", by_fraction));
    CHECK(zero.exit_code == 1);
    CHECK(zero.err.find("(0, 1]") != std::string::npos);
}

TEST_CASE("stats summary reports quartiles and low outliers") {
    TmpDir tmp;
    const std::string scores = tmp.file("s.csv").string();
    write_text(scores, "id,s\na,10\nb,10.2\nc,10.4\nd,10.6\ne,10.8\nf,2\n");

    const auto out_path = tmp.file("report.txt").string();
    const auto run =
        run_cli(tmp, cat("stats --scores ", scores, " --score s --out ", out_path));
    REQUIRE(run.exit_code == 0);
    CHECK(run.out.find("column=s count=6") != std::string::npos);
    CHECK(run.out.find("min=2") != std::string::npos);
    CHECK(run.out.find("max=10.8") != std::string::npos);
    CHECK(run.out.find("low_outliers=1") != std::string::npos);
    CHECK(run.out.find("outlier: f 2\n") != std::string::npos);
    // --out captures exactly what went to stdout.
    CHECK(read_text(out_path) == run.out);

    const auto missing = run_cli(tmp, cat("stats --scores ", scores, " --score nope"));
    CHECK(missing.exit_code == 1);
    CHECK(missing.err.find("\"nope\" not found") != std::string::npos);
}

TEST_CASE("stats coverage mode matches the library report") {
    CliFixture fx;
    const std::string scores = fx.path("scores.csv");
    const std::string graph_csv = fx.path("graph.csv");
    const std::string selection_csv = fx.path("selection.csv");
    REQUIRE(run_cli(fx.tmp, cat("score --manifest ", fx.manifest, " --which bpp --out ",
                                scores))
                .exit_code == 0);
    REQUIRE(run_cli(fx.tmp, cat("graph --manifest ", fx.manifest,
                                " --graph features --features ", fx.features,
                                " --knn 2 --out ", graph_csv))
                .exit_code == 0);
    REQUIRE(run_cli(fx.tmp, cat("select --manifest ", fx.manifest, " --scores ", scores,
                                " --score bpp --order desc --graph file --graph-file ",
                                graph_csv, " --count 2 --out ", selection_csv))
                .exit_code == 0);

    const auto run = run_cli(fx.tmp, cat("stats --manifest ", fx.manifest, " --selection ",
                                         selection_csv, " --graph-file ", graph_csv));
    REQUIRE(run.exit_code == 0);
    CHECK(run.out.find("selected=2") != std::string::npos);
    CHECK(run.out.find("one_hop_coverage=") != std::string::npos);
    CHECK(run.out.find("mean_pairwise_distance=") != std::string::npos);
}

TEST_CASE("synth reports deterministically to stdout and file") {
    TmpDir tmp;
    const std::string out = tmp.file("synth.txt").string();
    const auto first = run_cli(tmp, cat("synth --seed 5 --out ", out));
    REQUIRE(first.exit_code == 0);
    CHECK(first.out == read_text(out));
    const std::string bytes = first.out;

    const auto second = run_cli(tmp, cat("synth --seed 5 --out ", out));
    REQUIRE(second.exit_code == 0);
    CHECK(second.out == bytes);

    CHECK(bytes.find("score_only: clusters_covered=1/5") != std::string::npos);
    CHECK(bytes.find("with_graph: clusters_covered=5/5") != std::string::npos);
    CHECK(bytes.find("--seed 5") != std::string::npos);
}

TEST_CASE("usage errors exit 2 and runtime errors exit 1") {
    TmpDir tmp;
    const auto unknown_flag = run_cli(tmp, "score --manifest m --which bpp --out o --nope");
    CHECK(unknown_flag.exit_code == 2);
    CHECK(unknown_flag.err.find("error: ") == 0);

    const auto no_subcommand = run_cli(tmp, "");
    CHECK(no_subcommand.exit_code == 2);

    const auto missing_manifest = run_cli(
        tmp, cat("score --manifest ", tmp.file("absent.jsonl").string(),
                 " --which bpp --out ", tmp.file("o.csv").string()));
    CHECK(missing_manifest.exit_code == 1);
    CHECK(missing_manifest.err.find("error: ") == 0);
    // Exactly one diagnostic line.
    CHECK(std::count(missing_manifest.err.begin(), missing_manifest.err.end(), '\n') == 1);

    const std::string manifest = tmp.file("m.jsonl").string();
    write_text(manifest, "{\"id\":\"a\",\"image\":\"a.jpg\"}\n");
    const auto bad_which = run_cli(tmp, cat("score --manifest ", manifest,
                                            " --which nope --out ",
                                            tmp.file("o.csv").string()));
    CHECK(bad_which.exit_code == 1);
    CHECK(bad_which.err.find("unknown score") != std::string::npos);
}
