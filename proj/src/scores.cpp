#include "corepick/scores.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "corepick/error.hpp"

namespace corepick {

Order parse_order(const std::string& text) {
    if (text == "asc") return Order::Ascending;
    if (text == "desc") return Order::Descending;
    fail("unknown order \"", text, "\" (use asc or desc)");
}

const char* to_string(Order order) {
    return order == Order::Ascending ? "asc" : "desc";
}

double cpx(double nll, double bpp) {
    if (!std::isfinite(nll)) fail("cpx: non-finite nll value");
    if (!std::isfinite(bpp)) fail("cpx: non-finite bpp value");
    return nll - bpp;
}

std::vector<double> cpx_column(std::span<const double> nll,
                               std::span<const double> bpp) {
    if (nll.size() != bpp.size()) {
        fail("cpx: nll column has ", nll.size(), " values, bpp has ", bpp.size());
    }
    std::vector<double> out(nll.size());
    for (std::size_t i = 0; i < nll.size(); ++i) {
        if (!std::isfinite(nll[i])) fail("cpx: non-finite nll at row ", i + 1);
        if (!std::isfinite(bpp[i])) fail("cpx: non-finite bpp at row ", i + 1);
        out[i] = nll[i] - bpp[i];
    }
    return out;
}

Ranking rank(std::span<const double> scores, Order order,
             std::span<const std::string> ids, std::string score_name) {
    if (!ids.empty() && ids.size() != scores.size()) {
        fail("rank: ", ids.size(), " ids for ", scores.size(), " scores");
    }
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (std::isnan(scores[i])) {
            if (!ids.empty()) fail("rank: NaN score for sample \"", ids[i], "\"");
            fail("rank: NaN score at index ", i);
        }
    }

    Ranking ranking;
    ranking.order = order;
    ranking.score_name = std::move(score_name);
    ranking.permutation.resize(scores.size());
    std::iota(ranking.permutation.begin(), ranking.permutation.end(), std::size_t{0});
    if (order == Order::Descending) {
        std::stable_sort(ranking.permutation.begin(), ranking.permutation.end(),
                         [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    } else {
        std::stable_sort(ranking.permutation.begin(), ranking.permutation.end(),
                         [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    }
    return ranking;
}

Selection top_m(const Ranking& ranking, std::span<const double> scores,
                std::span<const std::string> ids, std::size_t m) {
    const std::size_t n = ranking.permutation.size();
    if (scores.size() != n) {
        fail("top_m: ", scores.size(), " scores for ranking of ", n);
    }
    if (!ids.empty() && ids.size() != n) {
        fail("top_m: ", ids.size(), " ids for ranking of ", n);
    }
    if (m < 1 || m > n) {
        fail("top_m: m=", m, " out of range [1, ", n, "]");
    }

    Selection selection;
    selection.entries.reserve(m);
    for (std::size_t r = 0; r < m; ++r) {
        const std::size_t idx = ranking.permutation[r];
        SelectionEntry entry;
        entry.id = ids.empty() ? std::to_string(idx) : ids[idx];
        entry.original_score = scores[idx];
        entry.final_score = scores[idx];
        selection.entries.push_back(std::move(entry));
    }
    return selection;
}

ScoreSummary summarize_scores(std::span<const double> scores) {
    if (scores.empty()) fail("cannot summarize an empty score column");
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (!std::isfinite(scores[i])) fail("non-finite score at row ", i + 1);
    }

    std::vector<double> sorted(scores.begin(), scores.end());
    std::sort(sorted.begin(), sorted.end());

    // Linear-interpolation quantile on the sorted values.
    auto quantile = [&](double q) {
        const double pos = q * static_cast<double>(sorted.size() - 1);
        const std::size_t lo = static_cast<std::size_t>(pos);
        const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
        const double frac = pos - static_cast<double>(lo);
        return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
    };

    ScoreSummary summary;
    summary.count = sorted.size();
    summary.min = sorted.front();
    summary.max = sorted.back();
    summary.q1 = quantile(0.25);
    summary.median = quantile(0.5);
    summary.q3 = quantile(0.75);

    double sum = 0.0;
    for (double v : sorted) sum += v;
    summary.mean = sum / static_cast<double>(sorted.size());
    double sq = 0.0;
    for (double v : sorted) sq += (v - summary.mean) * (v - summary.mean);
    summary.stddev = std::sqrt(sq / static_cast<double>(sorted.size()));
    return summary;
}

std::vector<std::size_t> low_score_outliers(std::span<const double> scores) {
    const ScoreSummary summary = summarize_scores(scores);
    const double fence = summary.q1 - 1.5 * (summary.q3 - summary.q1);

    std::vector<std::size_t> outliers;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (scores[i] < fence) outliers.push_back(i);
    }
    std::stable_sort(outliers.begin(), outliers.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
    return outliers;
}

} // namespace corepick
