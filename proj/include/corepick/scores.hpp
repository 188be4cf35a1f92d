#pragma once

#include <span>
#include <string>
#include <vector>

#include "corepick/dataset.hpp"

namespace corepick {

enum class Order { Ascending, Descending };

Order parse_order(const std::string& text); // "asc" | "desc"
const char* to_string(Order order);

// Complexity-compensated score: nll - bpp, both in bits per pixel.
double cpx(double nll, double bpp);
std::vector<double> cpx_column(std::span<const double> nll,
                               std::span<const double> bpp);

struct Ranking {
    std::vector<std::size_t> permutation; // bijection over 0..n-1
    Order order = Order::Descending;
    std::string score_name;
};

// Deterministic sort: monotone in `order`, ties broken by ascending sample
// index. NaN scores are an error; `ids` (when given) names the offender.
Ranking rank(std::span<const double> scores, Order order,
             std::span<const std::string> ids = {},
             std::string score_name = "");

// First m entries of the ranking; final_score == original_score. This is the
// score-only pruning baseline. Empty `ids` fall back to index strings.
Selection top_m(const Ranking& ranking, std::span<const double> scores,
                std::span<const std::string> ids, std::size_t m);

struct ScoreSummary {
    std::size_t count = 0;
    double mean = 0.0;
    double stddev = 0.0;
    double min = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double max = 0.0;
};

ScoreSummary summarize_scores(std::span<const double> scores);

// Indices of scores below the Tukey fence q1 - 1.5*IQR, ascending by score.
// Flags suspiciously low values (e.g. already heavily compressed sources).
std::vector<std::size_t> low_score_outliers(std::span<const double> scores);

} // namespace corepick
