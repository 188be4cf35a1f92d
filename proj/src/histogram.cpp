#include "corepick/histogram.hpp"

#include <cmath>
#include <optional>
#include <string>

#include "corepick/error.hpp"
#include "corepick/parallel.hpp"

namespace corepick {

LabelHistogram histogram(const MaskBuffer& mask, std::size_t num_classes,
                         std::optional<int> ignore_index) {
    if (num_classes == 0) fail("histogram needs num_classes >= 1");
    if (mask.labels.size() != mask.width * mask.height) {
        fail("mask label buffer size mismatch: ", mask.labels.size(), " labels for ",
             mask.width, "x", mask.height);
    }

    std::vector<std::size_t> counts(num_classes, 0);
    std::size_t counted = 0;
    for (std::size_t i = 0; i < mask.labels.size(); ++i) {
        const int label = mask.labels[i];
        if (ignore_index && label == *ignore_index) continue;
        if (label < 0 || static_cast<std::size_t>(label) >= num_classes) {
            fail("mask label ", label, " at pixel ", i, " outside [0, ",
                 num_classes - 1, "] and not the ignore index");
        }
        ++counts[static_cast<std::size_t>(label)];
        ++counted;
    }
    if (counted == 0) {
        fail("mask has no counted pixels (all ignored); histogram undefined");
    }

    LabelHistogram hist;
    hist.counted_pixels = counted;
    hist.probs.resize(num_classes);
    for (std::size_t c = 0; c < num_classes; ++c) {
        hist.probs[c] = static_cast<double>(counts[c]) / static_cast<double>(counted);
    }
    return hist;
}

double jsd(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) {
        fail("jsd: distributions of different length (", p.size(), " vs ", q.size(), ")");
    }
    if (p.empty()) fail("jsd: empty distributions");

    // Each element contributes 0.5*(p log(p/m) + q log(q/m)) in one addition,
    // so jsd(p,q) and jsd(q,p) sum the same terms in the same order and the
    // result is bitwise symmetric.
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double pi = p[i];
        const double qi = q[i];
        if (!(pi >= 0.0) || !(qi >= 0.0)) {
            fail("jsd: negative or NaN probability at element ", i);
        }
        const double mi = 0.5 * (pi + qi);
        double term = 0.0;
        if (pi > 0.0) term += pi * std::log(pi / mi);
        if (qi > 0.0) term += qi * std::log(qi / mi);
        sum += 0.5 * term;
    }

    const double ln2 = std::log(2.0);
    if (sum < 0.0) return 0.0;
    if (sum > ln2) return ln2;
    return sum;
}

double jsd(const LabelHistogram& p, const LabelHistogram& q) {
    return jsd(std::span<const double>(p.probs), std::span<const double>(q.probs));
}

double jsd_distance(std::span<const double> p, std::span<const double> q) {
    return std::sqrt(jsd(p, q));
}

FeatureMatrix histogram_matrix(const DatasetManifest& manifest,
                               std::size_t num_classes,
                               std::optional<int> ignore_index, int threads) {
    const std::size_t n = manifest.size();
    FeatureMatrix matrix(n, num_classes);
    std::vector<std::optional<std::string>> failures(n);

    parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const auto& record = manifest.records[i];
            try {
                if (!record.mask_path) fail("no mask path in the manifest");
                const MaskBuffer mask = load_mask(manifest.mask_path(record));
                const LabelHistogram hist = histogram(mask, num_classes, ignore_index);
                for (std::size_t c = 0; c < num_classes; ++c) {
                    matrix.at(i, c) = hist.probs[c];
                }
            } catch (const std::exception& e) {
                failures[i] = cat("sample \"", record.id, "\": ", e.what());
            }
        }
    });

    for (const auto& failure : failures) {
        if (failure) fail(*failure);
    }
    return matrix;
}

} // namespace corepick
