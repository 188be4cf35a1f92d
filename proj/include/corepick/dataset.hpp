#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "corepick/error.hpp"

namespace corepick {

struct SampleRecord {
    std::string id;
    std::string image_path; // as written in the manifest
    std::optional<std::string> mask_path;
    std::optional<std::size_t> feature_row;

    bool operator==(const SampleRecord&) const = default;
};

// Record order is canonical: it defines sample index 0..n-1 everywhere else.
struct DatasetManifest {
    std::vector<SampleRecord> records;
    std::filesystem::path base_dir; // directory of the manifest file
    std::optional<std::string> feature_file;
    std::optional<std::string> score_file;

    std::size_t size() const { return records.size(); }
    std::vector<std::string> ids() const;

    // Paths in the manifest resolve relative to the manifest's directory.
    std::filesystem::path image_path(const SampleRecord& record) const;
    std::filesystem::path mask_path(const SampleRecord& record) const;

    // Row of the feature matrix backing sample `index` (explicit feature_row
    // wins, manifest position otherwise).
    std::size_t feature_row_for(std::size_t index) const;
};

struct PixelBuffer {
    std::size_t width = 0;
    std::size_t height = 0;
    std::size_t channels = 0; // 1 or 3
    std::vector<std::uint8_t> data; // row-major, width*height*channels
};

struct MaskBuffer {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<int> labels; // row-major class ids, width*height
};

// Dense row-major N x D matrix; every value finite by construction.
class FeatureMatrix {
public:
    FeatureMatrix() = default;
    FeatureMatrix(std::size_t n, std::size_t d)
        : n_(n), d_(d), values_(n * d, 0.0) {}
    FeatureMatrix(std::size_t n, std::size_t d, std::vector<double> values);

    std::size_t rows() const { return n_; }
    std::size_t cols() const { return d_; }
    bool empty() const { return n_ == 0; }

    double at(std::size_t i, std::size_t j) const { return values_[i * d_ + j]; }
    double& at(std::size_t i, std::size_t j) { return values_[i * d_ + j]; }
    std::span<const double> row(std::size_t i) const {
        return std::span<const double>(values_.data() + i * d_, d_);
    }
    const std::vector<double>& values() const { return values_; }

private:
    std::size_t n_ = 0;
    std::size_t d_ = 0;
    std::vector<double> values_;
};

struct ScoreColumn {
    std::string name;
    std::vector<double> values; // aligned with ScoreTable ids
    std::string provenance;     // command echo that produced the column
};

// Named per-sample scalar scores, id-aligned. Column order is preserved so
// rewriting a table is byte-stable.
class ScoreTable {
public:
    ScoreTable() = default;
    explicit ScoreTable(std::vector<std::string> ids) : ids_(std::move(ids)) {}

    const std::vector<std::string>& ids() const { return ids_; }
    std::size_t size() const { return ids_.size(); }

    bool has_column(const std::string& name) const;
    const ScoreColumn* find_column(const std::string& name) const;
    const std::vector<double>& column(const std::string& name) const; // throws if absent
    void set_column(const std::string& name, std::vector<double> values,
                    std::string provenance);
    const std::vector<ScoreColumn>& columns() const { return columns_; }

private:
    std::vector<std::string> ids_;
    std::vector<ScoreColumn> columns_;
};

struct SelectionEntry {
    std::string id;
    double original_score = 0.0;
    double final_score = 0.0;
};

// Ordered coreset pick. params_echo is the re-runnable command line that
// produced it; it is written into the output file header for provenance.
struct Selection {
    std::vector<SelectionEntry> entries;
    std::string params_echo;
};

// --- manifest / feature / score / selection I/O ---

DatasetManifest load_manifest(const std::filesystem::path& path);
void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

PixelBuffer load_image(const std::filesystem::path& path);
MaskBuffer load_mask(const std::filesystem::path& path);
PixelBuffer load_image(const DatasetManifest& manifest, const SampleRecord& record);
MaskBuffer load_mask(const DatasetManifest& manifest, const SampleRecord& record);

// CSV: header "id,f0,f1,..."; row order must match `expected_ids`.
FeatureMatrix load_features(const std::filesystem::path& path,
                            std::span<const std::string> expected_ids);

ScoreTable load_score_table(const std::filesystem::path& path);
ScoreTable load_score_table(const std::filesystem::path& path,
                            std::span<const std::string> expected_ids);
void write_score_table(const ScoreTable& table, const std::filesystem::path& path);

// CSV: "rank,id,original_score,final_score", rank starting at 1.
void write_selection(const Selection& selection, const std::filesystem::path& path);
Selection load_selection(const std::filesystem::path& path);

} // namespace corepick
