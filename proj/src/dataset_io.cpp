#include "corepick/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "corepick/image_codec.hpp"
#include "corepick/numeric.hpp"

namespace corepick {

namespace {

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

// Lines as written, minus any trailing CR. Keeps blank lines so callers can
// report accurate line numbers.
std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot open file: ", path.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

bool is_blank(const std::string& line) {
    return line.find_first_not_of(" \t") == std::string::npos;
}

void validate_id(const std::string& id, std::size_t line_no,
                 const std::filesystem::path& path) {
    if (id.empty()) {
        fail(path.string(), ":", line_no, ": empty id");
    }
    if (id.front() == '#' || id.find_first_of(",\r\n") != std::string::npos) {
        fail(path.string(), ":", line_no, ": id \"", id,
             "\" contains characters reserved by the CSV outputs (comma, newline, leading '#')");
    }
}

std::ofstream open_for_write(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail("cannot open file for writing: ", path.string());
    return out;
}

void finish_write(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) fail("write failed: ", path.string());
}

} // namespace

// --- FeatureMatrix ---

FeatureMatrix::FeatureMatrix(std::size_t n, std::size_t d, std::vector<double> values)
    : n_(n), d_(d), values_(std::move(values)) {
    if (values_.size() != n_ * d_) {
        fail("feature matrix size mismatch: ", n_, "x", d_, " needs ", n_ * d_,
             " values, got ", values_.size());
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i])) {
            fail("non-finite feature value at row ", i / d_, " column ", i % d_);
        }
    }
}

// --- ScoreTable ---

bool ScoreTable::has_column(const std::string& name) const {
    return find_column(name) != nullptr;
}

const ScoreColumn* ScoreTable::find_column(const std::string& name) const {
    for (const auto& col : columns_) {
        if (col.name == name) return &col;
    }
    return nullptr;
}

const std::vector<double>& ScoreTable::column(const std::string& name) const {
    const ScoreColumn* col = find_column(name);
    if (col == nullptr) fail("score column \"", name, "\" not found");
    return col->values;
}

void ScoreTable::set_column(const std::string& name, std::vector<double> values,
                            std::string provenance) {
    if (values.size() != ids_.size()) {
        fail("score column \"", name, "\" has ", values.size(),
             " values for ", ids_.size(), " ids");
    }
    for (auto& col : columns_) {
        if (col.name == name) {
            col.values = std::move(values);
            col.provenance = std::move(provenance);
            return;
        }
    }
    columns_.push_back(ScoreColumn{name, std::move(values), std::move(provenance)});
}

// --- DatasetManifest ---

std::vector<std::string> DatasetManifest::ids() const {
    std::vector<std::string> out;
    out.reserve(records.size());
    for (const auto& record : records) out.push_back(record.id);
    return out;
}

std::filesystem::path DatasetManifest::image_path(const SampleRecord& record) const {
    std::filesystem::path p(record.image_path);
    return p.is_absolute() ? p : base_dir / p;
}

std::filesystem::path DatasetManifest::mask_path(const SampleRecord& record) const {
    if (!record.mask_path) fail("sample \"", record.id, "\" has no mask path");
    std::filesystem::path p(*record.mask_path);
    return p.is_absolute() ? p : base_dir / p;
}

std::size_t DatasetManifest::feature_row_for(std::size_t index) const {
    const auto& record = records.at(index);
    return record.feature_row ? *record.feature_row : index;
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
    const auto lines = read_lines(path);

    DatasetManifest manifest;
    manifest.base_dir = path.has_parent_path() ? path.parent_path()
                                               : std::filesystem::path(".");
    std::unordered_map<std::string, std::size_t> seen;

    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::size_t line_no = i + 1;
        if (is_blank(lines[i])) continue;

        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(lines[i]);
        } catch (const nlohmann::json::parse_error& e) {
            fail(path.string(), ":", line_no, ": manifest parse error: ", e.what());
        }
        if (!doc.is_object()) {
            fail(path.string(), ":", line_no, ": manifest line is not a JSON object");
        }

        SampleRecord record;
        for (const auto& [key, value] : doc.items()) {
            if (key == "id") {
                if (!value.is_string()) fail(path.string(), ":", line_no, ": \"id\" must be a string");
                record.id = value.get<std::string>();
            } else if (key == "image") {
                if (!value.is_string()) fail(path.string(), ":", line_no, ": \"image\" must be a string");
                record.image_path = value.get<std::string>();
            } else if (key == "mask") {
                if (!value.is_string()) fail(path.string(), ":", line_no, ": \"mask\" must be a string");
                record.mask_path = value.get<std::string>();
            } else if (key == "feature_row") {
                if (!value.is_number_unsigned()) {
                    fail(path.string(), ":", line_no, ": \"feature_row\" must be a non-negative integer");
                }
                record.feature_row = value.get<std::size_t>();
            } else {
                fail(path.string(), ":", line_no, ": unknown manifest key \"", key, "\"");
            }
        }
        if (record.id.empty() && !doc.contains("id")) {
            fail(path.string(), ":", line_no, ": missing \"id\"");
        }
        validate_id(record.id, line_no, path);
        if (record.image_path.empty()) {
            fail(path.string(), ":", line_no, ": missing \"image\"");
        }

        auto [it, inserted] = seen.emplace(record.id, line_no);
        if (!inserted) {
            fail(path.string(), ": duplicate id \"", record.id, "\" on lines ",
                 it->second, " and ", line_no);
        }
        manifest.records.push_back(std::move(record));
    }

    if (manifest.records.empty()) fail(path.string(), ": empty manifest");
    return manifest;
}

void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
    auto out = open_for_write(path);
    for (const auto& record : manifest.records) {
        nlohmann::ordered_json doc;
        doc["id"] = record.id;
        doc["image"] = record.image_path;
        if (record.mask_path) doc["mask"] = *record.mask_path;
        if (record.feature_row) doc["feature_row"] = *record.feature_row;
        out << doc.dump() << '\n';
    }
    finish_write(out, path);
}

// --- image / mask loading ---

PixelBuffer load_image(const std::filesystem::path& path) {
    return decode_image(read_file_bytes(path));
}

MaskBuffer load_mask(const std::filesystem::path& path) {
    return decode_mask(read_file_bytes(path));
}

PixelBuffer load_image(const DatasetManifest& manifest, const SampleRecord& record) {
    try {
        return load_image(manifest.image_path(record));
    } catch (const std::exception& e) {
        fail("sample \"", record.id, "\": ", e.what());
    }
}

MaskBuffer load_mask(const DatasetManifest& manifest, const SampleRecord& record) {
    try {
        return load_mask(manifest.mask_path(record));
    } catch (const std::exception& e) {
        fail("sample \"", record.id, "\": ", e.what());
    }
}

// --- feature CSV ---

FeatureMatrix load_features(const std::filesystem::path& path,
                            std::span<const std::string> expected_ids) {
    const auto lines = read_lines(path);
    if (lines.empty() || is_blank(lines[0])) {
        fail(path.string(), ": missing feature header");
    }

    const auto header = split_csv_line(lines[0]);
    if (header.empty() || header[0] != "id") {
        fail(path.string(), ": feature header must start with \"id\"");
    }
    if (header.size() < 2) {
        fail(path.string(), ": feature file has no feature columns");
    }
    const std::size_t dim = header.size() - 1;

    std::vector<double> values;
    values.reserve(expected_ids.size() * dim);
    std::size_t row = 0;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const std::size_t line_no = i + 1;
        if (is_blank(lines[i])) continue;
        const auto fields = split_csv_line(lines[i]);
        if (fields.size() != dim + 1) {
            fail(path.string(), ":", line_no, ": expected ", dim + 1,
                 " fields, got ", fields.size());
        }
        if (row >= expected_ids.size()) {
            fail(path.string(), ": more feature rows than manifest samples (expected ",
                 expected_ids.size(), ")");
        }
        if (fields[0] != expected_ids[row]) {
            fail(path.string(), ":", line_no, ": id mismatch at row ", row + 1,
                 ": expected \"", expected_ids[row], "\", got \"", fields[0], "\"");
        }
        for (std::size_t j = 0; j < dim; ++j) {
            values.push_back(parse_finite_double(
                fields[j + 1], cat(path.string(), ":", line_no, " column ", header[j + 1])));
        }
        ++row;
    }
    if (row != expected_ids.size()) {
        fail(path.string(), ": expected ", expected_ids.size(),
             " feature rows, got ", row);
    }
    return FeatureMatrix(row, dim, std::move(values));
}

// --- score CSV ---

namespace {

ScoreTable load_score_table_impl(const std::filesystem::path& path,
                                 const std::vector<std::string>* expected_ids) {
    const auto lines = read_lines(path);

    // Leading "# <column>: <echo>" comments carry per-column provenance.
    std::unordered_map<std::string, std::string> provenance;
    std::size_t first = 0;
    while (first < lines.size() && !lines[first].empty() && lines[first][0] == '#') {
        const std::string& line = lines[first];
        const std::size_t colon = line.find(": ");
        if (colon != std::string::npos && colon > 2) {
            provenance[line.substr(2, colon - 2)] = line.substr(colon + 2);
        }
        ++first;
    }
    if (first >= lines.size() || is_blank(lines[first])) {
        fail(path.string(), ": missing score header");
    }

    const auto header = split_csv_line(lines[first]);
    if (header.empty() || header[0] != "id") {
        fail(path.string(), ": score header must start with \"id\"");
    }
    if (header.size() < 2) {
        fail(path.string(), ": score file has no score columns");
    }
    std::unordered_set<std::string> names;
    for (std::size_t j = 1; j < header.size(); ++j) {
        if (header[j].empty()) fail(path.string(), ": empty score column name");
        if (!names.insert(header[j]).second) {
            fail(path.string(), ": duplicate score column \"", header[j], "\"");
        }
    }
    const std::size_t ncols = header.size() - 1;

    std::vector<std::string> ids;
    std::vector<std::vector<double>> columns(ncols);
    for (std::size_t i = first + 1; i < lines.size(); ++i) {
        const std::size_t line_no = i + 1;
        if (is_blank(lines[i])) continue;
        const auto fields = split_csv_line(lines[i]);
        if (fields.size() != ncols + 1) {
            fail(path.string(), ":", line_no, ": expected ", ncols + 1,
                 " fields, got ", fields.size());
        }
        if (expected_ids != nullptr) {
            const std::size_t row = ids.size();
            if (row >= expected_ids->size()) {
                fail(path.string(), ": more score rows than manifest samples (expected ",
                     expected_ids->size(), ")");
            }
            if (fields[0] != (*expected_ids)[row]) {
                fail(path.string(), ":", line_no, ": id mismatch at row ", row + 1,
                     ": expected \"", (*expected_ids)[row], "\", got \"", fields[0], "\"");
            }
        }
        ids.push_back(fields[0]);
        for (std::size_t j = 0; j < ncols; ++j) {
            columns[j].push_back(parse_double(
                fields[j + 1], cat(path.string(), ":", line_no, " column ", header[j + 1])));
        }
    }
    if (expected_ids != nullptr && ids.size() != expected_ids->size()) {
        fail(path.string(), ": expected ", expected_ids->size(),
             " score rows, got ", ids.size());
    }
    if (ids.empty()) fail(path.string(), ": score file has no rows");

    ScoreTable table(std::move(ids));
    for (std::size_t j = 0; j < ncols; ++j) {
        auto it = provenance.find(header[j + 1]);
        table.set_column(header[j + 1], std::move(columns[j]),
                         it != provenance.end() ? it->second : std::string());
    }
    return table;
}

} // namespace

ScoreTable load_score_table(const std::filesystem::path& path) {
    return load_score_table_impl(path, nullptr);
}

ScoreTable load_score_table(const std::filesystem::path& path,
                            std::span<const std::string> expected_ids) {
    std::vector<std::string> expected(expected_ids.begin(), expected_ids.end());
    return load_score_table_impl(path, &expected);
}

void write_score_table(const ScoreTable& table, const std::filesystem::path& path) {
    if (table.columns().empty()) fail("refusing to write score table with no columns");
    auto out = open_for_write(path);
    for (const auto& col : table.columns()) {
        if (!col.provenance.empty()) {
            out << "# " << col.name << ": " << col.provenance << '\n';
        }
    }
    out << "id";
    for (const auto& col : table.columns()) out << ',' << col.name;
    out << '\n';
    for (std::size_t i = 0; i < table.size(); ++i) {
        out << table.ids()[i];
        for (const auto& col : table.columns()) {
            out << ',' << format_double(col.values[i]);
        }
        out << '\n';
    }
    finish_write(out, path);
}

// --- selection CSV ---

void write_selection(const Selection& selection, const std::filesystem::path& path) {
    if (selection.entries.empty()) fail("refusing to write empty selection");
    auto out = open_for_write(path);
    if (!selection.params_echo.empty()) {
        out << "# " << selection.params_echo << '\n';
    }
    out << "rank,id,original_score,final_score\n";
    for (std::size_t i = 0; i < selection.entries.size(); ++i) {
        const auto& entry = selection.entries[i];
        out << (i + 1) << ',' << entry.id << ','
            << format_double(entry.original_score) << ','
            << format_double(entry.final_score) << '\n';
    }
    finish_write(out, path);
}

Selection load_selection(const std::filesystem::path& path) {
    const auto lines = read_lines(path);

    Selection selection;
    std::size_t first = 0;
    while (first < lines.size() && !lines[first].empty() && lines[first][0] == '#') {
        if (selection.params_echo.empty() && lines[first].size() > 2) {
            selection.params_echo = lines[first].substr(2);
        }
        ++first;
    }
    if (first >= lines.size() || lines[first] != "rank,id,original_score,final_score") {
        fail(path.string(), ": missing selection header \"rank,id,original_score,final_score\"");
    }
    for (std::size_t i = first + 1; i < lines.size(); ++i) {
        const std::size_t line_no = i + 1;
        if (is_blank(lines[i])) continue;
        const auto fields = split_csv_line(lines[i]);
        if (fields.size() != 4) {
            fail(path.string(), ":", line_no, ": expected 4 fields, got ", fields.size());
        }
        const double rank = parse_finite_double(fields[0], cat(path.string(), ":", line_no, " rank"));
        if (rank != static_cast<double>(selection.entries.size() + 1)) {
            fail(path.string(), ":", line_no, ": rank out of order: expected ",
                 selection.entries.size() + 1, ", got ", fields[0]);
        }
        SelectionEntry entry;
        entry.id = fields[1];
        entry.original_score = parse_double(fields[2], cat(path.string(), ":", line_no, " original_score"));
        entry.final_score = parse_double(fields[3], cat(path.string(), ":", line_no, " final_score"));
        selection.entries.push_back(std::move(entry));
    }
    if (selection.entries.empty()) fail(path.string(), ": empty selection");
    return selection;
}

} // namespace corepick
