#include "havok/io.hpp"

#include "havok/errors.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <fstream>
#include <sstream>

namespace havok {

namespace {

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::optional<double> parse_number(const std::string& s) {
    if (s.empty()) return std::nullopt;
    const char* b = s.data();
    const char* e = b + s.size();
    if (*b == '+') ++b;
    double v = 0.0;
    auto [p, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || p != e) return std::nullopt;
    return v;
}

std::optional<std::size_t> as_index(const std::string& col) {
    std::size_t v = 0;
    auto [p, ec] = std::from_chars(col.data(), col.data() + col.size(), v);
    if (ec != std::errc() || p != col.data() + col.size()) return std::nullopt;
    return v;
}

std::size_t resolve_column(const std::string& col, const std::vector<std::string>& header, const std::string& where) {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == col) return i;
    if (auto i = as_index(col)) return *i;
    throw ValidationError(where + ": column '" + col + "' not found");
}

LoadedSeries read_csv(std::istream& in, const InputSpec& spec) {
    const std::string where = spec.path.empty() ? std::string("input") : spec.path.string();
    std::vector<double> values, truth;
    std::vector<std::string> header;
    std::optional<std::size_t> vcol, tcol;
    std::string line;
    long lineno = 0;
    bool first = true;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        auto cells = split(line);
        if (first) {
            first = false;
            bool numeric = true;
            for (const auto& c : cells) numeric = numeric && parse_number(c).has_value();
            if (!numeric) {
                header = cells;
                vcol = resolve_column(spec.value_column, header, where);
                if (spec.truth_column) tcol = resolve_column(*spec.truth_column, header, where);
                continue;
            }
        }
        if (!vcol) {
            vcol = resolve_column(spec.value_column, header, where);
            if (spec.truth_column) tcol = resolve_column(*spec.truth_column, header, where);
        }
        auto cell_value = [&](std::size_t c) {
            if (c >= cells.size())
                throw ValidationError(where + ":" + std::to_string(lineno) + ": missing column " + std::to_string(c));
            auto v = parse_number(cells[c]);
            if (!v) throw ValidationError(where + ":" + std::to_string(lineno) + ": not a number: '" + cells[c] + "'");
            return *v;
        };
        values.push_back(cell_value(*vcol));
        if (tcol) truth.push_back(cell_value(*tcol));
    }
    if (values.size() < 2) throw ValidationError(where + ": need at least 2 samples, found " + std::to_string(values.size()));
    LoadedSeries out{TimeSeries(std::move(values), spec.sample_period), std::nullopt};
    if (tcol) out.truth = std::move(truth);
    return out;
}

double json_field(const nlohmann::json& row, const std::string& col, const std::string& at) {
    const nlohmann::json* cell = nullptr;
    if (row.is_object()) {
        if (row.contains(col)) cell = &row[col];
    } else if (row.is_array()) {
        if (auto i = as_index(col); i && *i < row.size()) cell = &row[*i];
    } else if (row.is_number() && col == "0") {
        cell = &row;
    }
    if (!cell) throw ValidationError(at + ": column '" + col + "' not found");
    if (!cell->is_number()) throw ValidationError(at + ": column '" + col + "' is not a number");
    return cell->get<double>();
}

LoadedSeries read_json_lines(std::istream& in, const InputSpec& spec) {
    const std::string where = spec.path.empty() ? std::string("input") : spec.path.string();
    std::vector<double> values, truth;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const std::string at = where + ":" + std::to_string(lineno);
        nlohmann::json row;
        try {
            row = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error&) {
            throw ValidationError(at + ": malformed JSON");
        }
        values.push_back(json_field(row, spec.value_column, at));
        if (spec.truth_column) truth.push_back(json_field(row, *spec.truth_column, at));
    }
    if (values.size() < 2) throw ValidationError(where + ": need at least 2 samples, found " + std::to_string(values.size()));
    LoadedSeries out{TimeSeries(std::move(values), spec.sample_period), std::nullopt};
    if (spec.truth_column) out.truth = std::move(truth);
    return out;
}

}  // namespace

LoadedSeries read_series(std::istream& in, const InputSpec& spec) {
    if (!(spec.sample_period > 0.0)) throw ValidationError("sample period must be positive");
    return spec.format == InputFormat::csv ? read_csv(in, spec) : read_json_lines(in, spec);
}

LoadedSeries read_series(const InputSpec& spec) {
    std::ifstream in(spec.path);
    if (!in) throw ValidationError("cannot open input file: " + spec.path.string());
    return read_series(in, spec);
}

std::vector<double> read_column(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open file: " + path.string());
    std::vector<double> v;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto cells = split(line);
        if (cells.empty() || cells[0].empty()) continue;
        auto x = parse_number(cells[0]);
        if (!x) {
            if (v.empty() && lineno == 1) continue;  // header
            throw ValidationError(path.string() + ":" + std::to_string(lineno) + ": not a number: '" + cells[0] + "'");
        }
        v.push_back(*x);
    }
    if (v.empty()) throw ValidationError(path.string() + ": no values");
    return v;
}

}  // namespace havok
