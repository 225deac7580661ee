#pragma once

#include "havok/series.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace havok {

enum class InputFormat { csv, json_lines };

struct InputSpec {
    std::filesystem::path path;
    InputFormat format = InputFormat::csv;
    std::string value_column = "0";           // name or zero-based index
    double sample_period = 1.0;
    std::optional<std::string> truth_column;  // name or index
};

struct LoadedSeries {
    TimeSeries series;
    std::optional<std::vector<double>> truth;
};

// CSV: comma separated, optional single header row (detected by a non-numeric first row).
// JSON lines: one object per line, columns addressed by key; bare numbers are accepted too.
LoadedSeries read_series(std::istream& in, const InputSpec& spec);
LoadedSeries read_series(const InputSpec& spec);

// one value per line, header optional
std::vector<double> read_column(const std::filesystem::path& path);

}  // namespace havok
