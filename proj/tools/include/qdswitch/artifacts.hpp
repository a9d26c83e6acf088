#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace qdswitch::cli {

/// Lower-case hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& file);

/// Lower-case hex SHA-256 of a string.
std::string sha256_hex(const std::string& data);

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

/// Minimal line plot: frame, ticks at the data range ends, one polyline per
/// series, axis labels and a title.
std::string render_svg(const std::vector<Series>& series, const std::string& title,
                       const std::string& x_label, const std::string& y_label);

}  // namespace qdswitch::cli
