#pragma once

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <string>
#include <variant>
#include <vector>

namespace stripeforge::cli {

/// Output directory bookkeeping; every file written through it lands in the
/// manifest.
class Artifacts {
 public:
  explicit Artifacts(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }
  std::filesystem::path path(const std::string& name);  // registers the file
  const std::vector<std::string>& files() const { return files_; }

  void write_json(const std::string& name, const nlohmann::json& j);

 private:
  std::filesystem::path dir_;
  std::vector<std::string> files_;
};

using Cell = std::variant<double, long long, std::string>;

/// %.17g for doubles, plain integers and strings.
std::string format_cell(const Cell& c);

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
  void row(const std::vector<Cell>& cells);

 private:
  std::ofstream out_;
  size_t width_;
};

class JsonLines {
 public:
  explicit JsonLines(const std::filesystem::path& path);
  void write(const nlohmann::json& j);

 private:
  std::ofstream out_;
};

}  // namespace stripeforge::cli
