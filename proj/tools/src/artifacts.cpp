#include "artifacts.hpp"

#include <stripeforge/error.hpp>

#include <algorithm>
#include <cstdio>

namespace stripeforge::cli {

Artifacts::Artifacts(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec || !std::filesystem::is_directory(dir_)) throw IoError("cannot create output directory " + dir_.string());
}

std::filesystem::path Artifacts::path(const std::string& name) {
  if (std::find(files_.begin(), files_.end(), name) == files_.end()) files_.push_back(name);
  return dir_ / name;
}

void Artifacts::write_json(const std::string& name, const nlohmann::json& j) {
  std::ofstream out(path(name));
  if (!out) throw IoError("cannot write " + (dir_ / name).string());
  out << j.dump(2) << '\n';
}

std::string format_cell(const Cell& c) {
  if (const double* d = std::get_if<double>(&c)) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", *d);
    return buf;
  }
  if (const long long* i = std::get_if<long long>(&c)) return std::to_string(*i);
  return std::get<std::string>(c);
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : out_(path), width_(header.size()) {
  if (!out_) throw IoError("cannot write " + path.string());
  for (size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
  out_ << '\n';
}

void CsvWriter::row(const std::vector<Cell>& cells) {
  if (cells.size() != width_) throw ValidationError("csv row width does not match the header");
  for (size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << format_cell(cells[i]);
  out_ << '\n';
}

JsonLines::JsonLines(const std::filesystem::path& path) : out_(path) {
  if (!out_) throw IoError("cannot write " + path.string());
}

void JsonLines::write(const nlohmann::json& j) {
  out_ << j.dump() << '\n';
  out_.flush();
}

}  // namespace stripeforge::cli
