#pragma once

#include <filesystem>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace qkr::io {

// Comma-separated, LF line endings, reals as %.15e. Built in memory and
// written in one go so a job either leaves a complete file or none.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);

  CsvWriter& cell(double v);
  CsvWriter& cell(long long v);
  CsvWriter& cell(int v) { return cell(static_cast<long long>(v)); }
  CsvWriter& cell(std::string_view v);
  // Terminates the current row; throws if the column count is off.
  void end_row();

  std::size_t rows() const { return rows_; }
  const std::string& text() const { return text_; }

 private:
  void separator();

  std::size_t columns_;
  std::size_t in_row_ = 0;
  std::size_t rows_ = 0;
  std::string text_;
};

std::string format_real(double v);

// Writes to "<path>.tmp.<pid>" then renames over `path`.
void write_atomic(const std::filesystem::path& path, std::string_view content);

std::string sha256_hex(std::string_view content);
std::string sha256_file(const std::filesystem::path& path);

}  // namespace qkr::io
