#include "qkr/io.hpp"

#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>
#include <stdexcept>

#include <openssl/evp.h>
#include <unistd.h>

namespace qkr::io {

CsvWriter::CsvWriter(std::vector<std::string> header) : columns_(header.size()) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) text_ += ',';
    text_ += header[i];
  }
  text_ += '\n';
}

void CsvWriter::separator() {
  if (in_row_ == columns_) throw std::logic_error("CsvWriter: too many cells in row");
  if (in_row_) text_ += ',';
  ++in_row_;
}

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15e", v);
  return buf;
}

CsvWriter& CsvWriter::cell(double v) {
  separator();
  text_ += format_real(v);
  return *this;
}

CsvWriter& CsvWriter::cell(long long v) {
  separator();
  text_ += std::to_string(v);
  return *this;
}

CsvWriter& CsvWriter::cell(std::string_view v) {
  separator();
  if (v.find_first_of(",\"\n") == std::string_view::npos) {
    text_ += v;
    return *this;
  }
  text_ += '"';
  for (char c : v) {
    if (c == '"') text_ += '"';
    text_ += c;
  }
  text_ += '"';
  return *this;
}

void CsvWriter::end_row() {
  if (in_row_ != columns_) throw std::logic_error("CsvWriter: row has the wrong number of cells");
  text_ += '\n';
  in_row_ = 0;
  ++rows_;
}

void write_atomic(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string sha256_hex(std::string_view content) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!EVP_Digest(content.data(), content.size(), digest, &len, EVP_sha256(), nullptr))
    throw std::runtime_error("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  const std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return sha256_hex(data);
}

}  // namespace qkr::io
