#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "hv3d/error.hpp"

namespace hv3d {

namespace fs = std::filesystem;

// Output stream that lands at its destination only on commit(): data goes to
// "<path>.tmp" and is renamed over the target. An uncommitted file is removed
// on destruction.
class AtomicOutputFile {
 public:
  explicit AtomicOutputFile(fs::path target, bool binary = false)
      : target_(std::move(target)), temp_(target_) {
    temp_ += ".tmp";
    if (target_.has_parent_path()) {
      std::error_code ec;
      fs::create_directories(target_.parent_path(), ec);
    }
    stream_.open(temp_, binary ? std::ios::binary | std::ios::trunc
                               : std::ios::trunc);
    if (!stream_)
      throw IngestError("cannot open '" + temp_.string() + "' for writing");
  }
  AtomicOutputFile(const AtomicOutputFile&) = delete;
  AtomicOutputFile& operator=(const AtomicOutputFile&) = delete;

  ~AtomicOutputFile() {
    if (!committed_) {
      stream_.close();
      std::error_code ec;
      fs::remove(temp_, ec);
    }
  }

  std::ofstream& stream() { return stream_; }

  void commit() {
    stream_.flush();
    if (!stream_) throw IngestError("write failed for '" + temp_.string() + "'");
    stream_.close();
    std::error_code ec;
    fs::rename(temp_, target_, ec);
    if (ec)
      throw IngestError("cannot rename '" + temp_.string() + "' to '" +
                        target_.string() + "': " + ec.message());
    committed_ = true;
  }

  const fs::path& target() const { return target_; }

 private:
  fs::path target_;
  fs::path temp_;
  std::ofstream stream_;
  bool committed_ = false;
};

inline std::string_view trim(std::string_view s) {
  const char* ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    auto pos = s.find(sep, start);
    out.emplace_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

// Shortest round-trippable text form of a double, identical on every run.
inline std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Minimal CSV table: a header row plus string cells. Fields may not contain
// commas or quotes; none of the toolkit's schemas need them.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    return -1;
  }
};

inline CsvTable read_csv(const fs::path& path,
                         const std::vector<std::string>& required) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open CSV file '" + path.string() + "'");
  CsvTable table;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto cells = split(t, ',');
    if (table.header.empty()) {
      table.header = std::move(cells);
      continue;
    }
    if (cells.size() != table.header.size())
      throw IngestError(path.string() + ":" + std::to_string(line_no) +
                        ": expected " + std::to_string(table.header.size()) +
                        " fields, found " + std::to_string(cells.size()));
    table.rows.push_back(std::move(cells));
  }
  if (table.header.empty())
    throw IngestError("CSV file '" + path.string() + "' is empty");
  for (const auto& name : required)
    if (table.column(name) < 0)
      throw IngestError("CSV file '" + path.string() + "' lacks column '" +
                        name + "'");
  return table;
}

inline double parse_real(std::string_view text, std::string_view what) {
  std::string s(trim(text));
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw IngestError(std::string(what) + ": '" + s + "' is not a number");
}

inline long long parse_integer(std::string_view text, std::string_view what) {
  std::string s(trim(text));
  try {
    std::size_t used = 0;
    long long v = std::stoll(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw IngestError(std::string(what) + ": '" + s + "' is not an integer");
}

}  // namespace hv3d
