#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace textcat {

// Numeric text format used by every persisted artifact: 6 significant
// decimal digits. Printing is idempotent across a save/load/save cycle.
inline std::string fmt_g6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return std::string(buf);
}

inline double parse_double(const std::string& s, const std::string& where) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || p != e) throw std::runtime_error(where + ": bad number '" + s + "'");
  return v;
}

inline long long parse_int(const std::string& s, const std::string& where) {
  long long v = 0;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || p != e) throw std::runtime_error(where + ": bad integer '" + s + "'");
  return v;
}

inline std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

// Writes through a temporary file and renames on commit, so failed runs
// leave no partial outputs behind.
class OutFile {
 public:
  explicit OutFile(const std::string& path) : path_(path), tmp_(path + ".tmp") {
    os_.open(tmp_, std::ios::binary);
    if (!os_) throw std::runtime_error("cannot open '" + tmp_ + "' for writing");
  }

  OutFile(const OutFile&) = delete;
  OutFile& operator=(const OutFile&) = delete;

  std::ostream& stream() { return os_; }

  void commit() {
    os_.flush();
    if (!os_) throw std::runtime_error("write failed for '" + tmp_ + "'");
    os_.close();
    std::error_code ec;
    std::filesystem::rename(tmp_, path_, ec);
    if (ec) throw std::runtime_error("cannot move '" + tmp_ + "' to '" + path_ + "'");
    committed_ = true;
  }

  ~OutFile() {
    if (!committed_) {
      if (os_.is_open()) os_.close();
      std::error_code ec;
      std::filesystem::remove(tmp_, ec);
    }
  }

 private:
  std::string path_;
  std::string tmp_;
  std::ofstream os_;
  bool committed_ = false;
};

inline std::ifstream open_input(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open '" + path + "'");
  return is;
}

inline std::string read_file(const std::string& path) {
  std::ifstream is = open_input(path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace textcat
