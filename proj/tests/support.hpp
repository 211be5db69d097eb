#pragma once

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "bayesbin.hpp"

namespace testing_support {

inline const char* kHeader =
    "\"age\";\"job\";\"marital\";\"education\";\"default\";\"housing\";\"loan\";\"contact\";\"month\";"
    "\"day_of_week\";\"duration\";\"campaign\";\"pdays\";\"previous\";\"poutcome\";\"emp.var.rate\";"
    "\"cons.price.idx\";\"cons.conf.idx\";\"euribor3m\";\"nr.employed\";\"y\"";

// One data row in the public file layout; `age`, `job` and `y` vary, the rest is fixed.
inline std::string row(double age, const std::string& job, const std::string& y) {
  std::ostringstream s;
  s << age << ";\"" << job << "\";\"married\";\"basic.4y\";\"no\";\"no\";\"no\";\"telephone\";\"may\";\"mon\";"
    << "261;1;999;0;\"nonexistent\";1.1;93.994;-36.4;4.857;5191;\"" << y << "\"";
  return s.str();
}

inline bayesbin::RecordTable parse(const std::string& text) {
  std::istringstream in(text);
  return bayesbin::parse_dataset(in);
}

/// Table with the given targets; row r has age 20 + r.
inline bayesbin::RecordTable table_with_targets(const std::vector<int>& y) {
  std::string text = std::string(kHeader) + "\n";
  for (std::size_t r = 0; r < y.size(); ++r) {
    text += row(20.0 + static_cast<double>(r), r % 2 ? "admin." : "services", y[r] ? "yes" : "no") + "\n";
  }
  return parse(text);
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& name) : path(std::filesystem::temp_directory_path() / ("bayesbin-test-" + name)) {
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace testing_support
