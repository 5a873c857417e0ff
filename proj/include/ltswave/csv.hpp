#pragma once

#include <string>
#include <vector>

namespace ltswave::csv {

struct Table {
  std::vector<std::string> comments;  // written as `# ...` lines
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }
};

/// Shortest round-trip decimal form ("%.17g"); nan and inf spelled out.
std::string num(double x);
std::string num(long x);
inline std::string num(int x) { return num(static_cast<long>(x)); }

std::string format(const Table& t);

/// Writes the table, creating parent directories. Throws std::runtime_error
/// when the file cannot be written.
void write(const std::string& path, const Table& t);

}  // namespace ltswave::csv
