#pragma once

#include <string>
#include <vector>

namespace lack {

// Numeric table rendered as CSV (header + rows) or as a JSON array of
// objects. Numbers use the shortest round-trip representation.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::string to_csv() const;
  std::string to_json() const;
};

}  // namespace lack
