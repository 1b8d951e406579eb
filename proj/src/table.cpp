#include "lack/table.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

namespace lack {

std::string Table::to_csv() const {
  std::string out;
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i) out += ',';
    out += columns[i];
  }
  out += '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += fmt::format("{}", row[i]);
    }
    out += '\n';
  }
  return out;
}

std::string Table::to_json() const {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& row : rows) {
    nlohmann::ordered_json obj;
    for (std::size_t i = 0; i < columns.size() && i < row.size(); ++i) obj[columns[i]] = row[i];
    arr.push_back(std::move(obj));
  }
  return arr.dump(1) + "\n";
}

}  // namespace lack
