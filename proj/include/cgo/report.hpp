#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "cgo/types.hpp"

namespace cgo {

// JSON text with every floating value printed to 17 significant digits; NaN and
// infinities become null. Object keys keep nlohmann's sorted order.
std::string dump_json(const nlohmann::json& j, int indent = 2);
void write_json_file(const std::string& path, const nlohmann::json& j);

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};
void write_csv(std::ostream& os, const Table& t);
void write_csv_file(const std::string& path, const Table& t);

// node_id, re, im
void write_field_csv(std::ostream& os, const VecC& f);
void write_field_csv_file(const std::string& path, const VecC& f);

}  // namespace cgo
