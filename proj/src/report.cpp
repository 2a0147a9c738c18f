#include "cgo/report.hpp"

#include <cmath>
#include <fstream>

#include <fmt/format.h>

namespace cgo {

namespace {

std::string num(double v) {
  if (!std::isfinite(v)) return "null";
  return fmt::format("{:.17g}", v);
}

void dump(const nlohmann::json& j, int indent, int level, std::string& out) {
  using T = nlohmann::json::value_t;
  auto nl = [&](int l) {
    if (indent < 0) return;
    out += '\n';
    out.append(std::size_t(l * indent), ' ');
  };
  switch (j.type()) {
    case T::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ',';
        first = false;
        nl(level + 1);
        out += nlohmann::json(it.key()).dump();
        out += indent < 0 ? ":" : ": ";
        dump(it.value(), indent, level + 1, out);
      }
      nl(level);
      out += '}';
      return;
    }
    case T::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += '[';
      bool first = true;
      for (const auto& v : j) {
        if (!first) out += ',';
        first = false;
        nl(level + 1);
        dump(v, indent, level + 1, out);
      }
      nl(level);
      out += ']';
      return;
    }
    case T::number_float:
      out += num(j.get<double>());
      return;
    default:
      out += j.dump();
  }
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("io", "cannot write " + path);
  return os;
}

}  // namespace

std::string dump_json(const nlohmann::json& j, int indent) {
  std::string out;
  dump(j, indent, 0, out);
  return out;
}

void write_json_file(const std::string& path, const nlohmann::json& j) {
  auto os = open_out(path);
  os << dump_json(j) << '\n';
}

void write_csv(std::ostream& os, const Table& t) {
  for (std::size_t c = 0; c < t.columns.size(); ++c) os << (c ? "," : "") << t.columns[c];
  os << '\n';
  for (const auto& r : t.rows) {
    for (std::size_t c = 0; c < r.size(); ++c) os << (c ? "," : "") << num(r[c]);
    os << '\n';
  }
}

void write_csv_file(const std::string& path, const Table& t) {
  auto os = open_out(path);
  write_csv(os, t);
}

void write_field_csv(std::ostream& os, const VecC& f) {
  os << "node_id,re,im\n";
  for (Eigen::Index i = 0; i < f.size(); ++i) os << i << ',' << num(f[i].real()) << ',' << num(f[i].imag()) << '\n';
}

void write_field_csv_file(const std::string& path, const VecC& f) {
  auto os = open_out(path);
  write_field_csv(os, f);
}

}  // namespace cgo
