#include "cgo/config.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace cgo {

namespace {

using json = nlohmann::json;

class TomlParser {
 public:
  explicit TomlParser(const std::string& text) : s_(text) {}

  json parse() {
    json root = json::object();
    json* table = &root;
    while (true) {
      skip_ws_comments(true);
      if (eof()) break;
      if (peek() == '[') {
        bool array = s_.compare(i_, 2, "[[") == 0;
        i_ += array ? 2 : 1;
        auto path = parse_key_path();
        skip_inline_ws();
        expect(array ? "]]" : "]");
        table = &root;
        for (std::size_t k = 0; k < path.size(); ++k) {
          json& next = (*table)[path[k]];
          bool last = k + 1 == path.size();
          if (last && array) {
            if (next.is_null()) next = json::array();
            if (!next.is_array()) fail("'" + path[k] + "' is not an array of tables");
            next.push_back(json::object());
            table = &next.back();
          } else {
            if (next.is_null()) next = json::object();
            if (next.is_array() && !next.empty() && next.back().is_object()) {
              table = &next.back();
              continue;
            }
            if (!next.is_object()) fail("'" + path[k] + "' is not a table");
            table = &next;
          }
        }
        end_of_line();
        continue;
      }
      auto path = parse_key_path();
      skip_inline_ws();
      expect("=");
      skip_inline_ws();
      json v = parse_value();
      json* t = table;
      for (std::size_t k = 0; k + 1 < path.size(); ++k) {
        json& next = (*t)[path[k]];
        if (next.is_null()) next = json::object();
        if (!next.is_object()) fail("'" + path[k] + "' is not a table");
        t = &next;
      }
      if (t->contains(path.back())) fail("duplicate key '" + path.back() + "'");
      (*t)[path.back()] = std::move(v);
      end_of_line();
    }
    return root;
  }

 private:
  const std::string& s_;
  std::size_t i_ = 0;

  bool eof() const { return i_ >= s_.size(); }
  char peek() const { return eof() ? '\0' : s_[i_]; }

  int line() const { return 1 + int(std::count(s_.begin(), s_.begin() + std::min(i_, s_.size()), '\n')); }
  [[noreturn]] void fail(const std::string& m) const {
    throw ConfigError("toml line " + std::to_string(line()) + ": " + m);
  }

  void skip_inline_ws() {
    while (!eof() && (peek() == ' ' || peek() == '\t')) ++i_;
  }
  void skip_ws_comments(bool newlines) {
    while (!eof()) {
      char c = peek();
      if (c == ' ' || c == '\t' || c == '\r' || (newlines && c == '\n')) {
        ++i_;
      } else if (c == '#') {
        while (!eof() && peek() != '\n') ++i_;
      } else {
        break;
      }
    }
  }
  void end_of_line() {
    skip_ws_comments(false);
    if (eof()) return;
    if (peek() != '\n') fail("unexpected text after value");
    ++i_;
  }
  void expect(const std::string& t) {
    if (s_.compare(i_, t.size(), t) != 0) fail("expected '" + t + "'");
    i_ += t.size();
  }

  std::string parse_key() {
    skip_inline_ws();
    if (peek() == '"') return parse_string();
    std::size_t b = i_;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '-')) ++i_;
    if (b == i_) fail("expected a key");
    return s_.substr(b, i_ - b);
  }
  std::vector<std::string> parse_key_path() {
    std::vector<std::string> p{parse_key()};
    skip_inline_ws();
    while (peek() == '.') {
      ++i_;
      p.push_back(parse_key());
      skip_inline_ws();
    }
    return p;
  }

  std::string parse_string() {
    if (s_.compare(i_, 3, "\"\"\"") == 0) fail("multi-line strings are not supported");
    ++i_;
    std::string out;
    while (true) {
      if (eof() || peek() == '\n') fail("unterminated string");
      char c = s_[i_++];
      if (c == '"') break;
      if (c != '\\') {
        out += c;
        continue;
      }
      if (eof()) fail("unterminated string");
      char e = s_[i_++];
      switch (e) {
        case 'n': out += '\n'; break;
        case 't': out += '\t'; break;
        case 'r': out += '\r'; break;
        case '"': out += '"'; break;
        case '\\': out += '\\'; break;
        default: fail(std::string("unsupported escape \\") + e);
      }
    }
    return out;
  }

  json parse_value() {
    char c = peek();
    if (c == '"') return parse_string();
    if (c == '\'') {
      ++i_;
      std::size_t b = i_;
      while (!eof() && peek() != '\'' && peek() != '\n') ++i_;
      if (peek() != '\'') fail("unterminated literal string");
      return s_.substr(b, i_++ - b);
    }
    if (c == '[') {
      ++i_;
      json a = json::array();
      while (true) {
        skip_ws_comments(true);
        if (peek() == ']') {
          ++i_;
          return a;
        }
        a.push_back(parse_value());
        skip_ws_comments(true);
        if (peek() == ',') {
          ++i_;
        } else if (peek() != ']') {
          fail("expected ',' or ']' in array");
        }
      }
    }
    if (c == '{') {
      ++i_;
      json t = json::object();
      skip_inline_ws();
      if (peek() == '}') {
        ++i_;
        return t;
      }
      while (true) {
        auto k = parse_key();
        skip_inline_ws();
        expect("=");
        skip_inline_ws();
        t[k] = parse_value();
        skip_inline_ws();
        if (peek() == ',') {
          ++i_;
          continue;
        }
        expect("}");
        return t;
      }
    }
    if (s_.compare(i_, 4, "true") == 0) {
      i_ += 4;
      return true;
    }
    if (s_.compare(i_, 5, "false") == 0) {
      i_ += 5;
      return false;
    }
    std::size_t b = i_;
    while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || std::string("+-._").find(peek()) != std::string::npos)) ++i_;
    std::string tok = s_.substr(b, i_ - b);
    tok.erase(std::remove(tok.begin(), tok.end(), '_'), tok.end());
    if (tok.empty()) fail("expected a value");
    if (tok == "inf" || tok == "+inf") return INFINITY;
    if (tok == "-inf") return -INFINITY;
    bool is_float = tok.find_first_of(".eE") != std::string::npos;
    try {
      std::size_t used = 0;
      if (is_float) {
        double v = std::stod(tok, &used);
        if (used == tok.size()) return v;
      } else {
        long long v = std::stoll(tok, &used, 10);
        if (used == tok.size()) return v;
      }
    } catch (const std::exception&) {
    }
    fail("cannot parse value '" + tok + "'");
  }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

[[noreturn]] void bad(const std::string& key, const std::string& why) { throw ConfigError(key + ": " + why); }

double num(const json& j, const std::string& key) {
  if (!j.is_number()) bad(key, "expected a number");
  double v = j.get<double>();
  if (!std::isfinite(v)) bad(key, "must be finite");
  return v;
}
double num_or(const json& t, const std::string& key, double dflt, const std::string& where) {
  return t.contains(key) ? num(t.at(key), where + "." + key) : dflt;
}
bool bool_or(const json& t, const std::string& key, bool dflt, const std::string& where) {
  if (!t.contains(key)) return dflt;
  if (!t.at(key).is_boolean()) bad(where + "." + key, "expected true or false");
  return t.at(key).get<bool>();
}
std::vector<double> nums(const json& j, const std::string& key) {
  if (j.is_number()) return {num(j, key)};
  if (!j.is_array()) bad(key, "expected a number or an array of numbers");
  std::vector<double> v;
  for (auto& e : j) v.push_back(num(e, key));
  return v;
}
cplx complex_of(const json& j, const std::string& key) {
  if (j.is_number()) return num(j, key);
  if (j.is_array() && j.size() == 2) return {num(j[0], key), num(j[1], key)};
  if (j.is_string()) return parse_lambda(j.get<std::string>());
  bad(key, "expected re, [re, im] or \"re,im\"");
}
Vec2c point_of(const json& j, const std::string& key) {
  if (!j.is_array() || j.size() != 2) bad(key, "expected [[re, im], [re, im]]");
  return {complex_of(j[0], key), complex_of(j[1], key)};
}
const json& table(const json& root, const std::string& key) {
  static const json empty = json::object();
  if (!root.contains(key)) return empty;
  if (!root.at(key).is_object()) bad(key, "expected a table");
  return root.at(key);
}

void check_keys(const json& t, const std::string& where, std::initializer_list<const char*> allowed) {
  for (auto it = t.begin(); it != t.end(); ++it) {
    bool ok = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return it.key() == a; });
    if (!ok) bad(where.empty() ? it.key() : where + "." + it.key(), "unknown key");
  }
}

CurveDef curve_from_json(const json& t, const std::string& where) {
  check_keys(t, where, {"preset", "degree", "terms", "chart_center", "chart_radius", "ell", "curve_tol", "file"});
  CurveDef c;
  std::string preset = t.value("preset", t.contains("terms") ? "terms" : "fermat");
  if (preset == "fermat") {
    int d = int(num_or(t, "degree", 3, where));
    if (d < 1) bad(where + ".degree", "must be positive");
    c.P = Polynomial::fermat(d);
  } else if (preset == "terms") {
    if (!t.contains("terms") || !t.at("terms").is_array() || t.at("terms").empty())
      bad(where + ".terms", "expected a non-empty array of [e0, e1, e2, re, im]");
    std::vector<Monomial> m;
    for (auto& e : t.at("terms")) {
      if (!e.is_array() || (e.size() != 4 && e.size() != 5)) bad(where + ".terms", "entries are [e0, e1, e2, re, im]");
      Monomial mo;
      double ex[3];
      for (int k = 0; k < 3; ++k) {
        ex[k] = num(e[k], where + ".terms");
        if (ex[k] < 0 || ex[k] != std::floor(ex[k])) bad(where + ".terms", "exponents must be non-negative integers");
      }
      mo.e0 = int(ex[0]);
      mo.e1 = int(ex[1]);
      mo.e2 = int(ex[2]);
      mo.coef = {num(e[3], where + ".terms"), e.size() == 5 ? num(e[4], where + ".terms") : 0.0};
      m.push_back(mo);
    }
    c.P = Polynomial(std::move(m));
  } else {
    bad(where + ".preset", "unknown curve preset '" + preset + "'");
  }
  c.chart.center = t.contains("chart_center") ? point_of(t.at("chart_center"), where + ".chart_center")
                                               : Vec2c{cplx(-1.0), cplx(0.0)};
  c.chart.radius = num_or(t, "chart_radius", 0.5, where);
  if (!(c.chart.radius > 0.0)) bad(where + ".chart_radius", "must be positive");
  c.ell = int(num_or(t, "ell", -1, where));
  c.curve_tol = num_or(t, "curve_tol", 1e-10, where);
  try {
    c.validate();
  } catch (const Error& e) {
    throw ConfigError(where + ": " + e.what());
  }
  return c;
}

SigmaSpec sigma_from_json(const json& t, const CurveDef& curve) {
  check_keys(t, "sigma", {"preset", "amplitude", "radius", "center", "bumps", "floor", "taper"});
  SigmaSpec s;
  s.preset = t.value("preset", "identity");
  if (s.preset != "identity" && s.preset != "bump" && s.preset != "two-bumps")
    bad("sigma.preset", "unknown preset '" + s.preset + "' (identity, bump, two-bumps)");
  s.floor = num_or(t, "floor", s.floor, "sigma");
  s.taper = num_or(t, "taper", s.taper, "sigma");
  if (!(s.floor > 0.0)) bad("sigma.floor", "must be positive");
  if (!(s.taper > 0.0)) bad("sigma.taper", "must be positive");
  auto bump_of = [&](const json& b, const std::string& where) {
    check_keys(b, where, {"center", "amplitude", "radius"});
    BumpSpec bs;
    if (!b.contains("center")) bad(where + ".center", "required");
    bs.center = point_of(b.at("center"), where + ".center");
    bs.amplitude = num_or(b, "amplitude", bs.amplitude, where);
    bs.radius = num_or(b, "radius", bs.radius, where);
    if (!(bs.radius > 0.0)) bad(where + ".radius", "must be positive");
    if (!(bs.amplitude > -1.0)) bad(where + ".amplitude", "must exceed -1 so that sigma stays positive");
    return bs;
  };
  if (t.contains("bumps")) {
    if (!t.at("bumps").is_array()) bad("sigma.bumps", "expected an array of tables");
    for (std::size_t k = 0; k < t.at("bumps").size(); ++k)
      s.bumps.push_back(bump_of(t.at("bumps")[k], "sigma.bumps[" + std::to_string(k) + "]"));
  } else if (s.preset == "bump" && t.contains("center")) {
    json b = json::object();
    for (const char* k : {"center", "amplitude", "radius"})
      if (t.contains(k)) b[k] = t.at(k);
    s.bumps.push_back(bump_of(b, "sigma"));
  } else if (s.preset == "bump" && (t.contains("amplitude") || t.contains("radius"))) {
    s.bumps = default_bumps(curve, "bump");
    s.bumps[0].amplitude = num_or(t, "amplitude", s.bumps[0].amplitude, "sigma");
    s.bumps[0].radius = num_or(t, "radius", s.bumps[0].radius, "sigma");
    if (!(s.bumps[0].radius > 0.0)) bad("sigma.radius", "must be positive");
  } else if (t.contains("center") || t.contains("amplitude") || t.contains("radius")) {
    bad("sigma", "center/amplitude/radius apply to the bump preset; use sigma.bumps otherwise");
  }
  try {
    SigmaModel check(curve, s);
  } catch (const Error& e) {
    throw ConfigError(std::string("sigma: ") + e.what());
  }
  return s;
}

}  // namespace

nlohmann::json parse_toml(const std::string& text) { return TomlParser(text).parse(); }

nlohmann::json load_config_file(const std::string& path) {
  std::string text = slurp(path);
  if (path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0) {
    try {
      return json::parse(text);
    } catch (const json::exception& e) {
      throw ConfigError(path + ": " + e.what());
    }
  }
  return parse_toml(text);
}

cplx parse_lambda(const std::string& s) {
  try {
    std::size_t c = s.find(',');
    std::size_t used = 0;
    double re = std::stod(s.substr(0, c), &used);
    if (used != s.substr(0, c).size()) throw std::invalid_argument(s);
    double im = 0.0;
    if (c != std::string::npos) {
      std::string t = s.substr(c + 1);
      im = std::stod(t, &used);
      if (used != t.size()) throw std::invalid_argument(s);
    }
    if (!std::isfinite(re) || !std::isfinite(im)) throw std::invalid_argument(s);
    return {re, im};
  } catch (const std::exception&) {
    throw ConfigError("lambda: cannot parse '" + s + "' (expected re,im)");
  }
}

ScenarioConfig scenario_from_json(const json& j, const std::string& base_dir) {
  if (!j.is_object()) throw ConfigError("config root must be a table");
  check_keys(j, "", {"curve", "mesh", "sigma", "lambda", "noise", "seed", "output", "stages", "validate", "assert",
                     "sweep"});
  ScenarioConfig c;

  const json& ct = table(j, "curve");
  if (ct.contains("file")) {
    if (!ct.at("file").is_string()) bad("curve.file", "expected a path");
    std::filesystem::path p = ct.at("file").get<std::string>();
    if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
    json cj = load_config_file(p.string());
    if (!cj.is_object()) throw ConfigError("curve file " + p.string() + ": expected a table");
    if (cj.contains("curve") && cj.at("curve").is_object()) cj = cj.at("curve");
    c.curve = curve_from_json(cj, "curve file " + p.string());
  } else {
    c.curve = curve_from_json(ct, "curve");
  }

  const json& mt = table(j, "mesh");
  check_keys(mt, "mesh", {"resolutions", "resolution", "collar"});
  if (mt.contains("resolutions")) c.resolutions = nums(mt.at("resolutions"), "mesh.resolutions");
  else if (mt.contains("resolution")) c.resolutions = nums(mt.at("resolution"), "mesh.resolution");
  else c.resolutions = {0.05};
  if (c.resolutions.empty()) bad("mesh.resolutions", "must not be empty");
  for (double h : c.resolutions)
    if (!(h > 0.0)) bad("mesh.resolutions", "must be positive");
  std::sort(c.resolutions.begin(), c.resolutions.end());
  c.resolutions.erase(std::unique(c.resolutions.begin(), c.resolutions.end()), c.resolutions.end());
  c.collar = num_or(mt, "collar", 0.0, "mesh");
  if (c.collar < 0.0) bad("mesh.collar", "must be non-negative");

  c.sigma = sigma_from_json(table(j, "sigma"), c.curve);

  const json& lt = table(j, "lambda");
  check_keys(lt, "lambda", {"values", "magnitudes"});
  if (lt.contains("values")) {
    if (!lt.at("values").is_array()) bad("lambda.values", "expected an array");
    for (auto& v : lt.at("values")) c.lambdas.push_back(complex_of(v, "lambda.values"));
  }
  if (lt.contains("magnitudes"))
    for (double m : nums(lt.at("magnitudes"), "lambda.magnitudes")) c.lambdas.push_back(m * cplx(1, 1) / std::sqrt(2.0));
  if (!lt.contains("values") && !lt.contains("magnitudes")) c.lambdas = {20.0 * cplx(1, 1) / std::sqrt(2.0)};
  for (cplx l : c.lambdas)
    if (std::abs(l) == 0.0) bad("lambda", "lambda must be nonzero");

  const json& nt = table(j, "noise");
  check_keys(nt, "noise", {"level", "seed"});
  c.noise = num_or(nt, "level", 0.0, "noise");
  if (c.noise < 0.0) bad("noise.level", "must be non-negative");
  if (j.contains("seed")) {
    double s = num(j.at("seed"), "seed");
    if (s < 0 || s != std::floor(s)) bad("seed", "must be a non-negative integer");
    c.seed = j.at("seed").is_number_unsigned() ? j.at("seed").get<std::uint64_t>() : std::uint64_t(s);
  }
  if (nt.contains("seed")) c.seed = std::uint64_t(num(nt.at("seed"), "noise.seed"));

  const json& ot = table(j, "output");
  check_keys(ot, "output", {"dir", "quiet"});
  if (ot.contains("dir")) {
    if (!ot.at("dir").is_string()) bad("output.dir", "expected a path");
    c.out_dir = ot.at("dir").get<std::string>();
  }
  c.quiet = bool_or(ot, "quiet", false, "output");

  const json& st = table(j, "stages");
  check_keys(st, "stages", {"mesh", "forward", "synth", "invert", "sigma", "validate"});
  c.stages.mesh = bool_or(st, "mesh", true, "stages");
  c.stages.forward = bool_or(st, "forward", true, "stages");
  c.stages.synth = bool_or(st, "synth", true, "stages");
  c.stages.invert = bool_or(st, "invert", true, "stages");
  c.stages.sigma = bool_or(st, "sigma", true, "stages");
  c.stages.validate = bool_or(st, "validate", false, "stages");
  if (c.stages.invert && !c.stages.synth) bad("stages.invert", "requires stages.synth");
  if (c.stages.synth && !c.stages.forward) bad("stages.synth", "requires stages.forward");

  const json& vt = table(j, "validate");
  check_keys(vt, "validate",
             {"gamma_samples", "area_deltas", "lambda_magnitudes", "zero_limit_etas", "zero_limit_lambda", "centers"});
  c.validate.gamma_samples = std::size_t(num_or(vt, "gamma_samples", double(c.validate.gamma_samples), "validate"));
  if (vt.contains("area_deltas")) c.validate.area_deltas = nums(vt.at("area_deltas"), "validate.area_deltas");
  if (vt.contains("lambda_magnitudes"))
    c.validate.lambda_magnitudes = nums(vt.at("lambda_magnitudes"), "validate.lambda_magnitudes");
  if (vt.contains("zero_limit_etas")) c.validate.zero_limit_etas = nums(vt.at("zero_limit_etas"), "validate.zero_limit_etas");
  c.validate.zero_limit_lambda = num_or(vt, "zero_limit_lambda", c.validate.zero_limit_lambda, "validate");
  c.validate.centers = int(num_or(vt, "centers", c.validate.centers, "validate"));
  std::sort(c.validate.lambda_magnitudes.begin(), c.validate.lambda_magnitudes.end());
  for (double d : c.validate.area_deltas)
    if (!(d > 0.0)) bad("validate.area_deltas", "must be positive");
  for (double e : c.validate.zero_limit_etas)
    if (!(e > 0.0)) bad("validate.zero_limit_etas", "must be positive");
  if (c.validate.centers < 1) bad("validate.centers", "must be at least 1");

  const json& at = table(j, "assert");
  check_keys(at, "assert", {"q_error_max", "q_error_decreasing", "estimates"});
  if (at.contains("q_error_max")) c.asserts.q_error_max = num(at.at("q_error_max"), "assert.q_error_max");
  c.asserts.q_error_decreasing = bool_or(at, "q_error_decreasing", false, "assert");
  c.asserts.estimates = bool_or(at, "estimates", false, "assert");

  const json& sw = table(j, "sweep");
  check_keys(sw, "sweep", {"axis", "values"});
  if (sw.contains("axis")) {
    if (!sw.at("axis").is_string()) bad("sweep.axis", "expected a string");
    c.sweep.axis = sw.at("axis").get<std::string>();
    if (c.sweep.axis != "lambda" && c.sweep.axis != "resolution" && c.sweep.axis != "noise")
      bad("sweep.axis", "expected lambda, resolution or noise");
  }
  if (sw.contains("values")) c.sweep.values = nums(sw.at("values"), "sweep.values");
  return c;
}

ScenarioConfig load_scenario(const std::string& path) {
  json j = load_config_file(path);
  std::string base = std::filesystem::path(path).parent_path().string();
  return scenario_from_json(j, base.empty() ? "." : base);
}

}  // namespace cgo
