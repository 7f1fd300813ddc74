#include "smilewings/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "smilewings/error.hpp"

namespace smilewings::io {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path + " for reading");
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  return out;
}

// "q" or "name:q" tails of the left_wing key.
double wing_parameter(const std::string& spec, const std::string& source) {
  const auto colon = spec.find(':');
  double q = 0.0;
  if (colon == std::string::npos || !parse_double(spec.substr(colon + 1), q) || !(q > 0.0) || !std::isfinite(q)) {
    throw ParseError(source, 0, "left_wing '" + spec + "' needs a positive finite q, e.g. power_tail:1.5");
  }
  return q;
}

void write_json(std::ostream& os, const nlohmann::ordered_json& j, int indent, int depth) {
  const std::string pad = indent >= 0 ? std::string(static_cast<std::size_t>(indent * (depth + 1)), ' ') : "";
  const std::string close_pad = indent >= 0 ? std::string(static_cast<std::size_t>(indent * depth), ' ') : "";
  const char* nl = indent >= 0 ? "\n" : "";
  const char* sep = indent >= 0 ? ": " : ":";
  switch (j.type()) {
    case nlohmann::ordered_json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << '{' << nl;
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << ',' << nl;
        first = false;
        os << pad << nlohmann::ordered_json(it.key()).dump() << sep;
        write_json(os, it.value(), indent, depth + 1);
      }
      os << nl << close_pad << '}';
      return;
    }
    case nlohmann::ordered_json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      os << '[' << nl;
      bool first = true;
      for (const auto& v : j) {
        if (!first) os << ',' << nl;
        first = false;
        os << pad;
        write_json(os, v, indent, depth + 1);
      }
      os << nl << close_pad << ']';
      return;
    }
    case nlohmann::ordered_json::value_t::number_float: {
      const double v = j.get<double>();
      if (std::isfinite(v)) {
        os << format_double(v);
      } else {
        os << '"' << format_double(v) << '"';
      }
      return;
    }
    default:
      os << j.dump();
  }
}

}  // namespace

ParseError::ParseError(std::string source, int line, const std::string& message)
    : std::runtime_error(line > 0 ? source + ":" + std::to_string(line) + ": " + message : source + ": " + message),
      line_(line) {}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0.0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool parse_double(const std::string& text, double& out) {
  const std::string t = trim(text);
  if (t.empty()) return false;
  const char* b = t.data();
  const char* e = t.data() + t.size();
  if (*b == '+') ++b;
  const auto r = std::from_chars(b, e, out);
  return r.ec == std::errc() && r.ptr == e;
}

std::string dump_json(const nlohmann::ordered_json& j, int indent) {
  std::ostringstream os;
  write_json(os, j, indent, 0);
  return os.str();
}

std::string SmileFile::meta(const std::string& key) const {
  for (const auto& [k, v] : metadata) {
    if (k == key) return v;
  }
  return "";
}

void SmileFile::set_meta(const std::string& key, const std::string& value) {
  for (auto& [k, v] : metadata) {
    if (k == key) {
      v = value;
      return;
    }
  }
  metadata.emplace_back(key, value);
}

SmileFile parse_smile(std::istream& in, const std::string& source) {
  SmileFile file;
  std::string raw;
  int line_no = 0;
  bool header_seen = false;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string body = trim(line.substr(1));
      const auto eq = body.find('=');
      if (eq != std::string::npos) file.set_meta(trim(body.substr(0, eq)), trim(body.substr(eq + 1)));
      continue;
    }
    const auto cells = split_csv(line);
    if (!header_seen) {
      if (cells.size() != 2 || cells[0] != "log_moneyness" || cells[1] != "implied_vol") {
        throw ParseError(source, line_no, "expected header 'log_moneyness,implied_vol'");
      }
      header_seen = true;
      continue;
    }
    if (cells.size() != 2) throw ParseError(source, line_no, "expected 2 fields, got " + std::to_string(cells.size()));
    double x = 0.0;
    double iv = 0.0;
    if (!parse_double(cells[0], x) || !std::isfinite(x)) {
      throw ParseError(source, line_no, "log_moneyness '" + cells[0] + "' is not a finite number");
    }
    if (!parse_double(cells[1], iv) || std::isinf(iv) || iv < 0.0) {
      throw ParseError(source, line_no, "implied_vol '" + cells[1] + "' is not a non-negative number");
    }
    file.x.push_back(x);
    file.iv.push_back(iv);
    file.lines.push_back(line_no);
  }
  if (in.bad()) throw IoError("read error on " + source);
  if (!header_seen) throw ParseError(source, 0, "missing header 'log_moneyness,implied_vol'");
  return file;
}

SmileFile read_smile(const std::string& path) {
  auto in = open_in(path);
  return parse_smile(in, path);
}

void write_smile(std::ostream& out, const SmileFile& file) {
  for (const auto& [k, v] : file.metadata) out << "# " << k << '=' << v << '\n';
  out << "log_moneyness,implied_vol\n";
  for (std::size_t i = 0; i < file.x.size(); ++i) out << format_double(file.x[i]) << ',' << format_double(file.iv[i]) << '\n';
}

void write_smile(const std::string& path, const SmileFile& file) {
  auto out = open_out(path);
  write_smile(out, file);
  if (!out) throw IoError("write error on " + path);
}

SmileCurve to_curve(const SmileFile& file, const std::string& source) {
  auto line_of = [&](std::size_t i) { return i < file.lines.size() ? file.lines[i] : 0; };
  if (file.x.size() < 2) throw ParseError(source, 0, "a smile needs at least two rows");
  for (std::size_t i = 0; i < file.x.size(); ++i) {
    if (!(file.iv[i] > 0.0)) throw ParseError(source, line_of(i), "implied_vol must be positive to build a smile");
    if (i > 0 && !(file.x[i] > file.x[i - 1])) {
      throw ParseError(source, line_of(i), "log_moneyness must be strictly increasing");
    }
  }
  Interpolation interp = Interpolation::MonotoneCubic;
  const std::string im = file.meta("interpolation");
  if (im == "linear") {
    interp = Interpolation::Linear;
  } else if (!im.empty() && im != "monotone_cubic") {
    throw ParseError(source, 0, "unknown interpolation '" + im + "'");
  }
  std::optional<double> certified;
  const std::string cq = file.meta("certified_q");
  if (!cq.empty()) {
    double q = 0.0;
    if (!parse_double(cq, q) || !(q > 0.0)) throw ParseError(source, 0, "certified_q '" + cq + "' is not positive");
    certified = q;
  }
  LeftWing wing = ClampWing{};
  const std::string lw = file.meta("left_wing");
  if (lw.rfind("power_tail", 0) == 0) {
    wing = PowerTailWing{wing_parameter(lw, source)};
  } else if (lw.rfind("corollary", 0) == 0) {
    wing = CorollaryWing{wing_parameter(lw, source)};
  } else if (lw.empty()) {
    if (certified && std::isfinite(*certified) && file.x.front() < 0.0) wing = PowerTailWing{*certified};
  } else if (lw != "clamp") {
    throw ParseError(source, 0, "unknown left_wing '" + lw + "'");
  }
  SmileCurve curve(file.x, file.iv, interp, wing);
  curve.set_certified_q(certified);
  return curve;
}

SmileFile from_curve(const SmileCurve& curve, Metadata extra) {
  SmileFile file;
  file.metadata = std::move(extra);
  file.set_meta("interpolation", curve.interpolation() == Interpolation::Linear ? "linear" : "monotone_cubic");
  std::string wing = "clamp";
  if (const auto* p = std::get_if<PowerTailWing>(&curve.left_wing())) wing = "power_tail:" + format_double(p->q);
  if (const auto* c = std::get_if<CorollaryWing>(&curve.left_wing())) wing = "corollary:" + format_double(c->q);
  file.set_meta("left_wing", wing);
  if (curve.certified_q()) file.set_meta("certified_q", format_double(*curve.certified_q()));
  file.x.assign(curve.grid_x().begin(), curve.grid_x().end());
  file.iv.assign(curve.grid_iv().begin(), curve.grid_iv().end());
  return file;
}

const char* to_string(ValueKind kind) noexcept {
  return kind == ValueKind::PutPrice ? "put_price" : "implied_vol";
}

ChainFile parse_chain(std::istream& in, const std::string& source) {
  ChainFile file;
  std::string raw;
  int line_no = 0;
  bool header_seen = false;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    const auto cells = split_csv(line);
    if (!header_seen) {
      if (cells.size() != 3 || cells[0] != "log_moneyness" || cells[1] != "value" || cells[2] != "value_kind") {
        throw ParseError(source, line_no, "expected header 'log_moneyness,value,value_kind'");
      }
      header_seen = true;
      continue;
    }
    auto issue = [&](const std::string& m) { file.issues.push_back({line_no, source + ":" + std::to_string(line_no) + ": " + m}); };
    if (cells.size() != 3) {
      issue("expected 3 fields, got " + std::to_string(cells.size()));
      continue;
    }
    ChainFileRow row;
    row.line = line_no;
    if (!parse_double(cells[0], row.log_moneyness) || !std::isfinite(row.log_moneyness)) {
      issue("log_moneyness '" + cells[0] + "' is not a finite number");
      continue;
    }
    if (!parse_double(cells[1], row.value) || !std::isfinite(row.value)) {
      issue("value '" + cells[1] + "' is not a finite number");
      continue;
    }
    if (cells[2] == "put_price") {
      row.value_kind = ValueKind::PutPrice;
    } else if (cells[2] == "implied_vol") {
      row.value_kind = ValueKind::ImpliedVol;
      if (row.value < 0.0) {
        issue("implied_vol must be non-negative");
        continue;
      }
    } else {
      issue("value_kind '" + cells[2] + "' is not put_price or implied_vol");
      continue;
    }
    file.rows.push_back(row);
  }
  if (in.bad()) throw IoError("read error on " + source);
  if (!header_seen) throw ParseError(source, 0, "missing header 'log_moneyness,value,value_kind'");
  return file;
}

ChainFile read_chain(const std::string& path) {
  auto in = open_in(path);
  return parse_chain(in, path);
}

void write_chain(std::ostream& out, const std::vector<ChainFileRow>& rows) {
  out << "log_moneyness,value,value_kind\n";
  for (const auto& r : rows) out << format_double(r.log_moneyness) << ',' << format_double(r.value) << ',' << to_string(r.value_kind) << '\n';
}

void RunConfig::validate() const {
  if (!(tol > 0.0) || !std::isfinite(tol)) throw_domain("config: tol must be positive");
  if (!(z_range > 0.0) || !std::isfinite(z_range)) throw_domain("config: z_range must be positive");
  if (!(q_ceiling > 0.0)) throw_domain("config: q_ceiling must be positive");
}

RunConfig parse_config(std::istream& in, RunConfig base, const std::string& source, std::vector<std::string>* keys_set) {
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(source, line_no, "expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    double d = 0.0;
    auto number = [&]() {
      if (!parse_double(value, d)) throw ParseError(source, line_no, key + ": '" + value + "' is not a number");
      return d;
    };
    if (key == "tol") {
      base.tol = number();
    } else if (key == "q_ceiling") {
      base.q_ceiling = number();
    } else if (key == "z_range") {
      base.z_range = number();
    } else if (key == "seed") {
      std::uint64_t s = 0;
      const auto r = std::from_chars(value.data(), value.data() + value.size(), s);
      if (r.ec != std::errc() || r.ptr != value.data() + value.size()) {
        throw ParseError(source, line_no, "seed: '" + value + "' is not a non-negative integer");
      }
      base.seed = s;
    } else if (key == "output_format") {
      if (value == "json") {
        base.output_format = OutputFormat::Json;
      } else if (value == "csv") {
        base.output_format = OutputFormat::Csv;
      } else {
        throw ParseError(source, line_no, "output_format must be json or csv");
      }
    } else {
      throw ParseError(source, line_no, "unknown key '" + key + "'");
    }
    if (keys_set) keys_set->push_back(key);
  }
  if (in.bad()) throw IoError("read error on " + source);
  return base;
}

RunConfig read_config(const std::string& path, RunConfig base, std::vector<std::string>* keys_set) {
  auto in = open_in(path);
  return parse_config(in, base, path, keys_set);
}

}  // namespace smilewings::io
