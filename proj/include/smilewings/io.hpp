#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "smilewings/smile_curve.hpp"

namespace smilewings::io {

/// File could not be opened or read.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input; `line()` is 1-based, 0 when the whole file is at fault.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::string source, int line, const std::string& message);
  int line() const noexcept { return line_; }

 private:
  int line_;
};

using Metadata = std::vector<std::pair<std::string, std::string>>;

/// CSV with header `log_moneyness,implied_vol` and `# key=value` comment lines.
/// Reading checks each row on its own (finite x, implied_vol >= 0 or nan for
/// a row the producer could not fill); to_curve checks the rows as a curve.
struct SmileFile {
  Metadata metadata;
  std::vector<double> x;
  std::vector<double> iv;
  std::vector<int> lines;  // source line per row, 0 when built in memory

  /// Value of a metadata key, or "" when absent.
  std::string meta(const std::string& key) const;
  void set_meta(const std::string& key, const std::string& value);
};

SmileFile parse_smile(std::istream& in, const std::string& source = "<stream>");
SmileFile read_smile(const std::string& path);
void write_smile(std::ostream& out, const SmileFile& file);
void write_smile(const std::string& path, const SmileFile& file);

/// Builds the curve; rows must be strictly increasing in x with positive
/// implied vols (ParseError naming the line otherwise). Keys: interpolation (monotone_cubic | linear),
/// left_wing (clamp | power_tail:q | corollary:q), certified_q (number or inf).
/// Without a left_wing key a finite certified_q selects power_tail:q.
SmileCurve to_curve(const SmileFile& file, const std::string& source = "smile");

/// Smile file for a curve; metadata records interpolation, wing and certified_q.
SmileFile from_curve(const SmileCurve& curve, Metadata extra = {});

enum class ValueKind { PutPrice, ImpliedVol };
const char* to_string(ValueKind kind) noexcept;

struct ChainFileRow {
  double log_moneyness = 0.0;
  double value = 0.0;
  ValueKind value_kind = ValueKind::PutPrice;
  int line = 0;
};

/// A row that parsed but is not a usable quote.
struct RowIssue {
  int line;
  std::string message;
};

struct ChainFile {
  std::vector<ChainFileRow> rows;
  std::vector<RowIssue> issues;
};

/// Header `log_moneyness,value,value_kind`. Rows with a bad number or kind
/// are collected as issues; a missing or wrong header is a ParseError.
ChainFile parse_chain(std::istream& in, const std::string& source = "<stream>");
ChainFile read_chain(const std::string& path);
void write_chain(std::ostream& out, const std::vector<ChainFileRow>& rows);

enum class OutputFormat { Json, Csv };

struct RunConfig {
  double tol = 1e-8;
  double q_ceiling = 1e3;
  std::uint64_t seed = 42;
  double z_range = 12.0;
  OutputFormat output_format = OutputFormat::Json;

  /// Throws smilewings::Error(Domain) when tol or z_range is not positive.
  void validate() const;
};

/// Applies `key=value` lines (tol, q_ceiling, seed, z_range, output_format)
/// on top of `base`. Blank lines and lines starting with # are skipped.
/// `keys_set` receives the keys present, in file order.
RunConfig parse_config(std::istream& in, RunConfig base = {}, const std::string& source = "<stream>",
                       std::vector<std::string>* keys_set = nullptr);
RunConfig read_config(const std::string& path, RunConfig base = {}, std::vector<std::string>* keys_set = nullptr);

/// 17 significant digits (%.17g); inf and nan are spelled inf, -inf, nan.
std::string format_double(double v);
/// Accepts what format_double writes plus ordinary decimal forms.
bool parse_double(const std::string& text, double& out);

/// Deterministic JSON text: insertion order kept, floats with 17 significant
/// digits, non-finite floats as strings.
std::string dump_json(const nlohmann::ordered_json& j, int indent = 2);

}  // namespace smilewings::io
