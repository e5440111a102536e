#ifndef TEZO_REPORT_HPP
#define TEZO_REPORT_HPP

#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "tezo/config.hpp"
#include "tezo/model.hpp"
#include "tezo/optimizers.hpp"

namespace tezo {

std::string csv_quote(const std::string& field);  // RFC-4180
std::string format_double(double v);              // round-trip precision

// Generic column table with `# key=value` header comments. CSV: comment
// lines, header row, data rows. JSON: one object with meta + rows.
struct Table {
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void write_csv(std::ostream& os) const;
  void write_json(std::ostream& os) const;
};

// Train-run report: config echo and totals as meta, trajectory as rows.
// Wall time is deliberately not embedded (reports are bitwise
// reproducible); the CLI prints it to stderr instead.
Table run_report_table(const RunConfig& cfg, const RunReport& rep);

// Writes to `path`, or stdout when path is empty or "-". Throws IoError
// on failure.
void emit_table(const Table& table, const std::string& format,
                const std::string& path);

struct ParsedReport {
  std::map<std::string, std::string> meta;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

ParsedReport parse_report_csv(std::istream& is);

// Model file: JSON {"layers":[{name, block, rows, cols, data}],
// "vectors":[{name, data}]}.
ModelParams load_model_json(const std::string& path);
void save_model_json(const ModelParams& model, const std::string& path);

}  // namespace tezo

#endif  // TEZO_REPORT_HPP
