#include "tezo/report.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

namespace tezo {

std::string csv_quote(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void Table::write_csv(std::ostream& os) const {
  for (const auto& [k, v] : meta) os << "# " << k << "=" << v << "\n";
  for (std::size_t i = 0; i < header.size(); ++i)
    os << (i ? "," : "") << csv_quote(header[i]);
  os << "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i)
      os << (i ? "," : "") << csv_quote(row[i]);
    os << "\n";
  }
}

void Table::write_json(std::ostream& os) const {
  nlohmann::ordered_json j;
  for (const auto& [k, v] : meta) j["meta"][k] = v;
  j["columns"] = header;
  j["rows"] = nlohmann::ordered_json::array();
  for (const auto& row : rows) j["rows"].push_back(row);
  os << j.dump(2) << "\n";
}

Table run_report_table(const RunConfig& cfg, const RunReport& rep) {
  Table t;
  t.meta = cfg.items();
  t.meta.emplace_back("initial_loss", format_double(rep.initial_loss));
  t.meta.emplace_back("final_loss", format_double(rep.final_loss));
  t.meta.emplace_back("steps_run", std::to_string(rep.steps_run));
  t.meta.emplace_back("skipped_steps", std::to_string(rep.skipped_steps));
  t.meta.emplace_back("elements_generated", std::to_string(rep.elements_generated));
  t.meta.emplace_back("state_floats", std::to_string(rep.state_floats));
  t.meta.emplace_back("termination", rep.termination);
  t.header = {"step", "loss", "elements_generated"};
  for (const auto& rec : rep.trajectory)
    t.rows.push_back({std::to_string(rec.step), format_double(rec.loss),
                      std::to_string(rec.elements_generated)});
  return t;
}

void emit_table(const Table& table, const std::string& format,
                const std::string& path) {
  std::ostringstream buf;
  if (format == "json")
    table.write_json(buf);
  else
    table.write_csv(buf);
  if (path.empty() || path == "-") {
    std::cout << buf.str();
    return;
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot open output file: " + path);
  out << buf.str();
  if (!out) throw IoError("failed writing output file: " + path);
}

ParsedReport parse_report_csv(std::istream& is) {
  ParsedReport rep;
  std::string line;
  bool header_seen = false;
  auto split = [](const std::string& s) {
    // Minimal RFC-4180 field splitter.
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const char c = s[i];
      if (quoted) {
        if (c == '"') {
          if (i + 1 < s.size() && s[i + 1] == '"') {
            cur += '"';
            ++i;
          } else {
            quoted = false;
          }
        } else {
          cur += c;
        }
      } else if (c == '"') {
        quoted = true;
      } else if (c == ',') {
        out.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    out.push_back(cur);
    return out;
  };
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string body = line.substr(line.find_first_not_of("# "));
      const auto eq = body.find('=');
      if (eq != std::string::npos)
        rep.meta[body.substr(0, eq)] = body.substr(eq + 1);
      continue;
    }
    if (!header_seen) {
      rep.header = split(line);
      header_seen = true;
    } else {
      rep.rows.push_back(split(line));
    }
  }
  return rep;
}

ModelParams load_model_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("bad model file " + path + ": " + e.what());
  }
  ModelParams model;
  for (const auto& layer : j.value("layers", nlohmann::json::array())) {
    Param2D p;
    p.name = layer.at("name").get<std::string>();
    p.block = layer.value("block", 0);
    const auto rows = layer.at("rows").get<std::size_t>();
    const auto cols = layer.at("cols").get<std::size_t>();
    const auto data = layer.at("data").get<std::vector<double>>();
    if (data.size() != rows * cols)
      throw IoError("model file layer " + p.name + ": data length mismatch");
    p.W = Matrix(rows, cols);
    p.W.raw() = data;
    model.mats.push_back(std::move(p));
  }
  for (const auto& vec : j.value("vectors", nlohmann::json::array())) {
    Param1D p;
    p.name = vec.at("name").get<std::string>();
    p.b = vec.at("data").get<std::vector<double>>();
    model.vecs.push_back(std::move(p));
  }
  return model;
}

void save_model_json(const ModelParams& model, const std::string& path) {
  nlohmann::ordered_json j;
  j["layers"] = nlohmann::ordered_json::array();
  for (const auto& p : model.mats)
    j["layers"].push_back({{"name", p.name},
                           {"block", p.block},
                           {"rows", p.W.rows()},
                           {"cols", p.W.cols()},
                           {"data", p.W.raw()}});
  j["vectors"] = nlohmann::ordered_json::array();
  for (const auto& p : model.vecs)
    j["vectors"].push_back({{"name", p.name}, {"data", p.b}});
  std::ofstream out(path);
  if (!out) throw IoError("cannot open model file for writing: " + path);
  out << j.dump(2) << "\n";
}

}  // namespace tezo
