#include "tezo/config.hpp"

#include <fstream>
#include <sstream>

namespace tezo {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "on") return true;
  if (v == "false" || v == "0" || v == "off") return false;
  throw ConfigError("config: bad boolean for key '" + key + "': " + v);
}

}  // namespace

void RunConfig::apply(const std::string& key, const std::string& value) {
  try {
    if (key == "optimizer") optimizer = value;
    else if (key == "objective") objective = value;
    else if (key == "steps") steps = std::stoull(value);
    else if (key == "eta") eta = std::stod(value);
    else if (key == "rho") rho = std::stod(value);
    else if (key == "beta1") beta1 = std::stod(value);
    else if (key == "beta2") beta2 = std::stod(value);
    else if (key == "eps") eps = std::stod(value);
    else if (key == "rank") rank = std::stoul(value);
    else if (key == "rank_auto") rank_auto = parse_bool(value, key);
    else if (key == "rank_threshold") rank_threshold = std::stod(value);
    else if (key == "rank_max") rank_max = std::stoul(value);
    else if (key == "lazy_interval") lazy_interval = std::stoul(value);
    else if (key == "unbiased_scale") unbiased_scale = parse_bool(value, key);
    else if (key == "seed") seed = std::stoull(value);
    else if (key == "record_every") record_every = std::stoull(value);
    else if (key == "out") out = value;
    else if (key == "format") format = value;
    else throw ConfigError("config: unknown key '" + key + "'");
  } catch (const std::invalid_argument&) {
    throw ConfigError("config: bad value for key '" + key + "': " + value);
  } catch (const std::out_of_range&) {
    throw ConfigError("config: value out of range for key '" + key + "': " + value);
  }
}

void RunConfig::validate() const {
  if (eta <= 0.0) throw ConfigError("config: eta must be > 0");
  if (rho <= 0.0) throw ConfigError("config: rho must be > 0");
  if (beta1 < 0.0 || beta1 >= 1.0) throw ConfigError("config: beta1 must be in [0, 1)");
  if (beta2 < 0.0 || beta2 >= 1.0) throw ConfigError("config: beta2 must be in [0, 1)");
  if (eps <= 0.0) throw ConfigError("config: eps must be > 0");
  if (rank < 1) throw ConfigError("config: rank must be >= 1");
  if (rank_max < 1) throw ConfigError("config: rank_max must be >= 1");
  if (rank_threshold <= 0.0 || rank_threshold >= 1.0)
    throw ConfigError("config: rank_threshold must be in (0, 1)");
  if (format != "csv" && format != "json")
    throw ConfigError("config: format must be csv or json");
}

std::vector<std::pair<std::string, std::string>> RunConfig::items() const {
  auto num = [](double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
  };
  return {
      {"optimizer", optimizer},
      {"objective", objective},
      {"steps", std::to_string(steps)},
      {"eta", num(eta)},
      {"rho", num(rho)},
      {"beta1", num(beta1)},
      {"beta2", num(beta2)},
      {"eps", num(eps)},
      {"rank", std::to_string(rank)},
      {"rank_auto", rank_auto ? "true" : "false"},
      {"rank_threshold", num(rank_threshold)},
      {"rank_max", std::to_string(rank_max)},
      {"lazy_interval", std::to_string(lazy_interval)},
      {"unbiased_scale", unbiased_scale ? "true" : "false"},
      {"seed", std::to_string(seed)},
      {"record_every", std::to_string(record_every)},
      {"format", format},
  };
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("config: cannot open " + path);
  RunConfig cfg;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: line " + std::to_string(lineno) +
                        " is not key = value: " + t);
    cfg.apply(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  return cfg;
}

}  // namespace tezo
