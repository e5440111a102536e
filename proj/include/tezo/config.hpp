#ifndef TEZO_CONFIG_HPP
#define TEZO_CONFIG_HPP

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace tezo {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flat key = value run configuration. File keys and flag names coincide;
// flags win over file values. Serialized verbatim into every report.
struct RunConfig {
  std::string optimizer = "tezo";
  std::string objective = "quad16";
  std::uint64_t steps = 1000;
  double eta = 1e-3;
  double rho = 1e-3;       // Algorithm-1 default perturbation rate
  double beta1 = 0.9;
  double beta2 = 0.99;
  double eps = 1e-5;
  std::size_t rank = 4;
  bool rank_auto = false;
  double rank_threshold = 0.25;
  std::size_t rank_max = 64;
  std::size_t lazy_interval = 0;  // 0 = per-method default
  bool unbiased_scale = false;
  std::uint64_t seed = 42;
  std::uint64_t record_every = 100;
  std::string out;
  std::string format = "csv";

  void apply(const std::string& key, const std::string& value);
  void validate() const;
  // Ordered key/value echo for report headers.
  std::vector<std::pair<std::string, std::string>> items() const;
};

// key = value lines, '#' comments, blank lines ignored. Unknown keys are
// rejected with the offending key named.
RunConfig parse_config_file(const std::string& path);

}  // namespace tezo

#endif  // TEZO_CONFIG_HPP
