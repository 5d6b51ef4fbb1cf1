#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace icx {

// Machine-readable run report: deterministic serialization, sorted JSON keys.
struct RunReport {
  std::string tool_version = "icx 1.0.0";
  std::string subcommand;
  nlohmann::json inputs = nlohmann::json::object();
  nlohmann::json verdicts = nlohmann::json::object();
  std::vector<std::string> findings;
  double seconds = 0;
  unsigned precision_bits = 128;

  nlohmann::json to_json() const;
  std::string emit(const std::string& format) const;  // json | csv | text
};

}  // namespace icx
