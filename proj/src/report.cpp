#include "icx/report.hpp"

#include <sstream>
#include <stdexcept>

namespace icx {

nlohmann::json RunReport::to_json() const {
  // nlohmann::json objects keep keys sorted, which gives determinism for free
  nlohmann::json j;
  j["findings"] = findings;
  j["inputs"] = inputs;
  j["precision_bits"] = precision_bits;
  j["subcommand"] = subcommand;
  j["tool_version"] = tool_version;
  j["verdicts"] = verdicts;
  return j;
}

std::string RunReport::emit(const std::string& format) const {
  if (format == "json") return to_json().dump(2) + "\n";
  if (format == "text") {
    std::ostringstream os;
    os << tool_version << " " << subcommand << "\n";
    for (auto& [k, v] : verdicts.items()) os << "  " << k << ": " << v.dump() << "\n";
    for (auto& f : findings) os << "  finding: " << f << "\n";
    return os.str();
  }
  if (format == "csv") {
    std::ostringstream os;
    os << "key,value\n";
    for (auto& [k, v] : verdicts.items())
      os << k << "," << (v.is_string() ? v.get<std::string>() : v.dump()) << "\n";
    return os.str();
  }
  throw std::invalid_argument("unknown report format: " + format);
}

}  // namespace icx
