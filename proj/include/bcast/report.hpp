#pragma once

#include <chrono>
#include <ctime>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace bcast {

inline constexpr const char* tool_version = "1.0.0";

/// Everything needed to reproduce a report: the subcommand, the inputs'
/// content hashes and every parameter that influences the output.
struct RunManifest {
  std::string subcommand;
  std::vector<std::pair<std::string, std::string>> fields;  // in emission order

  void set(const std::string& key, std::string value) {
    for (auto& [k, v] : fields)
      if (k == key) {
        v = std::move(value);
        return;
      }
    fields.emplace_back(key, std::move(value));
  }
};

enum class ReportFormat { text, csv, structured };

/// Ordered key/value report. Keys are unique; values are preformatted so
/// that the three renderings agree byte for byte across runs.
class Report {
 public:
  explicit Report(RunManifest manifest) : manifest_(std::move(manifest)) {}

  void add(const std::string& key, std::string value) { rows_.emplace_back(key, std::move(value)); }
  RunManifest& manifest() { return manifest_; }
  const std::vector<std::pair<std::string, std::string>>& rows() const { return rows_; }

  void render(std::ostream& out, ReportFormat format) const {
    switch (format) {
      case ReportFormat::text:
        out << "# bcast " << manifest_.subcommand << "\n";
        out << "tool_version: " << tool_version << "\n";
        for (const auto& [k, v] : manifest_.fields) out << k << ": " << v << "\n";
        out << "--\n";
        for (const auto& [k, v] : rows_) out << k << ": " << v << "\n";
        break;
      case ReportFormat::csv: {
        std::vector<std::pair<std::string, std::string>> all{{"subcommand", manifest_.subcommand},
                                                             {"tool_version", tool_version}};
        all.insert(all.end(), manifest_.fields.begin(), manifest_.fields.end());
        all.insert(all.end(), rows_.begin(), rows_.end());
        for (std::size_t i = 0; i < all.size(); ++i) out << (i ? "," : "") << csv_cell(all[i].first);
        out << "\n";
        for (std::size_t i = 0; i < all.size(); ++i) out << (i ? "," : "") << csv_cell(all[i].second);
        out << "\n";
        break;
      }
      case ReportFormat::structured: {
        nlohmann::ordered_json j;
        j["manifest"]["subcommand"] = manifest_.subcommand;
        j["manifest"]["tool_version"] = tool_version;
        for (const auto& [k, v] : manifest_.fields) j["manifest"][k] = v;
        j["results"] = nlohmann::ordered_json::object();
        for (const auto& [k, v] : rows_) j["results"][k] = v;
        out << j.dump(2) << "\n";
        break;
      }
    }
  }

 private:
  static std::string csv_cell(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  }

  RunManifest manifest_;
  std::vector<std::pair<std::string, std::string>> rows_;
};

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace bcast
