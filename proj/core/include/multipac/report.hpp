#pragma once

#include <string>
#include <utility>
#include <vector>

#include "multipac/multigroup.hpp"
#include "multipac/oi.hpp"
#include "multipac/oracle.hpp"

namespace multipac {

// Ordered key/value run record, serialized one "key value" line at a time.
// Every run record carries the resolved schedule and the RNG algorithm
// identifier, so artifacts are self-describing and reproducible.
struct RunRecord {
  std::vector<std::pair<std::string, std::string>> fields;

  void add(const std::string& key, const std::string& value);
  void add(const std::string& key, double value);
  void add(const std::string& key, std::uint64_t value);
  void add_schedule(const Schedule& schedule);

  // `timestamp` prepends a "# generated_at <iso8601>" comment; leave it off
  // for byte-reproducible artifacts.
  std::string serialize(bool timestamp) const;
  void save(const std::string& path, bool timestamp) const;
};

std::string oi_report_csv(const OIReport& report);
std::string slack_csv(const SlackTable& table, double eps);
std::string verdict_csv(const FeasibilityVerdict& verdict);
std::string uc_csv(const std::vector<UcSummary>& rows);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace multipac
