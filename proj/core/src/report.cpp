#include "multipac/report.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>

#include "multipac/errors.hpp"
#include "multipac/text.hpp"

namespace multipac {

void RunRecord::add(const std::string& key, const std::string& value) {
  fields.emplace_back(key, value);
}

void RunRecord::add(const std::string& key, double value) {
  fields.emplace_back(key, format_g17(value));
}

void RunRecord::add(const std::string& key, std::uint64_t value) {
  fields.emplace_back(key, std::to_string(value));
}

void RunRecord::add_schedule(const Schedule& s) {
  add("eps", s.eps);
  add("delta", s.delta);
  add("gamma", s.gamma);
  add("eps_prime", s.eps_prime);
  add("alpha", s.alpha);
  add("delta_prime", s.delta_prime);
  add("eta", s.eta);
  add("tau", s.tau);
  add("k_g", s.k_g);
  add("k", s.k);
  add("rng", s.rng_algorithm);
}

std::string RunRecord::serialize(bool timestamp) const {
  std::string out = "multipac-run v1\n";
  if (timestamp) {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    out += std::string("# generated_at ") + buf + "\n";
  }
  for (const auto& [k, v] : fields) out += k + " " + v + "\n";
  return out;
}

void RunRecord::save(const std::string& path, bool timestamp) const {
  write_text_file(path, serialize(timestamp));
}

std::string oi_report_csv(const OIReport& report) {
  std::string out = "name,group,hypothesis,p_hat_real,p_hat_model,gap,trials,pass\n";
  for (const auto& r : report.rows) {
    out += r.name + "," + r.group + "," + r.hypothesis + "," +
           format_g17(r.p_hat_real) + "," + format_g17(r.p_hat_model) + "," +
           format_g17(r.gap) + "," + std::to_string(r.trials) + "," +
           (r.pass ? "1" : "0") + "\n";
  }
  return out;
}

std::string slack_csv(const SlackTable& table, double eps) {
  std::string out =
      "group,group_mass,model_loss,baseline,baseline_hypothesis,slack,eps,ok\n";
  for (const auto& r : table.rows) {
    out += r.group + "," + format_g17(r.group_mass) + "," + format_g17(r.model_loss) +
           "," + format_g17(r.baseline) + "," + r.baseline_hypothesis + "," +
           format_g17(r.slack) + "," + format_g17(eps) + "," + (r.ok ? "1" : "0") +
           "\n";
  }
  return out;
}

std::string verdict_csv(const FeasibilityVerdict& v) {
  std::string out;
  out += "# feasible " + std::string(v.feasible ? "1" : "0") + "\n";
  out += "# eps " + format_g17(v.eps) + "\n";
  out += "# grid_r " + format_g17(v.grid_r) + "\n";
  out += "# candidates_examined " + std::to_string(v.candidates_examined) + "\n";
  out += "# candidates_total " + std::to_string(v.candidates_total) + "\n";
  out += "# exhaustive " + std::string(v.exhaustive ? "1" : "0") + "\n";
  out += "# minimax_slack " + format_g17(v.minimax_slack) + "\n";
  out += "# minimax_witness " + v.minimax_witness + "\n";
  if (v.witness) {
    out += "# witness";
    for (double value : v.witness->values) out += " " + format_g17(value);
    out += "\n";
  }
  out += "group,min_achievable_slack\n";
  for (std::size_t i = 0; i < v.group_names.size(); ++i)
    out += v.group_names[i] + "," + format_g17(v.group_min_slack[i]) + "\n";
  return out;
}

std::string uc_csv(const std::vector<UcSummary>& rows) {
  std::string out = "m,reps,mean,p50,p90,p99,max,frac_dev_eq_1\n";
  for (const auto& r : rows) {
    out += std::to_string(r.m) + "," + std::to_string(r.reps) + "," +
           format_g17(r.mean) + "," + format_g17(r.p50) + "," + format_g17(r.p90) +
           "," + format_g17(r.p99) + "," + format_g17(r.max_dev) + "," +
           format_g17(r.frac_dev_eq_1) + "\n";
  }
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IOFailure("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw IOFailure("failed writing '" + path + "'");
}

}  // namespace multipac
