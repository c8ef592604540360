#include "multipac/domain.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <unordered_set>

#include "multipac/errors.hpp"

namespace multipac {

namespace {

bool valid_name(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)  // names travel through both the text format and CSVs
    if (std::isspace(static_cast<unsigned char>(c)) || c == ',') return false;
  return true;
}

void require_unique_names(const std::vector<std::string>& names, const char* what) {
  std::unordered_set<std::string> seen;
  for (const auto& n : names)
    if (!seen.insert(n).second)
      throw InvalidArgument(std::string(what) + ": duplicate name '" + n + "'");
}

}  // namespace

Domain make_domain(std::vector<std::string> point_names,
                   std::vector<std::vector<double>> payloads) {
  if (point_names.empty()) throw InvalidArgument("domain: no points");
  for (const auto& n : point_names)
    if (!valid_name(n))
      throw InvalidArgument("domain: point name '" + n + "' is empty or has whitespace");
  require_unique_names(point_names, "domain");
  if (!payloads.empty() && payloads.size() != point_names.size())
    throw InvalidArgument("domain: payload count does not match point count");
  return Domain{std::move(point_names), std::move(payloads)};
}

Group make_group(std::string name, std::vector<int> members, int domain_size) {
  if (!valid_name(name))
    throw InvalidArgument("group: name '" + name + "' is empty or has whitespace");
  if (members.empty()) throw InvalidArgument("group '" + name + "': no members");
  for (std::size_t i = 0; i < members.size(); ++i) {
    if (members[i] < 0 || members[i] >= domain_size)
      throw InvalidArgument("group '" + name + "': member index out of range");
    if (i > 0 && members[i] <= members[i - 1])
      throw InvalidArgument("group '" + name + "': members not strictly increasing");
  }
  return Group{std::move(name), std::move(members)};
}

GroupCollection make_group_collection(std::vector<Group> groups, int domain_size) {
  std::vector<std::string> names;
  names.reserve(groups.size());
  for (auto& g : groups) {
    g = make_group(std::move(g.name), std::move(g.members), domain_size);
    names.push_back(g.name);
  }
  require_unique_names(names, "groups");
  return GroupCollection{std::move(groups)};
}

bool Predictor::is_binary() const {
  return std::all_of(values.begin(), values.end(),
                     [](double v) { return v == 0.0 || v == 1.0; });
}

Predictor make_predictor(std::string name, std::vector<double> values) {
  if (!name.empty() && !valid_name(name))
    throw InvalidArgument("predictor: name has whitespace");
  if (values.empty()) throw InvalidArgument("predictor: no values");
  for (double v : values)
    if (!(v >= 0.0 && v <= 1.0))
      throw InvalidArgument("predictor '" + name + "': value outside [0,1]");
  return Predictor{std::move(name), std::move(values)};
}

HypothesisCollection make_hypothesis_collection(std::vector<Predictor> hypotheses,
                                                int domain_size) {
  if (hypotheses.empty()) throw InvalidArgument("hypotheses: empty collection");
  std::vector<std::string> names;
  names.reserve(hypotheses.size());
  for (auto& h : hypotheses) {
    h = make_predictor(std::move(h.name), std::move(h.values));
    if (h.name.empty()) throw InvalidArgument("hypotheses: unnamed hypothesis");
    if (static_cast<int>(h.values.size()) != domain_size)
      throw InvalidArgument("hypothesis '" + h.name + "': wrong domain size");
    names.push_back(h.name);
  }
  require_unique_names(names, "hypotheses");
  return HypothesisCollection{std::move(hypotheses)};
}

Distribution Distribution::make(Domain domain, std::vector<double> mass,
                                std::vector<double> label_prob) {
  const auto n = static_cast<std::size_t>(domain.size());
  if (mass.size() != n) throw InvalidArgument("distribution: mass size != domain size");
  if (label_prob.size() != n)
    throw InvalidArgument("distribution: label_prob size != domain size");

  double total = 0.0;
  for (double m : mass) {
    if (!(m >= 0.0)) throw InvalidArgument("distribution: negative or NaN mass");
    total += m;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw InvalidArgument("distribution: masses sum to " + std::to_string(total) +
                          ", expected 1");
  for (double z : label_prob)
    if (!(z >= 0.0 && z <= 1.0))
      throw InvalidArgument("distribution: label probability outside [0,1]");

  // Masses are stored exactly as given (the 1e-9 budget above is the caller's
  // slack, not ours to redistribute); this keeps serialize/parse round trips
  // bit-identical.
  Distribution d;
  d.domain_ = std::move(domain);
  d.mass_ = std::move(mass);
  d.label_prob_ = std::move(label_prob);
  for (std::size_t i = 0; i < n; ++i)
    if (d.mass_[i] > 0.0) {
      d.support_.push_back(static_cast<int>(i));
      d.support_mass_.push_back(d.mass_[i]);
      d.support_z_.push_back(d.label_prob_[i]);
    }
  if (d.support_.empty()) throw InvalidArgument("distribution: empty support");
  d.alias_ = std::make_shared<AliasTable>(d.support_mass_);
  return d;
}

double Distribution::group_mass(const Group& g) const {
  double total = 0.0;
  for (int i : g.members) {
    if (i < 0 || i >= domain_.size())
      throw InvalidArgument("group '" + g.name + "': member index out of range");
    total += mass_[static_cast<std::size_t>(i)];
  }
  return total;
}

Distribution Distribution::restricted(const Group& g) const {
  double gm = group_mass(g);
  if (!(gm > 0.0))
    throw InvalidArgument("restrict: group '" + g.name + "' has zero mass");
  std::vector<double> m(mass_.size(), 0.0);
  for (int i : g.members) m[static_cast<std::size_t>(i)] = mass_[static_cast<std::size_t>(i)] / gm;
  return make(domain_, std::move(m), label_prob_);
}

Distribution Distribution::modeled(const Predictor& p) const {
  if (p.values.size() != mass_.size())
    throw InvalidArgument("modeled: predictor size != domain size");
  for (double v : p.values)
    if (!(v >= 0.0 && v <= 1.0))
      throw InvalidArgument("modeled: predictor value outside [0,1]");
  return make(domain_, mass_, p.values);
}

Sample Distribution::draw(int m, std::uint64_t seed) const {
  if (m < 0) throw InvalidArgument("draw: negative sample size");
  Rng rng(seed);
  Sample s;
  s.records.reserve(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) s.records.push_back(sample_record(rng));
  return s;
}

EmpiricalAccumulator::EmpiricalAccumulator(int domain_size)
    : count_(static_cast<std::size_t>(domain_size), 0),
      ones_(static_cast<std::size_t>(domain_size), 0) {
  if (domain_size <= 0) throw InvalidArgument("accumulator: empty domain");
}

void EmpiricalAccumulator::reset() {
  for (int p : touched_) {
    count_[static_cast<std::size_t>(p)] = 0;
    ones_[static_cast<std::size_t>(p)] = 0;
  }
  touched_.clear();
}

std::int64_t EmpiricalAccumulator::total_imp() const {
  std::int64_t t = 0;
  for (int p : touched_) t += count_[static_cast<std::size_t>(p)];
  return t;
}

DistView EmpiricalAccumulator::view() {
  std::sort(touched_.begin(), touched_.end());
  const double total = static_cast<double>(total_imp());
  view_point_.clear();
  view_mass_.clear();
  view_z_.clear();
  for (int p : touched_) {
    auto i = static_cast<std::size_t>(p);
    view_point_.push_back(p);
    view_mass_.push_back(static_cast<double>(count_[i]) / total);
    view_z_.push_back(static_cast<double>(ones_[i]) / static_cast<double>(count_[i]));
  }
  return DistView{view_point_, view_mass_, view_z_};
}

EmpiricalDistribution::EmpiricalDistribution(const Domain& domain, const Sample& sample) {
  if (sample.records.empty()) throw EmptySample("empirical view of an empty sample");
  EmpiricalAccumulator acc(domain.size());
  for (const auto& r : sample.records) {
    if (r.point < 0 || r.point >= domain.size())
      throw InvalidArgument("sample: point index out of range");
    if (r.label != 0 && r.label != 1)
      throw InvalidArgument("sample: label must be 0 or 1");
    acc.add(r.point, r.label);
  }
  DistView v = acc.view();
  point_.assign(v.point.begin(), v.point.end());
  mass_.assign(v.mass.begin(), v.mass.end());
  z_.assign(v.z.begin(), v.z.end());
}

}  // namespace multipac
