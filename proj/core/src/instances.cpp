#include "multipac/instances.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "multipac/errors.hpp"
#include "multipac/rng.hpp"
#include "multipac/text.hpp"

namespace multipac {

Instance no_uniform_convergence_instance(int n) {
  if (n < 2) throw InvalidArgument("no_uniform_convergence_instance: need n >= 2");
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) names.push_back("x" + std::to_string(i));
  std::vector<double> mass(static_cast<std::size_t>(n), 1.0 / n);
  std::vector<double> z(static_cast<std::size_t>(n), 1.0);
  z[0] = 0.0;  // the lone negative point

  std::vector<int> all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), 0);

  Instance inst{
      "no_uc_" + std::to_string(n),
      Distribution::make(make_domain(std::move(names)), std::move(mass), std::move(z)),
      make_group_collection({Group{"all", std::move(all)}}, n),
      make_hypothesis_collection(
          {make_predictor("h_one", std::vector<double>(static_cast<std::size_t>(n), 1.0))},
          n),
      LossFunction::error_rates(1.0, 0.0)};
  return inst;
}

Instance group_conflict_instance(double a, double b) {
  Domain domain = make_domain({"x_S", "x_T", "x_ST"});
  // x_S and x_ST are metrically identical; x_T is far from both.
  Metric metric = Metric::make(3, {0, 1, 0,  //
                                   1, 0, 1,  //
                                   0, 1, 0});
  Instance inst{
      "group_conflict",
      Distribution::make(domain, {0.8, 0.1, 0.1}, {0.0, 1.0, 1.0}),
      make_group_collection({Group{"S", {0, 2}}, Group{"T", {1, 2}}}, 3),
      make_hypothesis_collection({make_predictor("h0", {0.0, 0.0, 0.0}),
                                  make_predictor("h1", {1.0, 1.0, 1.0})},
                                 3),
      LossFunction::if_plus_decomposable(a, b, std::move(metric),
                                         PerExampleLoss::zero_one)};
  return inst;
}

Instance properness_witness_instance(const LossFunction& L, const Distribution& D,
                                     std::vector<Predictor> alternatives,
                                     double grid_r) {
  const int n = D.domain_size();
  std::vector<Group> groups;
  std::vector<Predictor> hypotheses;
  for (int x : D.support()) {
    const std::string& pname = D.domain().point_names[static_cast<std::size_t>(x)];
    groups.push_back(Group{"pt_" + pname, {x}});
    // Optimal prediction for the singleton at x, tabulated; elsewhere 0.
    std::vector<double> values(static_cast<std::size_t>(n), 0.0);
    values[static_cast<std::size_t>(x)] =
        derive_f(L, D.label_prob()[static_cast<std::size_t>(x)], grid_r);
    hypotheses.push_back(make_predictor("hstar_" + pname, std::move(values)));
  }
  groups.push_back(Group{"support", D.support()});

  int alt_index = 0;
  for (auto& alt : alternatives) {
    if (alt.name.empty()) alt.name = "alt" + std::to_string(alt_index);
    ++alt_index;
    hypotheses.push_back(std::move(alt));
  }

  return Instance{"properness_witness", D,
                  make_group_collection(std::move(groups), n),
                  make_hypothesis_collection(std::move(hypotheses), n), L};
}

namespace {

LossFunction loss_for_kind(const std::string& kind) {
  if (kind == "squared") return LossFunction::decomposable(PerExampleLoss::squared);
  if (kind == "zero_one") return LossFunction::decomposable(PerExampleLoss::zero_one);
  if (kind == "calibration") return LossFunction::calibration();
  throw InvalidArgument("random_instance: unknown loss kind '" + kind +
                        "' (expected squared, zero_one, or calibration)");
}

}  // namespace

Instance random_instance(const RandomInstanceConfig& config) {
  if (config.n < 1 || config.num_groups < 1 || config.num_hypotheses < 1)
    throw InvalidArgument("random_instance: sizes must be >= 1");
  if (!(config.gamma > 0.0 && config.gamma <= 1.0))
    throw InvalidArgument("random_instance: gamma outside (0, 1]");

  Rng rng(config.seed);
  const auto n = static_cast<std::size_t>(config.n);

  std::vector<std::string> names;
  for (std::size_t i = 0; i < n; ++i) names.push_back("x" + std::to_string(i));

  // Flat Dirichlet via normalized exponentials; strictly positive masses.
  std::vector<double> mass(n);
  double total = 0.0;
  for (auto& m : mass) {
    m = -std::log1p(-rng.next_double());
    total += m;
  }
  for (auto& m : mass) m /= total;

  std::vector<double> z(n);
  for (auto& v : z) v = rng.next_double();

  LossFunction L = loss_for_kind(config.loss_kind);
  Distribution D = Distribution::make(make_domain(std::move(names)), mass, std::move(z));

  std::vector<Group> groups;
  for (int gi = 0; gi < config.num_groups; ++gi) {
    std::vector<int> members;
    for (int attempt = 0; attempt < 200 && members.empty(); ++attempt) {
      std::vector<int> pick;
      double picked_mass = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        if (rng.bernoulli(0.5)) {
          pick.push_back(static_cast<int>(i));
          picked_mass += mass[i];
        }
      if (!pick.empty() && picked_mass >= config.gamma) members = std::move(pick);
    }
    if (members.empty()) {
      // Deterministic fallback: heaviest points until gamma is covered.
      std::vector<int> order(n);
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), [&](int u, int v) {
        return mass[static_cast<std::size_t>(u)] > mass[static_cast<std::size_t>(v)];
      });
      double picked_mass = 0.0;
      for (int idx : order) {
        members.push_back(idx);
        picked_mass += mass[static_cast<std::size_t>(idx)];
        if (picked_mass >= config.gamma) break;
      }
      std::sort(members.begin(), members.end());
    }
    groups.push_back(Group{"g" + std::to_string(gi), std::move(members)});
  }

  std::vector<double> grid;
  if (L.binary_only()) {
    grid = {0.0, 1.0};
  } else {
    for (double v = 0.0; v < 1.0 - 1e-12; v += config.hypothesis_grid)
      grid.push_back(v);
    grid.push_back(1.0);
  }
  std::vector<Predictor> hypotheses;
  for (int hi = 0; hi < config.num_hypotheses; ++hi) {
    std::vector<double> values(n);
    for (auto& v : values) {
      auto idx = static_cast<std::size_t>(rng.next_double() * static_cast<double>(grid.size()));
      if (idx >= grid.size()) idx = grid.size() - 1;
      v = grid[idx];
    }
    hypotheses.push_back(make_predictor("h" + std::to_string(hi), std::move(values)));
  }

  return Instance{"random_" + std::to_string(config.seed), std::move(D),
                  make_group_collection(std::move(groups), config.n),
                  make_hypothesis_collection(std::move(hypotheses), config.n), L};
}

namespace {

void append_doubles(std::string& out, const std::vector<double>& values) {
  for (double v : values) {
    out += ' ';
    out += format_g17(v);
  }
}

}  // namespace

std::string serialize_instance(const Instance& inst) {
  const Domain& domain = inst.distribution.domain();
  const int n = domain.size();
  if (inst.groups.items.empty()) throw InvalidArgument("serialize: instance has no groups");

  std::string out = "multipac-instance v1\n";
  if (!inst.name.empty()) out += "name " + inst.name + "\n";
  out += "domain " + std::to_string(n) + "\n";
  out += "points";
  for (const auto& p : domain.point_names) out += " " + p;
  out += "\n";
  for (std::size_t i = 0; i < domain.payloads.size(); ++i) {
    if (domain.payloads[i].empty()) continue;
    out += "payload " + std::to_string(i) + " " +
           std::to_string(domain.payloads[i].size());
    append_doubles(out, domain.payloads[i]);
    out += "\n";
  }
  out += "mass";
  append_doubles(out, inst.distribution.mass());
  out += "\nlabel_prob";
  append_doubles(out, inst.distribution.label_prob());
  out += "\n";
  for (const auto& g : inst.groups.items) {
    out += "group " + g.name;
    for (int m : g.members) out += " " + std::to_string(m);
    out += "\n";
  }
  for (const auto& h : inst.hypotheses.items) {
    out += "hypothesis " + h.name;
    append_doubles(out, h.values);
    out += "\n";
  }
  if (const Metric* metric = inst.loss.metric()) {
    if (metric->size() != n)
      throw InvalidArgument("serialize: metric size != domain size");
    for (int i = 0; i < n; ++i) {
      out += "metric_row " + std::to_string(i);
      for (int j = 0; j < n; ++j) out += " " + format_g17(metric->at(i, j));
      out += "\n";
    }
  }
  out += "loss " + inst.loss.describe() + "\n";
  out += "end\n";
  return out;
}

namespace {

struct LineReader {
  std::istringstream in;
  std::string line;
  int number = 0;

  explicit LineReader(const std::string& text) : in(text) {}

  bool next() {
    while (std::getline(in, line)) {
      ++number;
      if (!line.empty()) return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("instance line " + std::to_string(number) + ": " + msg);
  }
};

std::vector<double> read_doubles(LineReader& reader, const std::vector<std::string>& tokens,
                                 std::size_t from, std::size_t expected,
                                 const std::string& what) {
  if (tokens.size() - from != expected)
    reader.fail(what + ": expected " + std::to_string(expected) + " values, got " +
                std::to_string(tokens.size() - from));
  std::vector<double> out;
  out.reserve(expected);
  for (std::size_t i = from; i < tokens.size(); ++i)
    out.push_back(parse_double(tokens[i], what));
  return out;
}

LossFunction parse_loss_line(LineReader& reader, const std::vector<std::string>& tokens,
                             int n, const std::vector<double>* metric_entries) {
  if (tokens.size() < 2) reader.fail("loss: missing kind");
  const std::string& kind = tokens[1];

  auto keys = [&](std::size_t from) {
    std::vector<std::pair<std::string, std::string>> kv;
    for (std::size_t i = from; i < tokens.size(); ++i) {
      auto eq = tokens[i].find('=');
      if (eq == std::string::npos || eq == 0 || eq + 1 >= tokens[i].size())
        reader.fail("loss: expected key=value, got '" + tokens[i] + "'");
      kv.emplace_back(tokens[i].substr(0, eq), tokens[i].substr(eq + 1));
    }
    return kv;
  };
  auto get = [&](const std::vector<std::pair<std::string, std::string>>& kv,
                 const std::string& key) -> const std::string& {
    for (const auto& [k, v] : kv)
      if (k == key) return v;
    reader.fail("loss " + kind + ": missing key '" + key + "'");
  };
  auto parse_ell = [&](const std::string& v) {
    if (v == "zero_one") return PerExampleLoss::zero_one;
    if (v == "squared") return PerExampleLoss::squared;
    reader.fail("loss: unknown per-example loss '" + v + "'");
  };
  auto known = [&](const std::vector<std::pair<std::string, std::string>>& kv,
                   std::initializer_list<const char*> allowed) {
    for (const auto& [k, v] : kv) {
      bool ok = false;
      for (const char* a : allowed) ok = ok || k == a;
      if (!ok) reader.fail("loss " + kind + ": unknown key '" + k + "'");
    }
  };

  if (metric_entries && kind != "if_plus_decomposable")
    reader.fail("metric_row present but loss kind '" + kind + "' takes no metric");

  auto kv = keys(2);
  if (kind == "decomposable") {
    known(kv, {"ell"});
    return LossFunction::decomposable(parse_ell(get(kv, "ell")));
  }
  if (kind == "calibration") {
    known(kv, {"lambda"});
    return LossFunction::calibration(parse_double(get(kv, "lambda"), "loss lambda"));
  }
  if (kind == "if_plus_decomposable") {
    known(kv, {"a", "b", "ell"});
    if (!metric_entries)
      reader.fail("loss if_plus_decomposable: no metric_row lines were given");
    return LossFunction::if_plus_decomposable(
        parse_double(get(kv, "a"), "loss a"), parse_double(get(kv, "b"), "loss b"),
        Metric::make(n, *metric_entries), parse_ell(get(kv, "ell")));
  }
  if (kind == "error_rates") {
    known(kv, {"a", "b"});
    return LossFunction::error_rates(parse_double(get(kv, "a"), "loss a"),
                                     parse_double(get(kv, "b"), "loss b"));
  }
  reader.fail("loss: unknown kind '" + kind + "'");
}

}  // namespace

Instance parse_instance(const std::string& text) {
  LineReader reader(text);
  if (!reader.next() || reader.line != "multipac-instance v1")
    throw ParseError("instance line 1: expected header 'multipac-instance v1'");

  std::string name;
  int n = -1;
  std::vector<std::string> point_names;
  std::vector<std::vector<double>> payloads;
  std::vector<double> mass, label_prob;
  std::vector<Group> groups;
  std::vector<Predictor> hypotheses;
  std::vector<double> metric_entries;
  std::vector<bool> metric_row_seen;
  bool have_metric = false;
  bool have_loss = false, have_end = false;
  LossFunction loss_fn = LossFunction::decomposable(PerExampleLoss::zero_one);

  while (reader.next()) {
    auto tokens = split_ws(reader.line);
    const std::string& tag = tokens[0];

    if (tag == "name") {
      if (tokens.size() != 2) reader.fail("name: expected one token");
      name = tokens[1];
    } else if (tag == "domain") {
      if (tokens.size() != 2) reader.fail("domain: expected a point count");
      n = static_cast<int>(parse_int(tokens[1], "domain size"));
      if (n <= 0) reader.fail("domain: size must be positive");
    } else if (tag == "points") {
      if (n < 0) reader.fail("points: before domain line");
      if (tokens.size() != static_cast<std::size_t>(n) + 1)
        reader.fail("points: expected " + std::to_string(n) + " names");
      point_names.assign(tokens.begin() + 1, tokens.end());
    } else if (tag == "payload") {
      if (point_names.empty()) reader.fail("payload: before points line");
      if (tokens.size() < 3) reader.fail("payload: expected index and dimension");
      auto idx = parse_int(tokens[1], "payload index");
      if (idx < 0 || idx >= n) reader.fail("payload: point index out of range");
      auto dim = static_cast<std::size_t>(parse_int(tokens[2], "payload dimension"));
      if (payloads.empty()) payloads.assign(static_cast<std::size_t>(n), {});
      payloads[static_cast<std::size_t>(idx)] =
          read_doubles(reader, tokens, 3, dim, "payload");
    } else if (tag == "mass") {
      if (n < 0) reader.fail("mass: before domain line");
      mass = read_doubles(reader, tokens, 1, static_cast<std::size_t>(n), "mass");
    } else if (tag == "label_prob") {
      if (n < 0) reader.fail("label_prob: before domain line");
      label_prob =
          read_doubles(reader, tokens, 1, static_cast<std::size_t>(n), "label_prob");
    } else if (tag == "group") {
      if (tokens.size() < 3) reader.fail("group: expected a name and members");
      std::vector<int> members;
      for (std::size_t i = 2; i < tokens.size(); ++i)
        members.push_back(static_cast<int>(parse_int(tokens[i], "group member")));
      groups.push_back(Group{tokens[1], std::move(members)});
    } else if (tag == "hypothesis") {
      if (n < 0) reader.fail("hypothesis: before domain line");
      if (tokens.size() < 2) reader.fail("hypothesis: missing name");
      hypotheses.push_back(Predictor{
          tokens[1], read_doubles(reader, tokens, 2, static_cast<std::size_t>(n),
                                  "hypothesis " + tokens[1])});
    } else if (tag == "metric_row") {
      if (n < 0) reader.fail("metric_row: before domain line");
      if (tokens.size() < 2) reader.fail("metric_row: missing row index");
      if (!have_metric) {
        metric_entries.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(n),
                              0.0);
        metric_row_seen.assign(static_cast<std::size_t>(n), false);
        have_metric = true;
      }
      auto row = parse_int(tokens[1], "metric row index");
      if (row < 0 || row >= n) reader.fail("metric_row: row index out of range");
      auto values = read_doubles(reader, tokens, 2, static_cast<std::size_t>(n),
                                 "metric_row " + std::to_string(row));
      std::copy(values.begin(), values.end(),
                metric_entries.begin() + static_cast<std::ptrdiff_t>(row) * n);
      metric_row_seen[static_cast<std::size_t>(row)] = true;
    } else if (tag == "loss") {
      if (n < 0) reader.fail("loss: before domain line");
      if (have_metric)
        for (bool seen : metric_row_seen)
          if (!seen) reader.fail("loss: metric is missing rows");
      loss_fn = parse_loss_line(reader, tokens, n,
                                have_metric ? &metric_entries : nullptr);
      have_loss = true;
    } else if (tag == "end") {
      have_end = true;
      break;
    } else {
      reader.fail("unknown section '" + tag + "'");
    }
  }

  if (!have_end) throw ParseError("instance: unexpected end of file, no 'end' line");
  if (n < 0) throw ParseError("instance: missing 'domain' section");
  if (point_names.empty()) throw ParseError("instance: missing 'points' section");
  if (mass.empty()) throw ParseError("instance: missing 'mass' section");
  if (label_prob.empty()) throw ParseError("instance: missing 'label_prob' section");
  if (groups.empty()) throw ParseError("instance: missing 'group' sections");
  if (hypotheses.empty()) throw ParseError("instance: missing 'hypothesis' sections");
  if (!have_loss) throw ParseError("instance: missing 'loss' section");

  try {
    Instance inst{std::move(name),
                  Distribution::make(make_domain(std::move(point_names), std::move(payloads)),
                                     std::move(mass), std::move(label_prob)),
                  make_group_collection(std::move(groups), n),
                  make_hypothesis_collection(std::move(hypotheses), n), loss_fn};
    return inst;
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(std::string("instance: ") + e.what());
  }
}

void save_instance(const Instance& instance, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IOFailure("cannot open '" + path + "' for writing");
  out << serialize_instance(instance);
  if (!out) throw IOFailure("failed writing '" + path + "'");
}

Instance load_instance(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IOFailure("cannot open '" + path + "' for reading");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_instance(buffer.str());
}

}  // namespace multipac
