#include "multipac/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "multipac/errors.hpp"
#include "multipac/text.hpp"

namespace multipac {

const char* to_string(LossKind kind) {
  switch (kind) {
    case LossKind::decomposable: return "decomposable";
    case LossKind::calibration: return "calibration";
    case LossKind::if_plus_decomposable: return "if_plus_decomposable";
    case LossKind::error_rates: return "error_rates";
  }
  return "?";
}

const char* to_string(PerExampleLoss ell) {
  return ell == PerExampleLoss::zero_one ? "zero_one" : "squared";
}

Metric Metric::make(int n, std::vector<double> entries) {
  if (n <= 0) throw InvalidArgument("metric: empty");
  if (entries.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(n))
    throw InvalidArgument("metric: entry count != n*n");
  Metric m;
  m.n_ = n;
  m.entries_ = std::move(entries);
  for (int i = 0; i < n; ++i) {
    if (m.at(i, i) != 0.0) throw InvalidArgument("metric: nonzero diagonal");
    for (int j = 0; j < i; ++j) {
      if (!(m.at(i, j) >= 0.0) || !std::isfinite(m.at(i, j)))
        throw InvalidArgument("metric: negative or non-finite entry");
      if (m.at(i, j) != m.at(j, i)) throw InvalidArgument("metric: not symmetric");
    }
  }
  return m;
}

namespace {

void check_weights(double a, double b) {
  if (!(a >= 0.0) || !(b >= 0.0) || !(a + b <= 1.0 + 1e-12))
    throw InvalidArgument("loss weights: need a >= 0, b >= 0, a + b <= 1");
}

double per_example(PerExampleLoss ell, double v, double z) {
  if (ell == PerExampleLoss::squared) {
    double d1 = 1.0 - v;
    return z * d1 * d1 + (1.0 - z) * v * v;
  }
  // 0-1 loss against a Bernoulli(z) label; exact value comparisons are
  // intended, predictions off {0,1} are simply always wrong.
  return z * (v != 1.0 ? 1.0 : 0.0) + (1.0 - z) * (v != 0.0 ? 1.0 : 0.0);
}

void require_binary(const DistView& view, const double* values, const char* kind) {
  for (std::size_t i = 0; i < view.size(); ++i) {
    double v = values[view.point[i]];
    if (v != 0.0 && v != 1.0)
      throw NonBinaryPredictor(std::string(kind) +
                               ": predictor is not {0,1}-valued on the support");
  }
}

}  // namespace

LossFunction LossFunction::decomposable(PerExampleLoss ell) {
  LossFunction L;
  L.kind_ = LossKind::decomposable;
  L.ell_ = ell;
  return L;
}

LossFunction LossFunction::calibration(double lambda) {
  if (!(lambda >= 1e-4 && lambda <= 1.0))
    throw InvalidArgument("calibration: lambda must lie in [1e-4, 1]");
  LossFunction L;
  L.kind_ = LossKind::calibration;
  L.lambda_ = lambda;
  return L;
}

LossFunction LossFunction::if_plus_decomposable(double a, double b, Metric metric,
                                                PerExampleLoss ell) {
  check_weights(a, b);
  LossFunction L;
  L.kind_ = LossKind::if_plus_decomposable;
  L.a_ = a;
  L.b_ = b;
  L.ell_ = ell;
  L.metric_ = std::make_shared<const Metric>(std::move(metric));
  return L;
}

LossFunction LossFunction::error_rates(double a, double b) {
  check_weights(a, b);
  LossFunction L;
  L.kind_ = LossKind::error_rates;
  L.a_ = a;
  L.b_ = b;
  return L;
}

double LossFunction::evaluate(const DistView& view, const double* values,
                              LossFlags* flags) const {
  if (view.size() == 0) throw EmptySample("loss evaluation over an empty view");

  double out = 0.0;
  switch (kind_) {
    case LossKind::decomposable: {
      for (std::size_t i = 0; i < view.size(); ++i)
        out += view.mass[i] * per_example(ell_, values[view.point[i]], view.z[i]);
      break;
    }
    case LossKind::calibration: {
      const int buckets = static_cast<int>(std::ceil(1.0 / lambda_ - 1e-12));
      thread_local std::vector<double> w, wz, wv;
      thread_local std::vector<int> touched;
      if (static_cast<int>(w.size()) < buckets) {
        w.assign(static_cast<std::size_t>(buckets), 0.0);
        wz.assign(static_cast<std::size_t>(buckets), 0.0);
        wv.assign(static_cast<std::size_t>(buckets), 0.0);
      }
      touched.clear();
      for (std::size_t i = 0; i < view.size(); ++i) {
        double v = values[view.point[i]];
        if (!(v >= 0.0 && v <= 1.0))
          throw InvalidArgument("calibration: predictor value outside [0,1]");
        int b = std::min(static_cast<int>(v / lambda_), buckets - 1);
        auto bi = static_cast<std::size_t>(b);
        if (w[bi] == 0.0) touched.push_back(b);
        w[bi] += view.mass[i];
        wz[bi] += view.mass[i] * view.z[i];
        wv[bi] += view.mass[i] * v;
      }
      for (int b : touched) {
        auto bi = static_cast<std::size_t>(b);
        out += std::abs(wz[bi] - wv[bi]);
        w[bi] = wz[bi] = wv[bi] = 0.0;
      }
      break;
    }
    case LossKind::if_plus_decomposable: {
      require_binary(view, values, "if_plus_decomposable");
      const Metric& d = *metric_;
      double pair_mass = 0.0;
      for (std::size_t i = 0; i < view.size(); ++i) {
        double vi = values[view.point[i]];
        for (std::size_t j = i + 1; j < view.size(); ++j) {
          if (values[view.point[j]] != vi && d.zero(view.point[i], view.point[j]))
            pair_mass += 2.0 * view.mass[i] * view.mass[j];
        }
      }
      double dec = 0.0;
      for (std::size_t i = 0; i < view.size(); ++i)
        dec += view.mass[i] * per_example(ell_, values[view.point[i]], view.z[i]);
      out = a_ * pair_mass + b_ * dec;
      break;
    }
    case LossKind::error_rates: {
      require_binary(view, values, "error_rates");
      double neg = 0.0, pos = 0.0, fp = 0.0, fn = 0.0;
      for (std::size_t i = 0; i < view.size(); ++i) {
        double m = view.mass[i], z = view.z[i];
        double v = values[view.point[i]];
        neg += m * (1.0 - z);
        pos += m * z;
        if (v == 1.0) fp += m * (1.0 - z);
        if (v == 0.0) fn += m * z;
      }
      double fpr = 0.0, fnr = 0.0;
      if (neg > 0.0) {
        fpr = fp / neg;
      } else if (flags && a_ > 0.0) {
        flags->empty_conditional = true;
      }
      if (pos > 0.0) {
        fnr = fn / pos;
      } else if (flags && b_ > 0.0) {
        flags->empty_conditional = true;
      }
      out = a_ * fpr + b_ * fnr;
      break;
    }
  }
  return std::clamp(out, 0.0, 1.0);
}

double LossFunction::singleton(double v, double z, LossFlags* flags) const {
  if (binary_only() && v != 0.0 && v != 1.0)
    throw NonBinaryPredictor(std::string(to_string(kind_)) +
                             ": singleton prediction is not 0 or 1");
  switch (kind_) {
    case LossKind::decomposable:
      return per_example(ell_, v, z);
    case LossKind::calibration:
      return std::abs(z - v);
    case LossKind::if_plus_decomposable:
      // The pair term vanishes on a single point.
      return b_ * per_example(ell_, v, z);
    case LossKind::error_rates: {
      double fpr = 0.0, fnr = 0.0;
      if (z < 1.0) {
        fpr = v == 1.0 ? 1.0 : 0.0;
      } else if (flags && a_ > 0.0) {
        flags->empty_conditional = true;
      }
      if (z > 0.0) {
        fnr = v == 0.0 ? 1.0 : 0.0;
      } else if (flags && b_ > 0.0) {
        flags->empty_conditional = true;
      }
      return a_ * fpr + b_ * fnr;
    }
  }
  return 0.0;
}

std::uint64_t LossFunction::uc_sample_bound(double eps, double delta,
                                            std::uint64_t k) const {
  if (!(eps > 0.0 && eps < 1.0)) throw InvalidArgument("uc bound: eps outside (0,1)");
  if (!(delta > 0.0 && delta < 1.0))
    throw InvalidArgument("uc bound: delta outside (0,1)");
  if (k == 0) throw InvalidArgument("uc bound: k must be >= 1");

  long double m = 0.0L;
  const auto kl = static_cast<long double>(k);
  switch (kind_) {
    case LossKind::decomposable:
      m = std::log(2.0L * kl / delta) / (2.0L * eps * eps);
      break;
    case LossKind::calibration:
      m = cal_uc_constant_ * std::log(2.0L * kl / delta) / (2.0L * eps * eps);
      break;
    case LossKind::if_plus_decomposable:
      // Point term plus U-statistic pair term, each driven to eps/2 with
      // failure delta/2.
      m = std::log(4.0L * kl / delta) / (eps * eps);
      break;
    case LossKind::error_rates:
      throw NoUniformConvergence(
          "error_rates: no distribution-free uniform convergence bound exists; "
          "a vanishing-mass condition keeps the empirical deviation at 1 with "
          "probability arbitrarily close to 1");
  }
  long double up = std::ceil(m);
  if (!(up < 9.0e18L)) throw TooLarge("uc bound: sample size overflows");
  return static_cast<std::uint64_t>(up);
}

std::string LossFunction::describe() const {
  switch (kind_) {
    case LossKind::decomposable:
      return std::string("decomposable ell=") + to_string(ell_);
    case LossKind::calibration:
      return "calibration lambda=" + format_g17(lambda_);
    case LossKind::if_plus_decomposable:
      return "if_plus_decomposable a=" + format_g17(a_) + " b=" + format_g17(b_) +
             " ell=" + to_string(ell_);
    case LossKind::error_rates:
      return "error_rates a=" + format_g17(a_) + " b=" + format_g17(b_);
  }
  return "?";
}

namespace {

std::vector<double> candidate_grid(const LossFunction& L, double grid_r) {
  if (L.binary_only()) return {0.0, 1.0};
  if (!(grid_r > 0.0 && grid_r <= 0.5))
    throw InvalidArgument("grid: resolution outside (0, 0.5]");
  std::vector<double> grid;
  for (double v = 0.0; v < 1.0 - 1e-12; v += grid_r) grid.push_back(v);
  grid.push_back(1.0);
  return grid;
}

bool smooth_kind(const LossFunction& L) {
  return L.kind() == LossKind::calibration ||
         (L.kind() == LossKind::decomposable && L.ell() == PerExampleLoss::squared);
}

// Shared resolver behind derive_f and FProperTransform: grid argmin, then
// ternary refinement for smooth kinds. `throw_on_tie` selects between the
// strict derive_f contract and the total transform (smallest minimizer).
double resolve_f(const LossFunction& L, double z, double grid_r, bool throw_on_tie) {
  UnambiguityReport rep = check_unambiguity(L, z, grid_r);
  if (!rep.unique && throw_on_tie)
    throw Ambiguous("derive_f: no unique minimizer at z = " + format_g17(z) +
                    (rep.degenerate ? " (degenerate conditional)" : ""));
  if (!rep.unique || !smooth_kind(L)) return rep.minimizers.front();

  double lo = std::max(0.0, rep.minimizers.front() - grid_r);
  double hi = std::min(1.0, rep.minimizers.back() + grid_r);
  while (hi - lo > grid_r / 16.0) {
    double m1 = lo + (hi - lo) / 3.0;
    double m2 = hi - (hi - lo) / 3.0;
    if (L.singleton(m1, z) <= L.singleton(m2, z))
      hi = m2;
    else
      lo = m1;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

UnambiguityReport check_unambiguity(const LossFunction& L, double z, double grid_r) {
  if (!(z >= 0.0 && z <= 1.0)) throw InvalidArgument("check_unambiguity: z outside [0,1]");
  const std::vector<double> grid = candidate_grid(L, grid_r);

  UnambiguityReport rep;
  rep.min_value = std::numeric_limits<double>::infinity();
  std::vector<double> values(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    values[i] = L.singleton(grid[i], z);
    rep.min_value = std::min(rep.min_value, values[i]);
  }
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (values[i] <= rep.min_value + 1e-9) rep.minimizers.push_back(grid[i]);

  rep.unique = rep.minimizers.back() - rep.minimizers.front() <= 2.0 * grid_r + 1e-12;
  if (L.kind() == LossKind::error_rates && (z == 0.0 || z == 1.0)) {
    // Whatever the minimizer set looks like, it is an artifact of the
    // empty-conditional convention here.
    rep.degenerate = true;
    rep.unique = false;
  }
  return rep;
}

double derive_f(const LossFunction& L, double z, double grid_r) {
  return resolve_f(L, z, grid_r, /*throw_on_tie=*/true);
}

FProperTransform FProperTransform::derive(const LossFunction& L, double grid_r) {
  FProperTransform f;
  f.kind_ = L.kind();
  f.ell_ = L.ell();
  f.grid_r_ = grid_r;
  f.loss_ = std::make_shared<const LossFunction>(L);
  return f;
}

double FProperTransform::operator()(int, double z) const {
  if (kind_ == LossKind::decomposable) {
    if (ell_ == PerExampleLoss::squared) return z;
    return z >= 0.5 ? 1.0 : 0.0;
  }
  return resolve_f(*loss_, z, grid_r_, /*throw_on_tie=*/false);
}

Predictor FProperTransform::compose(const Predictor& p, const std::string& name) const {
  std::vector<double> out(p.values.size());
  for (std::size_t i = 0; i < p.values.size(); ++i)
    out[i] = (*this)(static_cast<int>(i), p.values[i]);
  return make_predictor(name, std::move(out));
}

double loss(const LossFunction& L, const Distribution& D, const Predictor& h,
            LossFlags* flags) {
  if (static_cast<int>(h.values.size()) != D.domain_size())
    throw InvalidArgument("loss: predictor size != domain size");
  if (L.metric() && L.metric()->size() != D.domain_size())
    throw InvalidArgument("loss: metric size != domain size");
  DistView v = D.view();
  return L.evaluate(v, h.values.data(), flags);
}

double empirical_loss(const LossFunction& L, const Domain& domain, const Sample& S,
                      const Predictor& h, LossFlags* flags) {
  if (static_cast<int>(h.values.size()) != domain.size())
    throw InvalidArgument("empirical_loss: predictor size != domain size");
  if (L.metric() && L.metric()->size() != domain.size())
    throw InvalidArgument("empirical_loss: metric size != domain size");
  EmpiricalDistribution emp(domain, S);
  DistView v = emp.view();
  return L.evaluate(v, h.values.data(), flags);
}

}  // namespace multipac
