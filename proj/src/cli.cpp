#include "fdakit/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <limits>
#include <sstream>

#include <CLI11.hpp>

#include "fdakit/core.hpp"
#include "fdakit/expansions.hpp"
#include "fdakit/io.hpp"
#include "fdakit/mfpca.hpp"
#include "fdakit/ops.hpp"
#include "fdakit/sim.hpp"

namespace fdakit::cli {

namespace {

namespace fs = std::filesystem;
using io::AnyFunData;
using io::json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

double to_double(const std::string& s) {
  if (s == "inf" || s == "Inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf" || s == "-Inf") return -std::numeric_limits<double>::infinity();
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw UsageError("bad number '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    throw UsageError("bad number '" + s + "'");
  }
}

std::size_t to_count(const std::string& s) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(s, &pos);
    if (pos != s.size() || v < 0) throw UsageError("bad count '" + s + "'");
    return static_cast<std::size_t>(v);
  } catch (const std::logic_error&) {
    throw UsageError("bad count '" + s + "'");
  }
}

std::vector<double> doubles(const std::string& s) {
  std::vector<double> out;
  for (const auto& p : split(s, ',')) out.push_back(to_double(p));
  return out;
}

std::vector<std::size_t> counts(const std::string& s) {
  std::vector<std::size_t> out;
  for (const auto& p : split(s, ',')) out.push_back(to_count(p));
  return out;
}

/// a:b:n, n equispaced points from a to b inclusive.
Axis parse_grid(const std::string& s) {
  const auto p = split(s, ':');
  if (p.size() != 3) throw UsageError("grid must be a:b:n, got '" + s + "'");
  const std::size_t n = to_count(p[2]);
  if (n < 2) throw UsageError("grid needs at least two points");
  return Axis::equispaced(to_double(p[0]), to_double(p[1]), n);
}

std::pair<double, double> parse_interval(const std::string& s) {
  const auto p = split(s, ':');
  if (p.size() != 2) throw UsageError("interval must be lo:hi, got '" + s + "'");
  return {to_double(p[0]), to_double(p[1])};
}

std::vector<BasisKind> kinds_of(const std::string& s) {
  std::vector<BasisKind> out;
  for (const auto& p : split(s, ',')) out.push_back(parse_basis_kind(p));
  return out;
}

QuadRule rule_of(const std::string& s) {
  if (s == "trapezoidal") return QuadRule::trapezoidal;
  if (s == "midpoint") return QuadRule::midpoint;
  throw UsageError("rule must be trapezoidal or midpoint");
}

/// 1:5 (inclusive range) or 1,3,4; 1-based on the command line.
std::vector<std::size_t> parse_obs(const std::string& s) {
  std::vector<std::size_t> out;
  for (const auto& part : split(s, ',')) {
    const auto r = split(part, ':');
    if (r.size() == 1) {
      out.push_back(to_count(r[0]));
    } else if (r.size() == 2) {
      const std::size_t a = to_count(r[0]), b = to_count(r[1]);
      if (b < a) throw UsageError("observation range must be increasing");
      for (std::size_t i = a; i <= b; ++i) out.push_back(i);
    } else {
      throw UsageError("bad observation selection '" + s + "'");
    }
  }
  for (auto& i : out) {
    if (i == 0) throw UsageError("observation indices are 1-based");
    --i;
  }
  return out;
}

std::string dump(const json& j) { return j.dump() + "\n"; }

void write_json(const std::string& path, const json& j) { io::write_file_atomic(path, dump(j)); }

AnyFunData load(const std::string& path) { return io::fundata_from_json(io::read_json_file(path)); }

MultiFunData as_multi(const AnyFunData& d) {
  if (const auto* m = std::get_if<MultiFunData>(&d)) return *m;
  if (const auto* x = std::get_if<DenseFunData>(&d)) return dense_to_multi(*x);
  throw ValidationError("this command needs dense or multivariate data");
}

std::string join(const std::vector<std::size_t>& v, const char* sep = " ") {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += sep;
    s += std::to_string(v[i]);
  }
  return s;
}

std::vector<std::size_t> observed_counts(const DenseFunData& x) {
  std::vector<std::size_t> c;
  for (Eigen::Index i = 0; i < x.values().rows(); ++i) {
    c.push_back(static_cast<std::size_t>((x.values().row(i).array() == x.values().row(i).array()).count()));
  }
  return c;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string kind = "fourier";
  std::string m;
  std::string decay = "linear";
  std::size_t n = 0;
  std::vector<std::string> grids;
  std::vector<std::string> elements;
  std::string multi;
  std::uint64_t seed = 0;
  std::string out;
  std::string truth;
};

ElementSystem parse_element(const std::string& s) {
  const auto p = split(s, '/');
  if (p.size() != 3) throw UsageError("element must be GRID[,GRID]/KIND[,KIND]/M[,M], got '" + s + "'");
  ElementSystem e;
  for (const auto& g : split(p[0], ',')) e.argvals.push_back(parse_grid(g));
  e.kinds = kinds_of(p[1]);
  e.m = counts(p[2]);
  return e;
}

int do_simulate(const SimulateArgs& a, std::ostream& out) {
  const DecayKind decay = parse_decay_kind(a.decay);
  json data, truth;
  if (a.multi.empty()) {
    if (!a.elements.empty()) throw UsageError("--element requires --multi");
    if (a.grids.empty()) throw UsageError("--grid is required");
    std::vector<Axis> axes;
    for (const auto& g : a.grids) axes.push_back(parse_grid(g));
    auto kinds = kinds_of(a.kind);
    auto m = counts(a.m);
    if (kinds.size() == 1 && axes.size() > 1) kinds.assign(axes.size(), kinds[0]);
    const auto r = sim_fundata(axes, m, kinds, decay, a.n, a.seed);
    data = io::to_json(r.data);
    truth = io::to_json(r);
    out << "simulated " << r.data.n_obs() << " observations from " << r.true_values.size() << " eigenfunctions\n";
  } else {
    MultiConstruction c;
    if (a.multi == "split") {
      c = MultiConstruction::split;
    } else if (a.multi == "weighted") {
      c = MultiConstruction::weighted;
    } else {
      throw UsageError("--multi must be split or weighted");
    }
    std::vector<ElementSystem> el;
    if (!a.elements.empty()) {
      for (const auto& s : a.elements) el.push_back(parse_element(s));
    } else {
      const auto kinds = kinds_of(a.kind);
      const auto m = counts(a.m);
      if (kinds.size() != 1 || m.size() != 1) throw UsageError("use --element for tensor elements");
      for (const auto& g : a.grids) el.push_back({{parse_grid(g)}, m, kinds});
    }
    if (el.empty()) throw UsageError("--multi needs --grid or --element");
    const auto r = sim_multifundata(c, el, decay, a.n, a.seed);
    data = io::to_json(r.data);
    truth = io::to_json(r);
    out << "simulated " << r.data.n_obs() << " observations with " << r.data.size() << " elements from "
        << r.true_values.size() << " eigenfunctions\n";
  }
  write_json(a.out, data);
  if (!a.truth.empty()) {
    truth.erase("data");
    write_json(a.truth, truth);
  }
  return kExitOk;
}

// ---------------------------------------------------------------- transform

struct TransformArgs {
  std::string in, out;
  std::string obs;
  std::vector<std::string> windows;
  std::optional<double> scale, shift;
  bool log = false, exp = false, demean = false;
  std::string error;
  std::string sparsify;
  std::optional<std::uint64_t> seed;
};

std::vector<SparsifySpec> parse_bounds(const std::string& s) {
  std::vector<SparsifySpec> out;
  for (const auto& part : split(s, ',')) {
    const auto p = split(part, ':');
    if (p.size() != 2) throw UsageError("sparsify bounds must be min:max");
    out.push_back({to_count(p[0]), to_count(p[1])});
  }
  return out;
}

int do_transform(const TransformArgs& a, std::ostream& out, std::ostream& err) {
  if ((!a.error.empty() || !a.sparsify.empty()) && !a.seed) throw UsageError("--error and --sparsify require --seed");
  AnyFunData d = load(a.in);
  std::optional<std::vector<std::size_t>> obs;
  if (!a.obs.empty()) obs = parse_obs(a.obs);
  std::vector<Window> windows;
  for (const auto& w : a.windows) {
    const auto [lo, hi] = parse_interval(w);
    windows.push_back({lo, hi});
  }
  std::uint64_t seed = a.seed.value_or(0);

  std::visit(
      [&](auto& x) {
        using T = std::decay_t<decltype(x)>;
        if (obs || !windows.empty()) {
          if constexpr (std::is_same_v<T, DenseFunData>) {
            x = extract_obs(x, obs, windows);
          } else if constexpr (std::is_same_v<T, IrregFunData>) {
            if (windows.size() > 1) throw UsageError("irregular data takes one window");
            std::optional<Window> w;
            if (!windows.empty()) w = windows[0];
            auto sel = extract_obs(x, obs, w);
            if (sel.warning()) {
              err << "W_DROPPED: " << sel.dropped.size() << " curves had no points inside the window\n";
            }
            x = std::move(sel.data);
          } else {
            if (!windows.empty()) throw UsageError("windows are not supported for multivariate data");
            x = extract_obs(x, obs);
          }
        }
        if (a.scale || a.shift) {
          const double s = a.scale.value_or(1.0), b = a.shift.value_or(0.0);
          x = elementwise_map(x, [s, b](double v) { return v * s + b; });
        }
        if (a.log) x = elementwise_map(x, [](double v) { return std::log(v); });
        if (a.exp) x = elementwise_map(x, [](double v) { return std::exp(v); });
        if (a.demean) x = arith(ArithOp::sub, x, mean_function(x));
        if (!a.error.empty()) {
          const auto sd = doubles(a.error);
          if constexpr (std::is_same_v<T, MultiFunData>) {
            x = add_error(x, sd.size() == 1 ? std::vector<double>(x.size(), sd[0]) : sd, seed);
          } else {
            if (sd.size() != 1) throw UsageError("--error takes one value for univariate data");
            x = add_error(x, sd[0], seed);
          }
          ++seed;
        }
        if (!a.sparsify.empty()) {
          const auto b = parse_bounds(a.sparsify);
          if constexpr (std::is_same_v<T, MultiFunData>) {
            x = sparsify(x, b.size() == 1 ? std::vector<SparsifySpec>(x.size(), b[0]) : b, seed);
          } else if constexpr (std::is_same_v<T, DenseFunData>) {
            if (b.size() != 1) throw UsageError("--sparsify takes one bound pair for univariate data");
            x = sparsify(x, b[0], seed);
          } else {
            throw ValidationError("sparsify needs dense data");
          }
        }
      },
      d);
  write_json(a.out, io::to_json(d));
  out << "wrote " << a.out << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- info

void info_dense(const DenseFunData& x, std::ostream& out, const std::string& indent) {
  out << indent << "nObsPoints: " << join(n_obs_points(x)) << "\n";
  out << indent << "dimSupp: " << dim_supp(x) << "\n";
  out << indent << "domain:";
  for (const auto& ax : x.argvals()) out << " [" << io::format_double(ax.front()) << ", " << io::format_double(ax.back()) << "]";
  out << "\n";
  if (x.has_missing()) out << indent << "observedPoints: " << join(observed_counts(x)) << "\n";
}

int do_info(const std::string& in, std::ostream& out) {
  const AnyFunData d = load(in);
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, DenseFunData>) {
          out << "kind: dense\nN: " << n_obs(x) << "\n";
          info_dense(x, out, "");
        } else if constexpr (std::is_same_v<T, IrregFunData>) {
          const auto s = n_obs_points(x);
          out << "kind: irregular\nN: " << n_obs(x) << "\n";
          out << "nObsPoints: " << join(s) << "\n";
          out << "dimSupp: 1\n";
          out << "nObsPoints range: " << *std::min_element(s.begin(), s.end()) << " "
              << *std::max_element(s.begin(), s.end()) << "\n";
        } else {
          out << "kind: multi\nN: " << n_obs(x) << "\np: " << x.size() << "\n";
          out << "dimSupp: " << join(dim_supp(x)) << "\n";
          for (std::size_t j = 0; j < x.size(); ++j) {
            out << "element " << j + 1 << ":\n";
            info_dense(x[j], out, "  ");
          }
        }
      },
      d);
  return kExitOk;
}

// ---------------------------------------------------------------- convert

int do_convert(const std::string& in, const std::string& to, const std::string& from_long, bool fill,
               const std::string& outp, std::ostream& out) {
  AnyFunData d = [&]() -> AnyFunData {
    if (from_long.empty()) return load(in);
    std::istringstream is(io::read_text_file(in));
    const LongTable t = io::read_long_csv(is);
    if (from_long == "dense") return dense_from_long(t, fill);
    if (from_long == "irregular") return irreg_from_long(t);
    if (from_long == "multi") return multi_from_long(t, fill);
    throw UsageError("--from-long must be dense, irregular or multi");
  }();
  if (to == "long") {
    const LongTable t = std::visit([](const auto& x) { return to_long(x); }, d);
    io::write_file_atomic(outp, io::long_csv(t));
  } else if (to == "irregular") {
    if (auto* x = std::get_if<DenseFunData>(&d)) d = dense_to_irreg(*x);
    if (!std::holds_alternative<IrregFunData>(d)) throw ValidationError("cannot convert this container to irregular");
    write_json(outp, io::to_json(d));
  } else if (to == "dense") {
    if (auto* x = std::get_if<IrregFunData>(&d)) d = irreg_to_dense(*x);
    if (auto* m = std::get_if<MultiFunData>(&d)) {
      if (m->size() != 1) throw ValidationError("only single-element multivariate data converts to dense");
      d = (*m)[0];
    }
    write_json(outp, io::to_json(d));
  } else if (to == "multi") {
    if (auto* x = std::get_if<IrregFunData>(&d)) d = irreg_to_dense(*x);
    if (auto* x = std::get_if<DenseFunData>(&d)) d = dense_to_multi(*x);
    write_json(outp, io::to_json(d));
  } else {
    throw UsageError("--to must be dense, irregular, multi or long");
  }
  out << "wrote " << outp << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- integrate / norm

struct IntegralArgs {
  std::string in, out, rule = "trapezoidal", domain, weights;
  bool squared = false;
};

int emit_values(const std::vector<std::string>& labels, const Eigen::VectorXd& v, const std::string& outp,
                std::ostream& out) {
  std::ostringstream s;
  s << "obs,value\n";
  for (Eigen::Index i = 0; i < v.size(); ++i) s << labels[static_cast<std::size_t>(i)] << ',' << io::format_double(v(i)) << "\n";
  if (outp.empty()) {
    out << s.str();
  } else {
    io::write_file_atomic(outp, s.str());
  }
  return kExitOk;
}

std::vector<std::string> labels_of(const AnyFunData& d) {
  std::vector<std::string> l;
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        const std::size_t n = n_obs(x);
        for (std::size_t i = 0; i < n; ++i) {
          if constexpr (std::is_same_v<T, MultiFunData>) {
            l.push_back(x[0].label(i));
          } else {
            l.push_back(x.label(i));
          }
        }
      },
      d);
  return l;
}

IrregIntegrationPolicy policy_of(const std::string& domain) {
  if (domain.empty()) return ObservedDomain{};
  const auto [lo, hi] = parse_interval(domain);
  return FullDomain{lo, hi};
}

int do_integrate(const IntegralArgs& a, std::ostream& out, bool as_norm) {
  const AnyFunData d = load(a.in);
  const QuadRule rule = rule_of(a.rule);
  const auto policy = policy_of(a.domain);
  std::optional<WeightVector> w;
  if (!a.weights.empty()) w = WeightVector(doubles(a.weights));
  if (w && !std::holds_alternative<MultiFunData>(d)) {
    if (w->size() != 1) throw ValidationError("univariate data takes a single weight");
  }
  const Eigen::VectorXd v = std::visit(
      [&](const auto& x) -> Eigen::VectorXd {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, IrregFunData>) {
          Eigen::VectorXd r = as_norm ? norm(x, true, rule, policy) : integrate(x, rule, policy);
          if (as_norm && w) r *= (*w)[0];
          if (as_norm && !a.squared) r = r.array().sqrt();
          return r;
        } else if constexpr (std::is_same_v<T, DenseFunData>) {
          if (!as_norm) return integrate(x, rule);
          return norm(dense_to_multi(x), a.squared, w, rule);
        } else {
          if (!as_norm) return integrate(x, rule);
          return norm(x, a.squared, w, rule);
        }
      },
      d);
  return emit_values(labels_of(d), v, a.out, out);
}

// ---------------------------------------------------------------- mfpca

struct MfpcaArgs {
  std::string in, out, expansions, weights, rule = "trapezoidal";
  std::size_t m = 0;
  bool fit = false;
  std::size_t bootstrap = 0;
  double alpha = 0.05;
  std::optional<std::uint64_t> seed;
};

int do_mfpca(const MfpcaArgs& a, std::ostream& out) {
  if (a.bootstrap > 0 && !a.seed) throw UsageError("--bootstrap requires --seed");
  const MultiFunData data = as_multi(load(a.in));
  const auto specs = io::expansions_from_file(a.expansions);
  MFPCAOptions opts;
  opts.fit = a.fit;
  opts.rule = rule_of(a.rule);
  if (a.weights == "auto") {
    opts.weights = integrated_variance_weights(data, opts.rule);
  } else if (!a.weights.empty()) {
    opts.weights = WeightVector(doubles(a.weights));
  }
  const MFPCAFit fit = mfpca(data, a.m, specs, opts);
  json j = io::to_json(fit);
  if (a.bootstrap > 0) {
    const auto bands = bootstrap_bands(data, a.m, specs, opts, {a.bootstrap, a.alpha, *a.seed});
    j["bootstrap"] = io::to_json(bands);
  }
  write_json(a.out, j);
  out << "component,value,proportion,cumulative\n";
  for (const auto& r : screeplot_data(fit)) {
    out << r.component << ',' << io::format_double(r.value) << ',' << io::format_double(r.proportion) << ','
        << io::format_double(r.cumulative) << "\n";
  }
  return kExitOk;
}

// ---------------------------------------------------------------- plotdata

int do_plotdata(const std::string& in, const std::string& outp, std::string scores_out, std::ostream& out) {
  const json j = io::read_json_file(in);
  if (j.is_object() && j.contains("meanFunction")) {
    const MFPCAFit fit = io::fit_from_json(j);
    // obs 0 is the mean function, obs m the m-th eigenfunction.
    LongTable t;
    const LongTable mean = to_long(fit.mean_function);
    for (auto r : mean.rows) {
      r.obs = 0;
      t.rows.push_back(std::move(r));
    }
    for (const auto& r : to_long(fit.functions).rows) t.rows.push_back(r);
    io::write_file_atomic(outp, io::long_csv(t));
    if (scores_out.empty()) {
      fs::path p(outp);
      scores_out = (p.parent_path() / (p.stem().string() + "_scores.csv")).string();
    }
    std::ostringstream s;
    s << "obs,label";
    for (Eigen::Index m = 0; m < fit.scores.cols(); ++m) s << ",score" << m + 1;
    s << "\n";
    for (Eigen::Index i = 0; i < fit.scores.rows(); ++i) {
      s << i + 1 << ',' << fit.labels[static_cast<std::size_t>(i)];
      for (Eigen::Index m = 0; m < fit.scores.cols(); ++m) s << ',' << io::format_double(fit.scores(i, m));
      s << "\n";
    }
    io::write_file_atomic(scores_out, s.str());
    out << "wrote " << outp << " and " << scores_out << "\n";
    return kExitOk;
  }
  const AnyFunData d = io::fundata_from_json(j);
  const LongTable t = std::visit([](const auto& x) { return to_long(x); }, d);
  io::write_file_atomic(outp, io::long_csv(t));
  out << "wrote " << outp << "\n";
  return kExitOk;
}

int usage_error(std::ostream& err, const std::string& msg) {
  err << "E_USAGE: " << msg << "\n";
  return kExitUsage;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"fdakit: functional data containers, simulation and multivariate FPCA"};
  app.require_subcommand(1);
  app.name("fdakit");

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "simulate data from a truncated Karhunen-Loeve expansion");
  c_sim->add_option("--kind", sim.kind, "basis kind(s): fourier, fourier_lin, legendre, wiener");
  c_sim->add_option("--m", sim.m, "number of eigenfunctions (comma list for tensor grids)");
  c_sim->add_option("--decay", sim.decay, "eigenvalue decay: linear, exponential, wiener");
  c_sim->add_option("--n", sim.n, "number of observations")->required();
  c_sim->add_option("--grid", sim.grids, "a:b:n grid; repeat per dimension (or per element with --multi)");
  c_sim->add_option("--multi", sim.multi, "multivariate construction: split or weighted");
  c_sim->add_option("--element", sim.elements, "GRID[,GRID]/KIND[,KIND]/M[,M] per element");
  c_sim->add_option("--seed", sim.seed, "random seed")->required();
  c_sim->add_option("--out", sim.out, "simulated data (JSON)")->required();
  c_sim->add_option("--truth", sim.truth, "true eigenvalues and eigenfunctions (JSON)");

  TransformArgs tr;
  auto* c_tr = app.add_subcommand("transform", "subset, map, perturb or sparsify data");
  c_tr->add_option("--in", tr.in)->required();
  c_tr->add_option("--out", tr.out)->required();
  c_tr->add_option("--obs", tr.obs, "1-based observations, e.g. 1:5 or 1,3");
  c_tr->add_option("--window", tr.windows, "lo:hi closed window; repeat per dimension");
  c_tr->add_option("--scale", tr.scale, "multiply values");
  c_tr->add_option("--shift", tr.shift, "add to values (after --scale)");
  c_tr->add_flag("--log", tr.log, "natural logarithm of values");
  c_tr->add_flag("--exp", tr.exp, "exponential of values");
  c_tr->add_flag("--demean", tr.demean, "subtract the mean function");
  c_tr->add_option("--error", tr.error, "noise standard deviation(s), comma list per element");
  c_tr->add_option("--sparsify", tr.sparsify, "min:max kept points per curve, comma list per element");
  c_tr->add_option("--seed", tr.seed, "random seed");

  std::string info_in;
  auto* c_info = app.add_subcommand("info", "print basic information");
  c_info->add_option("--in", info_in)->required();

  std::string cv_in, cv_to, cv_out, cv_from;
  bool cv_fill = false;
  auto* c_cv = app.add_subcommand("convert", "convert between container kinds and long CSV");
  c_cv->add_option("--in", cv_in)->required();
  c_cv->add_option("--to", cv_to, "dense, irregular, multi or long")->required();
  c_cv->add_option("--out", cv_out)->required();
  c_cv->add_option("--from-long", cv_from, "read --in as long CSV of kind dense, irregular or multi");
  c_cv->add_flag("--fill", cv_fill, "fill grid gaps with missing values when reading long CSV");

  IntegralArgs ig;
  auto* c_ig = app.add_subcommand("integrate", "integrate each observation");
  c_ig->add_option("--in", ig.in)->required();
  c_ig->add_option("--rule", ig.rule, "trapezoidal or midpoint");
  c_ig->add_option("--domain", ig.domain, "lo:hi full domain for irregular data");
  c_ig->add_option("--out", ig.out, "CSV output (default stdout)");

  IntegralArgs nm;
  auto* c_nm = app.add_subcommand("norm", "L2 norm of each observation");
  c_nm->add_option("--in", nm.in)->required();
  c_nm->add_option("--rule", nm.rule, "trapezoidal or midpoint");
  c_nm->add_option("--domain", nm.domain, "lo:hi full domain for irregular data");
  c_nm->add_option("--weights", nm.weights, "w1,w2,... element weights");
  c_nm->add_flag("--squared", nm.squared, "squared norm");
  c_nm->add_option("--out", nm.out, "CSV output (default stdout)");

  MfpcaArgs mf;
  auto* c_mf = app.add_subcommand("mfpca", "multivariate functional principal component analysis");
  c_mf->add_option("--in", mf.in)->required();
  c_mf->add_option("--expansions", mf.expansions, "JSON array of univariate expansions")->required();
  c_mf->add_option("--m", mf.m, "number of multivariate components")->required();
  c_mf->add_option("--weights", mf.weights, "auto or w1,w2,...");
  c_mf->add_option("--rule", mf.rule, "trapezoidal or midpoint");
  c_mf->add_flag("--fit", mf.fit, "store reconstructions");
  c_mf->add_option("--bootstrap", mf.bootstrap, "bootstrap replicates");
  c_mf->add_option("--alpha", mf.alpha, "bootstrap band level");
  c_mf->add_option("--seed", mf.seed, "bootstrap seed");
  c_mf->add_option("--out", mf.out)->required();

  std::string pd_in, pd_out, pd_scores;
  auto* c_pd = app.add_subcommand("plotdata", "export plot-ready long CSV");
  c_pd->add_option("--in", pd_in)->required();
  c_pd->add_option("--out", pd_out)->required();
  c_pd->add_option("--scores-out", pd_scores, "scores CSV for MFPCA fits");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    return usage_error(err, msg);
  }

  try {
    if (*c_sim) return do_simulate(sim, out);
    if (*c_tr) return do_transform(tr, out, err);
    if (*c_info) return do_info(info_in, out);
    if (*c_cv) return do_convert(cv_in, cv_to, cv_from, cv_fill, cv_out, out);
    if (*c_ig) return do_integrate(ig, out, false);
    if (*c_nm) return do_integrate(nm, out, true);
    if (*c_mf) return do_mfpca(mf, out);
    if (*c_pd) return do_plotdata(pd_in, pd_out, pd_scores, out);
  } catch (const UsageError& e) {
    return usage_error(err, e.what());
  } catch (const NumericError& e) {
    err << "E_NUMERIC: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const ValidationError& e) {
    err << "E_INPUT: " << e.what() << "\n";
    return kExitInput;
  } catch (const nlohmann::json::exception& e) {
    err << "E_INPUT: " << e.what() << "\n";
    return kExitInput;
  }
  return usage_error(err, "no command given");
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace fdakit::cli
