#include "fdakit/io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <system_error>

namespace fdakit::io {

namespace {

using Eigen::Index;

const json& field(const json& j, const char* name) {
  if (!j.is_object() || !j.contains(name)) throw ValidationError(std::string("json: missing field '") + name + "'");
  return j.at(name);
}

double number(const json& v) {
  if (v.is_null()) return kMissing;
  if (!v.is_number()) throw ValidationError("json: expected a number or null");
  return v.get<double>();
}

std::vector<double> numbers(const json& v) {
  if (!v.is_array()) throw ValidationError("json: expected an array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& e : v) {
    if (!e.is_number()) throw ValidationError("json: expected a number");
    out.push_back(e.get<double>());
  }
  return out;
}

json cell(double v) { return is_missing(v) ? json(nullptr) : json(v); }

json nest(const Eigen::MatrixXd& vals, Index row, const std::vector<std::size_t>& shape, std::size_t dim,
          std::size_t offset) {
  json arr = json::array();
  std::size_t stride = 1;
  for (std::size_t k = dim + 1; k < shape.size(); ++k) stride *= shape[k];
  for (std::size_t j = 0; j < shape[dim]; ++j) {
    if (dim + 1 == shape.size()) {
      arr.push_back(cell(vals(row, static_cast<Index>(offset + j))));
    } else {
      arr.push_back(nest(vals, row, shape, dim + 1, offset + j * stride));
    }
  }
  return arr;
}

void flatten(const json& v, const std::vector<std::size_t>& shape, std::size_t dim, std::vector<double>& out) {
  if (!v.is_array() || v.size() != shape[dim]) {
    throw ValidationError("json: X does not match argvals (dimension " + std::to_string(dim + 1) + ")");
  }
  for (const auto& e : v) {
    if (dim + 1 == shape.size()) {
      out.push_back(number(e));
    } else {
      flatten(e, shape, dim + 1, out);
    }
  }
}

std::vector<std::string> names_from(const json& j) {
  if (!j.contains("names") || j.at("names").is_null()) return {};
  return j.at("names").get<std::vector<std::string>>();
}

json vec_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vec_from(const json& j) {
  const auto v = numbers(j);
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Index>(v.size()));
}

}  // namespace

json matrix_to_json(const Eigen::MatrixXd& m) {
  json arr = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(cell(m(i, c)));
    arr.push_back(std::move(row));
  }
  return arr;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  if (!j.is_array()) throw ValidationError("json: expected a matrix (array of rows)");
  if (j.empty()) return Eigen::MatrixXd(0, 0);
  const std::size_t cols = j.front().size();
  Eigen::MatrixXd m(static_cast<Index>(j.size()), static_cast<Index>(cols));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_array() || j[i].size() != cols) throw ValidationError("json: ragged matrix");
    for (std::size_t c = 0; c < cols; ++c) m(static_cast<Index>(i), static_cast<Index>(c)) = number(j[i][c]);
  }
  return m;
}

// ---------------------------------------------------------------- containers

json to_json(const DenseFunData& x) {
  json j;
  j["kind"] = "dense";
  json args = json::array();
  for (const auto& a : x.argvals()) args.push_back(a.points());
  j["argvals"] = std::move(args);
  const auto shape = x.shape();
  json rows = json::array();
  for (std::size_t i = 0; i < x.n_obs(); ++i) rows.push_back(nest(x.values(), static_cast<Index>(i), shape, 0, 0));
  j["X"] = std::move(rows);
  if (!x.names().empty()) j["names"] = x.names();
  return j;
}

json to_json(const IrregFunData& x) {
  json j;
  j["kind"] = "irregular";
  json args = json::array();
  for (const auto& a : x.argvals()) args.push_back(a.points());
  j["argvals"] = std::move(args);
  j["X"] = x.values();
  if (!x.names().empty()) j["names"] = x.names();
  return j;
}

json to_json(const MultiFunData& x) {
  json j;
  j["kind"] = "multi";
  json el = json::array();
  for (const auto& e : x.elements()) el.push_back(to_json(e));
  j["elements"] = std::move(el);
  return j;
}

json to_json(const AnyFunData& x) {
  return std::visit([](const auto& v) { return to_json(v); }, x);
}

DenseFunData dense_from_json(const json& j) {
  if (field(j, "kind") != "dense") throw ValidationError("json: expected kind 'dense'");
  std::vector<Axis> axes;
  std::vector<std::size_t> shape;
  for (const auto& a : field(j, "argvals")) {
    axes.emplace_back(numbers(a));
    shape.push_back(axes.back().size());
  }
  if (axes.empty()) throw ValidationError("json: dense argvals must not be empty");
  const json& x = field(j, "X");
  if (!x.is_array() || x.empty()) throw ValidationError("json: X must be a non-empty array");
  std::vector<double> flat;
  for (const auto& row : x) flatten(row, shape, 0, flat);
  shape.insert(shape.begin(), x.size());
  return make_dense(std::move(axes), shape, flat, names_from(j));
}

IrregFunData irreg_from_json(const json& j) {
  if (field(j, "kind") != "irregular") throw ValidationError("json: expected kind 'irregular'");
  std::vector<std::vector<double>> t, v;
  for (const auto& a : field(j, "argvals")) t.push_back(numbers(a));
  for (const auto& a : field(j, "X")) {
    std::vector<double> row;
    for (const auto& e : a) {
      const double d = number(e);
      if (is_missing(d)) throw ValidationError("json: irregular curves must not contain missing values");
      row.push_back(d);
    }
    v.push_back(std::move(row));
  }
  return IrregFunData(std::move(t), std::move(v), names_from(j));
}

MultiFunData multi_from_json(const json& j) {
  if (field(j, "kind") == "dense") return dense_to_multi(dense_from_json(j));
  if (field(j, "kind") != "multi") throw ValidationError("json: expected kind 'multi'");
  std::vector<DenseFunData> el;
  for (const auto& e : field(j, "elements")) el.push_back(dense_from_json(e));
  return MultiFunData(std::move(el));
}

AnyFunData fundata_from_json(const json& j) {
  if (j.is_object() && !j.contains("kind") && j.contains("data")) return fundata_from_json(j.at("data"));
  const auto& kind = field(j, "kind");
  if (kind == "dense") return dense_from_json(j);
  if (kind == "irregular") return irreg_from_json(j);
  if (kind == "multi") return multi_from_json(j);
  throw ValidationError("json: unknown container kind");
}

// ---------------------------------------------------------------- fits

json to_json(const MFPCAFit& fit) {
  json j;
  j["meanFunction"] = to_json(fit.mean_function);
  j["functions"] = to_json(fit.functions);
  j["values"] = vec_json(fit.values);
  j["scores"] = matrix_to_json(fit.scores);
  j["vectors"] = matrix_to_json(fit.vectors);
  j["normFactors"] = vec_json(fit.norm_factors);
  j["weights"] = fit.weights.values();
  if (fit.fit) j["fit"] = to_json(*fit.fit);
  j["labels"] = fit.labels;
  return j;
}

MFPCAFit fit_from_json(const json& j) {
  std::optional<MultiFunData> fitted;
  if (j.contains("fit")) fitted = multi_from_json(j.at("fit"));
  MFPCAFit f{multi_from_json(field(j, "meanFunction")),
             multi_from_json(field(j, "functions")),
             vec_from(field(j, "values")),
             matrix_from_json(field(j, "scores")),
             matrix_from_json(field(j, "vectors")),
             vec_from(field(j, "normFactors")),
             WeightVector(numbers(field(j, "weights"))),
             std::move(fitted),
             {},
             {},
             {},
             {}};
  if (j.contains("labels")) {
    f.labels = j.at("labels").get<std::vector<std::string>>();
  } else {
    for (Index i = 0; i < f.scores.rows(); ++i) f.labels.push_back(std::to_string(i + 1));
  }
  if (f.labels.size() != static_cast<std::size_t>(f.scores.rows())) {
    throw ValidationError("json: labels do not match score rows");
  }
  return f;
}

json to_json(const BootstrapBands& b) {
  json j;
  j["lower"] = to_json(b.lower);
  j["upper"] = to_json(b.upper);
  j["valuesCI"] = matrix_to_json(b.values_ci);
  j["alpha"] = b.alpha;
  j["B"] = b.replicates;
  return j;
}

// ---------------------------------------------------------------- expansions

ExpansionSpec expansion_from_json(const json& j, const std::filesystem::path& base_dir) {
  const std::string type = field(j, "type").get<std::string>();
  if (type == "fpca" || type == "uFPCA") {
    FpcaSpec s;
    if (j.contains("pve")) s.pve = j.at("pve").get<double>();
    if (!(s.pve > 0.0 && s.pve <= 1.0)) throw ValidationError("expansions: pve must lie in (0, 1]");
    if (j.contains("npc") && !j.at("npc").is_null()) {
      const auto npc = j.at("npc").get<long long>();
      if (npc < 1) throw ValidationError("expansions: npc must be positive");
      s.npc = static_cast<std::size_t>(npc);
    }
    return s;
  }
  if (type == "dct" || type == "DCT2D" || type == "DCT3D") {
    const double q = field(j, "qThresh").get<double>();
    if (!(q >= 0.0 && q < 1.0)) throw ValidationError("expansions: qThresh must lie in [0, 1)");
    return DctSpec{q};
  }
  if (type == "given") {
    const auto path = base_dir / field(j, "functionsFile").get<std::string>();
    GivenSpec s{dense_from_json(read_json_file(path)), std::nullopt, false};
    if (j.contains("ortho")) s.ortho = j.at("ortho").get<bool>();
    if (j.contains("scoresFile")) s.scores = matrix_from_json(read_json_file(base_dir / j.at("scoresFile").get<std::string>()));
    return s;
  }
  throw ValidationError("expansions: unknown type '" + type + "'");
}

std::vector<ExpansionSpec> expansions_from_file(const std::filesystem::path& path) {
  const json j = read_json_file(path);
  if (!j.is_array()) throw ValidationError("expansions: expected a JSON array with one entry per element");
  std::vector<ExpansionSpec> out;
  for (const auto& e : j) out.push_back(expansion_from_json(e, path.parent_path()));
  return out;
}

// ---------------------------------------------------------------- CSV

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_long_csv(std::ostream& os, const LongTable& t) {
  const std::size_t k = std::max<std::size_t>(t.n_args(), 1);
  os << "obs,element";
  for (std::size_t a = 1; a <= k; ++a) os << ",arg" << a;
  os << ",value\n";
  for (const auto& r : t.rows) {
    os << r.obs << ',' << r.element;
    for (std::size_t a = 0; a < k; ++a) {
      os << ',';
      if (a < r.args.size()) os << format_double(r.args[a]);
    }
    os << ',' << format_double(r.value) << '\n';
  }
}

std::string long_csv(const LongTable& t) {
  std::ostringstream os;
  write_long_csv(os, t);
  return os.str();
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw ValidationError("csv: bad number '" + s + "'");
  return v;
}

std::size_t parse_index(const std::string& s) {
  std::size_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw ValidationError("csv: bad index '" + s + "'");
  return v;
}

}  // namespace

LongTable read_long_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ValidationError("csv: empty input");
  const auto header = split_line(line);
  if (header.size() < 4 || header[0] != "obs" || header[1] != "element" || header.back() != "value") {
    throw ValidationError("csv: header must be obs,element,arg1[,...],value");
  }
  for (std::size_t a = 2; a + 1 < header.size(); ++a) {
    if (header[a] != "arg" + std::to_string(a - 1)) throw ValidationError("csv: unexpected column '" + header[a] + "'");
  }
  const std::size_t k = header.size() - 3;
  LongTable t;
  while (std::getline(is, line)) {
    if (line.empty() || line == "\r") continue;
    const auto f = split_line(line);
    if (f.size() != header.size()) throw ValidationError("csv: row has wrong field count");
    LongRow r;
    r.obs = parse_index(f[0]);
    r.element = parse_index(f[1]);
    bool ended = false;
    for (std::size_t a = 0; a < k; ++a) {
      const auto& s = f[2 + a];
      if (s.empty()) {
        ended = true;
        continue;
      }
      if (ended) throw ValidationError("csv: argument columns must be filled from the left");
      r.args.push_back(parse_double(s));
    }
    r.value = parse_double(f.back());
    t.rows.push_back(std::move(r));
  }
  return t;
}

// ---------------------------------------------------------------- files

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json_file(const std::filesystem::path& path) {
  try {
    return json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw ValidationError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write '" + tmp.string() + "'");
    out << content;
    if (!out.flush()) throw ValidationError("failed writing '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw ValidationError("cannot move output into place at '" + path.string() + "': " + ec.message());
}

}  // namespace fdakit::io
