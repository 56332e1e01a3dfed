#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <variant>

#include <json.hpp>

#include "fdakit/core.hpp"
#include "fdakit/expansions.hpp"
#include "fdakit/mfpca.hpp"
#include "fdakit/sim.hpp"

namespace fdakit::io {

using json = nlohmann::json;
using AnyFunData = std::variant<DenseFunData, IrregFunData, MultiFunData>;

// Canonical container JSON:
//   {"kind":"dense","argvals":[[...],...],"X":[[...],...],"names":[...]}
//   {"kind":"irregular","argvals":[[...],...],"X":[[...],...]}
//   {"kind":"multi","elements":[<dense>,...]}
// Missing dense cells are null. "names" is written only when labels were set.
json to_json(const DenseFunData& x);
json to_json(const IrregFunData& x);
json to_json(const MultiFunData& x);
json to_json(const AnyFunData& x);

DenseFunData dense_from_json(const json& j);
IrregFunData irreg_from_json(const json& j);
MultiFunData multi_from_json(const json& j);
/// Accepts any container, or a simulation result whose "data" is one.
AnyFunData fundata_from_json(const json& j);

template <typename Data>
json to_json(const SimResult<Data>& r) {
  json j;
  j["data"] = to_json(r.data);
  j["trueVals"] = std::vector<double>(r.true_values.data(), r.true_values.data() + r.true_values.size());
  j["trueFuns"] = to_json(r.true_functions);
  return j;
}

json to_json(const MFPCAFit& fit);
MFPCAFit fit_from_json(const json& j);
json to_json(const BootstrapBands& b);

json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const json& j);

/// {"type":"fpca","pve":0.99} | {"type":"fpca","npc":5} | {"type":"dct","qThresh":0.9} |
/// {"type":"given","functionsFile":"...","ortho":true,"scoresFile":"..."}; paths resolve against base_dir.
ExpansionSpec expansion_from_json(const json& j, const std::filesystem::path& base_dir);
std::vector<ExpansionSpec> expansions_from_file(const std::filesystem::path& path);

/// Shortest decimal string that reads back to the same double.
std::string format_double(double v);

/// Long CSV with header obs,element,arg1[,arg2,...],value; short rows leave trailing args empty.
void write_long_csv(std::ostream& os, const LongTable& t);
std::string long_csv(const LongTable& t);
LongTable read_long_csv(std::istream& is);

json read_json_file(const std::filesystem::path& path);
std::string read_text_file(const std::filesystem::path& path);
/// Writes via a sibling temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace fdakit::io
