#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fdakit/io.hpp"
#include "test_util.hpp"

using namespace fdakit;
using namespace fdakit::io;

namespace {

std::filesystem::path scratch_dir(const std::string& name) {
  const auto d = std::filesystem::temp_directory_path() / ("fdakit_io_" + name);
  std::filesystem::remove_all(d);
  std::filesystem::create_directories(d);
  return d;
}

}  // namespace

TEST_CASE("dense json layout") {
  Eigen::MatrixXd m(2, 6);
  m << 1, 2, 3, 4, 5, 6, 7, kMissing, 9, 10, 11, 12;
  const auto x = make_dense({Axis({0, 1}), Axis({0, 0.5, 1})}, m, {"a", "b"});
  const json j = to_json(x);
  CHECK(j["kind"] == "dense");
  CHECK(j["X"][0][1][2] == 6.0);
  CHECK(j["X"][1][0][1].is_null());
  CHECK(j["names"][1] == "b");
  CHECK(j["argvals"][1][1] == 0.5);
  CHECK(identical(dense_from_json(j), x));
  CHECK_FALSE(to_json(testing::random_dense({Axis({0, 1})}, 1, 1)).contains("names"));

  json bad = j;
  bad["X"][0][1] = json::array({1, 2});
  CHECK_THROWS_AS(dense_from_json(bad), ValidationError);
  bad = j;
  bad["kind"] = "sparse";
  CHECK_THROWS_AS(fundata_from_json(bad), ValidationError);
}

TEST_CASE("container json round trips") {
  Rng rng(4);
  for (int rep = 0; rep < 20; ++rep) {
    const auto x = testing::random_dense({Axis(testing::random_points(rng, 1 + rng.index(6)))}, 1 + rng.index(4),
                                         rng.index(1000));
    CHECK(identical(dense_from_json(json::parse(to_json(x).dump())), x));
    const auto ir = testing::cd4_like(1 + rng.index(8), rng.index(1000));
    CHECK(identical(irreg_from_json(json::parse(to_json(ir).dump())), ir));
    const auto mm = make_multi({x, testing::random_dense({Axis({0, 1}), Axis({2, 3, 4})}, n_obs(x), 3)});
    const auto back = fundata_from_json(json::parse(to_json(mm).dump()));
    REQUIRE(std::holds_alternative<MultiFunData>(back));
    CHECK(identical(std::get<MultiFunData>(back), mm));
  }
}

TEST_CASE("simulation result json") {
  const auto r = sim_fundata({Axis::equispaced(0, 1, 11)}, {3}, {BasisKind::fourier}, DecayKind::linear, 4, 1);
  const json j = to_json(r);
  CHECK(j["trueVals"].size() == 3);
  const auto d = fundata_from_json(j);
  REQUIRE(std::holds_alternative<DenseFunData>(d));
  CHECK(identical(std::get<DenseFunData>(d), r.data));
}

TEST_CASE("fit json") {
  const std::vector<ElementSystem> els = {{{Axis::equispaced(0, 1, 21)}, {3}, {BasisKind::fourier}},
                                          {{Axis::equispaced(0, 1, 21)}, {3}, {BasisKind::fourier}}};
  const auto data = sim_multifundata(MultiConstruction::split, els, DecayKind::linear, 10, 2).data;
  MFPCAOptions o;
  o.fit = true;
  const auto fit = mfpca(data, 3, std::vector<ExpansionSpec>(2, FpcaSpec{0.99, 3}), o);
  const json j = to_json(fit);
  for (const char* key : {"meanFunction", "functions", "values", "scores", "vectors", "normFactors", "weights", "fit"})
    CHECK(j.contains(key));
  const auto back = fit_from_json(json::parse(j.dump()));
  CHECK(back.values == fit.values);
  CHECK(back.scores == fit.scores);
  CHECK(back.vectors == fit.vectors);
  CHECK(identical(back.functions, fit.functions));
  CHECK(back.labels == fit.labels);
}

TEST_CASE("format_double") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(-2.5e-300) == "-2.5e-300");
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double v = rng.normal() * std::pow(10.0, rng.normal() * 20.0);
    CHECK(std::stod(format_double(v)) == v);
  }
}

TEST_CASE("long csv") {
  Eigen::MatrixXd m(2, 3);
  m << 1, 2, 3, 4, 5, 6;
  const auto x = make_dense({Axis({0, 0.5, 1})}, m);
  const std::string csv = long_csv(to_long(x));
  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  CHECK(line == "obs,element,arg1,value");
  std::size_t count = 0;
  while (std::getline(lines, line)) ++count;
  CHECK(count == 6);
  CHECK(csv.find('\r') == std::string::npos);

  Rng rng(8);
  for (int rep = 0; rep < 30; ++rep) {
    const auto t = testing::random_long_table(rng, 1 + rng.index(3));
    std::istringstream in(long_csv(t));
    CHECK(testing::same_rows(read_long_csv(in), t));
  }

  std::istringstream bad("obs,element,value\n1,1,2\n");
  CHECK_THROWS_AS(read_long_csv(bad), ValidationError);
  std::istringstream junk("obs,element,arg1,value\n1,1,x,2\n");
  CHECK_THROWS_AS(read_long_csv(junk), ValidationError);
}

TEST_CASE("expansion specs") {
  const auto dir = scratch_dir("spec");
  const auto basis = eval_basis(BasisKind::fourier, 3, Axis::equispaced(0, 1, 11));
  write_file_atomic(dir / "b.json", to_json(basis).dump());
  write_file_atomic(dir / "e.json",
                    R"([{"type":"fpca","pve":0.9},{"type":"fpca","npc":5},{"type":"dct","qThresh":0.9},)"
                    R"({"type":"given","functionsFile":"b.json","ortho":true}])");
  const auto specs = expansions_from_file(dir / "e.json");
  REQUIRE(specs.size() == 4);
  CHECK(std::get<FpcaSpec>(specs[0]).pve == 0.9);
  CHECK_FALSE(std::get<FpcaSpec>(specs[0]).npc);
  CHECK(*std::get<FpcaSpec>(specs[1]).npc == 5);
  CHECK(std::get<DctSpec>(specs[2]).q_thresh == 0.9);
  CHECK(identical(std::get<GivenSpec>(specs[3]).functions, basis));
  CHECK(std::get<GivenSpec>(specs[3]).ortho);
  CHECK_THROWS_AS(expansion_from_json(json{{"type", "splines1D"}}, dir), ValidationError);
  CHECK_THROWS_AS(expansion_from_json(json{{"type", "fpca"}, {"pve", 1.5}}, dir), ValidationError);
  CHECK_THROWS_AS(read_json_file(dir / "missing.json"), ValidationError);
}

TEST_CASE("atomic write") {
  const auto dir = scratch_dir("atomic");
  write_file_atomic(dir / "x.txt", "one");
  write_file_atomic(dir / "x.txt", "two");
  CHECK(read_text_file(dir / "x.txt") == "two");
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir)) ++files;
  CHECK(files == 1);
}
