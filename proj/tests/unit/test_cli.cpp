#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "nsds/cli.hpp"
#include "nsds/io.hpp"
#include "support/fields.hpp"

using namespace nsds;
using testfields::vec;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
  Json json() const { return Json::parse(out); }
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "nsds");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  Run r;
  r.code = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("nsds_cli_" + name)).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string unit_square_file() {
  const std::string path = temp_path("square.txt");
  std::ofstream(path) << "0 0\n1 0\n1 1\n0 1\n";
  return path;
}

}  // namespace

TEST_CASE("filippov-set examples") {
  const Run sq = run({"filippov-set", "--scenario", "move_away_1", "--point", "0,0"});
  REQUIRE(sq.code == 0);
  const Polytope want = Polytope::hull({vec({1, 0}), vec({0, 1}), vec({-1, 0}), vec({0, -1})});
  CHECK(hausdorff_distance(polytope_from_json(sq.json()), want) <= 1e-9);

  const Run diag = run({"filippov-set", "--scenario", "move_away_1", "--point", "0.5,0.5"});
  REQUIRE(diag.code == 0);
  CHECK(hausdorff_distance(polytope_from_json(diag.json()), Polytope::segment(vec({-1, 0}), vec({0, -1}))) <= 1e-9);

  const Run brick = run({"filippov-set", "--scenario", "brick", "--const", "nu=0.5", "--point", "0"});
  REQUIRE(brick.code == 0);
  CHECK(polytope_from_json(brick.json()).size() == 2);
}

TEST_CASE("gradient examples") {
  const Run abs = run({"gradient", "--function", "abs", "--point", "0"});
  REQUIRE(abs.code == 0);
  CHECK(hausdorff_distance(polytope_from_json(abs.json()), Polytope::interval(-1, 1)) <= 1e-12);
  CHECK(abs.json().at("exact") == true);

  const Run empty = run({"gradient", "--function", "neg_abs", "--point", "0", "--proximal"});
  REQUIRE(empty.code == 0);
  CHECK(empty.json().at("kind") == "EmptySet");

  const Run prox = run({"gradient", "--function", "abs", "--point", "0", "--proximal"});
  REQUIRE(prox.code == 0);
  CHECK(hausdorff_distance(polytope_from_json(prox.json()), Polytope::interval(-1, 1)) <= 1e-12);

  const Run g = run({"gradient", "--function", "disagreement", "--graph", "1-2,2-3", "--point", "0,1,5"});
  REQUIRE(g.code == 0);
  CHECK(hausdorff_distance(polytope_from_json(g.json()), Polytope::point(vec({-1, -3, 4}))) <= 1e-9);
}

TEST_CASE("consensus example") {
  const Run r = run({"consensus", "--graph", "1-2,2-3", "--variant", "sign", "--p0", "0,1,5"});
  REQUIRE(r.code == 0);
  const Json j = r.json();
  CHECK(j.at("schema") == 1);
  CHECK(std::abs(j.at("consensus_value").get<double>() - 2.5) <= 1e-3);
  CHECK(j.at("consensus_time").get<double>() <= 10.0);
  const Run norm = run({"consensus", "--graph", "1-2,2-3", "--variant", "norm", "--p0", "0,1,5"});
  CHECK(std::abs(norm.json().at("consensus_value").get<double>() - 2.0) <= 1e-3);
}

TEST_CASE("lyapunov reports") {
  const Run r = run({"lyapunov", "--scenario", "oscillator", "--function", "energy_oscillator", "--theorem", "thm1",
                     "--grid", "-1:1:21,-1:1:21"});
  REQUIRE(r.code == 0);
  CHECK(r.json().at("verdict") == "Certified");
  CHECK(r.json().at("checked_points") == 441);

  const Run bad = run({"lyapunov", "--scenario", "move_away_1", "--function", "smq", "--theorem", "thm1",
                       "--grid", "-1:1:11,-1:1:11"});
  REQUIRE(bad.code == 0);
  CHECK(bad.json().at("verdict") != "Certified");

  CHECK(run({"lyapunov", "--scenario", "oscillator", "--theorem", "thm9", "--grid", "-1:1:3,-1:1:3"}).code == 2);
  CHECK(run({"lyapunov", "--scenario", "oscillator", "--theorem", "thm1", "--grid", "-1:1"}).code == 2);
  const Run dim = run({"lyapunov", "--scenario", "oscillator", "--theorem", "thm1", "--grid", "-1:1:3"});
  CHECK(dim.code == 1);
  CHECK(dim.err.rfind("DimensionMismatch", 0) == 0);
  const Run agents = run({"lyapunov", "--scenario", "sphere_packing", "--theorem", "thm1", "--grid",
                          "0:1:2,0:1:2,0:1:2,0:1:2,0:1:2,0:1:2,0:1:2,0:1:2,0:1:2,0:1:2"});
  CHECK(agents.code == 1);
  CHECK(agents.err.rfind("Unsupported", 0) == 0);
}

TEST_CASE("simulate writes csv and json") {
  const std::string csv = temp_path("osc.csv");
  const Run r = run({"simulate", "--scenario", "oscillator", "--x0", "1,0", "--t-end", "2", "--out", csv});
  REQUIRE(r.code == 0);
  CHECK(r.json().at("samples").get<std::size_t>() > 100);
  std::ifstream in(csv);
  const Trajectory tr = read_trajectory_csv(in);
  CHECK(tr.final_time() == 2.0);

  const std::string json = temp_path("osc.json");
  REQUIRE(run({"simulate", "--scenario", "oscillator", "--x0", "1,0", "--t-end", "2", "--out", json, "--format",
               "json"}).code == 0);
  const Json j = Json::parse(slurp(json));
  CHECK(j.at("schema") == 1);
  CHECK(j.at("scenario") == "oscillator");
  CHECK(trajectory_from_json(j).size() == tr.size());

  const std::string packed = temp_path("packed.csv");
  REQUIRE(run({"simulate", "--scenario", "sphere_packing", "--seed", "3", "--t-end", "1", "--out", packed}).code == 0);
  std::filesystem::remove(csv);
  std::filesystem::remove(json);
  std::filesystem::remove(packed);
}

TEST_CASE("pack and determinism") {
  const std::string poly = unit_square_file();
  const std::string a = temp_path("pack_a.csv");
  const std::string b = temp_path("pack_b.csv");
  const Run ra = run({"pack", "--n", "5", "--polygon", poly, "--seed", "11", "--out", a});
  const Run rb = run({"pack", "--n", "5", "--polygon", poly, "--seed", "11", "--out", b});
  REQUIRE(ra.code == 0);
  REQUIRE(rb.code == 0);
  CHECK(slurp(a) == slurp(b));
  const Json ja = ra.json();
  const Json jb = rb.json();
  CHECK(ja.at("out") == a);
  CHECK(ja.at("final_hsp") == jb.at("final_hsp"));
  CHECK(ja.at("final_hsp").get<double>() >= ja.at("initial_hsp").get<double>());
  CHECK(ja.at("converged") == true);

  const Run embedded = run({"pack", "--n", "3", "--polygon", poly, "--seed", "2", "--t-end", "1"});
  REQUIRE(embedded.code == 0);
  CHECK(embedded.json().at("trajectory").at("schema") == 1);

  const Run other = run({"pack", "--n", "5", "--polygon", poly, "--seed", "12"});
  CHECK(other.json().at("initial_state") != ja.at("initial_state"));

  const std::string bent = temp_path("bent.txt");
  std::ofstream(bent) << "0 0\n0 1\n1 1\n1 0\n";
  const Run cw = run({"pack", "--n", "2", "--polygon", bent, "--seed", "1"});
  CHECK(cw.code == 1);
  CHECK(cw.err.rfind("ModelError", 0) == 0);
  for (const auto& p : {poly, a, b, bent}) std::filesystem::remove(p);
}

TEST_CASE("sample-hold on the cart") {
  const Run r = run({"sample-hold", "--scenario", "cart", "--x0", "0.6,0.3", "--diam", "1e-3", "--t-end", "25"});
  REQUIRE(r.code == 0);
  const Json j = r.json();
  CHECK(j.at("partition_diameter").get<double>() <= 1e-3);
  CHECK(j.at("min_norm").get<double>() <= 0.05);
  CHECK(j.at("max_lyapunov_increase").get<double>() <= 1e-6);
  CHECK(run({"sample-hold", "--scenario", "brick", "--x0", "1", "--diam", "0.1", "--t-end", "1"}).code == 2);
}

TEST_CASE("plot subcommand") {
  const std::string csv = temp_path("plot.csv");
  const std::string dat = temp_path("plot.dat");
  REQUIRE(run({"simulate", "--scenario", "cart", "--x0", "0.6,0.3", "--t-end", "1", "--out", csv}).code == 0);
  const Run r = run({"plot", "--in", csv, "--kind", "level_overlay", "--function", "cart_lyapunov", "--out", dat});
  REQUIRE(r.code == 0);
  CHECK(r.json().at("files").size() == 2);
  CHECK(std::filesystem::exists(dat + ".level"));
  CHECK(run({"plot", "--in", csv, "--kind", "contour", "--out", dat}).code == 2);
  CHECK(run({"plot", "--in", temp_path("missing.csv"), "--kind", "time", "--out", dat}).code == 2);
  for (const auto& p : {csv, dat, dat + ".level"}) std::filesystem::remove(p);
}

TEST_CASE("argument errors exit 2 with usage") {
  const Run none = run({});
  CHECK(none.code == 2);
  CHECK(none.err.find("Usage") != std::string::npos);
  const Run missing = run({"simulate", "--scenario", "brick", "--t-end", "1"});
  CHECK(missing.code == 2);
  CHECK(missing.err.find("--out") != std::string::npos);
  CHECK(run({"simulate", "--scenario", "nope", "--x0", "1", "--t-end", "1", "--out", temp_path("n.csv")}).code == 2);
  CHECK(run({"simulate", "--scenario", "brick", "--const", "mass=2", "--x0", "1", "--t-end", "1", "--out",
             temp_path("n.csv")}).code == 2);
  CHECK(run({"simulate", "--scenario", "brick", "--x0", "one", "--t-end", "1", "--out", temp_path("n.csv")}).code == 2);
  CHECK(run({"simulate", "--scenario", "brick", "--x0", "1", "--t-end", "-1", "--out", temp_path("n.csv")}).code == 2);
  CHECK(run({"consensus", "--graph", "1-2,1-2", "--variant", "sign", "--p0", "0,1"}).code == 2);
  CHECK(run({"consensus", "--graph", "1-2", "--variant", "fast", "--p0", "0,1"}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  const Run help = run({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("simulate") != std::string::npos);
}

TEST_CASE("model errors exit 1 with the error name") {
  const Run dim = run({"filippov-set", "--scenario", "oscillator", "--point", "0"});
  CHECK(dim.code == 1);
  CHECK(dim.err.rfind("DimensionMismatch", 0) == 0);
  const Run cons = run({"consensus", "--graph", "1-2,2-3", "--variant", "sign", "--p0", "0,1"});
  CHECK(cons.code == 1);
  CHECK(cons.err.rfind("DimensionMismatch", 0) == 0);
  const Run unsup = run({"gradient", "--function", "cart_lyapunov", "--point", "0,0", "--proximal"});
  CHECK(unsup.code == 1);
  CHECK(unsup.err.rfind("Unsupported", 0) == 0);
}
