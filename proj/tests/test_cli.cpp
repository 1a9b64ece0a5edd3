// Exercises the installed `ossp` binary end to end; the binary path arrives as
// the first (non-doctest) argv entry from CTest.
#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;
using json = nlohmann::json;

static std::string g_bin;
static fs::path g_dir;

namespace {

struct RunResult {
  int code = -1;
  std::string output;  // stdout + stderr
};

RunResult run(const std::string& args) {
  std::string cmd = "cd " + g_dir.string() + " && " + g_bin + " " + args + " 2>&1";
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  RunResult r;
  char buf[512];
  while (fgets(buf, sizeof buf, p)) r.output += buf;
  int st = pclose(p);
  r.code = WEXITSTATUS(st);
  return r;
}

std::string slurp(const std::string& name) {
  std::ifstream in(g_dir / name, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::string& name, const std::string& bytes) {
  std::ofstream(g_dir / name, std::ios::binary) << bytes;
}

json jload(const std::string& name) { return json::parse(slurp(name)); }

}  // namespace

TEST_CASE("solve: unit chain values, policy, trace and manifest") {
  spit("chain.json",
       R"({"format":1,"n":3,"target":3,"actions":[)"
       R"([{"cost":1.0,"to":[[1,1.0]]}],[{"cost":1.0,"to":[[2,1.0]]}],)"
       R"([{"cost":1.0,"to":[[3,1.0]]}]]})");
  auto r = run("solve --model chain.json --method dijkstra --values v.csv "
               "--policy p.json --trace t.csv");
  CHECK(r.code == 0);
  CHECK(slurp("v.csv") == "node,value\n0,3\n1,2\n2,1\n3,0\n");
  auto man = jload("v.csv.manifest.json");
  CHECK(man["subcommand"] == "solve");
  CHECK(man["format"] == 1);
  CHECK(man["inputs"].contains("chain.json"));
  CHECK(man["outputs"].size() == 3);
  CHECK(jload("p.json")["choices"].size() == 3);
  CHECK(slurp("t.csv").rfind("step,node,updates\n", 0) == 0);

  // byte determinism
  auto r2 = run("solve --model chain.json --method vi --values v2.csv");
  auto r3 = run("solve --model chain.json --method vi --values v3.csv");
  CHECK(r2.code == 0);
  CHECK(slurp("v2.csv") == slurp("v3.csv"));
}

TEST_CASE("counterexample: built instance breaks the label-setting solvers") {
  CHECK(run("counterexample --out cex.json").code == 0);
  auto note = jload("cex.json.note.json");
  double vi = note["vi_at_x"], dj = note["label_setting_at_x"];
  CHECK(dj - vi >= 1e-6);

  auto chk = run("check --model cex.json --delta 0 --out rep.json");
  CHECK(chk.code == 2);
  auto rep = jload("rep.json");
  CHECK(!rep["satisfied"].get<bool>());
  CHECK(rep["violations"][0].contains("node"));
  CHECK(rep["violations"][0].contains("action"));
  CHECK(rep["violations"][0].contains("r"));

  // dial variant disagrees as well
  CHECK(run("counterexample --delta 0.3 --out cexd.json").code == 0);
  auto nd = jload("cexd.json.note.json");
  CHECK(nd["label_setting_at_x"].get<double>() - nd["vi_at_x"].get<double>() >= 1e-6);

  // parameters that satisfy Eq (3.3) are a usage error
  CHECK(run("counterexample --Ca 0.9 --Ctilde 1.0 --out nope.json").code == 3);
}

TEST_CASE("check passes on a certified model and prune round-trips") {
  CHECK(run("check --model chain.json --delta 0.5 --criterion simplified").code == 0);
  CHECK(run("prune --model cex.json --out pruned.json --report prep.json").code == 0);
  CHECK(jload("prep.json").contains("removed"));
  CHECK(run("solve --model pruned.json --method vi --values pv.csv").code == 0);
}

TEST_CASE("hjb: delta auto picks the certified Dial width") {
  auto r = run("hjb --nx 9 --h 0.125 --profile iso:1 --stencil 8pt "
               "--target 0.5,0.5 --method dial --delta auto --out u.csv --dirs d.csv");
  CHECK(r.code == 0);
  auto man = jload("u.csv.manifest.json");
  CHECK(man["parameters"]["delta_used"].get<double>() ==
        doctest::Approx(0.125 / std::sqrt(2.0)).epsilon(1e-12));
  // header + one row per grid node
  auto u_csv = slurp("u.csv");
  CHECK(std::count(u_csv.begin(), u_csv.end(), '\n') == 1 + 81);
  CHECK(slurp("d.csv").rfind("i,j,dx,dy\n", 0) == 0);

  // 4-point stencil is tangent: Delta = 0, auto refuses
  auto r0 = run("hjb --nx 9 --h 0.125 --profile iso:1 --stencil 4pt "
                "--target 0.5,0.5 --method dial --delta auto --out u0.csv --json-errors");
  CHECK(r0.code == 2);
  CHECK(r0.output.find("\"code\":2") != std::string::npos);

  // uncertified anisotropy refuses Dijkstra unless forced
  auto rr = run("hjb --nx 9 --h 0.125 --profile ellipse:4,1,0.4 --stencil 8pt "
                "--target 0.5,0.5 --method dijkstra --out ue.csv");
  CHECK(rr.code == 2);
  CHECK(run("hjb --nx 9 --h 0.125 --profile ellipse:4,1,0.4 --stencil 8pt "
            "--target 0.5,0.5 --method dijkstra --force --out ue.csv")
            .code == 0);
}

TEST_CASE("route: highway artifacts and roundabout certification gate") {
  auto r = run("route highway --length 300 --out pol.json --plotdata stp.csv "
               "--dot g.dot --values hv.csv");
  CHECK(r.code == 0);
  auto pol = jload("pol.json");
  CHECK(pol["nodes"].size() == 94);  // 30 columns x 3 lanes + 4 virtual
  CHECK(pol["reduction"].contains("median"));
  CHECK(slurp("stp.csv").rfind("node,tag,x,lane,value_stp,value_sp,pstar,arrow\n", 0) == 0);
  CHECK(slurp("g.dot").rfind("digraph policy {", 0) == 0);

  spit("rb.json", R"({"gamma_inner": 3.0, "gamma_outer": 5.2})");
  CHECK(run("route roundabout --config rb.json --out rb_pol.json").code == 0);
  spit("badrb.json", R"({"beta_app": 3.0})");
  CHECK(run("route roundabout --config badrb.json --out rb2.json").code == 2);
}

TEST_CASE("malformed model files are validation errors") {
  spit("garbage.json", "{]");
  CHECK(run("solve --model garbage.json --method vi --values g.csv").code == 3);
  spit("badmodel.json",
       R"({"format":1,"n":1,"target":1,"actions":[[{"cost":-1.0,"to":[[1,1.0]]}]]})");
  CHECK(run("solve --model badmodel.json --method vi --values g.csv").code == 3);
}

int main(int argc, char** argv) {
  doctest::Context ctx;
  std::vector<char*> dt_args = {argv[0]};
  for (int i = 1; i < argc; ++i) {
    if (argv[i][0] == '-')
      dt_args.push_back(argv[i]);
    else
      g_bin = argv[i];
  }
  if (g_bin.empty()) {
    std::fprintf(stderr, "usage: test_cli <path-to-ossp-binary>\n");
    return 1;
  }
  g_bin = fs::absolute(g_bin).string();
  g_dir = fs::temp_directory_path() / "ossp-cli-test";
  fs::remove_all(g_dir);
  fs::create_directories(g_dir);
  ctx.applyCommandLine((int)dt_args.size(), dt_args.data());
  return ctx.run();
}
