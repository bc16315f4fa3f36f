#include "omni360/dataset_io.hpp"

#include <doctest.h>

#include <json.hpp>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace omni360;
namespace fs = std::filesystem;

namespace {

const std::string kCli = OMNI360_CLI_PATH;
const fs::path kFixtures = OMNI360_FIXTURE_DIR;

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("omni360_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

struct RunResult {
  int code = -1;
  std::string output;  // stdout and stderr
};

RunResult run(const std::string& args, const std::string& env = "") {
  const fs::path log = fs::temp_directory_path() / "omni360_cli_last.txt";
  const std::string cmd = env + (env.empty() ? "" : " ") + kCli + " " + args + " > " +
                          log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.output = read_text_file(log.string());
  return r;
}

std::vector<std::string> sorted_files(const fs::path& dir) {
  std::vector<std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) out.push_back(fs::relative(e.path(), dir).string());
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::string scene(const std::string& name) { return (kFixtures / "scenes" / name).string(); }

}  // namespace

TEST_CASE("render writes the ERP sample and a manifest") {
  const fs::path out = scratch("render");
  const std::string args = "render --scene " + scene("street.json") +
                           " --cube-res 256 --erp-height 128 --pos 0 0 0 --out ";
  auto r = run(args + (out / "a").string());
  REQUIRE_MESSAGE(r.code == 0, r.output);
  const auto files = sorted_files(out / "a");
  CHECK(files == std::vector<std::string>{"config.json", "depth.pfm", "entity.png",
                                          "manifest.json", "rgb.png", "semantic.png"});
  const auto m = read_manifest((out / "a" / "manifest.json").string(), true);
  const auto depth = read_depth((out / "a" / m.depth).string());
  CHECK(depth.rows() == 128);
  CHECK(depth.cols() == 256);
  CHECK(read_png_gray((out / "a" / m.semantic).string()).rows() == 128);

  r = run(args + (out / "b").string() + " --faces");
  REQUIRE_MESSAGE(r.code == 0, r.output);
  const auto with_faces = sorted_files(out / "b");
  CHECK(with_faces.size() == files.size() + 24);
  CHECK(std::count_if(with_faces.begin(), with_faces.end(), [](const std::string& f) {
          return f.rfind("faces/", 0) == 0;
        }) == 24);

  // Byte-identical rerun.
  r = run(args + (out / "c").string());
  REQUIRE(r.code == 0);
  for (const auto& f : files) {
    if (f == "config.json") continue;
    CHECK_MESSAGE(read_text_file((out / "a" / f).string()) == read_text_file((out / "c" / f).string()), f);
  }
}

TEST_CASE("render rejects bad input") {
  const fs::path out = scratch("render_bad");
  auto r = run("render --scene " + (kFixtures / "missing.json").string() + " --out " + out.string());
  CHECK(r.code == 1);
  CHECK(r.output.rfind("omni360: error[io]", 0) == 0);

  const fs::path bad = out / "bad_scene.json";
  write_text_file(bad.string(), R"([{"shape":"sphere","center":[0,0,1],"radius":-1,"albedo":[1,2,3],"semantic_id":1,"entity_id":1}])");
  r = run("render --scene " + bad.string() + " --out " + (out / "x").string());
  CHECK(r.code == 1);
  CHECK(r.output.rfind("omni360: error[invalid-scene]", 0) == 0);

  r = run("render --scene " + scene("street.json") + " --depth-mode bicubic --out " + (out / "y").string());
  CHECK(r.code != 0);
  r = run("render --out " + out.string());
  CHECK(r.code == 2);
  r = run("frobnicate");
  CHECK(r.code == 2);
}

TEST_CASE("plan writes one CSV per route and kinematic set") {
  const fs::path out = scratch("plan");
  auto r = run("plan --routes " + (kFixtures / "routes_10.json").string() + " --out " + out.string());
  REQUIRE_MESSAGE(r.code == 0, r.output);
  int csvs = 0;
  for (const auto& f : sorted_files(out)) {
    if (f.size() < 4 || f.substr(f.size() - 4) != ".csv") continue;
    ++csvs;
    const auto rows = lines(read_text_file((out / f).string()));
    REQUIRE(rows.size() >= 3);
    CHECK(rows[0] == "t,x,y,z,vx,vy,vz,ax,ay,az");
    const double dt = f.find("set_0") != std::string::npos ? 0.5 : 1.0;
    for (std::size_t i = 2; i + 1 < rows.size(); ++i) {
      const double t0 = std::stod(rows[i - 1]), t1 = std::stod(rows[i]);
      CHECK(std::abs(t1 - t0 - dt) < 1e-9);
    }
    const double last = std::stod(rows.back()), prev = std::stod(rows[rows.size() - 2]);
    CHECK(last - prev <= dt + 1e-9);
    CHECK(last > prev);
  }
  CHECK(csvs == 20);

  const fs::path gen = scratch("plan_gen");
  r = run("plan --gen --gen-seed 3 --gen-count 4 --out " + gen.string());
  REQUIRE_MESSAGE(r.code == 0, r.output);
  CHECK(sorted_files(gen).size() == 8 + 1);

  r = run("plan --out " + gen.string());
  CHECK(r.code != 0);
}

TEST_CASE("gen-waypoints is seeded") {
  const fs::path out = scratch("gen");
  const std::string a = (out / "a.json").string(), b = (out / "b.json").string(),
                    c = (out / "c.json").string();
  REQUIRE(run("gen-waypoints --seed 9 --count 20 --out " + a).code == 0);
  REQUIRE(run("gen-waypoints --seed 9 --count 20 --out " + b).code == 0);
  REQUIRE(run("gen-waypoints --seed 10 --count 20 --out " + c).code == 0);
  CHECK(read_text_file(a) == read_text_file(b));
  CHECK(read_text_file(a) != read_text_file(c));
  const auto routes = parse_routes_json(read_text_file(a));
  CHECK(routes.size() == 20);
  for (const auto& route : routes) {
    CHECK(polyline_length(route) >= 50.0);
    CHECK(polyline_length(route) <= 150.0);
  }
  CHECK(fs::exists(a + ".config.json"));

  // The environment seed overrides the flag.
  const std::string d = (out / "d.json").string();
  REQUIRE(run("gen-waypoints --seed 1 --count 20 --out " + d, "OMNI360_SEED=10").code == 0);
  CHECK(read_text_file(d) == read_text_file(c));
}

TEST_CASE("pedestrians writes an event log and keypoint frames") {
  const fs::path out = scratch("ped");
  const std::string base = "pedestrians --seed 5 --n 15 --area 12 12 --steps 200 --cam-pos 6 1.6 -1 --cam-pitch -20 --out ";
  auto r = run(base + (out / "a").string());
  REQUIRE_MESSAGE(r.code == 0, r.output);
  REQUIRE(run(base + (out / "b").string()).code == 0);
  const std::string log = read_text_file((out / "a" / "events.log").string());
  CHECK(log == read_text_file((out / "b" / "events.log").string()));
  CHECK(read_text_file((out / "a" / "keypoints.jsonl").string()) ==
        read_text_file((out / "b" / "keypoints.jsonl").string()));

  const auto frames = lines(read_text_file((out / "a" / "keypoints.jsonl").string()));
  CHECK(frames.size() == 201);
  const auto last = nlohmann::json::parse(frames.back());
  CHECK(last.at("tick") == 200);
  CHECK(last.at("agents").size() == 15);
  CHECK(last["agents"][3].at("joints").size() == 17);

  const auto events = lines(log);
  CHECK(std::count_if(events.begin(), events.end(), [](const std::string& l) {
          return l.find(" Spawn ") != std::string::npos;
        }) == 15);

  r = run("pedestrians --seed 5 --n 15 --area 12 12 --steps 0 --out " + (out / "zero").string());
  REQUIRE(r.code == 0);
  const auto spawn_only = lines(read_text_file((out / "zero" / "events.log").string()));
  CHECK(spawn_only.size() == 15);
  for (const auto& l : spawn_only) CHECK(l.rfind("0 Spawn ", 0) == 0);
  CHECK(lines(read_text_file((out / "zero" / "keypoints.jsonl").string())).size() == 1);

  r = run("pedestrians --n 200 --area 2 2 --out " + (out / "crowded").string());
  CHECK(r.code == 1);
  CHECK(r.output.rfind("omni360: error[infeasible]", 0) == 0);
}

TEST_CASE("eval reports") {
  const fs::path out = scratch("eval");
  REQUIRE(run("render --scene " + scene("street.json") +
              " --cube-res 128 --erp-height 64 --out " + (out / "r").string())
              .code == 0);
  const std::string depth = (out / "r" / "depth.pfm").string();
  auto r = run("eval depth --pred " + depth + " --gt " + depth + " --out " + (out / "depth.json").string());
  REQUIRE_MESSAGE(r.code == 0, r.output);
  auto j = nlohmann::json::parse(read_text_file((out / "depth.json").string()));
  CHECK(j.at("absrel") == 0.0);
  CHECK(j.at("delta1") == 1.0);

  const std::string sem = (out / "r" / "semantic.png").string();
  const std::string ent = (out / "r" / "entity.png").string();
  r = run("eval seg --pred " + sem + " --gt " + sem + " --pred-entity " + ent + " --gt-entity " + ent);
  REQUIRE_MESSAGE(r.code == 0, r.output);
  j = nlohmann::json::parse(r.output);
  CHECK(j.at("miou") == 1.0);
  CHECK(j.at("entity_map") == 1.0);

  r = run("eval mpde --input " + (kFixtures / "mpde_table8.json").string());
  REQUIRE_MESSAGE(r.code == 0, r.output);
  j = nlohmann::json::parse(r.output);
  CHECK(std::abs(j.at("dist_err_all").get<double>() - 0.80) < 0.005);
  CHECK(std::abs(j.at("ang_err_all").get<double>() - 23.14) < 0.005);
  CHECK(std::abs(j.at("dist_err_pub").get<double>() - 0.484) < 0.0005);
  CHECK(std::abs(j.at("ang_err_pub").get<double>() - 21.21) < 0.005);
  CHECK(r.output.find("\"ang_err_all\": 23.138") != std::string::npos);

  r = run("eval vln --input " + (kFixtures / "vln_perfect.json").string());
  REQUIRE_MESSAGE(r.code == 0, r.output);
  j = nlohmann::json::parse(r.output);
  CHECK(j.at("sr") == 1.0);
  CHECK(j.at("spl") == 1.0);
  CHECK(j.at("ne") == 0.0);

  // Shape mismatch between rasters.
  REQUIRE(run("render --scene " + scene("street.json") +
              " --cube-res 128 --erp-height 32 --out " + (out / "small").string())
              .code == 0);
  r = run("eval depth --pred " + (out / "small" / "depth.pfm").string() + " --gt " + depth);
  CHECK(r.code == 1);
  CHECK(r.output.rfind("omni360: error[shape-mismatch]", 0) == 0);

  r = run("eval depth --pred " + depth);
  CHECK(r.code == 1);
  r = run("eval tea --input x");
  CHECK(r.code == 1);
}
