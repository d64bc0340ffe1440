#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "cli.hpp"
#include "doctest.h"
#include "json.hpp"
#include "kvflow/config.hpp"
#include "kvflow/driver.hpp"
#include "kvflow/output.hpp"
#include "test_support.hpp"

using namespace kvflow;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "kvflow_test_cli_io" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string small_config(const fs::path& dir) {
  return "grid.cells = 8,8\n"
         "physics.nu = 0.02\n"
         "physics.alpha = 0.01\n"
         "physics.profile = van_driest\n"
         "physics.forcing = 1,0\n"
         "scheme.dt = 0.01\n"
         "scheme.t_end = 0.05\n"
         "output.csv = " + (dir / "run.csv").string() + "\n" +
         "output.summary = " + (dir / "run.json").string() + "\n" +
         "output.checkpoint = " + (dir / "run.kvc").string() + "\n";
}

int cli(std::initializer_list<const char*> args, std::string* out_text = nullptr, std::string* err_text = nullptr) {
  std::vector<const char*> argv{"kvflow"};
  argv.insert(argv.end(), args.begin(), args.end());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  if (out_text) *out_text = out.str();
  if (err_text) *err_text = err.str();
  return code;
}

bool same_bits(const Array3& a, const Array3& b) {
  return a.same_layout(b) && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("config parse, echo and reload agree") {
  const RunConfig a = parse_config(
      "# comment\n"
      "grid.mode = box\n"
      "grid.extents = 2, 1\n"
      "grid.cells = 12,10\n"
      "physics.alpha = 0.1\n"
      "physics.profile = constant\n"
      "physics.ell0 = 0.3333333333333333\n"
      "physics.voigt_form = laplacian\n"
      "scheme.coupling = paper_lagged\n"
      "tke.eta = 0.002\n"
      "init.seed = 18446744073709551615\n");
  CHECK(a.grid.mode == GeometryMode::box);
  CHECK(a.grid.cells == std::array<int, 3>{12, 10, 1});
  CHECK(a.grid.extents[0] == 2.0);
  CHECK(a.coupling.mode == CouplingMode::paper_lagged);
  CHECK(a.init.seed == 18446744073709551615ull);
  CHECK(a.physics.profile.constant == 0.3333333333333333);
  const std::string echo = echo_config(a);
  const RunConfig b = parse_config(echo);
  CHECK(echo_config(b) == echo);
  CHECK(b.grid == a.grid);
  CHECK(b.physics.profile == a.physics.profile);
  CHECK(*b.tke.eta == 0.002);
  CHECK_NOTHROW(b.validate());
  CHECK(parse_config("").grid == RunConfig{}.grid);
}

TEST_CASE("config errors name the key path") {
  CHECK_THROWS_WITH(parse_config("scheme.dtt = 1\n"), doctest::Contains("scheme.dtt: unknown key"));
  CHECK_THROWS_WITH(parse_config("scheme.dt = abc\n"), doctest::Contains("scheme.dt: expected a number"));
  CHECK_THROWS_WITH(parse_config("scheme.dt = 1\nscheme.dt = 2\n"), doctest::Contains("scheme.dt: given more than once"));
  CHECK_THROWS_WITH(parse_config("just words\n"), doctest::Contains("line 1"));
  CHECK_THROWS_WITH(parse_config("nodot = 1\n"), doctest::Contains("malformed key"));
  CHECK_THROWS_WITH(parse_config("grid.cells = 8\n"), doctest::Contains("grid.cells: expected 2 values"));
  CHECK_THROWS_WITH(parse_config("physics.eddy = lots\n"), doctest::Contains("physics.eddy"));
  CHECK_THROWS_WITH(parse_config("scheme.coupling = x\n"), doctest::Contains("scheme.coupling"));
  CHECK_THROWS_WITH(parse_config("scheme.dt = 0\n").validate(), doctest::Contains("scheme.dt"));
  CHECK_THROWS_WITH(parse_config("output.csv_every = 0\n").validate(), doctest::Contains("output.csv_every"));
  CHECK_THROWS_WITH(parse_config("grid.mode = box\nphysics.profile = van_driest\n").validate(),
                    doctest::Contains("physics.profile"));
  CHECK_THROWS_WITH(parse_config("output.csv = /no/such/dir/x.csv\n").validate_paths(),
                    doctest::Contains("output.csv"));
  CHECK_THROWS_WITH(load_config("/no/such/file.cfg"), doctest::Contains("config: cannot open"));
}

TEST_CASE("csv header matches the schema") {
  CHECK(csv_header(false) == "step,t,E,dissipation_cum,work_cum,balance_residual,div_max,picard_iters");
  CHECK(csv_header(true) ==
        "step,t,E,dissipation_cum,work_cum,balance_residual,div_max,picard_iters,"
        "k_total,production,dissipation_k,clipped_mass,transfer_ok");
  CsvRow row;
  row.step = 3;
  row.t = 0.1;
  row.picard_iters = 4;
  row.tke = TkeColumns{1.0, 2.0, 3.0, 0.0, false};
  CHECK(format_csv_row(row) == "3,0.10000000000000001,0,0,0,0,0,4,1,2,3,0,0");
}

TEST_CASE("csv writer keeps every row under back-pressure") {
  const fs::path dir = scratch("writer");
  {
    CsvWriter w((dir / "rows.csv").string(), false, 1);
    for (int i = 0; i < 500; ++i) {
      CsvRow r;
      r.step = i;
      r.t = i * 0.5;
      w.push(r);
    }
    w.close();
  }
  std::ifstream in(dir / "rows.csv");
  std::string line;
  std::getline(in, line);
  CHECK(line == csv_header(false));
  int n = 0;
  while (std::getline(in, line)) {
    CHECK(line.rfind(std::to_string(n) + ",", 0) == 0);
    ++n;
  }
  CHECK(n == 500);
}

TEST_CASE("checkpoint round trip is bit exact") {
  const fs::path dir = scratch("checkpoint");
  RunConfig cfg = parse_config("grid.cells = 8,6\nphysics.profile = obukhov\n");
  const GridPtr g = build_grid(cfg.grid);
  State s;
  s.t = 0.1 + 0.2;
  s.step = 7;
  s.v = kvtest::random_field(g, 5);
  s.p = kvtest::random_scalar(g, 6);
  ScalarField k = make_k_field(g, 0.0);
  k.values() = kvtest::random_scalar(g, 7, 0.0, 1.0).values();
  const std::string path = (dir / "c.kvc").string();
  save_checkpoint(path, cfg, s, &k);
  const Checkpoint cp = load_checkpoint(path);
  CHECK(cp.state.t == s.t);
  CHECK(cp.state.step == 7);
  for (int d = 0; d < 2; ++d) CHECK(same_bits(cp.state.v.component(d), s.v.component(d)));
  CHECK(same_bits(cp.state.p.values(), s.p.values()));
  REQUIRE(cp.k);
  CHECK(same_bits(cp.k->values(), k.values()));
  CHECK(echo_config(cp.config) == echo_config(cfg));
  CHECK_FALSE(fs::exists(path + ".tmp"));

  save_checkpoint(path, cfg, s);
  CHECK_FALSE(load_checkpoint(path).k);

  std::string bytes = slurp(path);
  bytes.replace(0, std::strlen("KVFLOW-CHECKPOINT 1"), "KVFLOW-CHECKPOINT 9");
  write(dir / "v9.kvc", bytes);
  CHECK_THROWS_WITH(load_checkpoint((dir / "v9.kvc").string()), doctest::Contains("version 9"));
  write(dir / "cut.kvc", slurp(path).substr(0, slurp(path).size() - 8));
  CHECK_THROWS_WITH(load_checkpoint((dir / "cut.kvc").string()), doctest::Contains("truncated"));
}

TEST_CASE("summary JSON lists flags, metrics and the config") {
  RunSummary sum;
  sum.command = "run";
  sum.flag("energy_identity_step", true);
  sum.flag("energy_identity_step", false);
  sum.metric("energy", 0.5);
  sum.config_echo = echo_config(RunConfig{});
  const auto j = nlohmann::json::parse(summary_json(sum));
  CHECK(j["invariants"]["energy_identity_step"] == false);
  CHECK(j["metrics"]["energy"] == 0.5);
  CHECK(j["csv_schema"] == kCsvSchemaVersion);
  CHECK(j["grid"]["cells"] == "32,32");
  CHECK(j["config"]["scheme.dt"] == "0.001");
  CHECK(j["failure"].is_null());
}

TEST_CASE("runs are deterministic and write every artifact") {
  const fs::path d1 = scratch("det1"), d2 = scratch("det2");
  const RunResult a = run_flow(parse_config(small_config(d1)));
  const RunResult b = run_flow(parse_config(small_config(d2)));
  CHECK(a.summary.passed);
  CHECK(slurp(d1 / "run.csv") == slurp(d2 / "run.csv"));
  CHECK(slurp(d1 / "run.kvc").substr(slurp(d1 / "run.kvc").find("end_header")) ==
        slurp(d2 / "run.kvc").substr(slurp(d2 / "run.kvc").find("end_header")));
  CHECK(fs::exists(d1 / "run.json"));
  const Checkpoint cp = load_checkpoint((d1 / "run.kvc").string());
  CHECK(same_bits(cp.state.v.component(0), a.final_state.v.component(0)));
  CHECK(cp.state.step == 5);
}

TEST_CASE("a failed invariant still writes the summary") {
  const fs::path dir = scratch("fail");
  write(dir / "a.cfg", small_config(dir) + "scheme.tol_proj = 1e-300\n");
  std::string out, err;
  CHECK(cli({"run", "-c", (dir / "a.cfg").string().c_str()}, &out, &err) == 1);
  CHECK(err.find("divergence_free") != std::string::npos);
  const auto j = nlohmann::json::parse(slurp(dir / "run.json"));
  CHECK(j["passed"] == false);
  CHECK(j["invariants"]["divergence_free"] == false);
  CHECK_FALSE(fs::exists(dir / "run.json.tmp"));
}

TEST_CASE("cli exit codes") {
  const fs::path dir = scratch("cli");
  std::string out, err;
  CHECK(cli({}, &out, &err) == 2);
  CHECK(cli({"bogus"}, &out, &err) == 2);
  CHECK(cli({"run", "-c", "/no/such.cfg"}, &out, &err) == 2);
  write(dir / "bad.cfg", small_config(dir) + "scheme.dt = -1\n");
  CHECK(cli({"run", "-c", (dir / "bad.cfg").string().c_str()}, &out, &err) == 2);
  write(dir / "bad.cfg", "scheme.dt = -1\n");
  CHECK(cli({"run", "-c", (dir / "bad.cfg").string().c_str()}, &out, &err) == 2);
  CHECK(err.find("scheme.dt") != std::string::npos);

  write(dir / "ok.cfg", small_config(dir));
  CHECK(cli({"nstke", "-c", (dir / "ok.cfg").string().c_str()}, &out, &err) == 0);
  CHECK(out.find("PASS k_nonnegative") != std::string::npos);
  const std::string summary = (dir / "verify.json").string();
  CHECK(cli({"verify", "--coarse", "8", "--fine", "16", "--samples", "4", "--summary", summary.c_str()}, &out, &err) ==
        0);
  const auto j = nlohmann::json::parse(slurp(summary));
  CHECK(j["invariants"].contains("adjoint_grad_div"));
  CHECK(j["invariants"].contains("korn_refinement"));
  CHECK(j["invariants"].contains("h_half_refinement"));
  CHECK(cli({"reduce-nsv", "--cells", "8", "--steps", "3"}, &out, &err) == 0);
  CHECK(cli({"compactness", "--family", "nope"}, &out, &err) == 2);
}
