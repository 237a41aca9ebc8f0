#include <jkde/cli.hpp>
#include <jkde/io.hpp>

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

using Catch::Approx;
namespace fs = std::filesystem;

namespace {

const fs::path data_dir = JKDE_TEST_DATA_DIR;
const fs::path tmp_dir = JKDE_TEST_TMP_DIR;

struct Run
{
  int code = 0;
  std::string out;
  std::string err;
};

Run run(std::initializer_list<std::string> args)
{
  std::vector<std::string> storage{ "jkde" };
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& s : storage)
    argv.push_back(s.c_str());
  std::ostringstream out, err;
  Run r;
  r.code = jkde::cli::dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p)
{
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name)
{
  fs::create_directories(tmp_dir);
  return tmp_dir / name;
}

fs::path write_file(const std::string& name, const std::string& text)
{
  const auto p = scratch(name);
  std::ofstream(p, std::ios::binary) << text;
  return p;
}

} // namespace

TEST_CASE("CSV parsing", "[io]")
{
  jkde::io::DatasetSchema schema;
  schema.add("z", jkde::io::ColumnKind::discrete);
  schema.add("x", jkde::io::ColumnKind::continuous);

  SECTION("three rows")
  {
    std::istringstream in("z,x\n0,0.5\n1,-1.25\n 2 , 3e-1 \n");
    const auto d = jkde::io::parse_dataset(in, schema);
    CHECK(d.n() == 3);
    CHECK(d.p() == 1);
    CHECK(d.q() == 1);
    CHECK(d.z(2, 0) == 2);
    CHECK(d.x(2, 0) == 0.3);
    CHECK(d.discrete_names() == std::vector<std::string>{ "z" });
  }
  SECTION("columns are matched by name")
  {
    std::istringstream in("x,other,z\n0.5,abc,4\n");
    const auto d = jkde::io::parse_dataset(in, schema);
    CHECK(d.z(0, 0) == 4);
    CHECK(d.x(0, 0) == 0.5);
  }
  SECTION("non-integer in a discrete column")
  {
    std::istringstream in("z,x\n0,0.5\n1.5,0.1\n");
    CHECK_THROWS_WITH(jkde::io::parse_dataset(in, schema),
                      Catch::Matchers::ContainsSubstring("row 2") &&
                        Catch::Matchers::ContainsSubstring("'z'") &&
                        Catch::Matchers::ContainsSubstring("1.5"));
  }
  SECTION("header only")
  {
    std::istringstream in("z,x\n");
    CHECK_THROWS_WITH(jkde::io::parse_dataset(in, schema), "empty dataset");
  }
  SECTION("other malformed input")
  {
    std::istringstream missing("z,y\n0,1\n");
    CHECK_THROWS_AS(jkde::io::parse_dataset(missing, schema), jkde::DataError);
    std::istringstream ragged("z,x\n0\n");
    CHECK_THROWS_AS(jkde::io::parse_dataset(ragged, schema), jkde::DataError);
    std::istringstream nan("z,x\n0,nan\n");
    CHECK_THROWS_AS(jkde::io::parse_dataset(nan, schema), jkde::DataError);
    std::istringstream empty("");
    CHECK_THROWS_WITH(jkde::io::parse_dataset(empty, schema), "empty file");
  }
}

TEST_CASE("grid specifications", "[io]")
{
  const std::vector<std::string> zn{ "z1" }, xn{ "x1" };
  const auto g = jkde::io::parse_grid("z1=0:15;x1=-2:0.4:2", zn, xn);
  REQUIRE(g.z_axes.size() == 1);
  CHECK(g.z_axes[0].size() == 16);
  CHECK(g.z_axes[0].back() == 15);
  REQUIRE(g.x_axes[0].size() == 11);
  CHECK(g.x_axes[0][0] == -2.0);
  CHECK(g.x_axes[0][10] == Approx(2.0).epsilon(1e-15));

  const auto lists = jkde::io::parse_grid("x1=0.5,1.5;z1=3,1", zn, xn);
  CHECK(lists.z_axes[0] == std::vector<std::int64_t>{ 3, 1 });
  CHECK(lists.x_axes[0] == std::vector<double>{ 0.5, 1.5 });
  CHECK(jkde::io::parse_grid("z1=0:2:6;x1=0", zn, xn).z_axes[0] ==
        std::vector<std::int64_t>{ 0, 2, 4, 6 });

  CHECK_THROWS_AS(jkde::io::parse_grid("z1=0:3", zn, xn), jkde::DataError);
  CHECK_THROWS_AS(jkde::io::parse_grid("z1=0:3;x1=0;x2=1", zn, xn), jkde::DataError);
  CHECK_THROWS_AS(jkde::io::parse_grid("z1=0.5;x1=0", zn, xn), jkde::DataError);
  CHECK_THROWS_AS(jkde::io::parse_grid("z1=3:0;x1=0", zn, xn), jkde::DataError);
  CHECK_THROWS_AS(jkde::io::parse_grid("z1=0;x1=0:0:1", zn, xn), jkde::DataError);
}

TEST_CASE("model JSON round trip is bit-exact", "[io][golden]")
{
  const auto csv = data_dir / "mixed_small.csv";
  const auto schema = jkde::io::schema_from_header(jkde::io::read_header(csv), { "z1" });
  auto data = jkde::io::parse_dataset(csv, schema);
  const jkde::KernelSpec kernel(jkde::KernelFamily::biweight);
  const auto noise = jkde::trapezoid_noise(0.375, 0.625);
  const auto model = jkde::fit(data, kernel, noise, jkde::Bandwidths{ { 0.3 }, { 0.41 } }, 99);

  const auto text = jkde::io::model_to_json(model, csv).dump();
  const auto back = jkde::io::model_from_json(nlohmann::json::parse(text));
  CHECK(back.jitter_values() == model.jitter_values());
  CHECK(back.bandwidths().h == model.bandwidths().h);
  CHECK(back.bandwidths().b == model.bandwidths().b);
  CHECK(back.kernel() == model.kernel());
  CHECK(back.noise().gamma1 == model.noise().gamma1);
  CHECK(back.seed() == 99);
  CHECK(back.data() == model.data());

  const auto grid = jkde::io::parse_grid("z1=-1:8;x1=-2.5:0.1:2.5", { "z1" }, { "x1" });
  const auto a = jkde::evaluate_grid(model, grid);
  const auto b = jkde::evaluate_grid(back, grid);
  for (std::size_t i = 0; i < a.values.size(); ++i)
    REQUIRE(a.values[i] == b.values[i]);
  CHECK(jkde::io::model_to_json(back, csv).dump() == text);

  SECTION("relative dataset paths resolve against the model directory")
  {
    auto doc = nlohmann::json::parse(text);
    doc["dataset"]["path"] = "mixed_small.csv";
    CHECK(jkde::io::model_from_json(doc, data_dir).jitter_values() == model.jitter_values());
  }
  SECTION("corrupted documents are data errors")
  {
    auto doc = nlohmann::json::parse(text);
    doc["jitter"][0][0] = 0.9;
    CHECK_THROWS_AS(jkde::io::model_from_json(doc), jkde::DataError);
    doc = nlohmann::json::parse(text);
    doc["format"] = "other";
    CHECK_THROWS_AS(jkde::io::model_from_json(doc), jkde::DataError);
    doc = nlohmann::json::parse(text);
    doc.erase("bandwidths");
    CHECK_THROWS_AS(jkde::io::model_from_json(doc), jkde::DataError);
    doc = nlohmann::json::parse(text);
    doc["dataset"]["n"] = 61;
    CHECK_THROWS_AS(jkde::io::model_from_json(doc), jkde::DataError);
  }
}

TEST_CASE("jitter stream is frozen", "[io][golden]")
{
  const auto csv = data_dir / "mixed_small.csv";
  const auto schema = jkde::io::schema_from_header(jkde::io::read_header(csv), { "z1" });
  const auto model = jkde::fit(jkde::io::parse_dataset(csv, schema),
                               jkde::KernelSpec(jkde::KernelFamily::epanechnikov),
                               jkde::uniform_noise(), jkde::Bandwidths{ { 0.5 }, { 0.4 } }, 7);
  CHECK(model.jitter(0, 0) == -0.08926452700895926);
  CHECK(model.jitter(1, 0) == 0.49195629351566594);
  CHECK(model.jitter(59, 0) == 0.1559245640797965);
}

TEST_CASE("cli: fit then eval matches the golden output", "[cli][golden]")
{
  const auto csv = (data_dir / "mixed_small.csv").string();
  const auto m1 = scratch("golden_m1.json").string();
  const auto m2 = scratch("golden_m2.json").string();
  const auto e1 = scratch("golden_e1.csv").string();
  const auto e2 = scratch("golden_e2.csv").string();

  REQUIRE(run({ "fit", "--data", csv, "--discrete", "z1", "--seed", "7", "--out", m1 }).code == 0);
  REQUIRE(run({ "fit", "--data", csv, "--discrete", "z1", "--seed", "7", "--out", m2 }).code == 0);
  CHECK(slurp(m1) == slurp(m2));
  REQUIRE(run({ "eval", "--model", m1, "--grid", "z1=0:6;x1=-2:0.4:2", "--out", e1 }).code == 0);
  const auto r = run({ "eval", "--model", m2, "--grid", "z1=0:6;x1=-2:0.4:2" });
  REQUIRE(r.code == 0);
  std::ofstream(e2, std::ios::binary) << r.out;
  CHECK(slurp(e1) == slurp(e2));
  CHECK(slurp(e1) == slurp(data_dir / "golden_eval_seed7.csv"));

  const auto doc = nlohmann::json::parse(slurp(m1));
  CHECK(doc["seed"] == 7);
  CHECK(doc["dataset"]["path"].get<std::string>() == fs::absolute(csv).lexically_normal().string());
  CHECK(doc["bandwidths"]["h"][0] == 0.5);
  CHECK(doc["jitter"].size() == 60);
}

TEST_CASE("cli: fit options", "[cli]")
{
  const auto csv = (data_dir / "mixed_small.csv").string();
  SECTION("explicit bandwidths and trapezoid noise")
  {
    const auto r = run({ "fit", "--data", csv, "--discrete", "z1", "--seed", "3", "--h", "0.25",
                         "--b", "0.6", "--noise", "trapezoid", "--kernel", "biweight" });
    REQUIRE(r.code == 0);
    const auto doc = nlohmann::json::parse(r.out);
    CHECK(doc["bandwidths"]["h"][0] == 0.25);
    CHECK(doc["bandwidths"]["b"][0] == 0.6);
    CHECK(doc["noise"]["gamma1"] == 0.375);
    CHECK(doc["kernel"]["family"] == "biweight");
    CHECK(r.err.empty());
  }
  SECTION("cross-validated bandwidths are deterministic")
  {
    const auto a = run({ "fit", "--data", csv, "--discrete", "z1", "--seed", "5", "--cv" });
    const auto b = run({ "fit", "--data", csv, "--discrete", "z1", "--seed", "5", "--cv",
                         "--threads", "2" });
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
  }
  SECTION("missing seed uses and reports the default")
  {
    const auto r = run({ "fit", "--data", csv, "--discrete", "z1" });
    REQUIRE(r.code == 0);
    CHECK(r.err.find("42") != std::string::npos);
    CHECK(nlohmann::json::parse(r.out)["seed"] == 42);
  }
}

TEST_CASE("cli: exit codes", "[cli]")
{
  const auto csv = (data_dir / "mixed_small.csv").string();
  CHECK(run({}).code == 2);
  CHECK(run({ "nonsense" }).code == 2);
  CHECK(run({ "fit", "--data", csv, "--kernel", "gaussian" }).code == 2);
  CHECK(run({ "fit", "--data", csv, "--discrete", "z1", "--h", "0.5" }).code == 2);
  CHECK(run({ "fit", "--data", csv, "--discrete", "z1", "--cv", "--h", "0.5" }).code == 2);
  CHECK(run({ "fit", "--data", (data_dir / "missing.csv").string() }).code == 3);
  CHECK(run({ "fit", "--data", csv, "--discrete", "x1" }).code == 3);
  CHECK(run({ "eval", "--model", (data_dir / "missing.json").string(), "--grid", "z1=0" }).code == 3);
  CHECK(run({ "are", "--f", "1.5" }).code == 2);
  CHECK(run({ "fit", "--data", write_file("header_only.csv", "z1,x1\n").string(), "--discrete",
              "z1" })
          .code == 3);

  const auto r = run({ "fit", "--data", csv, "--discrete", "x1" });
  REQUIRE(!r.err.empty());
  CHECK(r.err.back() == '\n');
  const auto last = r.err.substr(r.err.rfind('\n', r.err.size() - 2) + 1);
  CHECK(last.rfind("jkde: error: row 1, column 'x1'", 0) == 0);

  // a constant column falls back to unit scale
  const auto flat = write_file("flat.csv", "z1,x1\n0,1.0\n1,1.0\n0,1.0\n");
  const auto nf = run({ "fit", "--data", flat.string(), "--discrete", "z1", "--seed", "1" });
  REQUIRE(nf.code == 0);
  CHECK(nlohmann::json::parse(nf.out)["bandwidths"]["b"][0] ==
        Approx(std::pow(3.0, -0.2)).epsilon(1e-14));
}

TEST_CASE("cli: theory commands", "[cli]")
{
  SECTION("are")
  {
    const auto r = run({ "are", "--f", "0.5", "--kernel", "epanechnikov", "--gamma1", "0.5",
                         "--gamma2", "0.5" });
    CHECK(r.code == 0);
    CHECK(r.out == "0.714286\n");
    CHECK(run({ "are", "--f", "0.3", "--kernel", "uniform" }).out == "1.000000\n");
  }
  SECTION("bias in the unbiased regime")
  {
    const auto r = run({ "bias", "--pmf", "0.7,0.3", "--z", "0", "--h", "0.5", "--kernel",
                         "uniform", "--noise", "uniform" });
    CHECK(r.code == 0);
    CHECK(r.out ==
          "corollary1 0.000000000000\nlemma2     0.000000000000\noracle     0.000000000000\n");
  }
  SECTION("bias with h = 1")
  {
    const auto r = run({ "bias", "--pmf", "0.7,0.3", "--zmin", "0", "--z", "0", "--h", "1.0",
                         "--kernel", "uniform", "--noise", "uniform" });
    CHECK(r.out ==
          "corollary1 -0.275000000000\nlemma2     -0.275000000000\noracle     -0.275000000000\n");
  }
  SECTION("bias with trapezoid noise has no corollary value")
  {
    const auto r = run({ "bias", "--pmf", "0.7,0.3", "--z", "0", "--h", "1.2", "--gamma1",
                         "0.375", "--gamma2", "0.625" });
    CHECK(r.code == 0);
    CHECK(r.out.rfind("corollary1 n/a\n", 0) == 0);
  }
  SECTION("validate-noise")
  {
    const auto ok = run({ "validate-noise", "--noise", "trapezoid", "--gamma1", "0.375",
                          "--gamma2", "0.625" });
    CHECK(ok.code == 0);
    CHECK(ok.out.find("noise class: pass") != std::string::npos);
    const auto bad = run({ "validate-noise", "--noise", "trapezoid", "--gamma1", "0.2",
                           "--gamma2", "0.6" });
    CHECK(bad.code == 0);
    CHECK(bad.out.find("unit mass: FAIL (residual 0.2)") != std::string::npos);
    CHECK(bad.out.find("noise class: FAIL") != std::string::npos);
  }
}

TEST_CASE("cli: simulate and rates", "[cli]")
{
  SECTION("simulate writes long-format CSV")
  {
    const auto out = scratch("sim.csv").string();
    const auto r = run({ "simulate", "--scenario", "p=1,q=0,m=2", "--n", "10,20", "--nsim", "3",
                         "--seed", "42", "--estimators", "jkde,freq", "--cv-grid", "5", "--out",
                         out });
    REQUIRE(r.code == 0);
    const auto text = slurp(out);
    CHECK(text.rfind("scenario,estimator,n,replicate,rase\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 1 + 2 * 3 * 2);
    CHECK(text.find("p1q0m2,freq,20,2,") != std::string::npos);
    CHECK(r.out.find("median_rase=") != std::string::npos);

    const auto again = run({ "simulate", "--scenario", "p=1,q=0,m=2", "--n", "10,20", "--nsim",
                             "3", "--seed", "42", "--estimators", "jkde,freq", "--cv-grid", "5" });
    CHECK(again.out == text);
  }
  SECTION("rates prints per-n RMSE and a slope line")
  {
    const auto r = run({ "rates", "--p", "1", "--q", "0", "--ladder", "100:2:800", "--reps", "30",
                         "--seed", "1" });
    REQUIRE(r.code == 0);
    CHECK(r.out.rfind("n,rmse\n100,", 0) == 0);
    CHECK(r.out.find("\n800,") != std::string::npos);
    CHECK(r.out.find("# slope=") != std::string::npos);
    CHECK(run({ "rates", "--ladder", "100:2:400", "--seed", "1" }).code == 2);
    CHECK(run({ "rates", "--ladder", "100:1:400", "--seed", "1" }).code == 2);
  }
  SECTION("bad scenario text")
  {
    CHECK(run({ "simulate", "--scenario", "p=1,k=2", "--seed", "1" }).code == 2);
  }
}
