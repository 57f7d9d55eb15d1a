#include <algorithm>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"

#include "cift/cli.hpp"
#include "test_util.hpp"

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "cift");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cift::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

const std::filesystem::path& folding_fixture() {
  static const std::filesystem::path dir = [] {
    auto d = cift::testing::scratch_dir("folding");
    const auto r = run({"gen-fixture", "--kind", "folding", "--out", d.string(), "--rows-per-block", "300"});
    REQUIRE(r.code == 0);
    return d;
  }();
  return dir;
}

const char* kRoundedMseCsv =
    "condition,kind,ratio,mse\n"
    "id,ID,100:0,0.0021\nid,ID,100:100,0.0036\nid,ID,100:200,0.0034\n"
    "ood,OOD,100:0,0.0700\nood,OOD,100:100,0.0010\nood,OOD,100:200,0.0011\n";

}  // namespace

TEST_CASE("gen-fixture writes pools and a manifest") {
  const auto& dir = folding_fixture();
  CHECK(std::filesystem::exists(dir / "real.fvec"));
  CHECK(std::filesystem::exists(dir / "synth.fvec"));
  const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  CHECK(manifest["entries"].size() == 2);
  const auto bad = run({"gen-fixture", "--kind", "nope", "--out", (dir / "x").string()});
  CHECK(bad.code == cift::cli::kUsageError);
}

TEST_CASE("sweep over the folding fixture") {
  const auto& dir = folding_fixture();
  const auto out = dir / "report.json";
  const auto r = run({"sweep", "--manifest", (dir / "manifest.json").string(), "--out", out.string(),
                      "--plot", (dir / "report.svg").string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(r.out.find("lambda_star 100:100") != std::string::npos);
  CHECK(r.out.find("decoherence 100:300") != std::string::npos);

  const auto doc = nlohmann::json::parse(slurp(out));
  for (const char* key : {"points", "decoherence_index", "lambda_star", "notes"}) CHECK(doc.contains(key));
  CHECK(doc["lambda_star"]["ratio"] == "100:100");
  CHECK(doc["decoherence_index"] == 3);
  REQUIRE(doc["points"].size() == 6);
  for (const auto& p : doc["points"]) {
    for (const char* key : {"ratio", "real_parts", "synth_parts", "lambda", "mu", "sigma", "snr",
                            "n_real_rows", "n_synth_rows"}) {
      CHECK(p.contains(key));
    }
  }
  CHECK(doc["points"][0]["snr"].get<double>() == doctest::Approx(0.1423).epsilon(5e-4));

  const std::string csv = slurp(dir / "report.csv");
  CHECK(csv.rfind("real_parts,synth_parts,ratio,lambda,mu,sigma,snr,n_real_rows,n_synth_rows\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);

  const std::string svg = slurp(dir / "report.svg");
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("class=\"decoherence\"") != std::string::npos);
  CHECK(svg.find("class=\"selected\"") != std::string::npos);
  CHECK(svg.find("data-ratio=\"100:300\"") != std::string::npos);
}

TEST_CASE("sweep output is byte-identical across runs and worker counts") {
  const auto& dir = folding_fixture();
  const auto manifest = (dir / "manifest.json").string();
  REQUIRE(run({"sweep", "--manifest", manifest, "--out", (dir / "a.json").string()}).code == 0);
  REQUIRE(run({"sweep", "--manifest", manifest, "--out", (dir / "b.json").string(), "--workers", "3"}).code == 0);
  CHECK(slurp(dir / "a.json") == slurp(dir / "b.json"));
  CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
}

TEST_CASE("sweep with an MSE table adds the robustness curve") {
  const auto& dir = folding_fixture();
  const auto table = dir / "mse.csv";
  std::ofstream(table) << kRoundedMseCsv;
  const auto r = run({"sweep", "--manifest", (dir / "manifest.json").string(), "--out",
                      (dir / "rs.json").string(), "--mse-table", table.string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const auto doc = nlohmann::json::parse(slurp(dir / "rs.json"));
  REQUIRE(doc["robustness"].size() == 3);
  CHECK(doc["robustness"][0]["rs"] == 0.0);
}

TEST_CASE("sweep error handling") {
  const auto& dir = folding_fixture();
  const auto missing = (dir / "does_not_exist.json").string();
  const auto r = run({"sweep", "--manifest", missing, "--out", (dir / "m.json").string()});
  CHECK(r.code == cift::cli::kDataError);
  CHECK(r.err.find(missing) != std::string::npos);

  const auto manifest = (dir / "manifest.json").string();
  CHECK(run({"sweep", "--manifest", manifest, "--out", (dir / "m.json").string(), "--ratios", "100:100,100:0"}).code ==
        cift::cli::kUsageError);
  CHECK(run({"sweep", "--manifest", manifest, "--out", (dir / "m.json").string(), "--ratios", "abc"}).code ==
        cift::cli::kUsageError);
  CHECK(run({"sweep", "--manifest", manifest, "--out", (dir / "m.json").string(), "--sampling", "x"}).code ==
        cift::cli::kUsageError);
  CHECK(run({"sweep", "--out", (dir / "m.json").string()}).code == cift::cli::kUsageError);
}

TEST_CASE("rs prints one row per ratio") {
  const auto dir = cift::testing::scratch_dir("rs");
  std::ofstream(dir / "t.csv") << kRoundedMseCsv;
  const auto r = run({"rs", "--mse-table", (dir / "t.csv").string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  std::istringstream lines(r.out);
  std::string header, base, first;
  std::getline(lines, header);
  std::getline(lines, base);
  std::getline(lines, first);
  CHECK(header == "ratio,lambda,ood_mean,id_mean,rs");
  CHECK(base.substr(base.rfind(',') + 1) == "0.00");
  CHECK(first.rfind("100:100,", 0) == 0);
  CHECK(std::stod(first.substr(first.rfind(',') + 1)) == doctest::Approx(57.5).epsilon(1e-3));

  std::ofstream(dir / "nobase.csv") << "condition,kind,ratio,mse\nid,ID,100:100,1\nood,OOD,100:100,1\n";
  CHECK(run({"rs", "--mse-table", (dir / "nobase.csv").string()}).code == cift::cli::kDataError);

  std::ofstream(dir / "clamp.csv")
      << "condition,kind,ratio,mse\nid,ID,100:0,1\nid,ID,100:100,1\nood,OOD,100:0,1\nood,OOD,100:100,2\n";
  const auto clamp = run({"rs", "--mse-table", (dir / "clamp.csv").string()});
  CHECK(clamp.out.find("100:100,0.5,2,1,0.00") != std::string::npos);
}

TEST_CASE("oracle subcommand") {
  const auto dir = cift::testing::scratch_dir("oracle");
  const auto r = run({"oracle", "prop1", "--out", (dir / "o.json").string()});
  CHECK(r.code == 0);
  CHECK(r.out.find("PASS prop1") != std::string::npos);
  CHECK(r.out.find("FAIL") == std::string::npos);
  const auto doc = nlohmann::json::parse(slurp(dir / "o.json"));
  CHECK(doc.is_array());
  CHECK(run({"oracle", "prop5"}).code == 0);

  const auto bad = run({"oracle", "prop9"});
  CHECK(bad.code == cift::cli::kUsageError);
  CHECK(bad.err.find("prop9") != std::string::npos);
}

TEST_CASE("no subcommand is a usage error") {
  CHECK(run({}).code == cift::cli::kUsageError);
}
