#include "cift/cli.hpp"

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "cift/composition.hpp"
#include "cift/error.hpp"
#include "cift/feature_store.hpp"
#include "cift/report.hpp"
#include "cift/robustness.hpp"
#include "cift/theory_oracle.hpp"

namespace cift::cli {

namespace {

struct RunConfig {
  std::string manifest_path;
  std::string ratio_grid = kDefaultRatioGrid;
  std::uint64_t seed = 0;
  std::string sampling = "take-all";
  std::string output_path;
  std::string plot_path;
  std::string mse_table_path;
  unsigned workers = 1;
};

struct FixtureConfig {
  std::string kind = "collapse";
  std::string out_dir;
  std::uint64_t seed = 0;
  std::size_t n_real = 10'000;
  std::size_t n_synth = 10'000;
  std::size_t dims = 8;
  std::size_t rows_per_block = 500;
};

bool is_usage_error(ErrorCode code) {
  return code == ErrorCode::InvalidRatio || code == ErrorCode::InvalidPlan ||
         code == ErrorCode::MissingBaseline;
}

int cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  MixturePlan plan;
  try {
    plan.ratios = parse_ratio_grid(cfg.ratio_grid);
    plan.validate();
  } catch (const Error& e) {
    err << "sweep: bad --ratios: " << e.what() << '\n';
    return kUsageError;
  }
  if (cfg.sampling == "take-all") {
    plan.sampling = SamplingPolicy::take_all();
  } else if (cfg.sampling == "subsample") {
    plan.sampling = SamplingPolicy::subsample(cfg.seed);
  } else {
    err << "sweep: --sampling must be take-all or subsample\n";
    return kUsageError;
  }

  try {
    if (!std::filesystem::exists(cfg.manifest_path)) {
      err << "sweep: manifest not found: " << cfg.manifest_path << '\n';
      return kDataError;
    }
    const Manifest manifest = load_manifest(cfg.manifest_path);
    const SweepReport report = run_sweep(manifest, plan, {cfg.workers});
    nlohmann::json doc = sweep_report_json(report);
    if (!cfg.mse_table_path.empty()) {
      const auto curve = rs_curve(MseTable::read_csv(cfg.mse_table_path));
      doc["robustness"] = nlohmann::json::array();
      for (const auto& p : curve) {
        doc["robustness"].push_back(
            {{"ratio", p.ratio.str()}, {"rs", p.rs}, {"ood_mean", p.ood_mean}, {"id_mean", p.id_mean}});
      }
    }
    std::filesystem::path json_path = cfg.output_path;
    std::filesystem::path csv_path = json_path;
    csv_path.replace_extension(".csv");
    if (csv_path == json_path) json_path.replace_extension(".json");
    write_text(json_path, doc.dump(2) + "\n");
    write_text(csv_path, sweep_report_csv(report));
    if (!cfg.plot_path.empty()) write_text(cfg.plot_path, sweep_report_svg(report));

    out << "lambda_star " << report.lambda_star.str() << " (lambda=" << report.lambda_star.lambda()
        << ")\n";
    if (report.decoherence_index) {
      out << "decoherence " << report.points[*report.decoherence_index].ratio.str() << '\n';
    } else {
      out << "decoherence none\n";
    }
    for (const auto& note : report.notes) out << "note: " << note << '\n';
    return kOk;
  } catch (const Error& e) {
    err << "sweep: " << e.what() << '\n';
    return is_usage_error(e.code()) ? kUsageError : kDataError;
  } catch (const std::exception& e) {
    err << "sweep: " << e.what() << '\n';
    return kDataError;
  }
}

int cmd_rs(const std::string& table_path, std::ostream& out, std::ostream& err) {
  try {
    const auto curve = rs_curve(MseTable::read_csv(table_path));
    out << rs_curve_csv(curve);
    return kOk;
  } catch (const std::exception& e) {
    err << "rs: " << e.what() << '\n';
    return kDataError;
  }
}

int cmd_oracle(const std::string& selector, const std::string& json_out, std::ostream& out,
               std::ostream& err) {
  if (!theory::is_known_selector(selector)) {
    err << "oracle: unknown selector '" << selector
        << "' (expected all, prop1, prop2, prop3, prop5 or prop6)\n";
    return kUsageError;
  }
  try {
    const auto cases = theory::run_oracle_suite(selector);
    std::size_t failed = 0;
    for (const auto& c : cases) {
      failed += c.pass ? 0 : 1;
      out << (c.pass ? "PASS " : "FAIL ") << c.suite << ": " << c.name
          << " analytic=" << c.analytic << " brute_force=" << c.brute_force
          << " diff=" << c.abs_diff << " tol=" << c.tolerance << '\n';
    }
    out << (cases.size() - failed) << '/' << cases.size() << " oracle cases passed\n";
    if (!json_out.empty()) write_text(json_out, oracle_cases_json(cases).dump(2) + "\n");
    return failed == 0 ? kOk : kOracleFailure;
  } catch (const std::exception& e) {
    err << "oracle: " << e.what() << '\n';
    return kOracleFailure;
  }
}

int cmd_gen_fixture(const FixtureConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    std::optional<std::pair<FeatureMatrix, FeatureMatrix>> pools;
    if (cfg.kind == "collapse") {
      theory::CollapseSpec spec;
      spec.dims = cfg.dims;
      pools = theory::generate_collapse_pools(spec, cfg.n_real, cfg.n_synth, cfg.seed);
    } else if (cfg.kind == "folding" || cfg.kind == "toy") {
      const auto targets = cfg.kind == "folding" ? theory::folding_profile() : theory::toy_profile();
      pools = theory::generate_profile_pools(targets, cfg.rows_per_block, cfg.dims, 0.1, cfg.seed);
    } else {
      err << "gen-fixture: --kind must be collapse, folding or toy\n";
      return kUsageError;
    }
    const std::filesystem::path dir = cfg.out_dir;
    std::filesystem::create_directories(dir);
    write_features(pools->first, dir / "real.fvec", FeatureFormat::Fvec);
    write_features(pools->second, dir / "synth.fvec", FeatureFormat::Fvec);
    Manifest manifest;
    manifest.entries.push_back({"real.fvec", SourceTag::Real, pools->first.dataset_id(), FeatureFormat::Fvec});
    manifest.entries.push_back(
        {"synth.fvec", SourceTag::Synthetic, pools->second.dataset_id(), FeatureFormat::Fvec});
    write_manifest(manifest, dir / "manifest.json");
    out << "wrote " << (dir / "manifest.json").string() << " (real " << pools->first.rows() << "x"
        << pools->first.dims() << ", synthetic " << pools->second.rows() << "x"
        << pools->second.dims() << ")\n";
    return kOk;
  } catch (const Error& e) {
    err << "gen-fixture: " << e.what() << '\n';
    return e.code() == ErrorCode::InvalidArgument || e.code() == ErrorCode::SignViolation
               ? kUsageError
               : kDataError;
  } catch (const std::exception& e) {
    err << "gen-fixture: " << e.what() << '\n';
    return kDataError;
  }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dataset-composition tuning: feature-space SNR sweeps, robustness scores and theory oracles"};
  app.require_subcommand(1);

  RunConfig sweep_cfg;
  auto* sweep = app.add_subcommand("sweep", "SNR sweep over a mixing-ratio grid");
  sweep->add_option("--manifest", sweep_cfg.manifest_path, "Manifest JSON")->required();
  sweep->add_option("--ratios", sweep_cfg.ratio_grid, "Comma-separated R:S grid, baseline first")
      ->capture_default_str();
  sweep->add_option("--seed", sweep_cfg.seed, "Seed for --sampling subsample")->capture_default_str();
  sweep->add_option("--sampling", sweep_cfg.sampling, "take-all | subsample")->capture_default_str();
  sweep->add_option("--out", sweep_cfg.output_path, "Report JSON path (CSV written alongside)")
      ->required();
  sweep->add_option("--plot", sweep_cfg.plot_path, "Optional SVG chart path");
  sweep->add_option("--mse-table", sweep_cfg.mse_table_path,
                    "Optional MSE table; adds robustness scores to the report");
  sweep->add_option("--workers", sweep_cfg.workers, "Parallel ratio workers")->capture_default_str();

  std::string mse_table;
  auto* rs = app.add_subcommand("rs", "Robustness Score per ratio from an MSE table");
  rs->add_option("--mse-table", mse_table, "CSV: condition,kind,ratio,mse")->required();

  std::string selector = "all";
  std::string oracle_out;
  auto* oracle = app.add_subcommand("oracle", "Closed-form vs brute-force theory checks");
  oracle->add_option("selector", selector, "all | prop1 | prop2 | prop3 | prop5 | prop6")
      ->capture_default_str();
  oracle->add_option("--out", oracle_out, "Optional JSON with every case");

  FixtureConfig fixture;
  auto* gen = app.add_subcommand("gen-fixture", "Write synthetic FVEC pools plus a manifest");
  gen->add_option("--kind", fixture.kind, "collapse | folding | toy")->capture_default_str();
  gen->add_option("--out", fixture.out_dir, "Output directory")->required();
  gen->add_option("--seed", fixture.seed)->capture_default_str();
  gen->add_option("--n-real", fixture.n_real, "collapse: real rows")->capture_default_str();
  gen->add_option("--n-synth", fixture.n_synth, "collapse: synthetic rows")->capture_default_str();
  gen->add_option("--dims", fixture.dims)->capture_default_str();
  gen->add_option("--rows-per-block", fixture.rows_per_block,
                  "folding/toy: rows per 100 parts")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsageError;
  }

  if (*sweep) return cmd_sweep(sweep_cfg, out, err);
  if (*rs) return cmd_rs(mse_table, out, err);
  if (*oracle) return cmd_oracle(selector, oracle_out, out, err);
  if (*gen) return cmd_gen_fixture(fixture, out, err);
  return kUsageError;
}

}  // namespace cift::cli
