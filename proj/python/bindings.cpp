#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cift/cli.hpp"
#include "cift/composition.hpp"
#include "cift/error.hpp"
#include "cift/feature_store.hpp"
#include "cift/numstats.hpp"
#include "cift/report.hpp"
#include "cift/robustness.hpp"
#include "cift/theory_oracle.hpp"

namespace py = pybind11;
using namespace cift;

namespace {

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

FloatArray to_numpy(const FeatureMatrix& m) {
  FloatArray out({m.rows(), m.dims()});
  std::copy(m.data().begin(), m.data().end(), out.mutable_data());
  return out;
}

FeatureMatrix from_numpy(const FloatArray& a, SourceTag tag, const std::string& id) {
  if (a.ndim() != 2) throw Error(ErrorCode::InvalidShape, "expected a 2-D array");
  const auto n = static_cast<std::size_t>(a.shape(0));
  const auto d = static_cast<std::size_t>(a.shape(1));
  return FeatureMatrix(n, d, std::vector<float>(a.data(), a.data() + n * d), tag, id);
}

py::object json_to_python(const nlohmann::json& doc) {
  return py::module_::import("json").attr("loads")(doc.dump());
}

MixturePlan make_plan(const std::string& ratios, const std::string& sampling, std::uint64_t seed) {
  MixturePlan plan{parse_ratio_grid(ratios), SamplingPolicy::take_all()};
  if (sampling == "subsample") {
    plan.sampling = SamplingPolicy::subsample(seed);
  } else if (sampling != "take-all") {
    throw Error(ErrorCode::InvalidArgument, "sampling must be take-all or subsample");
  }
  plan.validate();
  return plan;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Feature-space SNR sweeps, robustness scores and theory oracles";

  py::register_exception<Error>(m, "CiftError", PyExc_ValueError);

  m.def(
      "load_features",
      [](const std::string& path, const std::string& format) {
        return to_numpy(load_features(path, parse_feature_format(format)));
      },
      py::arg("path"), py::arg("format") = "fvec", "Read an FVEC or CSV file into an (n, d) float32 array.");

  m.def(
      "write_features",
      [](const FloatArray& a, const std::string& path, const std::string& format, const std::string& dataset_id) {
        write_features(from_numpy(a, SourceTag::Real, dataset_id), path, parse_feature_format(format));
      },
      py::arg("array"), py::arg("path"), py::arg("format") = "fvec", py::arg("dataset_id") = "features");

  m.def(
      "first_principal_component",
      [](const Eigen::MatrixXd& rows) {
        const auto pca = first_principal_component(rows);
        py::dict out;
        out["mean"] = pca.mean;
        out["w1"] = pca.w1;
        out["eigenvalue"] = pca.eigenvalue;
        return out;
      },
      py::arg("rows"));

  m.def(
      "fit_gaussian",
      [](const std::vector<double>& xs) {
        const auto fit = fit_gaussian(xs);
        return py::make_tuple(fit.mu, fit.sigma);
      },
      py::arg("values"), "Sample mean and (n - 1) standard deviation.");

  m.def(
      "frechet_distance_sq",
      [](const Eigen::VectorXd& mean_a, const Eigen::MatrixXd& cov_a, const Eigen::VectorXd& mean_b,
         const Eigen::MatrixXd& cov_b) {
        return frechet_distance_sq({mean_a, cov_a}, {mean_b, cov_b});
      },
      py::arg("mean_a"), py::arg("cov_a"), py::arg("mean_b"), py::arg("cov_b"));

  m.def("snr_from_moments", &snr_from_moments, py::arg("mu"), py::arg("sigma"));

  m.def(
      "snr_of_mixture",
      [](const Eigen::MatrixXd& rows, const std::vector<bool>& real_mask) {
        const auto p = snr_of_mixture(rows, real_mask);
        return py::make_tuple(p.mu, p.sigma, p.snr);
      },
      py::arg("rows"), py::arg("real_mask"));

  m.def(
      "detect_decoherence",
      [](const std::vector<double>& snr) { return detect_decoherence(std::span<const double>(snr)); },
      py::arg("snr"), "Index of the first interior strict local minimum, or None.");

  m.def(
      "run_sweep",
      [](const std::string& manifest, const std::string& ratios, const std::string& sampling, std::uint64_t seed,
         unsigned workers) {
        const auto plan = make_plan(ratios, sampling, seed);
        SweepReport report;
        {
          py::gil_scoped_release release;
          report = run_sweep(load_manifest(manifest), plan, {workers});
        }
        return json_to_python(sweep_report_json(report));
      },
      py::arg("manifest"), py::arg("ratios") = cli::kDefaultRatioGrid, py::arg("sampling") = "take-all",
      py::arg("seed") = 0, py::arg("workers") = 1, "Run an SNR sweep and return the report as a dict.");

  m.def(
      "sweep_arrays",
      [](const FloatArray& real, const FloatArray& synth, const std::string& ratios, const std::string& sampling,
         std::uint64_t seed) {
        const auto plan = make_plan(ratios, sampling, seed);
        const auto report = run_sweep(from_numpy(real, SourceTag::Real, "real"),
                                      from_numpy(synth, SourceTag::Synthetic, "synthetic"), plan);
        return json_to_python(sweep_report_json(report));
      },
      py::arg("real"), py::arg("synth"), py::arg("ratios") = cli::kDefaultRatioGrid,
      py::arg("sampling") = "take-all", py::arg("seed") = 0);

  m.def(
      "rs_curve",
      [](const std::string& table_path) {
        py::list out;
        for (const auto& p : rs_curve(MseTable::read_csv(table_path))) {
          py::dict row;
          row["ratio"] = p.ratio.str();
          row["lambda"] = p.ratio.lambda();
          row["ood_mean"] = p.ood_mean;
          row["id_mean"] = p.id_mean;
          row["rs"] = p.rs;
          out.append(row);
        }
        return out;
      },
      py::arg("mse_table"), "Robustness Score per ratio from a condition,kind,ratio,mse CSV.");

  m.def("robustness_score_from_means", &robustness_score_from_means, py::arg("ood_mean"),
        py::arg("ood_baseline"), py::arg("id_mean"), py::arg("id_baseline"));

  m.def(
      "run_oracle_suite",
      [](const std::string& selector) { return json_to_python(oracle_cases_json(theory::run_oracle_suite(selector))); },
      py::arg("selector") = "all");

  m.def("normalized_mi_closed_form", &theory::normalized_mi_closed_form, py::arg("diversity"));
  m.def("mixture_variance", &theory::mixture_variance, py::arg("mu1"), py::arg("var1"), py::arg("mu2"),
        py::arg("var2"));
  m.def(
      "collapse_critical_fraction",
      [](double mu_real, double mu_synth) {
        const auto p = theory::collapse_critical_fraction(mu_real, mu_synth);
        return py::make_tuple(p.alpha_dc, p.ratio_dc);
      },
      py::arg("mu_real"), py::arg("mu_synth"));

  m.def(
      "cli",
      [](const std::vector<std::string>& args) {
        std::vector<std::string> full{"cift"};
        full.insert(full.end(), args.begin(), args.end());
        std::vector<const char*> argv;
        for (const auto& a : full) argv.push_back(a.c_str());
        std::ostringstream out, err;
        const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Run a command-line invocation; returns (exit_code, stdout, stderr).");
}
