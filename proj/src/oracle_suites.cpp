#include <algorithm>
#include <array>
#include <cmath>

#include "cift/composition.hpp"
#include "cift/error.hpp"
#include "cift/rng.hpp"
#include "cift/theory_oracle.hpp"

namespace cift::theory {

namespace {

OracleCase make_case(std::string suite, std::string name, double analytic, double brute,
                     double tolerance, bool relative = false) {
  OracleCase c;
  c.suite = std::move(suite);
  c.name = std::move(name);
  c.analytic = analytic;
  c.brute_force = brute;
  c.abs_diff = std::abs(analytic - brute);
  c.tolerance = tolerance;
  const double scale = relative ? std::max(std::abs(analytic), 1e-300) : 1.0;
  c.pass = c.abs_diff <= tolerance * scale;
  return c;
}

void prop1(std::vector<OracleCase>& out) {
  constexpr std::array<std::size_t, 3> sizes = {2, 4, 8};
  for (const auto k : sizes) {
    for (const auto m : sizes) {
      const auto a = uniform_sub_dataset(k, m);
      const auto b = uniform_sub_dataset(k, m);
      const SubDatasetSpec pair[] = {a, b};
      out.push_back(make_case("prop1", "uniform k=" + std::to_string(k) + " m=" + std::to_string(m),
                              normalized_mi_closed_form(diversity(pair)),
                              normalized_mi_bruteforce(a, b), 1e-9));
    }
  }
  SubDatasetSpec point;
  point.u_dist = {1.0};
  point.v_dist = {1.0};
  out.push_back(make_case("prop1", "point masses", 1.0, normalized_mi_bruteforce(point, point), 1e-9));
}

void prop2(std::vector<OracleCase>& out) {
  for (const double c : {0.5, 4.0, 12.0}) {
    out.push_back(make_case("prop2", "zero overlap reduces to closed form C=" + std::to_string(c),
                            normalized_mi_closed_form(c), mi_overlap_bound(c, 0.0), 0.0));
  }
  out.push_back(make_case("prop2", "C=4 interleave=2", 1.0 / 3.0, mi_overlap_bound(4.0, 2.0), 1e-15));
  out.push_back(make_case("prop2", "full overlap", 0.0, mi_overlap_bound(6.0, 4.0), 1e-15));

  // Sub-datasets over k symbols sharing s of them: the measured normalized MI
  // must stay under the zero-overlap bound and shrink as s grows.
  constexpr int k = 8;
  double previous = 2.0;
  bool monotone = true;
  double worst_slack = 1.0;
  for (int shared = 0; shared <= k; ++shared) {
    SubDatasetSpec a = uniform_sub_dataset(k, k);
    SubDatasetSpec b = uniform_sub_dataset(k, k);
    a.u_symbols.resize(k);
    a.v_symbols.resize(k);
    b.u_symbols.resize(k);
    b.v_symbols.resize(k);
    for (int i = 0; i < k; ++i) {
      a.u_symbols[i] = a.v_symbols[i] = i;
      b.u_symbols[i] = b.v_symbols[i] = k - shared + i;
    }
    const SubDatasetSpec pair[] = {a, b};
    const double mi = normalized_mi_of_mixture(pair);
    const double bound = mi_overlap_bound(diversity(pair), 0.0);
    worst_slack = std::min(worst_slack, bound - mi);
    monotone = monotone && mi <= previous + 1e-12;
    previous = mi;
  }
  OracleCase bound_case = make_case("prop2", "overlap sweep stays under bound", 0.0,
                                    std::min(worst_slack, 0.0), 1e-12);
  out.push_back(bound_case);
  out.push_back(make_case("prop2", "overlap sweep monotone", 1.0, monotone ? 1.0 : 0.0, 0.0));
}

void prop3(std::vector<OracleCase>& out) {
  Rng rng(2024);
  double worst = 0.0;
  for (int instance = 0; instance < 50; ++instance) {
    const Eigen::Index n = 64 + static_cast<Eigen::Index>(rng.below(192));
    const Eigen::Index du = 1 + static_cast<Eigen::Index>(rng.below(4));
    const Eigen::Index dv = 1 + static_cast<Eigen::Index>(rng.below(4));
    Eigen::MatrixXd u(n, du);
    Eigen::MatrixXd v(n, dv);
    for (auto& x : u.reshaped()) x = rng.normal(0.5, 1.5);
    for (auto& x : v.reshaped()) x = rng.normal(-0.3, 0.8);
    Eigen::VectorXd coeff_u(du);
    Eigen::VectorXd coeff_v(dv);
    for (auto& x : coeff_u) x = rng.normal();
    for (auto& x : coeff_v) x = rng.normal();
    Eigen::VectorXd y = u * coeff_u + v * coeff_v;
    for (auto& x : y) x += rng.normal(0.0, 0.2);
    const Gradients analytic = initial_gradients(u, v, y);
    const Gradients fd = finite_difference_gradients(u, v, y);
    Eigen::VectorXd a(du + dv);
    Eigen::VectorXd f(du + dv);
    a << analytic.wrt_u, analytic.wrt_v;
    f << fd.wrt_u, fd.wrt_v;
    worst = std::max(worst, (a - f).norm() / a.norm());
  }
  out.push_back(make_case("prop3", "initial gradients vs finite differences (50 instances, max rel err)",
                          0.0, worst, 1e-5));

  struct Mix {
    double mu1, var1, mu2, var2;
  };
  for (const Mix& m : {Mix{0.0, 1.0, 2.0, 1.0}, Mix{-1.0, 0.5, 3.0, 2.0}, Mix{1.0, 4.0, 1.0, 1.0}}) {
    out.push_back(make_case("prop3",
                            "mixture variance mu=(" + std::to_string(m.mu1) + "," +
                                std::to_string(m.mu2) + ") vs Monte Carlo n=1e6",
                            mixture_variance(m.mu1, m.var1, m.mu2, m.var2),
                            monte_carlo_mixture_variance(m.mu1, m.var1, m.mu2, m.var2, 1'000'000, 7),
                            0.01, /*relative=*/true));
  }
}

void prop5(std::vector<OracleCase>& out) {
  Rng rng(55);
  constexpr std::array<Eigen::Index, 3> dims = {2, 64, 1024};
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const Eigen::Index d = dims[static_cast<std::size_t>(t) % dims.size()];
    GradientPair gp{Eigen::VectorXd(d), Eigen::VectorXd(d), rng.uniform()};
    for (auto& x : gp.g_real) x = rng.normal();
    for (auto& x : gp.g_synth) x = rng.normal();
    const Interference r = gradient_interference(gp);
    worst = std::max(worst, std::abs(r.norm_sq_predicted - r.norm_sq_direct) / r.norm_sq_direct);
  }
  out.push_back(make_case("prop5", "predicted vs direct squared norm (1000 triples, max rel err)",
                          0.0, worst, 1e-10));

  Eigen::VectorXd g(3);
  g << 1.0, -2.0, 0.5;
  const Interference same = gradient_interference({g, g, 0.37});
  out.push_back(make_case("prop5", "collinear fidelity", 1.0, same.fidelity, 1e-12));
  const Interference opposite = gradient_interference({g, -g, 0.5});
  out.push_back(make_case("prop5", "destructive interference at alpha=1/2", 0.0,
                          opposite.norm_sq_predicted, 1e-12));
}

void prop6(std::vector<OracleCase>& out) {
  out.push_back(make_case("prop6", "alpha_dc(2,-1)", 2.0 / 3.0,
                          collapse_critical_fraction(2.0, -1.0).alpha_dc, 1e-15));
  out.push_back(make_case("prop6", "ratio_dc(2,-1)", 2.0, collapse_critical_fraction(2.0, -1.0).ratio_dc, 1e-15));
  out.push_back(make_case("prop6", "alpha_dc(1,-3)", 0.25, collapse_critical_fraction(1.0, -3.0).alpha_dc, 1e-15));

  CollapseSpec spec;  // +2 / -1, unit spread, d = 8
  constexpr std::size_t n = 10'000;
  const auto [real, synth] = generate_collapse_pools(spec, n, n, 11);
  const double alpha = collapse_critical_fraction(spec.mu_real, spec.mu_synth).alpha_dc;
  double mean_real = 0.0;
  double mean_synth = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean_real += real(i, 0);
  for (std::size_t i = 0; i < n; ++i) mean_synth += synth(i, 0);
  mean_real /= static_cast<double>(n);
  mean_synth /= static_cast<double>(n);
  const double mixture_mean = (1.0 - alpha) * mean_real + alpha * mean_synth;
  out.push_back(make_case("prop6", "mixture mean on e1 vanishes at alpha_dc (3 sigma / sqrt n)", 0.0,
                          mixture_mean, 3.0 * spec.sigma_real / std::sqrt(static_cast<double>(n))));

  MixturePlan plan;
  for (std::uint64_t k = 0; k < 12; ++k) plan.ratios.emplace_back(12 - k, k);
  plan.sampling = SamplingPolicy::subsample(11);
  const SweepReport report = run_sweep(real, synth, plan);
  const double found = report.decoherence_index
                           ? report.points[*report.decoherence_index].ratio.lambda()
                           : -1.0;
  out.push_back(make_case("prop6", "end-to-end sweep decoherence lambda (grid 1/12)", alpha, found,
                          1.0 / 12.0 + 1e-12));
}

}  // namespace

bool is_known_selector(std::string_view selector) {
  return selector == "all" || selector == "prop1" || selector == "prop2" ||
         selector == "prop3" || selector == "prop5" || selector == "prop6";
}

std::vector<OracleCase> run_oracle_suite(std::string_view selector) {
  if (!is_known_selector(selector)) {
    throw Error(ErrorCode::InvalidArgument, "unknown oracle selector '" + std::string(selector) + "'");
  }
  std::vector<OracleCase> out;
  const bool all = selector == "all";
  if (all || selector == "prop1") prop1(out);
  if (all || selector == "prop2") prop2(out);
  if (all || selector == "prop3") prop3(out);
  if (all || selector == "prop5") prop5(out);
  if (all || selector == "prop6") prop6(out);
  return out;
}

}  // namespace cift::theory
