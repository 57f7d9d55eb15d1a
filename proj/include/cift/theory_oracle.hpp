#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cift/feature_store.hpp"

namespace cift::theory {

// ---------------------------------------------------------------------------
// Spurious correlation between core (u) and shortcut (v) features in a
// mixture of sub-datasets. All entropies are in bits.

struct DiscreteJoint {
  std::vector<int> support_u;
  std::vector<int> support_v;
  Eigen::MatrixXd p;  // p(support_u[i], support_v[j])

  void validate() const;
};

struct InformationTerms {
  double h_u = 0.0;
  double h_v = 0.0;
  double h_uv = 0.0;
  double mutual_information = 0.0;
  double normalized = 0.0;  // 2 I / (H(u) + H(v))
};

double entropy_bits(std::span<const double> probabilities);
InformationTerms information_terms(const DiscreteJoint& joint);

// One sub-dataset with u independent of v. Empty symbol lists mean "fresh"
// symbols, disjoint from every other sub-dataset in the mixture.
struct SubDatasetSpec {
  std::vector<double> u_dist;
  std::vector<double> v_dist;
  std::vector<int> u_symbols;
  std::vector<int> v_symbols;

  void validate() const;
};

SubDatasetSpec uniform_sub_dataset(std::size_t k_u, std::size_t k_v);

// Equal-weight mixture joint over the union of supports. With
// require_disjoint, shared symbols throw OverlappingSupports.
DiscreteJoint mixture_joint(std::span<const SubDatasetSpec> subs, bool require_disjoint);

// Sum over sub-datasets of H(u_i) + H(v_i).
double diversity(std::span<const SubDatasetSpec> subs);

double normalized_mi_closed_form(double c_diversity);

// Enumerates the two-sub-dataset mixture joint and returns 2I/(H(u)+H(v)).
double normalized_mi_bruteforce(const SubDatasetSpec& first, const SubDatasetSpec& second);

// Same, but supports may overlap.
double normalized_mi_of_mixture(std::span<const SubDatasetSpec> subs);

// 1 - C_div / (C_div + 4 - C_inter), C_inter in [0, 4].
double mi_overlap_bound(double c_diversity, double c_interleave);

// ---------------------------------------------------------------------------
// Learning bias from distribution disparity.

// Variance of an equal-weight two-component mixture:
// (var1 + var2) / 2 + (mu1 - mu2)^2 / 4.
double mixture_variance(double mu1, double var1, double mu2, double var2);

// Sampling oracle for mixture_variance: n draws, each component chosen by a
// fair coin. Population (1/n) variance of the sample.
double monte_carlo_mixture_variance(double mu1, double var1, double mu2, double var2,
                                    std::size_t n, std::uint64_t seed);

struct Gradients {
  Eigen::VectorXd wrt_u;
  Eigen::VectorXd wrt_v;
};

// Linear policy w_u.u + w_v.v + b with loss 0.5 * mean((pi - y)^2).
double linear_policy_loss(const Eigen::MatrixXd& u, const Eigen::MatrixXd& v,
                          const Eigen::VectorXd& y, const Eigen::VectorXd& w_u,
                          const Eigen::VectorXd& w_v, double bias);

// Gradients at w = 0, b = mean(y): (-Cov(y, u), -Cov(y, v)), population
// covariance.
Gradients initial_gradients(const Eigen::MatrixXd& u, const Eigen::MatrixXd& v,
                            const Eigen::VectorXd& y);

// Central differences of linear_policy_loss at the same initialization.
Gradients finite_difference_gradients(const Eigen::MatrixXd& u, const Eigen::MatrixXd& v,
                                      const Eigen::VectorXd& y, double step = 1e-6);

// ---------------------------------------------------------------------------
// Gradient interference on a mixed mini-batch.

struct GradientPair {
  Eigen::VectorXd g_real;
  Eigen::VectorXd g_synth;
  double alpha = 0.0;
};

struct Interference {
  double norm_sq_predicted = 0.0;  // expansion in norms and fidelity
  double norm_sq_direct = 0.0;     // ||(1 - a) g_real + a g_synth||^2
  double fidelity = 0.0;           // cosine(g_real, g_synth)
};

Interference gradient_interference(const GradientPair& pair);

// ---------------------------------------------------------------------------
// Feature-space collapse under opposed means.

struct CollapsePoint {
  double alpha_dc = 0.0;  // synthetic fraction where the mixture mean is zero
  double ratio_dc = 0.0;  // same point as synth:real parts, alpha / (1 - alpha)
};

CollapsePoint collapse_critical_fraction(double mu_real, double mu_synth);

struct CollapseSpec {
  double mu_real = 2.0;
  double mu_synth = -1.0;
  double sigma_real = 1.0;
  double sigma_synth = 1.0;
  std::size_t dims = 8;
  double noise_dims_sigma = 0.5;

  void validate() const;
};

// Real rows ~ N(mu_real e1, diag(sigma_real^2, noise^2, ...)), synthetic rows
// likewise with mu_synth / sigma_synth. Deterministic in the seed.
std::pair<FeatureMatrix, FeatureMatrix> generate_collapse_pools(const CollapseSpec& spec,
                                                                std::size_t n_real,
                                                                std::size_t n_synth,
                                                                std::uint64_t seed);

// Target moments of the signal coordinate for one cumulative mixture.
struct MomentTarget {
  double mu = 0.0;
  double sigma = 1.0;
};

// Builds a real pool and a block-structured synthetic pool such that, under
// TakeAll composition at ratio 1:k, the mixture's first coordinate has
// exactly targets[k] as sample mean and (n - 1) standard deviation. Each pool
// block holds rows_per_block rows; remaining coordinates carry zero-mean
// noise of the given scale. Throws InvalidArgument when a block would need a
// negative variance.
std::pair<FeatureMatrix, FeatureMatrix> generate_profile_pools(
    std::span<const MomentTarget> targets, std::size_t rows_per_block, std::size_t dims,
    double noise_sigma, std::uint64_t seed);

// Per-ratio (mu, sigma) of the folding and toy-picking sweeps over
// 100:0 ... 100:500.
std::vector<MomentTarget> folding_profile();
std::vector<MomentTarget> toy_profile();

// ---------------------------------------------------------------------------
// Suite driver used by the CLI.

struct OracleCase {
  std::string suite;
  std::string name;
  double analytic = 0.0;
  double brute_force = 0.0;
  double abs_diff = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

// selector: all | prop1 | prop2 | prop3 | prop5 | prop6. Throws
// InvalidArgument for anything else.
std::vector<OracleCase> run_oracle_suite(std::string_view selector);
bool is_known_selector(std::string_view selector);

}  // namespace cift::theory
