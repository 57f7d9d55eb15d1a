#include "cift/theory_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "cift/error.hpp"
#include "cift/rng.hpp"

namespace cift::theory {

namespace {

constexpr double kProbabilityTolerance = 1e-12;

void check_distribution(std::span<const double> dist, const char* what) {
  if (dist.empty()) throw Error(ErrorCode::InvalidArgument, std::string(what) + " is empty");
  double total = 0.0;
  for (const double p : dist) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw Error(ErrorCode::InvalidArgument, std::string(what) + " has a negative entry");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > kProbabilityTolerance) {
    throw Error(ErrorCode::InvalidArgument,
                std::string(what) + " sums to " + std::to_string(total));
  }
}

// Rows of a block with exact sample mean 0 and (n - 1) standard deviation 1.
Eigen::VectorXd standardized_normals(std::size_t n, Rng& rng) {
  Eigen::VectorXd z(static_cast<Eigen::Index>(n));
  for (auto& x : z) x = rng.normal();
  z.array() -= z.mean();
  const double sd = std::sqrt(z.squaredNorm() / static_cast<double>(n - 1));
  return z / sd;
}

}  // namespace

void DiscreteJoint::validate() const {
  if (p.rows() != static_cast<Eigen::Index>(support_u.size()) ||
      p.cols() != static_cast<Eigen::Index>(support_v.size())) {
    throw Error(ErrorCode::ShapeMismatch, "joint table does not match supports");
  }
  if ((p.array() < 0.0).any()) throw Error(ErrorCode::InvalidArgument, "negative probability");
  if (std::abs(p.sum() - 1.0) > kProbabilityTolerance) {
    throw Error(ErrorCode::InvalidArgument, "joint sums to " + std::to_string(p.sum()));
  }
}

double entropy_bits(std::span<const double> probabilities) {
  double h = 0.0;
  for (const double p : probabilities) {
    if (p > 0.0) h -= p * std::log2(p);
  }
  return h;
}

InformationTerms information_terms(const DiscreteJoint& joint) {
  joint.validate();
  const Eigen::VectorXd pu = joint.p.rowwise().sum();
  const Eigen::VectorXd pv = joint.p.colwise().sum().transpose();
  InformationTerms t;
  t.h_u = entropy_bits({pu.data(), static_cast<std::size_t>(pu.size())});
  t.h_v = entropy_bits({pv.data(), static_cast<std::size_t>(pv.size())});
  t.h_uv = entropy_bits({joint.p.data(), static_cast<std::size_t>(joint.p.size())});
  t.mutual_information = t.h_u + t.h_v - t.h_uv;
  const double denom = t.h_u + t.h_v;
  t.normalized = denom > 0.0 ? 2.0 * t.mutual_information / denom : 0.0;
  return t;
}

void SubDatasetSpec::validate() const {
  check_distribution(u_dist, "u distribution");
  check_distribution(v_dist, "v distribution");
  if (!u_symbols.empty() && u_symbols.size() != u_dist.size()) {
    throw Error(ErrorCode::ShapeMismatch, "u symbols do not match u distribution");
  }
  if (!v_symbols.empty() && v_symbols.size() != v_dist.size()) {
    throw Error(ErrorCode::ShapeMismatch, "v symbols do not match v distribution");
  }
}

SubDatasetSpec uniform_sub_dataset(std::size_t k_u, std::size_t k_v) {
  SubDatasetSpec s;
  s.u_dist.assign(k_u, 1.0 / static_cast<double>(k_u));
  s.v_dist.assign(k_v, 1.0 / static_cast<double>(k_v));
  return s;
}

DiscreteJoint mixture_joint(std::span<const SubDatasetSpec> subs, bool require_disjoint) {
  if (subs.empty()) throw Error(ErrorCode::InvalidArgument, "no sub-datasets");
  // Fresh symbols start above any caller-chosen id.
  int fresh = 1;
  for (const auto& s : subs) {
    s.validate();
    for (const int x : s.u_symbols) fresh = std::max(fresh, x + 1);
    for (const int x : s.v_symbols) fresh = std::max(fresh, x + 1);
  }
  std::vector<std::vector<int>> us;
  std::vector<std::vector<int>> vs;
  for (const auto& s : subs) {
    auto assign = [&fresh](const std::vector<int>& given, std::size_t k) {
      if (!given.empty()) return given;
      std::vector<int> out(k);
      std::iota(out.begin(), out.end(), fresh);
      fresh += static_cast<int>(k);
      return out;
    };
    us.push_back(assign(s.u_symbols, s.u_dist.size()));
    vs.push_back(assign(s.v_symbols, s.v_dist.size()));
  }

  if (require_disjoint) {
    for (std::size_t i = 0; i < subs.size(); ++i) {
      for (std::size_t j = i + 1; j < subs.size(); ++j) {
        auto shares = [](const std::vector<int>& a, const std::vector<int>& b) {
          return std::any_of(a.begin(), a.end(), [&b](int x) {
            return std::find(b.begin(), b.end(), x) != b.end();
          });
        };
        if (shares(us[i], us[j]) || shares(vs[i], vs[j])) {
          throw Error(ErrorCode::OverlappingSupports, "sub-datasets " + std::to_string(i) +
                                                          " and " + std::to_string(j) +
                                                          " share symbols");
        }
      }
    }
  }

  std::set<int> su;
  std::set<int> sv;
  for (const auto& x : us) su.insert(x.begin(), x.end());
  for (const auto& x : vs) sv.insert(x.begin(), x.end());
  DiscreteJoint joint;
  joint.support_u.assign(su.begin(), su.end());
  joint.support_v.assign(sv.begin(), sv.end());
  std::map<int, Eigen::Index> iu;
  std::map<int, Eigen::Index> iv;
  for (std::size_t i = 0; i < joint.support_u.size(); ++i) iu[joint.support_u[i]] = static_cast<Eigen::Index>(i);
  for (std::size_t i = 0; i < joint.support_v.size(); ++i) iv[joint.support_v[i]] = static_cast<Eigen::Index>(i);
  joint.p = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(su.size()),
                                  static_cast<Eigen::Index>(sv.size()));
  const double weight = 1.0 / static_cast<double>(subs.size());
  for (std::size_t s = 0; s < subs.size(); ++s) {
    for (std::size_t a = 0; a < us[s].size(); ++a) {
      for (std::size_t b = 0; b < vs[s].size(); ++b) {
        joint.p(iu[us[s][a]], iv[vs[s][b]]) += weight * subs[s].u_dist[a] * subs[s].v_dist[b];
      }
    }
  }
  return joint;
}

double diversity(std::span<const SubDatasetSpec> subs) {
  double c = 0.0;
  for (const auto& s : subs) c += entropy_bits(s.u_dist) + entropy_bits(s.v_dist);
  return c;
}

double normalized_mi_closed_form(double c_diversity) {
  if (c_diversity < 0.0) throw Error(ErrorCode::InvalidArgument, "diversity must be >= 0");
  return 4.0 / (c_diversity + 4.0);
}

double normalized_mi_bruteforce(const SubDatasetSpec& first, const SubDatasetSpec& second) {
  const SubDatasetSpec subs[] = {first, second};
  return information_terms(mixture_joint(subs, /*require_disjoint=*/true)).normalized;
}

double normalized_mi_of_mixture(std::span<const SubDatasetSpec> subs) {
  return information_terms(mixture_joint(subs, /*require_disjoint=*/false)).normalized;
}

double mi_overlap_bound(double c_diversity, double c_interleave) {
  if (c_interleave < 0.0 || c_interleave > 4.0) {
    throw Error(ErrorCode::InvalidArgument, "interleave must lie in [0, 4]");
  }
  if (c_diversity < 0.0) throw Error(ErrorCode::InvalidArgument, "diversity must be >= 0");
  const double denom = c_diversity + 4.0 - c_interleave;
  if (denom == 0.0) return 0.0;  // C_div = 0 with full overlap
  return 1.0 - c_diversity / denom;
}

double mixture_variance(double mu1, double var1, double mu2, double var2) {
  if (var1 < 0.0 || var2 < 0.0) throw Error(ErrorCode::InvalidArgument, "negative variance");
  return 0.5 * (var1 + var2) + 0.25 * (mu1 - mu2) * (mu1 - mu2);
}

double monte_carlo_mixture_variance(double mu1, double var1, double mu2, double var2,
                                    std::size_t n, std::uint64_t seed) {
  if (n < 2) throw Error(ErrorCode::InsufficientData, "need at least 2 draws");
  Rng rng(seed);
  const double sd1 = std::sqrt(var1);
  const double sd2 = std::sqrt(var2);
  // Welford
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const bool first = (rng.next_u64() >> 63) == 0;
    const double x = first ? rng.normal(mu1, sd1) : rng.normal(mu2, sd2);
    const double delta = x - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (x - mean);
  }
  return m2 / static_cast<double>(n);
}

double linear_policy_loss(const Eigen::MatrixXd& u, const Eigen::MatrixXd& v,
                          const Eigen::VectorXd& y, const Eigen::VectorXd& w_u,
                          const Eigen::VectorXd& w_v, double bias) {
  const Eigen::VectorXd residual = (u * w_u + v * w_v).array() + bias - y.array();
  return 0.5 * residual.squaredNorm() / static_cast<double>(y.size());
}

namespace {

void check_shapes(const Eigen::MatrixXd& u, const Eigen::MatrixXd& v, const Eigen::VectorXd& y) {
  if (u.rows() != y.size() || v.rows() != y.size()) {
    throw Error(ErrorCode::ShapeMismatch, "u, v and y must have the same number of rows");
  }
  if (y.size() < 1) throw Error(ErrorCode::ShapeMismatch, "no samples");
}

}  // namespace

Gradients initial_gradients(const Eigen::MatrixXd& u, const Eigen::MatrixXd& v,
                            const Eigen::VectorXd& y) {
  check_shapes(u, v, y);
  const double n = static_cast<double>(y.size());
  const Eigen::VectorXd yc = y.array() - y.mean();
  const Eigen::MatrixXd uc = u.rowwise() - u.colwise().mean();
  const Eigen::MatrixXd vc = v.rowwise() - v.colwise().mean();
  return {-(uc.transpose() * yc) / n, -(vc.transpose() * yc) / n};
}

Gradients finite_difference_gradients(const Eigen::MatrixXd& u, const Eigen::MatrixXd& v,
                                      const Eigen::VectorXd& y, double step) {
  check_shapes(u, v, y);
  const double b = y.mean();
  Eigen::VectorXd w_u = Eigen::VectorXd::Zero(u.cols());
  Eigen::VectorXd w_v = Eigen::VectorXd::Zero(v.cols());
  Gradients g{Eigen::VectorXd(u.cols()), Eigen::VectorXd(v.cols())};
  for (Eigen::Index j = 0; j < u.cols(); ++j) {
    w_u(j) = step;
    const double up = linear_policy_loss(u, v, y, w_u, w_v, b);
    w_u(j) = -step;
    const double down = linear_policy_loss(u, v, y, w_u, w_v, b);
    w_u(j) = 0.0;
    g.wrt_u(j) = (up - down) / (2.0 * step);
  }
  for (Eigen::Index j = 0; j < v.cols(); ++j) {
    w_v(j) = step;
    const double up = linear_policy_loss(u, v, y, w_u, w_v, b);
    w_v(j) = -step;
    const double down = linear_policy_loss(u, v, y, w_u, w_v, b);
    w_v(j) = 0.0;
    g.wrt_v(j) = (up - down) / (2.0 * step);
  }
  return g;
}

Interference gradient_interference(const GradientPair& pair) {
  if (pair.g_real.size() != pair.g_synth.size()) {
    throw Error(ErrorCode::ShapeMismatch, "gradient dimensions differ");
  }
  if (!(pair.alpha >= 0.0 && pair.alpha <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "alpha must lie in [0, 1]");
  }
  if (!pair.g_real.allFinite() || !pair.g_synth.allFinite()) {
    throw Error(ErrorCode::NonFiniteValue, "gradient has non-finite entries");
  }
  const double nr = pair.g_real.norm();
  const double ns = pair.g_synth.norm();
  if (nr == 0.0 || ns == 0.0) {
    throw Error(ErrorCode::ZeroGradient, "fidelity is undefined for a zero gradient");
  }
  const double a = pair.alpha;
  Interference out;
  out.fidelity = std::clamp(pair.g_real.dot(pair.g_synth) / (nr * ns), -1.0, 1.0);
  out.norm_sq_predicted = (1.0 - a) * (1.0 - a) * nr * nr + a * a * ns * ns +
                          2.0 * a * (1.0 - a) * nr * ns * out.fidelity;
  out.norm_sq_direct = ((1.0 - a) * pair.g_real + a * pair.g_synth).squaredNorm();
  return out;
}

CollapsePoint collapse_critical_fraction(double mu_real, double mu_synth) {
  if (!(mu_real > 0.0) || !(mu_synth < 0.0)) {
    throw Error(ErrorCode::SignViolation, "collapse needs mu_real > 0 and mu_synth < 0");
  }
  return {mu_real / (mu_real - mu_synth), -mu_real / mu_synth};
}

void CollapseSpec::validate() const {
  if (!(mu_real > 0.0) || !(mu_synth < 0.0)) {
    throw Error(ErrorCode::SignViolation, "collapse pools need mu_real > 0 and mu_synth < 0");
  }
  if (!(sigma_real > 0.0) || !(sigma_synth > 0.0) || noise_dims_sigma < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "scales must be positive");
  }
  if (dims < 1) throw Error(ErrorCode::InvalidArgument, "dims must be >= 1");
}

std::pair<FeatureMatrix, FeatureMatrix> generate_collapse_pools(const CollapseSpec& spec,
                                                                std::size_t n_real,
                                                                std::size_t n_synth,
                                                                std::uint64_t seed) {
  spec.validate();
  if (n_real < 2 || n_synth < 2) {
    throw Error(ErrorCode::InvalidArgument, "pools need at least 2 rows each");
  }
  Rng rng(seed);
  auto draw = [&](std::size_t n, double mu, double sigma, SourceTag tag, const char* id) {
    std::vector<float> data(n * spec.dims);
    for (std::size_t i = 0; i < n; ++i) {
      data[i * spec.dims] = static_cast<float>(rng.normal(mu, sigma));
      for (std::size_t j = 1; j < spec.dims; ++j) {
        data[i * spec.dims + j] = static_cast<float>(rng.normal(0.0, spec.noise_dims_sigma));
      }
    }
    return FeatureMatrix(n, spec.dims, std::move(data), tag, id);
  };
  FeatureMatrix real = draw(n_real, spec.mu_real, spec.sigma_real, SourceTag::Real, "collapse_real");
  FeatureMatrix synth =
      draw(n_synth, spec.mu_synth, spec.sigma_synth, SourceTag::Synthetic, "collapse_synth");
  return {std::move(real), std::move(synth)};
}

std::pair<FeatureMatrix, FeatureMatrix> generate_profile_pools(
    std::span<const MomentTarget> targets, std::size_t rows_per_block, std::size_t dims,
    double noise_sigma, std::uint64_t seed) {
  if (targets.size() < 2) throw Error(ErrorCode::InvalidArgument, "need at least 2 targets");
  if (rows_per_block < 3 || dims < 1 || noise_sigma < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "bad profile pool shape");
  }
  const auto m = static_cast<double>(rows_per_block);
  Rng rng(seed);
  std::vector<std::vector<float>> blocks;
  double prev_sum = 0.0;
  double prev_sq = 0.0;
  for (std::size_t k = 0; k < targets.size(); ++k) {
    const double n = m * static_cast<double>(k + 1);
    const double sum = n * targets[k].mu;
    const double sq = (n - 1.0) * targets[k].sigma * targets[k].sigma + n * targets[k].mu * targets[k].mu;
    const double block_mean = (sum - prev_sum) / m;
    const double block_var = ((sq - prev_sq) - m * block_mean * block_mean) / (m - 1.0);
    if (!(block_var > 0.0)) {
      throw Error(ErrorCode::InvalidArgument,
                  "target " + std::to_string(k) + " needs a non-positive block variance");
    }
    prev_sum = sum;
    prev_sq = sq;

    const Eigen::VectorXd signal = standardized_normals(rows_per_block, rng);
    Eigen::MatrixXd noise(static_cast<Eigen::Index>(rows_per_block),
                          static_cast<Eigen::Index>(dims - 1));
    for (auto& x : noise.reshaped()) x = rng.normal(0.0, noise_sigma);
    if (noise.cols() > 0) noise = noise.rowwise() - noise.colwise().mean();

    std::vector<float> block(rows_per_block * dims);
    const double sd = std::sqrt(block_var);
    for (std::size_t i = 0; i < rows_per_block; ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      block[i * dims] = static_cast<float>(block_mean + sd * signal(ii));
      for (std::size_t j = 1; j < dims; ++j) {
        block[i * dims + j] = static_cast<float>(noise(ii, static_cast<Eigen::Index>(j - 1)));
      }
    }
    blocks.push_back(std::move(block));
  }
  FeatureMatrix real(rows_per_block, dims, std::move(blocks.front()), SourceTag::Real,
                     "profile_real");
  std::vector<float> synth_data;
  for (std::size_t k = 1; k < blocks.size(); ++k) {
    synth_data.insert(synth_data.end(), blocks[k].begin(), blocks[k].end());
  }
  FeatureMatrix synth(rows_per_block * (blocks.size() - 1), dims, std::move(synth_data),
                      SourceTag::Synthetic, "profile_synth");
  return {std::move(real), std::move(synth)};
}

std::vector<MomentTarget> folding_profile() {
  return {{0.79, 5.55}, {1.17, 5.39}, {0.85, 5.17}, {0.05, 5.18}, {0.30, 5.10}, {0.73, 5.04}};
}

std::vector<MomentTarget> toy_profile() {
  return {{0.98, 3.33}, {0.76, 3.84}, {0.26, 3.89}, {0.05, 3.84}, {0.25, 3.94}, {0.37, 3.78}};
}

}  // namespace cift::theory
