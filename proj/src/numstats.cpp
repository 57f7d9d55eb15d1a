#include "cift/numstats.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "cift/error.hpp"

namespace cift {

namespace {

constexpr double kSymmetryTolerance = 1e-10;
constexpr double kNonPsdBelow = -1e-6;

void fix_sign(Eigen::VectorXd& v) {
  Eigen::Index arg = 0;
  v.cwiseAbs().maxCoeff(&arg);
  if (v(arg) < 0.0) v = -v;
}

void check_symmetric_psd_shape(const Eigen::MatrixXd& m, const char* what) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorCode::DimensionMismatch, std::string(what) + " is not square");
  }
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > kSymmetryTolerance * scale) {
    throw Error(ErrorCode::NonPsdInput, std::string(what) + " is not symmetric");
  }
}

double clamp_eigenvalue(double ev) {
  if (ev < kNonPsdBelow) {
    throw Error(ErrorCode::NonPsdInput, "eigenvalue " + std::to_string(ev) + " < -1e-6");
  }
  return ev < 0.0 ? 0.0 : ev;
}

}  // namespace

Eigen::VectorXd column_mean(const Eigen::MatrixXd& rows) {
  return rows.colwise().mean().transpose();
}

Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& rows) {
  if (rows.rows() < 2) {
    throw Error(ErrorCode::InsufficientData, "covariance needs at least 2 rows");
  }
  const Eigen::MatrixXd centered = rows.rowwise() - rows.colwise().mean();
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(rows.cols(), rows.cols());
  cov.selfadjointView<Eigen::Lower>().rankUpdate(centered.transpose());
  cov.triangularView<Eigen::StrictlyUpper>() = cov.transpose();
  return cov / static_cast<double>(rows.rows() - 1);
}

GaussianMoments sample_moments(const FeatureMatrix& m) {
  const Eigen::MatrixXd rows = m.to_eigen();
  return {column_mean(rows), sample_covariance(rows)};
}

EigenPair dominant_eigenpair_dense(const Eigen::MatrixXd& symmetric) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(symmetric);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::NonPsdInput, "symmetric eigendecomposition failed");
  }
  const Eigen::Index last = symmetric.rows() - 1;
  return {solver.eigenvalues()(last), solver.eigenvectors().col(last), 0, true};
}

EigenPair dominant_eigenpair_power(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& apply, Eigen::Index dims,
    const PowerIterationOptions& options) {
  std::mt19937_64 gen(0x9E3779B97F4A7C15ull);
  Eigen::VectorXd v(dims);
  for (Eigen::Index i = 0; i < dims; ++i) {
    v(i) = static_cast<double>(gen() >> 11) * 0x1.0p-53 - 0.5;
  }
  v.normalize();

  EigenPair out;
  out.converged = false;
  for (std::size_t it = 1; it <= options.max_iterations; ++it) {
    const Eigen::VectorXd av = apply(v);
    const double lambda = v.dot(av);
    out.iterations = it;
    out.value = lambda;
    const double norm = av.norm();
    if (norm == 0.0) {
      out.vector = v;
      out.converged = true;
      return out;
    }
    const double residual = (av - lambda * v).norm();
    v = av / norm;
    if (residual <= options.tolerance * std::abs(lambda)) {
      out.converged = true;
      break;
    }
  }
  out.vector = v;
  out.value = v.dot(apply(v));
  return out;
}

EigenPair dominant_eigenpair_power(const Eigen::MatrixXd& symmetric,
                                   const PowerIterationOptions& options) {
  return dominant_eigenpair_power(
      [&symmetric](const Eigen::VectorXd& x) -> Eigen::VectorXd { return symmetric * x; },
      symmetric.rows(), options);
}

PcaResult first_principal_component(const Eigen::MatrixXd& rows, EigenMethod method) {
  if (rows.rows() < 2) {
    throw Error(ErrorCode::InsufficientData, "principal component needs at least 2 rows");
  }
  if (rows.cols() < 1) throw Error(ErrorCode::InvalidShape, "zero-width rows");

  const auto d = static_cast<std::size_t>(rows.cols());
  if (method == EigenMethod::Auto) {
    method = d <= kDenseEigenMaxDims ? EigenMethod::Dense : EigenMethod::Power;
  }

  PcaResult result;
  result.mean = column_mean(rows);
  const Eigen::MatrixXd centered = rows.rowwise() - result.mean.transpose();
  if (centered.cwiseAbs().maxCoeff() == 0.0) {
    throw Error(ErrorCode::DegenerateCovariance, "all rows identical; covariance is zero");
  }

  EigenPair pair;
  if (method == EigenMethod::Dense) {
    pair = dominant_eigenpair_dense(sample_covariance(rows));
  } else {
    const double denom = static_cast<double>(rows.rows() - 1);
    pair = dominant_eigenpair_power(
        [&centered, denom](const Eigen::VectorXd& x) -> Eigen::VectorXd {
          return centered.transpose() * (centered * x) / denom;
        },
        rows.cols());
  }
  if (!(pair.value > 0.0)) {
    throw Error(ErrorCode::DegenerateCovariance, "leading covariance eigenvalue is zero");
  }
  result.w1 = pair.vector.normalized();
  fix_sign(result.w1);
  result.eigenvalue = pair.value;
  result.iterations = pair.iterations;
  return result;
}

PcaResult first_principal_component(const FeatureMatrix& m, EigenMethod method) {
  return first_principal_component(m.to_eigen(), method);
}

std::vector<double> project(const Eigen::MatrixXd& rows, const Eigen::VectorXd& w1,
                            bool center) {
  if (rows.cols() != w1.size()) {
    throw Error(ErrorCode::DimensionMismatch, "rows have d=" + std::to_string(rows.cols()) +
                                                  ", direction has " +
                                                  std::to_string(w1.size()));
  }
  Eigen::VectorXd proj = rows * w1;
  if (center) proj.array() -= column_mean(rows).dot(w1);
  return {proj.data(), proj.data() + proj.size()};
}

std::vector<double> project(const FeatureMatrix& m, const Eigen::VectorXd& w1, bool center) {
  return project(m.to_eigen(), w1, center);
}

GaussianFit fit_gaussian(std::span<const double> xs) {
  if (xs.size() < 2) {
    throw Error(ErrorCode::InsufficientData,
                "gaussian fit needs at least 2 values, got " + std::to_string(xs.size()));
  }
  const auto n = static_cast<double>(xs.size());
  double sum = 0.0;
  for (const double x : xs) sum += x;
  const double mu = sum / n;
  double ss = 0.0;
  for (const double x : xs) ss += (x - mu) * (x - mu);
  return {mu, std::sqrt(ss / (n - 1.0)), xs.size()};
}

Eigen::MatrixXd sqrtm_psd(const Eigen::MatrixXd& symmetric) {
  check_symmetric_psd_shape(symmetric, "matrix");
  const Eigen::MatrixXd sym = 0.5 * (symmetric + symmetric.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::NonPsdInput, "symmetric eigendecomposition failed");
  }
  Eigen::VectorXd roots = solver.eigenvalues();
  for (Eigen::Index i = 0; i < roots.size(); ++i) roots(i) = std::sqrt(clamp_eigenvalue(roots(i)));
  return solver.eigenvectors() * roots.asDiagonal() * solver.eigenvectors().transpose();
}

double frechet_distance_sq(const GaussianMoments& a, const GaussianMoments& b) {
  if (a.mean.size() != b.mean.size() || a.cov.rows() != a.mean.size() ||
      b.cov.rows() != b.mean.size()) {
    throw Error(ErrorCode::DimensionMismatch, "moment dimensions disagree");
  }
  check_symmetric_psd_shape(a.cov, "first covariance");
  check_symmetric_psd_shape(b.cov, "second covariance");

  const Eigen::MatrixXd root_a = sqrtm_psd(a.cov);
  Eigen::MatrixXd inner = root_a * b.cov * root_a;
  inner = 0.5 * (inner + inner.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(inner, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::NonPsdInput, "symmetric eigendecomposition failed");
  }
  double trace_root = 0.0;
  for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
    trace_root += std::sqrt(clamp_eigenvalue(solver.eigenvalues()(i)));
  }
  const double d2 = (a.mean - b.mean).squaredNorm() + a.cov.trace() + b.cov.trace() -
                    2.0 * trace_root;
  return std::max(d2, 0.0);
}

}  // namespace cift
