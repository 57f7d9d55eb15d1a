#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "cift/feature_store.hpp"

namespace cift {

struct PcaResult {
  Eigen::VectorXd mean;
  Eigen::VectorXd w1;  // unit length, largest-magnitude coordinate positive
  double eigenvalue = 0.0;
  std::size_t iterations = 0;  // 0 when the dense solver was used
};

struct GaussianFit {
  double mu = 0.0;
  double sigma = 0.0;
  std::size_t n = 0;
};

struct GaussianMoments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

struct EigenPair {
  double value = 0.0;
  Eigen::VectorXd vector;
  std::size_t iterations = 0;
  bool converged = true;
};

enum class EigenMethod { Auto, Dense, Power };

struct PowerIterationOptions {
  std::size_t max_iterations = 10'000;
  double tolerance = 1e-12;  // on ||Av - lambda v|| / |lambda|
};

// Above this width Auto switches from the dense symmetric solver to power
// iteration on the implicit covariance operator.
inline constexpr std::size_t kDenseEigenMaxDims = 4096;

Eigen::VectorXd column_mean(const Eigen::MatrixXd& rows);

// Unbiased (n - 1) sample covariance.
Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& rows);

GaussianMoments sample_moments(const FeatureMatrix& m);

EigenPair dominant_eigenpair_dense(const Eigen::MatrixXd& symmetric);

// Power iteration for a PSD operator given as a matrix-vector product. The
// start vector is a fixed pseudo-random direction so results are
// reproducible.
EigenPair dominant_eigenpair_power(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& apply, Eigen::Index dims,
    const PowerIterationOptions& options = {});
EigenPair dominant_eigenpair_power(const Eigen::MatrixXd& symmetric,
                                   const PowerIterationOptions& options = {});

// Leading eigenvector of the sample covariance. Throws DegenerateCovariance
// when the covariance is identically zero.
PcaResult first_principal_component(const Eigen::MatrixXd& rows,
                                    EigenMethod method = EigenMethod::Auto);
PcaResult first_principal_component(const FeatureMatrix& m,
                                    EigenMethod method = EigenMethod::Auto);

std::vector<double> project(const Eigen::MatrixXd& rows, const Eigen::VectorXd& w1, bool center);
std::vector<double> project(const FeatureMatrix& m, const Eigen::VectorXd& w1, bool center);

// Sample mean and (n - 1) standard deviation.
GaussianFit fit_gaussian(std::span<const double> xs);

// Principal square root of a symmetric PSD matrix. Eigenvalues in
// [-1e-6, 0) are clamped to zero; anything lower throws NonPsdInput.
Eigen::MatrixXd sqrtm_psd(const Eigen::MatrixXd& symmetric);

// ||mu_a - mu_b||^2 + Tr(S_a + S_b - 2 (S_a S_b)^{1/2}). The trace of the
// product root is taken from the symmetric form sqrt(S_a) S_b sqrt(S_a).
double frechet_distance_sq(const GaussianMoments& a, const GaussianMoments& b);

}  // namespace cift
