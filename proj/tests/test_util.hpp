#pragma once

#include <cstdlib>
#include <filesystem>
#include <string>

#include <Eigen/Dense>

#include "cift/rng.hpp"

namespace cift::testing {

// Scratch directory under the build tree (or the system temp dir), wiped on
// first use per test binary.
inline std::filesystem::path scratch_dir(const std::string& sub) {
  const char* env = std::getenv("CIFT_TEST_TMP");
  std::filesystem::path base = env ? std::filesystem::path(env)
                                   : std::filesystem::temp_directory_path() / "cift_tests";
  const auto dir = base / sub;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng,
                                     double scale = 1.0) {
  Eigen::MatrixXd m(rows, cols);
  for (auto& x : m.reshaped()) x = scale * rng.normal();
  return m;
}

inline Eigen::MatrixXd random_psd(Eigen::Index d, Rng& rng) {
  const Eigen::MatrixXd b = random_matrix(d, d, rng);
  Eigen::MatrixXd s = b * b.transpose() / static_cast<double>(d);
  return 0.5 * (s + s.transpose());
}

inline Eigen::MatrixXd random_orthogonal(Eigen::Index d, Rng& rng) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(random_matrix(d, d, rng));
  return qr.householderQ() * Eigen::MatrixXd::Identity(d, d);
}

}  // namespace cift::testing

#include "cift/error.hpp"

// Asserts that `expr` throws cift::Error carrying `expected_code`.
#define CHECK_CIFT_ERROR(expr, expected_code)                               \
  do {                                                                      \
    bool cift_thrown_ = false;                                              \
    try {                                                                   \
      (void)(expr);                                                         \
    } catch (const ::cift::Error& cift_e_) {                                \
      cift_thrown_ = true;                                                  \
      CHECK_MESSAGE(cift_e_.code() == (expected_code), cift_e_.what());     \
    }                                                                       \
    CHECK_MESSAGE(cift_thrown_, "expected cift::Error from " #expr);        \
  } while (false)
