#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cift/feature_store.hpp"

namespace cift {

// Real:synthetic parts, e.g. 100:300. lambda is the synthetic fraction
// S / (R + S). Equality and ordering compare lambda exactly, so 1:1 == 100:100.
class MixRatio {
 public:
  MixRatio(std::uint64_t real_parts, std::uint64_t synth_parts);

  // Parses "R:S".
  static MixRatio parse(std::string_view text);
  static MixRatio baseline() { return MixRatio(100, 0); }

  std::uint64_t real_parts() const noexcept { return real_parts_; }
  std::uint64_t synth_parts() const noexcept { return synth_parts_; }
  double lambda() const noexcept;
  bool is_baseline() const noexcept { return synth_parts_ == 0; }
  std::string str() const;

  friend bool operator==(const MixRatio& a, const MixRatio& b) noexcept;
  friend std::strong_ordering operator<=>(const MixRatio& a, const MixRatio& b) noexcept;

 private:
  std::uint64_t real_parts_;
  std::uint64_t synth_parts_;
};

std::vector<MixRatio> parse_ratio_grid(std::string_view comma_separated);

struct SamplingPolicy {
  enum class Kind { TakeAll, SubsampleSeeded };
  Kind kind = Kind::TakeAll;
  std::uint64_t seed = 0;

  static SamplingPolicy take_all() { return {Kind::TakeAll, 0}; }
  static SamplingPolicy subsample(std::uint64_t seed) { return {Kind::SubsampleSeeded, seed}; }
};

struct MixturePlan {
  std::vector<MixRatio> ratios;
  SamplingPolicy sampling;

  // Throws MissingBaseline unless ratios[0] is lambda = 0, InvalidPlan unless
  // lambdas are strictly increasing.
  void validate() const;
};

struct ComposedMixture {
  FeatureMatrix rows;  // real block first, then synthetic block
  std::size_t n_real = 0;
  std::size_t n_synth = 0;
  std::vector<std::string> notes;

  std::vector<bool> real_mask() const;
};

// TakeAll keeps every real row and takes the first round(n_real * S / R)
// synthetic rows, truncating with a note if the pool is short.
// SubsampleSeeded draws the largest mixture realizing R:S exactly (up to
// flooring) without replacement; selected rows keep their pool order.
ComposedMixture compose(const FeatureMatrix& real, const FeatureMatrix& synth,
                        const MixRatio& ratio, const SamplingPolicy& sampling);

struct SnrPoint {
  MixRatio ratio = MixRatio::baseline();
  double mu = 0.0;
  double sigma = 0.0;
  double snr = 0.0;
  std::size_t n_real_rows = 0;
  std::size_t n_synth_rows = 0;
  // False when sigma == 0; such points carry snr = 0 and are skipped by
  // detection and selection.
  bool defined = true;
};

// |mu| / sigma; throws ZeroSigma for sigma == 0.
double snr_from_moments(double mu, double sigma);

// Fits N(mu, sigma^2) to projections after flipping their sign so the real
// rows have non-negative mean.
SnrPoint snr_of_projections(std::span<const double> projections,
                            const std::vector<bool>& real_mask,
                            const MixRatio& ratio = MixRatio::baseline());

// Refits the first principal component on the mixture, projects raw
// (uncentered) rows onto it and scores the projections.
SnrPoint snr_of_mixture(const FeatureMatrix& mix, const std::vector<bool>& real_mask,
                        const MixRatio& ratio = MixRatio::baseline());
SnrPoint snr_of_mixture(const Eigen::MatrixXd& rows, const std::vector<bool>& real_mask,
                        const MixRatio& ratio = MixRatio::baseline());

// All interior strict local minima, ascending.
std::vector<std::size_t> local_minima(std::span<const double> values);

// First interior strict local minimum of snr. Needs >= 3 points with strictly
// increasing lambda.
std::optional<std::size_t> detect_decoherence(std::span<const SnrPoint> points);
std::optional<std::size_t> detect_decoherence(std::span<const double> snr);

// Argmax of snr over indices before the decoherence index (all indices when
// there is none); ties go to the smaller lambda.
MixRatio select_lambda_star(std::span<const SnrPoint> points,
                            std::optional<std::size_t> decoherence_index);

struct SweepReport {
  std::vector<SnrPoint> points;
  std::optional<std::size_t> decoherence_index;
  MixRatio lambda_star = MixRatio::baseline();
  std::vector<std::string> notes;
};

struct SweepOptions {
  unsigned workers = 1;
};

SweepReport run_sweep(const FeatureMatrix& real, const FeatureMatrix& synth,
                      const MixturePlan& plan, const SweepOptions& options = {});
SweepReport run_sweep(const Manifest& manifest, const MixturePlan& plan,
                      const SweepOptions& options = {});

}  // namespace cift
