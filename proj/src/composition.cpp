#include "cift/composition.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <numeric>
#include <thread>

#include "cift/error.hpp"
#include "cift/numstats.hpp"
#include "cift/rng.hpp"

namespace cift {

namespace {

using u128 = unsigned __int128;

std::uint64_t parse_parts(std::string_view text, std::string_view whole) {
  std::uint64_t value = 0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || ec != std::errc() || end != text.data() + text.size()) {
    throw Error(ErrorCode::InvalidRatio, "cannot parse ratio '" + std::string(whole) + "'");
  }
  return value;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Indices of `count` rows drawn without replacement from [0, pool), sorted.
std::vector<std::size_t> draw_rows(std::size_t pool, std::size_t count, Rng& rng) {
  std::vector<std::size_t> idx(pool);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (count < pool) {
    for (std::size_t i = 0; i < count; ++i) {
      const auto j = i + static_cast<std::size_t>(rng.below(pool - i));
      std::swap(idx[i], idx[j]);
    }
    idx.resize(count);
    std::sort(idx.begin(), idx.end());
  }
  return idx;
}

void append_rows(std::vector<float>& out, const FeatureMatrix& m,
                 std::span<const std::size_t> rows) {
  for (const auto r : rows) {
    const auto src = m.row(r);
    out.insert(out.end(), src.begin(), src.end());
  }
}

std::vector<std::size_t> first_n(std::size_t n) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return idx;
}

}  // namespace

MixRatio::MixRatio(std::uint64_t real_parts, std::uint64_t synth_parts)
    : real_parts_(real_parts), synth_parts_(synth_parts) {
  if (real_parts_ == 0) {
    throw Error(ErrorCode::InvalidRatio, "real parts must be positive in " + str());
  }
}

MixRatio MixRatio::parse(std::string_view text) {
  const std::string_view t = trim(text);
  const auto colon = t.find(':');
  if (colon == std::string_view::npos) {
    throw Error(ErrorCode::InvalidRatio, "ratio '" + std::string(text) + "' is not R:S");
  }
  return MixRatio(parse_parts(trim(t.substr(0, colon)), text),
                  parse_parts(trim(t.substr(colon + 1)), text));
}

double MixRatio::lambda() const noexcept {
  return static_cast<double>(synth_parts_) /
         (static_cast<double>(real_parts_) + static_cast<double>(synth_parts_));
}

std::string MixRatio::str() const {
  return std::to_string(real_parts_) + ":" + std::to_string(synth_parts_);
}

bool operator==(const MixRatio& a, const MixRatio& b) noexcept {
  return static_cast<u128>(a.synth_parts_) * b.real_parts_ ==
         static_cast<u128>(b.synth_parts_) * a.real_parts_;
}

std::strong_ordering operator<=>(const MixRatio& a, const MixRatio& b) noexcept {
  // S_a / R_a vs S_b / R_b is monotone in lambda.
  return static_cast<u128>(a.synth_parts_) * b.real_parts_ <=>
         static_cast<u128>(b.synth_parts_) * a.real_parts_;
}

std::vector<MixRatio> parse_ratio_grid(std::string_view comma_separated) {
  std::vector<MixRatio> out;
  while (true) {
    const auto comma = comma_separated.find(',');
    const auto item = trim(comma_separated.substr(0, comma));
    if (!item.empty()) out.push_back(MixRatio::parse(item));
    if (comma == std::string_view::npos) break;
    comma_separated.remove_prefix(comma + 1);
  }
  if (out.empty()) throw Error(ErrorCode::InvalidPlan, "empty ratio grid");
  return out;
}

void MixturePlan::validate() const {
  if (ratios.empty()) throw Error(ErrorCode::InvalidPlan, "plan has no ratios");
  if (!ratios.front().is_baseline()) {
    throw Error(ErrorCode::MissingBaseline,
                "first ratio must be the lambda = 0 baseline, got " + ratios.front().str());
  }
  for (std::size_t i = 1; i < ratios.size(); ++i) {
    if (!(ratios[i - 1] < ratios[i])) {
      throw Error(ErrorCode::InvalidPlan, "ratios must be strictly increasing in lambda: " +
                                              ratios[i - 1].str() + " then " + ratios[i].str());
    }
  }
}

std::vector<bool> ComposedMixture::real_mask() const {
  std::vector<bool> mask(n_real + n_synth, false);
  std::fill(mask.begin(), mask.begin() + static_cast<std::ptrdiff_t>(n_real), true);
  return mask;
}

ComposedMixture compose(const FeatureMatrix& real, const FeatureMatrix& synth,
                        const MixRatio& ratio, const SamplingPolicy& sampling) {
  if (real.dims() != synth.dims()) {
    throw Error(ErrorCode::DimensionMismatch,
                "real pool has d=" + std::to_string(real.dims()) + ", synthetic pool has d=" +
                    std::to_string(synth.dims()));
  }
  const std::uint64_t R = ratio.real_parts();
  const std::uint64_t S = ratio.synth_parts();
  const std::size_t pool_r = real.rows();
  const std::size_t pool_s = synth.rows();

  std::vector<std::string> notes;
  std::vector<std::size_t> real_rows;
  std::vector<std::size_t> synth_rows;

  if (sampling.kind == SamplingPolicy::Kind::TakeAll) {
    real_rows = first_n(pool_r);
    const auto wanted = static_cast<std::size_t>((static_cast<u128>(pool_r) * S + R / 2) / R);
    if (S > 0 && wanted == 0) {
      throw Error(ErrorCode::EmptyPool, ratio.str() + ": synthetic block would be empty");
    }
    std::size_t take = wanted;
    if (wanted > pool_s) {
      take = pool_s;
      notes.push_back(ratio.str() + ": synthetic pool short (wanted " + std::to_string(wanted) +
                      " rows, have " + std::to_string(pool_s) + ")");
    }
    synth_rows = first_n(take);
  } else {
    std::size_t n_r = pool_r;
    std::size_t n_s = 0;
    if (S > 0) {
      if (static_cast<u128>(pool_r) * S <= static_cast<u128>(pool_s) * R) {
        n_s = static_cast<std::size_t>(static_cast<u128>(pool_r) * S / R);
      } else {
        n_s = pool_s;
        n_r = static_cast<std::size_t>(static_cast<u128>(pool_s) * R / S);
      }
      if (n_r == 0 || n_s == 0) {
        throw Error(ErrorCode::EmptyPool, ratio.str() + ": pools too small to realize ratio");
      }
    }
    Rng rng(splitmix64(sampling.seed) ^ splitmix64((static_cast<std::uint64_t>(R) << 32) ^ S));
    real_rows = draw_rows(pool_r, n_r, rng);
    synth_rows = draw_rows(pool_s, n_s, rng);
  }

  std::vector<float> data;
  data.reserve((real_rows.size() + synth_rows.size()) * real.dims());
  append_rows(data, real, real_rows);
  append_rows(data, synth, synth_rows);
  const SourceTag tag = synth_rows.empty() ? SourceTag::Real : SourceTag::Synthetic;
  std::string id = synth_rows.empty() ? real.dataset_id()
                                      : real.dataset_id() + "+" + synth.dataset_id() + "@" +
                                            ratio.str();
  FeatureMatrix rows(real_rows.size() + synth_rows.size(), real.dims(), std::move(data), tag,
                     std::move(id));
  return {std::move(rows), real_rows.size(), synth_rows.size(), std::move(notes)};
}

double snr_from_moments(double mu, double sigma) {
  if (!(sigma > 0.0)) {
    throw Error(ErrorCode::ZeroSigma, "projection spread is zero; SNR undefined");
  }
  return std::abs(mu) / sigma;
}

SnrPoint snr_of_projections(std::span<const double> projections,
                            const std::vector<bool>& real_mask, const MixRatio& ratio) {
  if (real_mask.size() != projections.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "mask length " + std::to_string(real_mask.size()) + " != rows " +
                    std::to_string(projections.size()));
  }
  double real_sum = 0.0;
  std::size_t n_real = 0;
  for (std::size_t i = 0; i < projections.size(); ++i) {
    if (real_mask[i]) {
      real_sum += projections[i];
      ++n_real;
    }
  }
  std::vector<double> aligned(projections.begin(), projections.end());
  if (n_real > 0 && real_sum < 0.0) {
    for (auto& x : aligned) x = -x;
  }
  const GaussianFit fit = fit_gaussian(aligned);
  SnrPoint p;
  p.ratio = ratio;
  p.mu = fit.mu;
  p.sigma = fit.sigma;
  p.snr = snr_from_moments(fit.mu, fit.sigma);
  p.n_real_rows = n_real;
  p.n_synth_rows = projections.size() - n_real;
  return p;
}

SnrPoint snr_of_mixture(const FeatureMatrix& mix, const std::vector<bool>& real_mask,
                        const MixRatio& ratio) {
  return snr_of_mixture(mix.to_eigen(), real_mask, ratio);
}

SnrPoint snr_of_mixture(const Eigen::MatrixXd& rows, const std::vector<bool>& real_mask,
                        const MixRatio& ratio) {
  if (real_mask.size() != static_cast<std::size_t>(rows.rows())) {
    throw Error(ErrorCode::DimensionMismatch, "mask length " + std::to_string(real_mask.size()) +
                                                  " != rows " + std::to_string(rows.rows()));
  }
  const PcaResult pca = first_principal_component(rows);
  const std::vector<double> proj = project(rows, pca.w1, /*center=*/false);
  return snr_of_projections(proj, real_mask, ratio);
}

std::vector<std::size_t> local_minima(std::span<const double> values) {
  std::vector<std::size_t> out;
  for (std::size_t i = 1; i + 1 < values.size(); ++i) {
    if (values[i] < values[i - 1] && values[i] < values[i + 1]) out.push_back(i);
  }
  return out;
}

std::optional<std::size_t> detect_decoherence(std::span<const double> snr) {
  if (snr.size() < 3) {
    throw Error(ErrorCode::TooFewPoints,
                "decoherence detection needs >= 3 points, got " + std::to_string(snr.size()));
  }
  const auto minima = local_minima(snr);
  if (minima.empty()) return std::nullopt;
  return minima.front();
}

std::optional<std::size_t> detect_decoherence(std::span<const SnrPoint> points) {
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (!(points[i - 1].ratio < points[i].ratio)) {
      throw Error(ErrorCode::InvalidPlan, "points must be strictly increasing in lambda");
    }
  }
  std::vector<double> snr;
  snr.reserve(points.size());
  for (const auto& p : points) snr.push_back(p.snr);
  return detect_decoherence(std::span<const double>(snr));
}

MixRatio select_lambda_star(std::span<const SnrPoint> points,
                            std::optional<std::size_t> decoherence_index) {
  if (points.empty()) throw Error(ErrorCode::InvalidArgument, "no SNR points to select from");
  const std::size_t end = decoherence_index ? std::min(*decoherence_index, points.size())
                                            : points.size();
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < end; ++i) {
    if (!points[i].defined) continue;
    if (!best || points[i].snr > points[*best].snr) best = i;
  }
  // Nothing defined before the cut: fall back to the first point.
  return points[best.value_or(0)].ratio;
}

SweepReport run_sweep(const FeatureMatrix& real, const FeatureMatrix& synth,
                      const MixturePlan& plan, const SweepOptions& options) {
  plan.validate();
  const std::size_t count = plan.ratios.size();
  std::vector<SnrPoint> points(count);
  std::vector<std::vector<std::string>> notes(count);
  std::vector<std::exception_ptr> failures(count);

  auto evaluate = [&](std::size_t i) {
    try {
      const MixRatio& ratio = plan.ratios[i];
      ComposedMixture mix = compose(real, synth, ratio, plan.sampling);
      notes[i] = std::move(mix.notes);
      try {
        points[i] = snr_of_mixture(mix.rows, mix.real_mask(), ratio);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::ZeroSigma) throw;
        SnrPoint p;
        p.ratio = ratio;
        p.n_real_rows = mix.n_real;
        p.n_synth_rows = mix.n_synth;
        p.defined = false;
        points[i] = p;
        notes[i].push_back(ratio.str() + ": zero projection spread, SNR undefined; excluded");
      }
    } catch (...) {
      failures[i] = std::current_exception();
    }
  };

  const unsigned workers = std::max(1u, std::min<unsigned>(options.workers,
                                                          static_cast<unsigned>(count)));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) evaluate(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) evaluate(i);
      });
    }
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  SweepReport report;
  for (auto& n : notes) {
    for (auto& line : n) report.notes.push_back(std::move(line));
  }

  // Detection runs on the defined subsequence and maps back.
  std::vector<std::size_t> defined_idx;
  std::vector<double> defined_snr;
  for (std::size_t i = 0; i < count; ++i) {
    if (points[i].defined) {
      defined_idx.push_back(i);
      defined_snr.push_back(points[i].snr);
    }
  }
  if (defined_snr.size() >= 3) {
    const auto minima = local_minima(defined_snr);
    if (!minima.empty()) {
      report.decoherence_index = defined_idx[minima.front()];
      for (std::size_t k = 1; k < minima.size(); ++k) {
        const std::size_t i = defined_idx[minima[k]];
        report.notes.push_back("additional local minimum at " + points[i].ratio.str() +
                               " (index " + std::to_string(i) + ")");
      }
    } else {
      report.notes.push_back("no interior SNR local minimum; selecting over all ratios");
    }
  } else {
    report.notes.push_back("fewer than 3 defined points; decoherence not assessed");
  }
  report.lambda_star = select_lambda_star(points, report.decoherence_index);
  report.points = std::move(points);
  return report;
}

SweepReport run_sweep(const Manifest& manifest, const MixturePlan& plan,
                      const SweepOptions& options) {
  manifest.validate_for_sweep();
  plan.validate();
  const FeatureMatrix real = load_pool(manifest, SourceTag::Real);
  const FeatureMatrix synth = load_pool(manifest, SourceTag::Synthetic);
  return run_sweep(real, synth, plan, options);
}

}  // namespace cift
