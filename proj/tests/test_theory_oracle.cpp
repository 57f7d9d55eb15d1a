#include <cmath>
#include <vector>

#include "doctest.h"

#include "cift/composition.hpp"
#include "cift/numstats.hpp"
#include "cift/theory_oracle.hpp"
#include "test_util.hpp"

using namespace cift;
using namespace cift::theory;

namespace {

std::vector<double> random_dist(std::size_t k, Rng& rng) {
  std::vector<double> p(k);
  double total = 0.0;
  for (auto& x : p) total += (x = 0.05 + rng.uniform());
  for (auto& x : p) x /= total;
  return p;
}

}  // namespace

TEST_CASE("entropy of simple distributions") {
  const std::vector<double> fair{0.5, 0.5};
  const std::vector<double> four{0.25, 0.25, 0.25, 0.25};
  const std::vector<double> point{1.0, 0.0};
  CHECK(entropy_bits(fair) == doctest::Approx(1.0));
  CHECK(entropy_bits(four) == doctest::Approx(2.0));
  CHECK(entropy_bits(point) == 0.0);
}

TEST_CASE("normalized MI: closed form matches enumeration on uniform sub-datasets") {
  for (std::size_t k : {2, 4, 8}) {
    for (std::size_t m : {2, 4, 8}) {
      const auto a = uniform_sub_dataset(k, k);
      const auto b = uniform_sub_dataset(m, m);
      const std::vector<SubDatasetSpec> subs{a, b};
      const double c = diversity(subs);
      CHECK(c == doctest::Approx(2.0 * std::log2(double(k)) + 2.0 * std::log2(double(m))));
      CHECK(std::abs(normalized_mi_bruteforce(a, b) - normalized_mi_closed_form(c)) <= 1e-9);
    }
  }
  // k = m = 4: C = 8, 4 / 12.
  const auto a = uniform_sub_dataset(4, 4);
  const std::vector<SubDatasetSpec> subs{a, a};
  CHECK(normalized_mi_closed_form(diversity(subs)) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("normalized MI: point masses give full correlation") {
  const SubDatasetSpec a{{1.0}, {1.0}, {}, {}};
  CHECK(normalized_mi_closed_form(0.0) == 1.0);
  CHECK(normalized_mi_bruteforce(a, a) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("normalized MI: closed form holds for non-uniform disjoint sub-datasets") {
  Rng rng(5);
  for (int t = 0; t < 50; ++t) {
    const SubDatasetSpec a{random_dist(1 + rng.below(6), rng), random_dist(1 + rng.below(6), rng), {}, {}};
    const SubDatasetSpec b{random_dist(1 + rng.below(6), rng), random_dist(1 + rng.below(6), rng), {}, {}};
    const std::vector<SubDatasetSpec> subs{a, b};
    REQUIRE(std::abs(normalized_mi_bruteforce(a, b) - normalized_mi_closed_form(diversity(subs))) <= 1e-9);
  }
}

TEST_CASE("overlapping supports are rejected when disjointness is required") {
  const SubDatasetSpec a{{0.5, 0.5}, {0.5, 0.5}, {0, 1}, {0, 1}};
  const SubDatasetSpec b{{0.5, 0.5}, {0.5, 0.5}, {1, 2}, {2, 3}};
  const std::vector<SubDatasetSpec> subs{a, b};
  CHECK_CIFT_ERROR(mixture_joint(subs, true), ErrorCode::OverlappingSupports);
  CHECK_NOTHROW(mixture_joint(subs, false));
  CHECK_CIFT_ERROR(normalized_mi_bruteforce(a, b), ErrorCode::OverlappingSupports);
}

TEST_CASE("overlap bound") {
  CHECK(mi_overlap_bound(8.0, 0.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(mi_overlap_bound(8.0, 4.0) == doctest::Approx(0.0).epsilon(1e-12));
  for (double c : {0.0, 1.0, 4.0, 12.0}) {
    CHECK(mi_overlap_bound(c, 0.0) == doctest::Approx(normalized_mi_closed_form(c)).epsilon(1e-12));
  }
  // Decreasing in the interleave term.
  CHECK(mi_overlap_bound(8.0, 1.0) < mi_overlap_bound(8.0, 0.5));
}

TEST_CASE("property: sharing symbols lowers MI below the disjoint value") {
  // Two uniform 8-symbol sub-datasets sharing s symbols on each feature.
  double previous = 2.0;
  for (int s = 0; s <= 8; s += 2) {
    std::vector<int> ua(8), va(8), ub(8), vb(8);
    for (int i = 0; i < 8; ++i) {
      ua[i] = i;
      va[i] = i;
      ub[i] = 8 - s + i;
      vb[i] = 8 - s + i;
    }
    const std::vector<double> uni(8, 1.0 / 8.0);
    const std::vector<SubDatasetSpec> subs{{uni, uni, ua, va}, {uni, uni, ub, vb}};
    const double mi = normalized_mi_of_mixture(subs);
    CHECK(mi <= normalized_mi_closed_form(diversity(subs)) + 1e-12);
    CHECK(mi <= previous + 1e-12);
    previous = mi;
  }
  CHECK(previous == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("information terms of an independent joint are zero") {
  DiscreteJoint j{{0, 1}, {0, 1, 2}, Eigen::MatrixXd(2, 3)};
  j.p << 0.1, 0.2, 0.2, 0.1, 0.2, 0.2;
  const auto terms = information_terms(j);
  CHECK(std::abs(terms.mutual_information) <= 1e-12);
  CHECK(terms.h_uv == doctest::Approx(terms.h_u + terms.h_v));
}

TEST_CASE("mixture variance") {
  CHECK(mixture_variance(0.0, 1.0, 0.0, 1.0) == 1.0);
  CHECK(mixture_variance(-1.0, 1.0, 1.0, 1.0) == 2.0);
  CHECK(mixture_variance(0.0, 0.0, 2.0, 0.0) == 1.0);
  Rng rng(6);
  for (int t = 0; t < 100; ++t) {
    const double v1 = rng.uniform() * 3;
    const double v2 = rng.uniform() * 3;
    CHECK(mixture_variance(rng.normal(), v1, rng.normal(), v2) >= 0.5 * (v1 + v2));
  }
}

TEST_CASE("mixture variance agrees with sampling") {
  const double analytic = mixture_variance(-1.0, 0.5, 2.0, 1.5);
  const double sampled = monte_carlo_mixture_variance(-1.0, 0.5, 2.0, 1.5, 1'000'000, 9);
  CHECK(std::abs(sampled - analytic) / analytic <= 0.01);
}

TEST_CASE("initial gradients") {
  Rng rng(7);
  const std::size_t n = 20'000;
  Eigen::MatrixXd u(n, 1), v(n, 1);
  Eigen::VectorXd y(n);
  for (std::size_t i = 0; i < n; ++i) {
    u(i, 0) = rng.normal();
    v(i, 0) = rng.normal();
  }
  u.col(0).array() -= u.col(0).mean();
  u.col(0) /= std::sqrt(u.col(0).squaredNorm() / double(n));
  y = u.col(0);

  const auto g = initial_gradients(u, v, y);
  CHECK(g.wrt_u(0) == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(std::abs(g.wrt_v(0)) < 3.0 / std::sqrt(double(n)));

  const Eigen::VectorXd constant = Eigen::VectorXd::Constant(n, 3.5);
  const auto z = initial_gradients(u, v, constant);
  CHECK(std::abs(z.wrt_u(0)) <= 1e-12);
  CHECK(std::abs(z.wrt_v(0)) <= 1e-12);
}

TEST_CASE("property: initial gradients match finite differences") {
  Rng rng(8);
  for (int t = 0; t < 50; ++t) {
    const auto n = Eigen::Index(50 + rng.below(200));
    const auto du = Eigen::Index(1 + rng.below(4));
    const auto dv = Eigen::Index(1 + rng.below(4));
    const Eigen::MatrixXd u = testing::random_matrix(n, du, rng);
    const Eigen::MatrixXd v = testing::random_matrix(n, dv, rng);
    Eigen::VectorXd y = u * testing::random_matrix(du, 1, rng) + v * testing::random_matrix(dv, 1, rng);
    for (auto& x : y) x += 0.3 * rng.normal();
    const auto a = initial_gradients(u, v, y);
    const auto f = finite_difference_gradients(u, v, y);
    const double scale = std::max(1e-8, std::sqrt(a.wrt_u.squaredNorm() + a.wrt_v.squaredNorm()));
    const double err = std::sqrt((a.wrt_u - f.wrt_u).squaredNorm() + (a.wrt_v - f.wrt_v).squaredNorm());
    REQUIRE(err / scale < 1e-5);
  }
}

TEST_CASE("gradient interference") {
  Eigen::VectorXd e1 = Eigen::VectorXd::Zero(2), e2 = Eigen::VectorXd::Zero(2);
  e1(0) = 1.0;
  e2(1) = 1.0;
  const auto orth = gradient_interference({e1, e2, 0.5});
  CHECK(orth.norm_sq_predicted == doctest::Approx(0.5));
  CHECK(orth.norm_sq_direct == doctest::Approx(0.5));
  CHECK(orth.fidelity == doctest::Approx(0.0));

  const auto opposed = gradient_interference({e1, -e1, 0.5});
  CHECK(std::abs(opposed.norm_sq_predicted) <= 1e-15);
  CHECK(opposed.fidelity == doctest::Approx(-1.0));

  const auto same = gradient_interference({e1, e1, 0.3});
  CHECK(same.norm_sq_direct == doctest::Approx(1.0));

  CHECK_CIFT_ERROR(gradient_interference({Eigen::VectorXd::Zero(2), e1, 0.5}), ErrorCode::ZeroGradient);
  CHECK_CIFT_ERROR(gradient_interference({e1, Eigen::VectorXd::Zero(3), 0.5}), ErrorCode::ShapeMismatch);
}

TEST_CASE("property: interference expansion equals the direct norm") {
  Rng rng(10);
  for (std::size_t d : {2, 64, 1024}) {
    for (int t = 0; t < 100; ++t) {
      const Eigen::VectorXd a = testing::random_matrix(Eigen::Index(d), 1, rng);
      const Eigen::VectorXd b = testing::random_matrix(Eigen::Index(d), 1, rng, 3.0);
      const auto r = gradient_interference({a, b, rng.uniform()});
      REQUIRE(std::abs(r.norm_sq_predicted - r.norm_sq_direct) <=
              1e-10 * std::max(1.0, r.norm_sq_direct));
      REQUIRE(r.fidelity >= -1.0);
      REQUIRE(r.fidelity <= 1.0);
    }
  }
}

TEST_CASE("collapse critical fraction") {
  const auto p = collapse_critical_fraction(2.0, -1.0);
  CHECK(p.alpha_dc == doctest::Approx(2.0 / 3.0));
  CHECK(p.ratio_dc == doctest::Approx(2.0));
  const auto q = collapse_critical_fraction(1.0, -1.0);
  CHECK(q.alpha_dc == doctest::Approx(0.5));
  CHECK(q.ratio_dc == doctest::Approx(1.0));
  CHECK_CIFT_ERROR(collapse_critical_fraction(1.0, 1.0), ErrorCode::SignViolation);
  CHECK_CIFT_ERROR(collapse_critical_fraction(-1.0, -2.0), ErrorCode::SignViolation);
  CHECK_CIFT_ERROR(collapse_critical_fraction(0.0, -2.0), ErrorCode::SignViolation);
}

TEST_CASE("collapse generator") {
  const CollapseSpec spec;
  const auto [r1, s1] = generate_collapse_pools(spec, 1000, 1000, 3);
  const auto [r2, s2] = generate_collapse_pools(spec, 1000, 1000, 3);
  CHECK(r1 == r2);
  CHECK(s1 == s2);
  CHECK(r1.dims() == 8);
  CHECK(r1.source_tag() == SourceTag::Real);
  CHECK(s1.source_tag() == SourceTag::Synthetic);
  const auto [r3, s3] = generate_collapse_pools(spec, 1000, 1000, 4);
  CHECK_FALSE(r1 == r3);

  CollapseSpec bad;
  bad.mu_synth = 1.0;
  CHECK_CIFT_ERROR(generate_collapse_pools(bad, 10, 10, 0), ErrorCode::SignViolation);
}

TEST_CASE("collapse: mixture mean crosses zero at the critical fraction") {
  const CollapseSpec spec;
  const auto [real, synth] = generate_collapse_pools(spec, 10'000, 20'000, 11);
  // 100:200 is alpha = 2/3.
  const auto mix = compose(real, synth, MixRatio(100, 200), SamplingPolicy::take_all());
  const Eigen::MatrixXd m = mix.rows.to_eigen();
  const double mean0 = m.col(0).mean();
  const double sd = std::sqrt((m.col(0).array() - mean0).square().sum() / double(m.rows() - 1));
  CHECK(std::abs(mean0) < 3.0 * sd / std::sqrt(double(m.rows())));
}

TEST_CASE("profile generator hits its targets") {
  const auto targets = folding_profile();
  const auto [real, synth] = generate_profile_pools(targets, 400, 4, 0.1, 2);
  for (std::size_t k = 0; k < targets.size(); ++k) {
    const auto mix = compose(real, synth, MixRatio(1, k), SamplingPolicy::take_all());
    const Eigen::VectorXd c = mix.rows.to_eigen().col(0);
    const double mean = c.mean();
    const double sd = std::sqrt((c.array() - mean).square().sum() / double(c.size() - 1));
    CHECK(mean == doctest::Approx(targets[k].mu).epsilon(1e-4));
    CHECK(sd == doctest::Approx(targets[k].sigma).epsilon(1e-4));
  }
  const std::vector<MomentTarget> impossible{{0.0, 1.0}, {0.0, 0.01}};
  CHECK_CIFT_ERROR(generate_profile_pools(impossible, 100, 2, 0.1, 0), ErrorCode::InvalidArgument);
}

TEST_CASE("oracle suites pass") {
  for (const char* suite : {"prop1", "prop2", "prop5"}) {
    const auto cases = run_oracle_suite(suite);
    CHECK_FALSE(cases.empty());
    for (const auto& c : cases) CHECK_MESSAGE(c.pass, c.suite << "/" << c.name);
  }
  CHECK(is_known_selector("all"));
  CHECK_FALSE(is_known_selector("prop4"));
  CHECK_CIFT_ERROR(run_oracle_suite("prop4"), ErrorCode::InvalidArgument);
}
