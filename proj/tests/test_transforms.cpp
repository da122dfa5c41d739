#include <doctest.h>

#include <random>
#include <set>

#include "cpafdm/transforms.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace cpafdm;
using testing::max_abs;
using testing::max_abs_diff;
using testing::random_vector;

TEST_SUITE("permutation") {

TEST_CASE("identity") {
  CHECK(Permutation::identity(4).map() == std::vector<std::size_t>{0, 1, 2, 3});
  CHECK(Permutation::identity(1).map() == std::vector<std::size_t>{0});
  CHECK_THROWS_AS(Permutation::identity(0), InvalidSize);
  std::mt19937_64 rng(1);
  const CVec v = random_vector(7, rng);
  CHECK(Permutation::identity(7).apply(v) == v);
}

TEST_CASE("constructor rejects non-bijections") {
  CHECK_THROWS_AS(Permutation({0, 0, 1}), std::invalid_argument);
  CHECK_THROWS_AS(Permutation({0, 3, 1}), std::invalid_argument);
}

TEST_CASE("unranking follows lexicographic order") {
  CHECK(Permutation::from_rank(3, 0).map() == std::vector<std::size_t>{0, 1, 2});
  CHECK(Permutation::from_rank(3, 5).map() == std::vector<std::size_t>{2, 1, 0});
  for (std::size_t n = 1; n <= 6; ++n) {
    const auto all = oracle::all_permutations(n);
    REQUIRE(BigInt(all.size()) == factorial(n));
    std::set<std::vector<std::size_t>> distinct;
    for (std::size_t r = 0; r < all.size(); ++r) {
      const Permutation p = Permutation::from_rank(n, r);
      CHECK(p.map() == all[r]);
      CHECK(p.rank() == r);
      distinct.insert(p.map());
    }
    CHECK(distinct.size() == all.size());
  }
  CHECK_THROWS_AS(Permutation::from_rank(3, 6), OutOfRange);
}

TEST_CASE("big ranks round-trip beyond 64 bits") {
  std::mt19937_64 rng(3);
  for (std::size_t n : {21u, 64u, 300u}) {
    const BigInt r = random_rank(n, rng);
    CHECK(r < factorial(n));
    CHECK(Permutation::from_rank(n, r).rank() == r);
  }
  const BigInt last = factorial(64) - 1;
  const Permutation rev = Permutation::from_rank(64, last);
  for (std::size_t i = 0; i < 64; ++i) CHECK(rev[i] == 63 - i);
}

TEST_CASE("random draw matches unranked random rank") {
  std::mt19937_64 a(9), b(9);
  for (int i = 0; i < 20; ++i) {
    CHECK(Permutation::random(40, a) == Permutation::from_rank(40, random_rank(40, b)));
  }
}

TEST_CASE("apply gathers and composes with the inverse") {
  const Permutation p({2, 0, 1});
  const CVec v{cd{1, 0}, cd{2, 0}, cd{3, 0}};
  CHECK(p.apply(v) == CVec{cd{3, 0}, cd{1, 0}, cd{2, 0}});
  std::mt19937_64 rng(4);
  for (int i = 0; i < 10; ++i) {
    const Permutation q = Permutation::random(33, rng);
    const CVec x = random_vector(33, rng);
    CHECK(q.apply(q.inverse().apply(x)) == x);
    CHECK(q.then(q.inverse()).is_identity());
    const Permutation r = Permutation::random(33, rng);
    CHECK(q.then(r).apply(x) == r.apply(q.apply(x)));
  }
  CHECK_THROWS_AS(p.apply(CVec(4)), DimensionMismatch);
}

TEST_CASE("factorial bit counts") {
  CHECK(floor_log2_factorial(2) == 1);
  CHECK(floor_log2_factorial(4) == 4);
  CHECK(floor_log2_factorial(16) == 44);
  CHECK(floor_log2_factorial(64) == 295);
  CHECK(factorial(16) == BigInt("20922789888000"));
  for (std::size_t n = 2; n <= 200; ++n) {
    // the float sum is accurate far beyond the distance to the next integer here
    const double s = oracle::log2_factorial_sum(n);
    if (std::abs(s - std::round(s)) > 1e-6) {
      CHECK(floor_log2_factorial(n) == static_cast<std::size_t>(std::floor(s)));
    }
  }
}

}  // TEST_SUITE

TEST_SUITE("transforms") {

TEST_CASE("chirp sequences") {
  const ChirpSequence z = chirp_sequence(5, 0.0);
  for (cd v : z.values()) CHECK(std::abs(v - cd{1, 0}) == 0.0);
  const ChirpSequence q = chirp_sequence(2, 0.25);
  CHECK(std::abs(q[0] - cd{1, 0}) < 1e-15);
  CHECK(std::abs(q[1] - cd{0, -1}) < 1e-15);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 10; ++i) {
    const ChirpSequence c = chirp_sequence(1024, u(rng));
    const Permutation p = Permutation::random(1024, rng);
    const CVec pv = p.apply(c.values());
    for (std::size_t k = 0; k < pv.size(); ++k) {
      CHECK(std::abs(std::abs(c[k]) - 1.0) < 1e-12);
      CHECK(std::abs(std::norm(pv[k]) - 1.0) < 1e-12);  // diag(P l)^H diag(P l) = I
    }
  }
}

TEST_CASE("identity configuration with zero chirps is the unitary DFT") {
  std::mt19937_64 rng(5);
  for (std::size_t n : {1u, 2u, 8u, 12u, 64u}) {
    const CVec v = random_vector(n, rng);
    const CVec out = cpdaft_forward(TransformConfig(n, 0.0, 0.0), v);
    const Eigen::VectorXcd ref =
        oracle::dft(n) * Eigen::Map<const Eigen::VectorXcd>(v.data(), static_cast<long>(n));
    CHECK(max_abs_diff(out, CVec(ref.data(), ref.data() + n)) < 1e-12);
  }
}

TEST_CASE("forward equals the explicit three-factor product") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t n : {4u, 8u, 16u, 64u}) {
    for (int rep = 0; rep < 3; ++rep) {
      const bool identity = rep == 0;
      const TransformConfig cfg(n, u(rng), u(rng),
                                identity ? Permutation::identity(n) : Permutation::random(n, rng),
                                identity ? Permutation::identity(n) : Permutation::random(n, rng));
      const oracle::Mat a = oracle::daft(cfg);
      CHECK(max_abs(CpDaft(cfg, TransformMode::matrix).matrix() - a) < 1e-12);
      const CVec v = random_vector(n, rng);
      const Eigen::VectorXcd ref = a * Eigen::Map<const Eigen::VectorXcd>(v.data(), static_cast<long>(n));
      CHECK(max_abs_diff(cpdaft_forward(cfg, v), CVec(ref.data(), ref.data() + n)) < 1e-12);
    }
  }
}

TEST_CASE("unitarity and round trip") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t n : {4u, 8u, 16u, 64u, 256u}) {
    const TransformConfig cfg(n, u(rng), u(rng), Permutation::random(n, rng),
                              Permutation::random(n, rng));
    const Eigen::MatrixXcd a = CpDaft(cfg, TransformMode::matrix).matrix();
    const Eigen::MatrixXcd eye = Eigen::MatrixXcd::Identity(static_cast<long>(n), static_cast<long>(n));
    CHECK(max_abs(a.adjoint() * a - eye) < 1e-10);
    CHECK(max_abs(a * a.adjoint() - eye) < 1e-10);
    const CVec v = random_vector(n, rng);
    const CVec f = cpdaft_forward(cfg, v);
    CHECK(std::abs(testing::norm(f) - testing::norm(v)) < 1e-10 * testing::norm(v));
    CHECK(max_abs_diff(cpdaft_inverse(cfg, f), v) < 1e-10);
    CHECK(max_abs_diff(cpdaft_inverse(cfg, CVec(n)), CVec(n)) == 0.0);
  }
}

TEST_CASE("fast and dense paths agree up to N = 1024") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t n : {2u, 3u, 31u, 128u, 1024u}) {
    const TransformConfig cfg(n, u(rng), u(rng), Permutation::random(n, rng),
                              Permutation::random(n, rng));
    const CpDaft fast(cfg, TransformMode::fast);
    const CpDaft dense(cfg, TransformMode::matrix);
    const CVec v = random_vector(n, rng);
    CHECK(max_abs_diff(fast.forward(v), dense.forward(v)) < 1e-10);
    CHECK(max_abs_diff(fast.inverse(v), dense.inverse(v)) < 1e-10);
  }
}

TEST_CASE("mismatched permutation does not invert") {
  std::mt19937_64 rng(10);
  const std::size_t n = 16;
  for (int i = 0; i < 20; ++i) {
    const double c1 = 3.0 / 32.0;
    const double c2 = 1.0 / (2.0 * 16.0 * kPi);
    const TransformConfig keyed(n, c1, c2, Permutation::identity(n), Permutation::random(n, rng));
    const TransformConfig plain(n, c1, c2);
    if (keyed.perm2.is_identity()) continue;
    const CVec v = random_vector(n, rng);
    CHECK(testing::norm([&] {
            CVec d = cpdaft_inverse(plain, cpdaft_forward(keyed, v));
            for (std::size_t k = 0; k < n; ++k) d[k] -= v[k];
            return d;
          }()) > 0.1 * testing::norm(v));
  }
}

TEST_CASE("kernel samples synthesize the inverse") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::size_t n = 8;
  const TransformConfig cfg(n, u(rng), u(rng), Permutation::random(n, rng),
                            Permutation::random(n, rng));
  const CVec x = random_vector(n, rng);
  const CVec s = cpdaft_inverse(cfg, x);
  CHECK(max_abs_diff(oracle::kernel_synthesis(cfg, x), s) < 1e-10);
  for (std::size_t t = 0; t < n; ++t) {
    cd acc{};
    for (std::size_t m = 0; m < n; ++m) {
      CHECK(std::abs(std::abs(kernel_sample(cfg, t, m)) - 1.0 / std::sqrt(8.0)) < 1e-14);
      acc += x[m] * kernel_sample(cfg, t, m);
    }
    CHECK(std::abs(acc - s[t]) < 1e-10);
  }
  CHECK(std::abs(kernel_sample(TransformConfig(n, 0, 0), 0, 0) - cd{1 / std::sqrt(8.0), 0}) < 1e-15);
  CHECK_THROWS_AS(kernel_sample(cfg, 8, 0), OutOfRange);
}

TEST_CASE("dimension checks") {
  const TransformConfig cfg(8, 0.1, 0.01);
  CHECK_THROWS_AS(cpdaft_forward(cfg, CVec(7)), DimensionMismatch);
  CHECK_THROWS_AS(cpdaft_inverse(cfg, CVec(9)), DimensionMismatch);
  CHECK_THROWS_AS(TransformConfig(8, 0.1, 0.1, Permutation::identity(7), Permutation::identity(8)),
                  DimensionMismatch);
}

TEST_CASE("white noise keeps its per-sample variance") {
  std::mt19937_64 rng(12);
  const std::size_t n = 64;
  const TransformConfig cfg(n, 3.0 / 128, 1.0 / (128 * kPi), Permutation::identity(n),
                            Permutation::random(n, rng));
  double in = 0.0, out = 0.0;
  std::normal_distribution<double> g(0.0, std::sqrt(0.5));
  for (int f = 0; f < 2000; ++f) {
    CVec w(n);
    for (auto& x : w) {
      const double re = g(rng);
      x = {re, g(rng)};
    }
    const CVec y = cpdaft_forward(cfg, w);
    for (std::size_t k = 0; k < n; ++k) {
      in += std::norm(w[k]);
      out += std::norm(y[k]);
    }
  }
  CHECK(out / in == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(out / (2000.0 * n) == doctest::Approx(1.0).epsilon(0.02));
}

}  // TEST_SUITE
