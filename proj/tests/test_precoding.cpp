#include <chrono>
#include <complex>

#include "doctest.h"
#include "support.hpp"
#include "vqmimo/error.hpp"
#include "vqmimo/precoding.hpp"

using namespace vqmimo;
using testing_support::random_cmatrix;

namespace {

// Direct transcription of the rate formula, user by user.
double reference_rate(const CMatrix& h, const CMatrix& v, double sigma2) {
  double r = 0.0;
  for (Eigen::Index j = 0; j < h.cols(); ++j) {
    double interference = sigma2, signal = 0.0;
    for (Eigen::Index m = 0; m < v.cols(); ++m) {
      cdouble s = 0.0;
      for (Eigen::Index n = 0; n < h.rows(); ++n) s += h(n, j) * v(n, m);
      if (m == j)
        signal = std::norm(s);
      else
        interference += std::norm(s);
    }
    r += std::log2(1.0 + signal / interference);
  }
  return r;
}

ArrayGeometry geometry(int nv, int nh) {
  ArrayGeometry g;
  g.n_v = nv;
  g.n_h = nh;
  return g;
}

}  // namespace

TEST_CASE("sum rate closed forms") {
  CMatrix h(1, 1), v(1, 1);
  h << 1.0;
  v << 1.0;
  CHECK(std::abs(sum_rate(h, v, 1.0) - 1.0) < 1e-12);

  CMatrix h2 = CMatrix::Identity(2, 2);
  CMatrix v2 = CMatrix::Identity(2, 2) / std::sqrt(2.0);
  CHECK(std::abs(sum_rate(h2, v2, 1.0) - 2.0 * std::log2(1.5)) < 1e-12);
  CHECK(std::abs(2.0 * std::log2(1.5) - 1.16993) < 1e-5);

  std::mt19937_64 rng(1);
  const CMatrix h3 = random_cmatrix(4, 3, rng);
  CHECK(sum_rate(h3, CMatrix::Zero(4, 3), 0.1) == 0.0);
}

TEST_CASE("sum rate uses the plain transpose") {
  CMatrix h2(2, 1), v2(2, 1);
  h2 << cdouble(1, 0), cdouble(0, 1);
  v2 << cdouble(1, 0), cdouble(0, -1);
  // h^T v = 1 + 1 = 2, h^H v = 1 - 1 = 0.
  CHECK(std::abs(sum_rate(h2, v2, 1.0) - std::log2(5.0)) < 1e-12);

  std::mt19937_64 rng(2);
  for (int t = 0; t < 20; ++t) {
    const CMatrix hh = random_cmatrix(4, 3, rng), vv = random_cmatrix(4, 3, rng);
    CHECK(std::abs(sum_rate(hh, vv, 0.3) - reference_rate(hh, vv, 0.3)) < 1e-12);
    const cdouble phase = std::polar(1.0, 0.37 * t);
    CHECK(std::abs(sum_rate(phase * hh, phase * vv, 0.3) - sum_rate(hh, vv, 0.3)) < 1e-12);
  }
}

TEST_CASE("MRT and ZF") {
  std::mt19937_64 rng(3);
  const CMatrix h = random_cmatrix(4, 1, rng);
  const PrecoderSet m = mrt(h, 2.0);
  CHECK(std::abs(m.power() - 2.0) < 1e-12);
  CHECK(std::abs(sum_rate(h, m.v, 0.5) - std::log2(1.0 + 2.0 * h.squaredNorm() / 0.5)) < 1e-12);

  for (int t = 0; t < 20; ++t) {
    const CMatrix g = random_cmatrix(4, 2, rng);
    const PrecoderSet z = zf(g, 1.0);
    CHECK(std::abs(z.power() - 1.0) < 1e-12);
    for (int j = 0; j < 2; ++j) {
      CHECK(std::abs(z.v.col(j).squaredNorm() - 0.5) < 1e-12);
      for (int k = 0; k < 2; ++k)
        if (j != k) CHECK(std::abs(cdouble((g.col(j).transpose() * z.v.col(k))(0, 0))) < 1e-9);
    }
  }

  // Orthonormal channels: ZF and MRT coincide.
  const CMatrix q = Eigen::HouseholderQR<CMatrix>(random_cmatrix(4, 4, rng)).householderQ();
  const CMatrix ortho = q.leftCols(3);
  CHECK((zf(ortho, 1.5).v - mrt(ortho, 1.5).v).norm() < 1e-10);
}

TEST_CASE("ZF on dependent channels is singular") {
  CMatrix h(3, 2);
  h.col(0) << 1, 2, 3;
  h.col(1) = 2.0 * h.col(0);
  try {
    zf(h, 1.0);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kSingular);
  }
  CHECK_THROWS_AS(zf(CMatrix::Identity(2, 3), 1.0), Error);
}

TEST_CASE("WMMSE single user reaches the matched filter") {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 10; ++t) {
    const CMatrix h = random_cmatrix(8, 1, rng);
    const SolverResult r = wmmse(h, 1.0, 0.1);
    const double opt = std::log2(1.0 + h.squaredNorm() / 0.1);
    CHECK(std::abs(sum_rate(h, r.precoders.v, 0.1) - opt) < 1e-4);
    const CVector dir = h.col(0).conjugate() / h.norm();
    CHECK(std::abs(std::abs(dir.dot(r.precoders.v.col(0))) - 1.0) < 1e-4);
  }
}

TEST_CASE("WMMSE monotone, feasible and dominant") {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> n_pick(2, 8), j_pick(1, 6);
  std::uniform_real_distribution<double> log_s(-2.0, 1.0), log_rho(-1.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    const int n = n_pick(rng), j = j_pick(rng);
    const CMatrix h = random_cmatrix(static_cast<std::size_t>(n), static_cast<std::size_t>(j), rng);
    const double s2 = std::pow(10.0, log_s(rng)), rho = std::pow(10.0, log_rho(rng));
    const SolverResult r = wmmse(h, rho, s2);
    CHECK(r.report.trace.size() >= 1);
    for (std::size_t k = 1; k < r.report.trace.size(); ++k)
      CHECK(r.report.trace[k] >= r.report.trace[k - 1] - 1e-8);
    CHECK(r.precoders.power() <= rho + 1e-9);
    CHECK(r.report.iterations <= 300);
    CHECK(std::abs(r.report.trace.back() - sum_rate(h, r.precoders.v, s2)) < 1e-9);
  }
  for (int t = 0; t < 100; ++t) {
    const CMatrix h = random_cmatrix(4, 2, rng);
    const SolverResult r = wmmse(h, 1.0, 0.1);
    const double best = std::max(sum_rate(h, mrt(h, 1.0).v, 0.1), sum_rate(h, zf(h, 1.0).v, 0.1));
    CHECK(sum_rate(h, r.precoders.v, 0.1) >= best - 1e-6);
    CHECK(std::abs(r.precoders.power() - 1.0) < 1e-4);
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  CHECK(secs < 120.0);
}

TEST_CASE("WMMSE respects the iteration cap") {
  std::mt19937_64 rng(6);
  const CMatrix h = random_cmatrix(6, 4, rng);
  const SolverResult r = wmmse(h, 1.0, 0.01, {3, 0.0});
  CHECK(r.report.iterations == 3);
  CHECK_FALSE(r.report.converged);
  CHECK(r.report.trace.size() == 4);
}

TEST_CASE("SWMMSE with vanishing covariance matches WMMSE on the means") {
  const AngularDictionary dict = build_dictionary(geometry(2, 2));
  std::mt19937_64 gen(7);
  for (int t = 0; t < 20; ++t) {
    std::vector<StatisticalCsi> stats;
    CMatrix mu(4, 2);
    for (int j = 0; j < 2; ++j) {
      stats.push_back({testing_support::random_cvector(4, gen), RVector::Constant(dict.atoms(), kCovarianceFloor)});
      mu.col(j) = stats.back().mu;
    }
    Rng rng(static_cast<std::uint64_t>(t));
    const SolverResult s = swmmse(stats, dict, 1.0, 0.1, 8, rng);
    const SolverResult w = wmmse(mu, 1.0, 0.1);
    CHECK(std::abs(sum_rate(mu, s.precoders.v, 0.1) - sum_rate(mu, w.precoders.v, 0.1)) < 1e-3);
    CHECK(s.precoders.power() <= 1.0 + 1e-9);
  }
}

TEST_CASE("single noiseless sample reproduces the WMMSE trajectory") {
  std::mt19937_64 gen(8);
  for (int t = 0; t < 5; ++t) {
    const CMatrix mu = random_cmatrix(4, 3, gen);
    const SolverResult a = saa_wmmse({mu}, mrt(mu, 1.0).v, 1.0, 0.2);
    const SolverResult b = wmmse(mu, 1.0, 0.2);
    REQUIRE(a.report.trace.size() == b.report.trace.size());
    for (std::size_t k = 0; k < a.report.trace.size(); ++k)
      CHECK(std::abs(a.report.trace[k] - b.report.trace[k]) < 1e-10);
    CHECK((a.precoders.v - b.precoders.v).norm() < 1e-10);
  }
}

TEST_CASE("SWMMSE surrogate trace is non-decreasing") {
  const AngularDictionary dict = build_dictionary(geometry(2, 2));
  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  for (int t = 0; t < 20; ++t) {
    std::vector<StatisticalCsi> stats;
    for (int j = 0; j < 3; ++j) {
      RVector c(dict.atoms());
      for (int k = 0; k < c.size(); ++k) c(k) = u(gen);
      stats.push_back({testing_support::random_cvector(4, gen), c});
    }
    Rng rng(static_cast<std::uint64_t>(100 + t));
    const SolverResult s = swmmse(stats, dict, 1.0, 0.1, 16, rng);
    for (std::size_t k = 1; k < s.report.trace.size(); ++k)
      CHECK(s.report.trace[k] >= s.report.trace[k - 1] - 1e-6);
    CHECK(s.precoders.power() <= 1.0 + 1e-9);
  }
}

TEST_CASE("statistical samples follow the covariance") {
  const AngularDictionary dict = build_dictionary(geometry(1, 2));
  RVector c(dict.atoms());
  c << 2.0, 0.5, 1.0, 0.1, 0.3, 0.7, 1.5, 0.2;
  const CMatrix cov = build_covariance(c, dict);
  StatisticalCsi stat{CVector::Constant(2, cdouble(1.0, -1.0)), c};
  Rng rng(10);
  const auto samples = draw_statistical_samples({stat}, dict, 20000, rng);
  REQUIRE(samples.size() == 20000);
  CVector mean = CVector::Zero(2);
  for (const auto& s : samples) mean += s.col(0);
  mean /= 20000.0;
  CMatrix emp = CMatrix::Zero(2, 2);
  for (const auto& s : samples) {
    const CVector d = s.col(0) - stat.mu;
    emp += d * d.adjoint();
  }
  emp /= 20000.0;
  CHECK((mean - stat.mu).norm() < 0.05);
  CHECK((emp - cov).norm() < 0.05 * cov.norm());
}

TEST_CASE("differentiable sum rate agrees with the plain evaluation") {
  std::mt19937_64 gen(11);
  const std::size_t users = 3, groups = 2;
  std::vector<CMatrix> hs, vs;
  Tensor hr({users * groups, 4}), hi({users * groups, 4}), vr({users * groups, 4}), vi({users * groups, 4});
  for (std::size_t k = 0; k < groups; ++k) {
    hs.push_back(random_cmatrix(4, users, gen));
    vs.push_back(random_cmatrix(4, users, gen));
    for (std::size_t j = 0; j < users; ++j)
      for (std::size_t n = 0; n < 4; ++n) {
        const auto r = k * users + j;
        hr(r, n) = hs.back()(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(j)).real();
        hi(r, n) = hs.back()(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(j)).imag();
        vr(r, n) = vs.back()(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(j)).real();
        vi(r, n) = vs.back()(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(j)).imag();
      }
  }
  Graph g;
  const Var out = sum_rate_node({g.constant(hr), g.constant(hi)}, {g.constant(vr), g.constant(vi)}, users, 0.4);
  for (std::size_t k = 0; k < groups; ++k)
    CHECK(std::abs(g.value(out)(k, 0) - sum_rate(hs[k], vs[k], 0.4)) < 1e-12);
}
