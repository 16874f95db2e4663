#include "fixtures.hpp"

#include "lipgp/gp/model.hpp"
#include "lipgp/lip/lip_kernel.hpp"
#include "lipgp/robot/dynamics.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

using namespace lipgp;
using namespace lipgp::gp;
using robot::JointKind;

namespace {

const std::vector<JointKind> kTwoR{JointKind::Revolute, JointKind::Revolute};

std::vector<GpSample> random_samples(data::Rng& rng, int n, int count) {
  std::vector<GpSample> xs;
  for (int i = 0; i < count; ++i) xs.push_back({fixtures::random_state(rng, n), Mat()});
  return xs;
}

LagrangianCovariance lip_cov(const std::vector<JointKind>& kinds, double spread = 0.0, std::uint64_t seed = 1) {
  lip::OperatorKernel op(kinds, lip::lip_components(kinds));
  if (spread > 0.0) {
    data::Rng rng(seed);
    Vec th = op.log_params();
    for (long k = 0; k < th.size(); ++k) th(k) = rng.uniform(-spread, spread);
    op = op.with_log_params(th);
  }
  return LagrangianCovariance("lip", std::move(op));
}

Mat random_outputs(data::Rng& rng, long rows, long cols) {
  Mat y(rows, cols);
  for (long i = 0; i < y.size(); ++i) y.data()[i] = rng.normal();
  return y;
}

double min_eig(const Mat& k) {
  Eigen::SelfAdjointEigenSolver<Mat> es(k, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double rel(const Mat& a, const Mat& b) { return (a - b).norm() / std::max(1e-300, b.norm()); }

}  // namespace

TEST_CASE("single-sample SE Gram equals the signal variance") {
  ScalarCovariance se("se", 1, 0, ScalarCovariance::Extra::None);
  Vec th = se.log_params();
  th(0) = std::log(2.5);
  const auto k = se.with_log_params(th);
  data::Rng rng(1);
  const auto xs = random_samples(rng, 1, 1);
  CHECK(k->gram(-1, xs)(0, 0) == doctest::Approx(2.5).epsilon(1e-15));
}

TEST_CASE("multi-output block symmetry and Gram layout") {
  data::Rng rng(2);
  const auto cov = lip_cov(kTwoR, 0.5);
  const auto xs = random_samples(rng, 2, 5);
  for (int t = 0; t < 5; ++t) {
    const auto& a = xs[static_cast<std::size_t>(t)];
    const auto& b = xs[static_cast<std::size_t>((t + 1) % 5)];
    CHECK(rel(cov.block(a, b), cov.block(b, a).transpose()) < 1e-12);
  }
  const Mat g = cov.gram(-1, xs);
  CHECK(rel(g.block(2 * 1, 2 * 3, 2, 2), cov.block(xs[1], xs[3])) < 1e-12);
  CHECK((g - g.transpose()).norm() == 0.0);
  // component Grams add up to the full Gram
  Mat sum = Mat::Zero(g.rows(), g.cols());
  for (int c = 0; c < cov.num_components(); ++c) sum += cov.gram(c, xs);
  CHECK(rel(sum, g) < 1e-12);
}

TEST_CASE("Cholesky factor reconstructs the matrix and applies jitter only when needed") {
  data::Rng rng(3);
  const auto cov = lip_cov(kTwoR, 0.3);
  const auto xs = random_samples(rng, 2, 12);
  const Mat a = noisy_gram(cov.gram(-1, xs), Vec::Constant(2, std::log(0.1)));
  const auto f = CholeskyFactor::compute(a);
  CHECK(f.jitter() == 0.0);
  const Mat l = f.lower();
  CHECK((l * l.transpose() - a).norm() / a.norm() < 1e-10);

  Mat singular = Mat::Ones(4, 4);  // rank one, PSD
  const auto fs = CholeskyFactor::compute(singular);
  CHECK(fs.jitter() > 0.0);
  CHECK(fs.jitter() <= 1e-4 * 1.0 + 1e-18);

  Mat indefinite = Mat::Identity(3, 3);
  indefinite(2, 2) = -1.0;
  try {
    CholeskyFactor::compute(indefinite);
    FAIL("expected NotPositiveDefinite");
  } catch (const NotPositiveDefinite& e) {
    CHECK(e.min_eigenvalue() == doctest::Approx(-1.0));
  }
}

TEST_CASE("noiseless interpolation at training inputs") {
  data::Rng rng(4);
  const auto cov = lip_cov(kTwoR, 0.3);
  const auto xs = random_samples(rng, 2, 6);
  const Mat y = random_outputs(rng, 6, 2);
  const TrainedModel m(std::make_shared<LagrangianCovariance>(cov), Vec::Constant(2, -40.0), xs, y);
  const auto pred = m.predict(xs);
  CHECK(rel(pred.mean, y) < 1e-8);
  CHECK(pred.variance.cwiseAbs().maxCoeff() < 1e-8 * cov.gram(-1, xs).diagonal().maxCoeff());

  ScalarCovariance se("se", 2, 1, ScalarCovariance::Extra::None);
  const Mat y1 = random_outputs(rng, 6, 1);
  const TrainedModel ms(std::make_shared<ScalarCovariance>(se), Vec::Constant(1, -40.0), xs, y1);
  CHECK(rel(ms.predict(xs).mean, y1) < 1e-10);
}

TEST_CASE("two-point posterior matches the hand-solved 2x2 system") {
  ScalarCovariance se("se", 1, 0, ScalarCovariance::Extra::None);
  Vec th = se.log_params();
  const double lambda = 1.7, len2 = 0.6, noise = 0.2;
  th(0) = std::log(lambda);
  th(1) = std::log(len2);
  auto k = std::shared_ptr<const CovarianceFunction>(se.with_log_params(th));
  auto sample = [](double q) { return GpSample{robot::make_state(Vec::Constant(1, q), Vec::Zero(1), Vec::Zero(1)), Mat()}; };
  const std::vector<GpSample> xs{sample(0.1), sample(0.9)};
  Mat y(2, 1);
  y << 1.3, -0.4;
  const TrainedModel m(k, Vec::Constant(1, std::log(noise)), xs, y);

  auto kf = [&](double a, double b) { return lambda * std::exp(-(a - b) * (a - b) / len2); };
  const double a11 = kf(0.1, 0.1) + noise * noise, a12 = kf(0.1, 0.9), a22 = kf(0.9, 0.9) + noise * noise;
  const double det = a11 * a22 - a12 * a12;
  const double w1 = (a22 * 1.3 - a12 * -0.4) / det, w2 = (-a12 * 1.3 + a11 * -0.4) / det;
  const double q = 0.35;
  const double expected = kf(q, 0.1) * w1 + kf(q, 0.9) * w2;
  const auto p = m.posterior(sample(q));
  CHECK(std::abs(p.mean(0) - expected) <= 1e-12 * std::abs(expected));
  const double k1 = kf(q, 0.1), k2 = kf(q, 0.9);
  const double var = lambda - (k1 * (a22 * k1 - a12 * k2) + k2 * (-a12 * k1 + a11 * k2)) / det;
  CHECK(std::abs(p.cov(0, 0) - var) <= 1e-12 * var);
  // far from the data the prior comes back
  CHECK(m.posterior(sample(50.0)).cov(0, 0) == doctest::Approx(lambda).epsilon(1e-12));
}

TEST_CASE("log marginal likelihood: zero kernel, dense oracle and permutation invariance") {
  data::Rng rng(5);
  const Vec y = Vec::LinSpaced(6, -1.0, 2.0);
  const double expected = -0.5 * y.squaredNorm() - 3.0 * std::log(2.0 * std::numbers::pi);
  CHECK(log_marginal_likelihood(Mat::Identity(6, 6), y) == doctest::Approx(expected).epsilon(1e-15));

  const auto cov = lip_cov(kTwoR, 0.4, 9);
  const Vec log_noise = Eigen::Vector2d(std::log(0.3), std::log(0.2));
  for (int n : {3, 5, 10}) {
    const auto xs = random_samples(rng, 2, n);
    const Mat ym = random_outputs(rng, n, 2);
    const Mat a = noisy_gram(cov.gram(-1, xs), log_noise);
    const Vec ys = stack_outputs(ym);
    const double dense = -0.5 * ys.dot(a.inverse() * ys) - 0.5 * std::log(a.determinant()) -
                         0.5 * static_cast<double>(ys.size()) * std::log(2.0 * std::numbers::pi);
    const double lml = log_marginal_likelihood(cov, log_noise, xs, ym);
    CHECK(std::abs(lml - dense) <= 1e-10 * std::abs(dense));

    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    std::reverse(perm.begin(), perm.end());
    std::swap(perm[0], perm[static_cast<std::size_t>(n / 2)]);
    std::vector<GpSample> xp;
    Mat yp(n, 2);
    for (int i = 0; i < n; ++i) {
      xp.push_back(xs[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])]);
      yp.row(i) = ym.row(perm[static_cast<std::size_t>(i)]);
    }
    CHECK(log_marginal_likelihood(cov, log_noise, xp, yp) == doctest::Approx(lml).epsilon(1e-12));
  }
}

TEST_CASE("posterior agrees with a dense explicit-inverse oracle") {
  data::Rng rng(6);
  const auto cov = std::make_shared<LagrangianCovariance>(lip_cov(kTwoR, 0.4, 17));
  const Vec log_noise = Eigen::Vector2d(std::log(0.2), std::log(0.15));
  const auto xs = random_samples(rng, 2, 8);
  const Mat y = random_outputs(rng, 8, 2);
  const TrainedModel m(cov, log_noise, xs, y);
  const Mat ainv = noisy_gram(cov->gram(-1, xs), log_noise).inverse();
  const Vec ys = stack_outputs(y);
  for (int t = 0; t < 5; ++t) {
    const GpSample q{fixtures::random_state(rng, 2), Mat()};
    const Mat kx = cov->cross(-1, {q}, xs);
    const Vec mean = kx * ainv * ys;
    const Mat c = cov->block(q, q) - kx * ainv * kx.transpose();
    const auto p = m.posterior(q);
    CHECK(rel(p.mean, mean) < 1e-10);
    CHECK(rel(p.cov, c) < 1e-10);
    CHECK((p.cov - p.cov.transpose()).norm() <= 1e-10 * p.cov.norm());
  }
}

TEST_CASE("batched prediction matches pointwise posteriors") {
  data::Rng rng(7);
  const auto cov = std::make_shared<LagrangianCovariance>(lip_cov(kTwoR, 0.3, 3));
  const auto xs = random_samples(rng, 2, 10);
  const TrainedModel m(cov, Vec::Constant(2, std::log(0.1)), xs, random_outputs(rng, 10, 2));
  const auto qs = random_samples(rng, 2, 7);
  const auto pred = m.predict(qs);
  for (std::size_t i = 0; i < qs.size(); ++i) {
    const auto p = m.posterior(qs[i]);
    const auto row = static_cast<long>(i);
    CHECK(rel(pred.mean.row(row).transpose(), p.mean) < 1e-12);
    CHECK(rel(pred.variance.row(row).transpose(), p.cov.diagonal()) < 1e-10);
  }
}

TEST_CASE("adding observations never increases posterior variance") {
  data::Rng rng(8);
  ScalarCovariance base("se", 2, 0, ScalarCovariance::Extra::Friction);
  const auto cov = std::shared_ptr<const CovarianceFunction>(base.with_log_params(Vec::Constant(base.num_params(), -0.3)));
  const auto all = random_samples(rng, 2, 12);
  const Mat y = random_outputs(rng, 12, 1);
  const auto queries = random_samples(rng, 2, 6);
  Vec prev = Vec::Constant(6, std::numeric_limits<double>::infinity());
  for (int n = 0; n <= 12; n += 3) {
    const std::vector<GpSample> sub(all.begin(), all.begin() + n);
    const TrainedModel m(cov, Vec::Constant(1, std::log(0.1)), sub, y.topRows(n));
    const Vec var = m.predict(queries).variance.col(0);
    CHECK((var.array() <= prev.array() + 1e-12).all());
    prev = var;
  }
}

TEST_CASE("Gram matrices of all kernel families are PSD") {
  data::Rng rng(9);
  const auto model = fixtures::Planar2R{}.model();
  std::vector<std::unique_ptr<CovarianceFunction>> kernels;
  kernels.push_back(std::make_unique<LagrangianCovariance>(lip_cov(kTwoR, 0.5, 4)));
  kernels.push_back(std::make_unique<LagrangianCovariance>(
      "lip+friction", lip::OperatorKernel(kTwoR, lip::lip_components(kTwoR)), FrictionOptions{true, true}));
  kernels.push_back(std::make_unique<LagrangianCovariance>("lse", lip::OperatorKernel(kTwoR, lip::lse_components(kTwoR, 0.0, 0.5))));
  kernels.push_back(std::make_unique<ScalarCovariance>("se", 2, 0, ScalarCovariance::Extra::None));
  kernels.push_back(std::make_unique<ScalarCovariance>("sp", 2, 1, ScalarCovariance::Extra::Regressor, 24));
  kernels.push_back(std::make_unique<DiagonalOperatorCovariance>("gip", lip::OperatorKernel(kTwoR, lip::lip_components(kTwoR)), 1));
  for (const auto& k : kernels) {
    for (int t = 0; t < 3; ++t) {
      auto xs = random_samples(rng, 2, 15);
      for (auto& x : xs) x.regressor = robot::regressor_matrix(model, x.state);
      const Mat g = k->gram(-1, xs);
      INFO(k->name());
      CHECK(min_eig(g) >= -1e-8 * g.trace() / static_cast<double>(g.rows()));
    }
  }
}

TEST_CASE("cached LML objective matches direct evaluation") {
  data::Rng rng(10);
  const auto cov = lip_cov(kTwoR, 0.3, 5);
  const auto xs = random_samples(rng, 2, 10);
  const Mat y = random_outputs(rng, 10, 2);
  LmlObjective obj(cov, xs, y);
  Vec theta(cov.num_params() + 2);
  theta << cov.log_params(), std::log(0.3), std::log(0.4);
  const double base = obj.value(theta, true);
  CHECK(base == doctest::Approx(log_marginal_likelihood(cov, theta.tail(2), xs, y)).epsilon(1e-12));
  for (long p : {0L, 5L, theta.size() - 1}) {
    Vec t = theta;
    t(p) += 0.1;
    const auto k = cov.with_log_params(t.head(cov.num_params()));
    CHECK(obj.value(t, false) == doctest::Approx(log_marginal_likelihood(*k, t.tail(2), xs, y)).epsilon(1e-10));
  }
  CHECK(obj.value(theta, false) == base);
}

TEST_CASE("bounded BFGS on a quadratic and FD gradients at bounds") {
  const Vec c = Eigen::Vector3d(0.5, -2.0, 3.0);
  Objective obj;
  obj.value = [&](const Vec& x, bool) { return -(x - c).squaredNorm() - 0.5 * std::pow(x(0) * x(1), 2); };
  const Vec lo = Vec::Constant(3, -1.0), hi = Vec::Constant(3, 1.0);
  const auto r = maximize(obj, Vec::Zero(3), lo, hi);
  CHECK(r.converged);
  CHECK(r.theta(1) == -1.0);
  CHECK(r.theta(2) == 1.0);
  CHECK(r.value >= obj.value(Vec::Zero(3), false));

  const auto g = fd_gradient([](const Vec& x, int) { return x(0) * x(0); }, Vec::Constant(1, 1.0), 1e-3,
                             Vec::Constant(1, -1.0), Vec::Constant(1, 1.0));
  CHECK(g(0) == doctest::Approx(2.0 - 1e-3).epsilon(1e-9));  // one-sided difference at the bound
}

TEST_CASE("hyperparameter optimisation ascends and recovers a length-scale") {
  std::vector<double> recovered;
  const double len = 0.8, noise = 0.05;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    data::Rng rng(100 + seed);
    std::vector<GpSample> xs;
    for (int i = 0; i < 40; ++i) {
      xs.push_back({robot::make_state(Vec::Constant(1, rng.uniform(-3.0, 3.0)), Vec::Zero(1), Vec::Zero(1)), Mat()});
    }
    Mat k(40, 40);
    for (int i = 0; i < 40; ++i) {
      for (int j = 0; j < 40; ++j) {
        const double d = xs[static_cast<std::size_t>(i)].state.q(0) - xs[static_cast<std::size_t>(j)].state.q(0);
        k(i, j) = std::exp(-d * d / (len * len));
      }
    }
    k.diagonal().array() += 1e-9;
    const Mat l = k.llt().matrixL();
    Vec z(40), e(40);
    for (int i = 0; i < 40; ++i) z(i) = rng.normal();
    for (int i = 0; i < 40; ++i) e(i) = noise * rng.normal();
    const Mat y = l * z + e;

    ScalarCovariance se("se", 1, 0, ScalarCovariance::Extra::None);
    TrainOptions opts;
    opts.initial_log_noise = Vec::Constant(1, std::log(0.1));
    const auto res = train(se, xs, y, opts);
    Vec theta0(se.num_params() + 1);
    theta0 << se.log_params(), std::log(0.1);
    LmlObjective obj(se, xs, y);
    CHECK(res.optimization.value >= obj.value(theta0, true) - 1e-9);
    recovered.push_back(std::sqrt(std::exp(res.optimization.theta(1))));

    if (seed == 0) {
      // restarting from the optimum cannot lose likelihood
      TrainOptions again = opts;
      auto fitted = se.with_log_params(res.optimization.theta.head(se.num_params()));
      again.initial_log_noise = res.optimization.theta.tail(1);
      const auto res2 = train(*fitted, xs, y, again);
      CHECK(res2.optimization.value >= res.optimization.value - 1e-9);
    }
  }
  std::nth_element(recovered.begin(), recovered.begin() + 10, recovered.end());
  const double median = recovered[10];
  INFO("median recovered length-scale " << median);
  CHECK(std::abs(median - len) <= 0.3 * len);
}
