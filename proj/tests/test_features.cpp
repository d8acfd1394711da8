#include <doctest.h>

#include <cmath>
#include <vector>

#include <Eigen/Eigenvalues>

#include "lipnet/features.hpp"
#include "lipnet/rng.hpp"

using namespace lipnet;

namespace {

// Dense eigendecomposition oracle, independent of fit_pca's implementation:
// full covariance, Eigen's self-adjoint solver, explicit sort + sign fix.
PcaModel oracle_pca(const Eigen::MatrixXd& x, int k) {
  const Eigen::VectorXd mean = x.colwise().mean();
  Eigen::MatrixXd centered = x.rowwise() - mean.transpose();
  const Eigen::MatrixXd cov =
      centered.transpose() * centered / static_cast<double>(x.rows() - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  PcaModel model;
  model.meanVector = mean;
  model.components.resize(k, x.cols());
  model.variances.resize(k);
  for (int i = 0; i < k; ++i) {
    // solver returns eigenvalues ascending
    const int src = static_cast<int>(x.cols()) - 1 - i;
    Eigen::VectorXd v = solver.eigenvectors().col(src);
    int arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0) v = -v;
    model.components.row(i) = v.transpose();
    model.variances(i) = solver.eigenvalues()(src);
  }
  return model;
}

}  // namespace

TEST_CASE("fit_pca on rank-1 data along y=x") {
  Eigen::MatrixXd x(4, 2);
  x << -2, -2, -1, -1, 1, 1, 2, 2;
  const PcaModel model = fit_pca(x, 1);
  const double inv = 1.0 / std::sqrt(2.0);
  CHECK(model.components(0, 0) == doctest::Approx(inv));
  CHECK(model.components(0, 1) == doctest::Approx(inv));
  // rank-1 data: the first variance carries all the variance
  const double total = (x.rowwise() - x.colwise().mean()).squaredNorm() / 3.0;
  CHECK(model.variances(0) == doctest::Approx(total));
}

TEST_CASE("fit_pca projections match a dense eigensolver oracle") {
  Rng rng(42);
  Eigen::MatrixXd x(20, 12);
  for (int r = 0; r < 20; ++r)
    for (int c = 0; c < 12; ++c) x(r, c) = rng.uniform(-1, 1);
  const int k = 5;
  const PcaModel model = fit_pca(x, k);
  const PcaModel oracle = oracle_pca(x, k);
  for (int r = 0; r < 20; ++r) {
    const Eigen::VectorXd p = project_eigenlips(model, x.row(r).transpose());
    const Eigen::VectorXd q = project_eigenlips(oracle, x.row(r).transpose());
    for (int i = 0; i < k; ++i)
      CHECK(std::min(std::abs(p(i) - q(i)), std::abs(p(i) + q(i))) < 1e-8);
  }
  for (int i = 0; i < k; ++i)
    CHECK(model.variances(i) == doctest::Approx(oracle.variances(i)).epsilon(1e-9));
}

TEST_CASE("fit_pca at k=100 on 1600-dim input yields a 100x1600 model") {
  Rng rng(5);
  Eigen::MatrixXd x(120, 1600);
  for (int r = 0; r < 120; ++r)
    for (int c = 0; c < 1600; ++c) x(r, c) = rng.uniform(0, 1);
  const PcaModel model = fit_pca(x, 100);
  CHECK(model.component_count() == 100);
  CHECK(model.input_dim() == 1600);
  CHECK(model.meanVector.size() == 1600);
  // rows orthonormal, variances non-increasing
  const Eigen::MatrixXd gram = model.components * model.components.transpose();
  CHECK((gram - Eigen::MatrixXd::Identity(100, 100)).cwiseAbs().maxCoeff() < 1e-6);
  for (int i = 1; i < 100; ++i)
    CHECK(model.variances(i) <= model.variances(i - 1) + 1e-12);
}

TEST_CASE("fit_pca rejects k above min(n, dim)") {
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(3, 8);
  CHECK_THROWS_AS(fit_pca(x, 4), std::invalid_argument);
  CHECK_THROWS_AS(fit_pca(x, 0), std::invalid_argument);
}

TEST_CASE("full-rank PCA reconstructs losslessly") {
  Rng rng(9);
  Eigen::MatrixXd x(10, 6);
  for (int r = 0; r < 10; ++r)
    for (int c = 0; c < 6; ++c) x(r, c) = rng.uniform(-3, 3);
  const PcaModel model = fit_pca(x, 6);
  for (int r = 0; r < 10; ++r) {
    const Eigen::VectorXd frame = x.row(r).transpose();
    const Eigen::VectorXd coeffs = project_eigenlips(model, frame);
    const Eigen::VectorXd recon =
        model.meanVector + model.components.transpose() * coeffs;
    CHECK((recon - frame).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("project_eigenlips centering and orthonormality") {
  Rng rng(17);
  Eigen::MatrixXd x(8, 5);
  for (int r = 0; r < 8; ++r)
    for (int c = 0; c < 5; ++c) x(r, c) = rng.uniform(-1, 1);
  const PcaModel model = fit_pca(x, 3);

  CHECK(project_eigenlips(model, model.meanVector).cwiseAbs().maxCoeff() < 1e-12);

  const Eigen::VectorXd shifted =
      model.meanVector + model.components.row(0).transpose();
  const Eigen::VectorXd e1 = project_eigenlips(model, shifted);
  CHECK(e1(0) == doctest::Approx(1.0));
  CHECK(std::abs(e1(1)) < 1e-10);
  CHECK(std::abs(e1(2)) < 1e-10);
}

TEST_CASE("project_eigenlips matches a triple-loop oracle") {
  Rng rng(23);
  Eigen::MatrixXd x(9, 7);
  for (int r = 0; r < 9; ++r)
    for (int c = 0; c < 7; ++c) x(r, c) = rng.uniform(-2, 2);
  const PcaModel model = fit_pca(x, 4);
  Eigen::VectorXd frame(7);
  for (int c = 0; c < 7; ++c) frame(c) = rng.uniform(-2, 2);
  const Eigen::VectorXd got = project_eigenlips(model, frame);
  for (int i = 0; i < 4; ++i) {
    double acc = 0;
    for (int c = 0; c < 7; ++c)
      acc += model.components(i, c) * (frame(c) - model.meanVector(c));
    CHECK(got(i) == doctest::Approx(acc).epsilon(1e-6));
  }
}

TEST_CASE("project_eigenlips is linear") {
  Rng rng(31);
  Eigen::MatrixXd data(8, 4);
  for (int r = 0; r < 8; ++r)
    for (int c = 0; c < 4; ++c) data(r, c) = rng.uniform(-1, 1);
  const PcaModel model = fit_pca(data, 2);
  Eigen::VectorXd a(4), b(4);
  for (int c = 0; c < 4; ++c) {
    a(c) = rng.uniform(-1, 1);
    b(c) = rng.uniform(-1, 1);
  }
  const double alpha = 0.7, beta = -1.3;
  const Eigen::VectorXd combo =
      alpha * a + beta * b - (alpha + beta - 1.0) * model.meanVector;
  const Eigen::VectorXd lhs = project_eigenlips(model, combo);
  const Eigen::VectorXd rhs =
      alpha * project_eigenlips(model, a) + beta * project_eigenlips(model, b);
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("project_eigenlips rejects dimension mismatch") {
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(6, 5);
  const PcaModel model = fit_pca(x, 2);
  CHECK_THROWS_AS(project_eigenlips(model, Eigen::VectorXd::Zero(4)),
                  std::invalid_argument);
}

TEST_CASE("pca tensor round trip") {
  Rng rng(13);
  Eigen::MatrixXd x(10, 6);
  for (int r = 0; r < 10; ++r)
    for (int c = 0; c < 6; ++c) x(r, c) = rng.uniform(-1, 1);
  const PcaModel model = fit_pca(x, 3);
  const PcaModel back = pca_from_tensors(pca_to_tensors(model));
  CHECK(back.component_count() == 3);
  CHECK(back.input_dim() == 6);
  // f32 persistence: agreement to float precision
  CHECK((back.meanVector - model.meanVector).cwiseAbs().maxCoeff() < 1e-6);
  CHECK((back.components - model.components).cwiseAbs().maxCoeff() < 1e-6);
  CHECK((back.variances - model.variances).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("compute_hog: constant patch yields a zero descriptor") {
  const Eigen::MatrixXf patch = Eigen::MatrixXf::Constant(40, 40, 0.5f);
  const Eigen::VectorXf d = compute_hog(patch, HogConfig{});
  CHECK(d.size() == 576);
  CHECK(d.isZero());
}

TEST_CASE("compute_hog: vertical step edge concentrates in the 0-degree bins") {
  Eigen::MatrixXf patch = Eigen::MatrixXf::Zero(40, 40);
  for (int r = 0; r < 40; ++r)
    for (int c = 20; c < 40; ++c) patch(r, c) = 1.0f;
  const HogConfig cfg;
  const Eigen::VectorXf d = compute_hog(patch, cfg);
  // horizontal gradient -> orientation 0 degrees, which falls between the
  // centers of the last and first unsigned bins
  double mass0 = 0, total = 0;
  const int bins = cfg.orientationBins;
  for (int i = 0; i < d.size(); ++i) {
    total += d(i);
    const int bin = i % bins;
    if (bin == 0 || bin == bins - 1) mass0 += d(i);
  }
  REQUIRE(total > 0);
  CHECK(mass0 / total >= 0.90);
}

TEST_CASE("hog descriptor layout for cell size 8 on 40x40") {
  CHECK(hog_descriptor_length(40, HogConfig{}) == 576);
  HogConfig c4;
  c4.cellSize = 4;  // 10x10 cells -> 9x9 blocks
  CHECK(hog_descriptor_length(40, c4) == 9 * 9 * 4 * 9);
}

TEST_CASE("compute_hog rejects a cell size that does not divide the side") {
  HogConfig cfg;
  cfg.cellSize = 7;
  CHECK_THROWS_AS(compute_hog(Eigen::MatrixXf::Zero(40, 40), cfg),
                  std::invalid_argument);
}

TEST_CASE("hog descriptor is non-negative with bounded block norms") {
  Rng rng(77);
  Eigen::MatrixXf patch(40, 40);
  for (int r = 0; r < 40; ++r)
    for (int c = 0; c < 40; ++c)
      patch(r, c) = static_cast<float>(rng.uniform(0, 1));
  const HogConfig cfg;
  const Eigen::VectorXf d = compute_hog(patch, cfg);
  CHECK(d.minCoeff() >= 0.0f);
  const int blockLen = cfg.blockSize * cfg.blockSize * cfg.orientationBins;
  for (int b = 0; b * blockLen < d.size(); ++b)
    CHECK(d.segment(b * blockLen, blockLen).norm() <= std::sqrt(1.0f + 1e-4f));
}

TEST_CASE("hog is invariant to a constant intensity offset") {
  Rng rng(81);
  Eigen::MatrixXf patch(40, 40);
  for (int r = 0; r < 40; ++r)
    for (int c = 0; c < 40; ++c)
      patch(r, c) = static_cast<float>(rng.uniform(0, 1));
  const Eigen::VectorXf a = compute_hog(patch, HogConfig{});
  const Eigen::VectorXf b =
      compute_hog((patch.array() + 0.25f).matrix(), HogConfig{});
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-5f);
}

namespace {

std::vector<Eigen::VectorXf> indexed_frames(int n, int d = 2) {
  std::vector<Eigen::VectorXf> frames;
  for (int i = 0; i < n; ++i)
    frames.push_back(Eigen::VectorXf::Constant(d, static_cast<float>(i)));
  return frames;
}

}  // namespace

TEST_CASE("sequence_feature_vector identity at n == L") {
  const auto frames = indexed_frames(6);
  const Eigen::VectorXf v = sequence_feature_vector(frames, 6);
  REQUIRE(v.size() == 12);
  for (int i = 0; i < 6; ++i) {
    CHECK(v(2 * i) == doctest::Approx(i));
    CHECK(v(2 * i + 1) == doctest::Approx(i));
  }
}

TEST_CASE("sequence_feature_vector repeats short sequences") {
  const auto frames = indexed_frames(3);
  const Eigen::VectorXf v = sequence_feature_vector(frames, 6);
  const float expect[6] = {0, 0, 1, 1, 2, 2};  // slot -> floor(i*3/6)
  for (int i = 0; i < 6; ++i) CHECK(v(2 * i) == doctest::Approx(expect[i]));
}

TEST_CASE("sequence_feature_vector averages neighbor pairs at n = 2L") {
  const auto frames = indexed_frames(12);
  const Eigen::VectorXf v = sequence_feature_vector(frames, 6);
  for (int i = 0; i < 6; ++i)
    CHECK(v(2 * i) == doctest::Approx((2 * i + 2 * i + 1) / 2.0));
}

TEST_CASE("sequence_feature_vector is idempotent on length-L input") {
  Rng rng(2);
  std::vector<Eigen::VectorXf> frames;
  for (int i = 0; i < 6; ++i) {
    Eigen::VectorXf f(3);
    for (int j = 0; j < 3; ++j) f(j) = static_cast<float>(rng.uniform(-1, 1));
    frames.push_back(f);
  }
  const Eigen::VectorXf once = sequence_feature_vector(frames, 6);
  std::vector<Eigen::VectorXf> slots;
  for (int i = 0; i < 6; ++i) slots.push_back(once.segment(3 * i, 3));
  CHECK((sequence_feature_vector(slots, 6) - once).cwiseAbs().maxCoeff() == 0.0f);
}

TEST_CASE("sequence_feature_vector reverses slotwise when n is a multiple of L") {
  const auto frames = indexed_frames(12, 1);
  auto reversed = frames;
  std::reverse(reversed.begin(), reversed.end());
  const Eigen::VectorXf fwd = sequence_feature_vector(frames, 6);
  const Eigen::VectorXf bwd = sequence_feature_vector(reversed, 6);
  for (int i = 0; i < 6; ++i)
    CHECK(bwd(i) == doctest::Approx(fwd(5 - i)));
}

TEST_CASE("sequence_feature_vector rejects empty input") {
  CHECK_THROWS_AS(sequence_feature_vector({}, 6), std::invalid_argument);
}
