#include <doctest.h>

#include <cmath>
#include <vector>

#include "lipnet/checkpoint.hpp"
#include "lipnet/gradcheck.hpp"
#include "lipnet/net.hpp"
#include "lipnet/rng.hpp"

using namespace lipnet;

namespace {

NetShape small_shape() {
  NetShape s;
  s.inputDim = 10;
  s.ffUnits = 8;
  s.lstmUnits = 8;
  s.classCount = 5;
  return s;
}

template <class S>
Mat<S> random_frames(long T, int dim, std::uint64_t seed) {
  Rng rng(seed);
  Mat<S> frames(T, dim);
  for (long t = 0; t < T; ++t)
    for (int c = 0; c < dim; ++c)
      frames(t, c) = static_cast<S>(rng.uniform(-1, 1));
  return frames;
}

template <class S>
bool networks_equal(LstmNetwork<S>& a, LstmNetwork<S>& b) {
  bool equal = true;
  zip_params(a, b, [&](auto& x, auto& y) {
    if (x != y) equal = false;
  });
  return equal;
}

}  // namespace

TEST_CASE("init_network is deterministic and bounded") {
  TrainConfig cfg;
  cfg.seed = 99;
  auto a = init_network<float>(small_shape(), cfg);
  auto b = init_network<float>(small_shape(), cfg);
  CHECK(networks_equal(a, b));
  visit_params(a, [](const char*, auto& block) {
    for (long i = 0; i < block.size(); ++i) {
      CHECK(block.data()[i] >= -0.05f);
      CHECK(block.data()[i] <= 0.05f);
    }
  });
}

TEST_CASE("init_network samples are centered") {
  // >= 1e5 draws; 3 sigma of U(-.05,.05) over n samples is well under 0.002
  NetShape shape;
  shape.inputDim = 300;
  shape.ffUnits = 128;
  shape.lstmUnits = 64;
  shape.classCount = 51;
  TrainConfig cfg;
  cfg.seed = 12345;
  auto net = init_network<double>(shape, cfg);
  double sum = 0;
  long n = 0;
  visit_params(net, [&](const char*, auto& block) {
    sum += block.sum();
    n += block.size();
  });
  REQUIRE(n >= 100000);
  CHECK(std::abs(sum / n) < 0.002);
}

TEST_CASE("lstm_step with all-zero parameters and state") {
  LstmNetwork<double> net;
  NetShape s = small_shape();
  allocate_network(net, s);
  const Vec<double> x = Vec<double>::Ones(s.ffUnits);
  const Vec<double> zeroState = Vec<double>::Zero(s.lstmUnits);
  const auto [h, c] = lstm_step(net.lstm1, x, zeroState, zeroState);
  CHECK(h.isZero());
  CHECK(c.isZero());
}

TEST_CASE("lstm_step with zero weights halves the carried cell state") {
  LstmNetwork<double> net;
  NetShape s = small_shape();
  allocate_network(net, s);
  Vec<double> cPrev(s.lstmUnits);
  for (int i = 0; i < s.lstmUnits; ++i) cPrev(i) = 0.1 * (i + 1);
  const Vec<double> zeroIn = Vec<double>::Zero(s.ffUnits);
  const Vec<double> zeroH = Vec<double>::Zero(s.lstmUnits);
  const auto [h, c] = lstm_step(net.lstm1, zeroIn, zeroH, cPrev);
  for (int i = 0; i < s.lstmUnits; ++i) {
    CHECK(c(i) == doctest::Approx(0.5 * cPrev(i)));
    CHECK(h(i) == doctest::Approx(0.5 * std::tanh(0.5 * cPrev(i))));
  }
}

TEST_CASE("lstm_step matches a scalar-loop reference") {
  TrainConfig cfg;
  cfg.seed = 31;
  auto net = init_network<double>(small_shape(), cfg);
  Rng rng(7);
  const int in = small_shape().ffUnits, u = small_shape().lstmUnits;
  Vec<double> x(in), hPrev(u), cPrev(u);
  for (int i = 0; i < in; ++i) x(i) = rng.uniform(-1, 1);
  for (int i = 0; i < u; ++i) {
    hPrev(i) = rng.uniform(-1, 1);
    cPrev(i) = rng.uniform(-1, 1);
  }
  const auto [h, c] = lstm_step(net.lstm1, x, hPrev, cPrev);

  auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
  const LstmLayer<double>& L = net.lstm1;
  for (int r = 0; r < u; ++r) {
    double zi = L.bi(r), zf = L.bf(r), zo = L.bo(r), zc = L.bc(r);
    for (int j = 0; j < in; ++j) {
      zi += L.Wi(r, j) * x(j);
      zf += L.Wf(r, j) * x(j);
      zo += L.Wo(r, j) * x(j);
      zc += L.Wc(r, j) * x(j);
    }
    for (int j = 0; j < u; ++j) {
      zi += L.Ui(r, j) * hPrev(j);
      zf += L.Uf(r, j) * hPrev(j);
      zo += L.Uo(r, j) * hPrev(j);
      zc += L.Uc(r, j) * hPrev(j);
    }
    const double ct = sig(zf) * cPrev(r) + sig(zi) * std::tanh(zc);
    const double ht = sig(zo) * std::tanh(ct);
    CHECK(std::abs(c(r) - ct) < 1e-6);
    CHECK(std::abs(h(r) - ht) < 1e-6);
  }
}

TEST_CASE("lstm_step rejects shape mismatches") {
  LstmNetwork<double> net;
  allocate_network(net, small_shape());
  const int u = small_shape().lstmUnits;
  const Vec<double> badIn = Vec<double>::Zero(3);
  const Vec<double> state = Vec<double>::Zero(u);
  CHECK_THROWS_AS(lstm_step(net.lstm1, badIn, state, state),
                  std::invalid_argument);
}

TEST_CASE("forward posteriors are positive and normalized") {
  TrainConfig cfg;
  cfg.seed = 4;
  auto net = init_network<double>(small_shape(), cfg);
  const auto frames = random_frames<double>(9, small_shape().inputDim, 6);
  const auto posteriors = forward(net, frames);
  REQUIRE(posteriors.rows() == 9);
  for (long t = 0; t < 9; ++t) {
    CHECK(posteriors.row(t).minCoeff() > 0.0);
    CHECK(std::abs(posteriors.row(t).sum() - 1.0) < 1e-12);
  }
}

TEST_CASE("zero network yields uniform posteriors") {
  NetShape shape = small_shape();
  shape.classCount = 51;
  LstmNetwork<float> net;
  allocate_network(net, shape);
  const auto posteriors = forward(net, random_frames<float>(4, shape.inputDim, 1));
  for (long t = 0; t < 4; ++t)
    for (int c = 0; c < 51; ++c)
      CHECK(posteriors(t, c) == doctest::Approx(1.0f / 51.0f).epsilon(1e-6));
}

TEST_CASE("forward on T=1 matches manually chained layer equations") {
  TrainConfig cfg;
  cfg.seed = 11;
  const NetShape shape = small_shape();
  auto net = init_network<double>(shape, cfg);
  const auto frames = random_frames<double>(1, shape.inputDim, 2);

  const Vec<double> a =
      (net.ff.W * frames.row(0).transpose() + net.ff.b).array().tanh();
  const Vec<double> z = Vec<double>::Zero(shape.lstmUnits);
  const auto [h1, c1] = lstm_step(net.lstm1, a, z, z);
  const auto [h2, c2] = lstm_step(net.lstm2, h1, z, z);
  Vec<double> logits = net.softmaxW * h2 + net.softmaxB;
  Vec<double> expect = (logits.array() - logits.maxCoeff()).exp();
  expect /= expect.sum();

  const auto posteriors = forward(net, frames);
  CHECK((posteriors.row(0).transpose() - expect).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("forward rejects empty or mismatched input") {
  LstmNetwork<double> net;
  allocate_network(net, small_shape());
  CHECK_THROWS_AS(forward(net, Mat<double>(0, small_shape().inputDim)),
                  std::invalid_argument);
  const Mat<double> wrong = Mat<double>::Zero(2, 3);
  CHECK_THROWS_AS(forward(net, wrong), std::invalid_argument);
}

TEST_CASE("near-certain correct posterior gives near-zero loss and softmax gradient") {
  NetShape shape = small_shape();
  LstmNetwork<double> net;
  allocate_network(net, shape);
  net.softmaxB(2) = 60.0;  // posterior for class 2 saturates at ~1 every frame
  const auto frames = random_frames<double>(5, shape.inputDim, 3);
  const auto [loss, grad] = loss_and_gradients(net, frames, 2);
  CHECK(loss < 1e-12);
  CHECK(grad.softmaxW.cwiseAbs().maxCoeff() < 1e-12);
  CHECK(grad.softmaxB.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("uniform posteriors lose ln(classCount)") {
  NetShape shape = small_shape();
  shape.classCount = 51;
  LstmNetwork<double> net;
  allocate_network(net, shape);
  const auto frames = random_frames<double>(3, shape.inputDim, 8);
  const auto [loss, grad] = loss_and_gradients(net, frames, 7);
  CHECK(loss == doctest::Approx(std::log(51.0)).epsilon(1e-9));
  CHECK(std::log(51.0) == doctest::Approx(3.932).epsilon(1e-3));
}

TEST_CASE("loss_and_gradients rejects out-of-range labels") {
  LstmNetwork<double> net;
  allocate_network(net, small_shape());
  const auto frames = random_frames<double>(2, small_shape().inputDim, 1);
  CHECK_THROWS_AS(loss_and_gradients(net, frames, 5), std::invalid_argument);
  CHECK_THROWS_AS(loss_and_gradients(net, frames, -1), std::invalid_argument);
}

TEST_CASE("per-frame gradient is the mean of per-prefix final-frame gradients") {
  // CE at frame t only depends on frames 0..t, so the final-frame gradient of
  // each prefix reproduces one term of the per-frame mean.
  TrainConfig cfg;
  cfg.seed = 21;
  const NetShape shape = small_shape();
  auto net = init_network<double>(shape, cfg);
  const long T = 4;
  const auto frames = random_frames<double>(T, shape.inputDim, 5);
  const int label = 3;

  auto [lossMean, gradMean] =
      loss_and_gradients(net, frames, label, LossPlacement::PerFrame);

  LstmNetwork<double> sum;
  allocate_network(sum, shape);
  double lossSum = 0;
  for (long t = 1; t <= T; ++t) {
    const Mat<double> prefix = frames.topRows(t);
    auto [l, g] = loss_and_gradients(net, prefix, label, LossPlacement::FinalFrame);
    lossSum += l;
    zip_params(sum, g, [](auto& a, auto& b) { a += b; });
  }
  CHECK(lossMean == doctest::Approx(lossSum / T).epsilon(1e-12));
  zip_params(gradMean, sum, [&](auto& a, auto& b) {
    CHECK((a - b / static_cast<double>(T)).cwiseAbs().maxCoeff() < 1e-12);
  });
}

TEST_CASE("gradient check passes on the small reference net") {
  const auto report = gradient_check(small_shape());
  CHECK(report.passed);
  CHECK(report.maxRelError < 1e-4);
}

TEST_CASE("gradient check passes with final-frame loss and T=1") {
  CHECK(gradient_check(small_shape(), 1e-4, 7, 7, 1e-4,
                       LossPlacement::FinalFrame).passed);
  CHECK(gradient_check(small_shape(), 1e-4, 7, 1).passed);
}

TEST_CASE("gradient check flags an injected corruption and names the block") {
  GradCorruption corruption;
  corruption.block = "lstm1/Wf";
  corruption.index = 5;
  corruption.factor = 2.0;
  const auto report = gradient_check(small_shape(), 1e-4, 7, 7, 1e-4,
                                     LossPlacement::PerFrame, corruption);
  CHECK_FALSE(report.passed);
  CHECK(report.worstBlock == "lstm1/Wf");
  CHECK(report.worstIndex == 5);
}

TEST_CASE("predict_word aggregates mean posteriors with low-index tie-break") {
  NetShape shape = small_shape();
  LstmNetwork<double> zero;
  allocate_network(zero, shape);
  const auto frames = random_frames<double>(3, shape.inputDim, 4);
  const auto [label, aggregate] = predict_word(zero, frames);
  CHECK(label == 0);  // uniform posterior, tie-break to the lowest index
  for (int c = 0; c < shape.classCount; ++c)
    CHECK(aggregate(c) == doctest::Approx(1.0 / shape.classCount));

  TrainConfig cfg;
  cfg.seed = 3;
  auto net = init_network<double>(shape, cfg);
  const auto posteriors = forward(net, frames);
  const auto [l2, agg2] = predict_word(net, frames);
  const Vec<double> mean = posteriors.colwise().mean().transpose();
  CHECK((agg2 - mean).cwiseAbs().maxCoeff() < 1e-15);
  int arg = 0;
  mean.maxCoeff(&arg);
  CHECK(l2 == arg);
}

TEST_CASE("early stopping trace: stop at epoch 12, keep the epoch-2 snapshot") {
  EarlyStopper stopper(10);
  CHECK(stopper.update(0.5));
  CHECK(stopper.update(0.6));
  for (int epoch = 3; epoch <= 11; ++epoch) {
    CHECK_FALSE(stopper.update(0.6));
    CHECK_FALSE(stopper.should_stop());
  }
  CHECK_FALSE(stopper.update(0.6));  // epoch 12: 10th non-improving epoch
  CHECK(stopper.should_stop());
  CHECK(stopper.epoch() == 12);
  CHECK(stopper.best_epoch() == 2);
  CHECK(stopper.best_accuracy() == doctest::Approx(0.6));
}

namespace {

std::vector<LabeledSequence<float>> toy_sequences(int perClass, int classCount,
                                                  std::uint64_t seed) {
  // class identity encoded as a constant offset on the first coordinates
  Rng rng(seed);
  std::vector<LabeledSequence<float>> out;
  const NetShape shape = small_shape();
  for (int c = 0; c < classCount; ++c)
    for (int s = 0; s < perClass; ++s) {
      LabeledSequence<float> seq;
      seq.label = c;
      const long T = 2 + static_cast<long>(rng.next_below(3));
      seq.frames.resize(T, shape.inputDim);
      for (long t = 0; t < T; ++t)
        for (int j = 0; j < shape.inputDim; ++j)
          seq.frames(t, j) = static_cast<float>(
              rng.uniform(-0.2, 0.2) + (j % classCount == c ? 2.0 : -1.0));
      out.push_back(std::move(seq));
    }
  return out;
}

}  // namespace

TEST_CASE("train is reproducible and records a consistent best snapshot") {
  const NetShape shape = small_shape();
  TrainConfig cfg;
  cfg.seed = 17;
  cfg.maxEpochs = 15;
  cfg.learningRate = 0.05;
  const auto trainSet = toy_sequences(6, shape.classCount, 100);
  const auto valSet = toy_sequences(3, shape.classCount, 200);
  const auto initial = init_network<float>(shape, cfg);

  auto [bestA, histA] = train(initial, trainSet, valSet, cfg);
  auto [bestB, histB] = train(initial, trainSet, valSet, cfg);
  CHECK(networks_equal(bestA, bestB));
  REQUIRE(histA.size() == histB.size());
  for (std::size_t i = 0; i < histA.size(); ++i) {
    CHECK(histA[i].trainLoss == histB[i].trainLoss);
    CHECK(histA[i].valAccuracy == histB[i].valAccuracy);
  }

  // the returned snapshot achieves the best recorded validation accuracy
  double bestRecorded = 0;
  for (const auto& e : histA) bestRecorded = std::max(bestRecorded, e.valAccuracy);
  CHECK(word_accuracy(bestA, valSet) == doctest::Approx(bestRecorded));
}

TEST_CASE("train learns the toy separable task") {
  const NetShape shape = small_shape();
  TrainConfig cfg;
  cfg.seed = 5;
  cfg.maxEpochs = 400;
  cfg.patience = 400;  // the tiny net sits on a long plateau before learning
  cfg.learningRate = 0.1;
  const auto trainSet = toy_sequences(8, shape.classCount, 300);
  const auto valSet = toy_sequences(4, shape.classCount, 400);
  const auto initial = init_network<float>(shape, cfg);
  auto [best, hist] = train(initial, trainSet, valSet, cfg);
  CHECK(word_accuracy(best, valSet) >= 0.9);
}

TEST_CASE("zero learning rate leaves the network unchanged") {
  const NetShape shape = small_shape();
  TrainConfig cfg;
  cfg.seed = 2;
  cfg.maxEpochs = 2;
  cfg.learningRate = 0.0;
  const auto trainSet = toy_sequences(2, shape.classCount, 10);
  const auto valSet = toy_sequences(1, shape.classCount, 20);
  auto initial = init_network<float>(shape, cfg);
  auto [best, hist] = train(initial, trainSet, valSet, cfg);
  CHECK(networks_equal(best, initial));
}

TEST_CASE("train rejects empty splits") {
  LstmNetwork<float> net;
  allocate_network(net, small_shape());
  const auto some = toy_sequences(1, small_shape().classCount, 1);
  CHECK_THROWS_AS(train(net, {}, some, TrainConfig{}), std::invalid_argument);
  CHECK_THROWS_AS(train(net, some, {}, TrainConfig{}), std::invalid_argument);
}

TEST_CASE("checkpoint round trip preserves parameters and metadata") {
  TrainConfig cfg;
  cfg.seed = 77;
  auto net = init_network<float>(small_shape(), cfg);
  CheckpointMeta meta;
  meta.epoch = 23;
  meta.seed = 0xdeadbeefcafe1234ULL;
  meta.valAccuracy = 0.8125;
  const TensorSet set = network_to_tensors(net, meta);
  CheckpointMeta back;
  auto restored = network_from_tensors(set, &back);
  CHECK(networks_equal(net, restored));
  CHECK(back.epoch == 23);
  CHECK(back.seed == meta.seed);
  CHECK(back.valAccuracy == doctest::Approx(0.8125));
}
