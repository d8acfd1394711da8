#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "lipnet/rng.hpp"
#include "lipnet/tensor.hpp"

namespace lipnet {

struct NetShape {
  int inputDim = 1600;
  int ffUnits = 128;
  int lstmUnits = 128;
  int classCount = 51;
};

enum class LossPlacement { PerFrame, FinalFrame };

struct TrainConfig {
  double learningRate = 0.02;
  int patience = 10;
  double initLo = -0.05;
  double initHi = 0.05;
  std::uint64_t seed = 1;
  int maxEpochs = 200;
  double gradientClip = 0.0;  // max gradient norm per sample; 0 disables
  LossPlacement lossPlacement = LossPlacement::PerFrame;
};

struct EpochStats {
  int epoch = 0;  // 1-based
  double trainLoss = 0.0;
  double valAccuracy = 0.0;
};

// Early-stopping bookkeeping: keeps the best validation accuracy seen and
// signals a stop after `patience` consecutive non-improving epochs.
class EarlyStopper {
 public:
  explicit EarlyStopper(int patience) : patience_(patience) {}

  // Returns true when the epoch improved on the best accuracy so far.
  bool update(double accuracy) {
    ++epoch_;
    if (accuracy > bestAccuracy_) {
      bestAccuracy_ = accuracy;
      bestEpoch_ = epoch_;
      sinceImprovement_ = 0;
      return true;
    }
    ++sinceImprovement_;
    return false;
  }

  bool should_stop() const { return sinceImprovement_ >= patience_; }
  double best_accuracy() const { return bestAccuracy_; }
  int best_epoch() const { return bestEpoch_; }
  int epoch() const { return epoch_; }

 private:
  int patience_;
  int epoch_ = 0;
  int bestEpoch_ = 0;
  int sinceImprovement_ = 0;
  double bestAccuracy_ = -1.0;
};

class TrainingDivergedError : public std::runtime_error {
 public:
  TrainingDivergedError(int epoch, long sample)
      : std::runtime_error("training diverged (non-finite loss) at epoch " +
                           std::to_string(epoch) + ", sample " +
                           std::to_string(sample)),
        epoch(epoch), sample(sample) {}
  int epoch;
  long sample;
};

template <class S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <class S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;

template <class S>
struct FeedForwardLayer {
  Mat<S> W;  // out x in
  Vec<S> b;
};

// Standard LSTM without peepholes; gate order i, f, o, candidate.
template <class S>
struct LstmLayer {
  Mat<S> Wi, Wf, Wo, Wc;  // units x in
  Mat<S> Ui, Uf, Uo, Uc;  // units x units
  Vec<S> bi, bf, bo, bc;
  int units() const { return static_cast<int>(bi.size()); }
};

template <class S>
struct LstmNetwork {
  NetShape shape;
  FeedForwardLayer<S> ff;
  LstmLayer<S> lstm1, lstm2;
  Mat<S> softmaxW;  // classes x units
  Vec<S> softmaxB;
};

template <class S>
struct LabeledSequence {
  Mat<S> frames;  // T x inputDim, rows are standardized patches
  int label = 0;
};

namespace detail {

template <class S>
inline S sigmoid(S x) {
  return S(1) / (S(1) + std::exp(-x));
}

}  // namespace detail

// Visits every parameter block in a fixed, documented order. This order
// defines both the initialization stream and the checkpoint layout.
template <class S, class F>
void visit_params(LstmNetwork<S>& net, F&& f) {
  f("ff/W", net.ff.W);
  f("ff/b", net.ff.b);
  auto lstm = [&](const char* prefix, LstmLayer<S>& l) {
    const std::string p(prefix);
    f((p + "/Wi").c_str(), l.Wi);
    f((p + "/Wf").c_str(), l.Wf);
    f((p + "/Wo").c_str(), l.Wo);
    f((p + "/Wc").c_str(), l.Wc);
    f((p + "/Ui").c_str(), l.Ui);
    f((p + "/Uf").c_str(), l.Uf);
    f((p + "/Uo").c_str(), l.Uo);
    f((p + "/Uc").c_str(), l.Uc);
    f((p + "/bi").c_str(), l.bi);
    f((p + "/bf").c_str(), l.bf);
    f((p + "/bo").c_str(), l.bo);
    f((p + "/bc").c_str(), l.bc);
  };
  lstm("lstm1", net.lstm1);
  lstm("lstm2", net.lstm2);
  f("softmax/W", net.softmaxW);
  f("softmax/b", net.softmaxB);
}

// Lockstep visitation of two structurally identical networks (parameters and
// their gradients), same order as visit_params.
template <class S, class F>
void zip_params(LstmNetwork<S>& a, LstmNetwork<S>& b, F&& f) {
  f(a.ff.W, b.ff.W);
  f(a.ff.b, b.ff.b);
  auto lstm = [&](LstmLayer<S>& x, LstmLayer<S>& y) {
    f(x.Wi, y.Wi); f(x.Wf, y.Wf); f(x.Wo, y.Wo); f(x.Wc, y.Wc);
    f(x.Ui, y.Ui); f(x.Uf, y.Uf); f(x.Uo, y.Uo); f(x.Uc, y.Uc);
    f(x.bi, y.bi); f(x.bf, y.bf); f(x.bo, y.bo); f(x.bc, y.bc);
  };
  lstm(a.lstm1, b.lstm1);
  lstm(a.lstm2, b.lstm2);
  f(a.softmaxW, b.softmaxW);
  f(a.softmaxB, b.softmaxB);
}

template <class S>
void allocate_network(LstmNetwork<S>& net, const NetShape& shape) {
  net.shape = shape;
  net.ff.W.setZero(shape.ffUnits, shape.inputDim);
  net.ff.b.setZero(shape.ffUnits);
  auto lstm = [&](LstmLayer<S>& l, int in) {
    const int u = shape.lstmUnits;
    l.Wi.setZero(u, in); l.Wf.setZero(u, in); l.Wo.setZero(u, in); l.Wc.setZero(u, in);
    l.Ui.setZero(u, u);  l.Uf.setZero(u, u);  l.Uo.setZero(u, u);  l.Uc.setZero(u, u);
    l.bi.setZero(u); l.bf.setZero(u); l.bo.setZero(u); l.bc.setZero(u);
  };
  lstm(net.lstm1, shape.ffUnits);
  lstm(net.lstm2, shape.lstmUnits);
  net.softmaxW.setZero(shape.classCount, shape.lstmUnits);
  net.softmaxB.setZero(shape.classCount);
}

// All weights and biases i.i.d. uniform over [initLo, initHi], drawn from the
// seeded generator in visit_params order (column-major within each block).
template <class S>
LstmNetwork<S> init_network(const NetShape& shape, const TrainConfig& cfg) {
  LstmNetwork<S> net;
  allocate_network(net, shape);
  Rng rng(cfg.seed);
  visit_params(net, [&](const char*, auto& block) {
    for (long i = 0; i < block.size(); ++i)
      block.data()[i] = static_cast<S>(rng.uniform(cfg.initLo, cfg.initHi));
  });
  return net;
}

template <class S>
std::pair<Vec<S>, Vec<S>> lstm_step(const LstmLayer<S>& layer, const Vec<S>& x,
                                    const Vec<S>& hPrev, const Vec<S>& cPrev) {
  if (x.size() != layer.Wi.cols() || hPrev.size() != layer.units() ||
      cPrev.size() != layer.units())
    throw std::invalid_argument("lstm_step: shape mismatch");
  const Vec<S> i = (layer.Wi * x + layer.Ui * hPrev + layer.bi)
                       .unaryExpr([](S v) { return detail::sigmoid(v); });
  const Vec<S> f = (layer.Wf * x + layer.Uf * hPrev + layer.bf)
                       .unaryExpr([](S v) { return detail::sigmoid(v); });
  const Vec<S> o = (layer.Wo * x + layer.Uo * hPrev + layer.bo)
                       .unaryExpr([](S v) { return detail::sigmoid(v); });
  const Vec<S> g = (layer.Wc * x + layer.Uc * hPrev + layer.bc).array().tanh();
  Vec<S> c = f.cwiseProduct(cPrev) + i.cwiseProduct(g);
  Vec<S> h = o.cwiseProduct(c.array().tanh().matrix());
  return {std::move(h), std::move(c)};
}

namespace detail {

template <class S>
struct LstmStepCache {
  Vec<S> x, hPrev, cPrev, i, f, o, g, c, tanhC;
};

template <class S>
struct ForwardCache {
  std::vector<Vec<S>> ffOut;                 // tanh activations per frame
  std::vector<LstmStepCache<S>> l1, l2;
  Mat<S> posteriors;                         // T x classes
};

template <class S>
LstmStepCache<S> lstm_step_cached(const LstmLayer<S>& layer, Vec<S> x,
                                  Vec<S> hPrev, Vec<S> cPrev) {
  LstmStepCache<S> s;
  s.i = (layer.Wi * x + layer.Ui * hPrev + layer.bi)
            .unaryExpr([](S v) { return sigmoid(v); });
  s.f = (layer.Wf * x + layer.Uf * hPrev + layer.bf)
            .unaryExpr([](S v) { return sigmoid(v); });
  s.o = (layer.Wo * x + layer.Uo * hPrev + layer.bo)
            .unaryExpr([](S v) { return sigmoid(v); });
  s.g = (layer.Wc * x + layer.Uc * hPrev + layer.bc).array().tanh();
  s.c = s.f.cwiseProduct(cPrev) + s.i.cwiseProduct(s.g);
  s.tanhC = s.c.array().tanh();
  s.x = std::move(x);
  s.hPrev = std::move(hPrev);
  s.cPrev = std::move(cPrev);
  return s;
}

template <class S>
ForwardCache<S> forward_cached(const LstmNetwork<S>& net, const Mat<S>& frames) {
  if (frames.rows() < 1)
    throw std::invalid_argument("forward: empty sequence");
  if (frames.cols() != net.shape.inputDim)
    throw std::invalid_argument("forward: frame dimension mismatch");
  const long T = frames.rows();
  const int u = net.shape.lstmUnits;
  ForwardCache<S> cache;
  cache.ffOut.reserve(T);
  cache.l1.reserve(T);
  cache.l2.reserve(T);
  cache.posteriors.resize(T, net.shape.classCount);
  Vec<S> h1 = Vec<S>::Zero(u), c1 = Vec<S>::Zero(u);
  Vec<S> h2 = Vec<S>::Zero(u), c2 = Vec<S>::Zero(u);
  for (long t = 0; t < T; ++t) {
    const Vec<S> a =
        (net.ff.W * frames.row(t).transpose() + net.ff.b).array().tanh();
    auto s1 = lstm_step_cached(net.lstm1, a, std::move(h1), std::move(c1));
    h1 = s1.o.cwiseProduct(s1.tanhC);
    c1 = s1.c;
    auto s2 = lstm_step_cached(net.lstm2, h1, std::move(h2), std::move(c2));
    h2 = s2.o.cwiseProduct(s2.tanhC);
    c2 = s2.c;
    Vec<S> logits = net.softmaxW * h2 + net.softmaxB;
    const S zmax = logits.maxCoeff();
    Vec<S> e = (logits.array() - zmax).exp();
    cache.posteriors.row(t) = (e / e.sum()).transpose();
    cache.ffOut.push_back(std::move(a));
    cache.l1.push_back(std::move(s1));
    cache.l2.push_back(std::move(s2));
  }
  return cache;
}

// Backward through one LSTM step. dh/dc are gradients flowing into h_t/c_t;
// returns the gradient w.r.t. the step input and updates dhPrev/dcPrev.
template <class S>
Vec<S> lstm_step_backward(const LstmLayer<S>& layer, LstmLayer<S>& grad,
                          const LstmStepCache<S>& s, const Vec<S>& dh,
                          Vec<S>& dc, Vec<S>& dhPrev, Vec<S>& dcPrev) {
  const Vec<S> dO = dh.cwiseProduct(s.tanhC);
  dc += dh.cwiseProduct(s.o)
            .cwiseProduct((Vec<S>::Ones(s.c.size()) - s.tanhC.cwiseProduct(s.tanhC)));
  const Vec<S> dI = dc.cwiseProduct(s.g);
  const Vec<S> dG = dc.cwiseProduct(s.i);
  const Vec<S> dF = dc.cwiseProduct(s.cPrev);
  dcPrev = dc.cwiseProduct(s.f);

  const Vec<S> one = Vec<S>::Ones(s.c.size());
  const Vec<S> ai = dI.cwiseProduct(s.i).cwiseProduct(one - s.i);
  const Vec<S> af = dF.cwiseProduct(s.f).cwiseProduct(one - s.f);
  const Vec<S> ao = dO.cwiseProduct(s.o).cwiseProduct(one - s.o);
  const Vec<S> ag = dG.cwiseProduct(one - s.g.cwiseProduct(s.g));

  grad.Wi.noalias() += ai * s.x.transpose();
  grad.Wf.noalias() += af * s.x.transpose();
  grad.Wo.noalias() += ao * s.x.transpose();
  grad.Wc.noalias() += ag * s.x.transpose();
  grad.Ui.noalias() += ai * s.hPrev.transpose();
  grad.Uf.noalias() += af * s.hPrev.transpose();
  grad.Uo.noalias() += ao * s.hPrev.transpose();
  grad.Uc.noalias() += ag * s.hPrev.transpose();
  grad.bi += ai;
  grad.bf += af;
  grad.bo += ao;
  grad.bc += ag;

  dhPrev = layer.Ui.transpose() * ai + layer.Uf.transpose() * af +
           layer.Uo.transpose() * ao + layer.Uc.transpose() * ag;
  return layer.Wi.transpose() * ai + layer.Wf.transpose() * af +
         layer.Wo.transpose() * ao + layer.Wc.transpose() * ag;
}

}  // namespace detail

// Per-frame class posteriors; hidden/cell states start at zero and are carried
// across the sequence, never between samples.
template <class S>
Mat<S> forward(const LstmNetwork<S>& net, const Mat<S>& frames) {
  return detail::forward_cached(net, frames).posteriors;
}

// Mean (or final-frame) cross-entropy against the word label, gradients by
// full backpropagation through time over the unrolled sequence.
template <class S>
std::pair<S, LstmNetwork<S>> loss_and_gradients(
    const LstmNetwork<S>& net, const Mat<S>& frames, int label,
    LossPlacement placement = LossPlacement::PerFrame) {
  if (label < 0 || label >= net.shape.classCount)
    throw std::invalid_argument("loss_and_gradients: label out of range");
  const auto cache = detail::forward_cached(net, frames);
  const long T = frames.rows();
  const int u = net.shape.lstmUnits;

  LstmNetwork<S> grad;
  allocate_network(grad, net.shape);

  S loss = S(0);
  // dz rows: softmax pre-activation gradients per frame
  Mat<S> dz = Mat<S>::Zero(T, net.shape.classCount);
  for (long t = 0; t < T; ++t) {
    const S weight = placement == LossPlacement::PerFrame
                         ? S(1) / static_cast<S>(T)
                         : (t == T - 1 ? S(1) : S(0));
    if (weight == S(0)) continue;
    const S p = cache.posteriors(t, label);
    loss -= weight * std::log(std::max(p, std::numeric_limits<S>::min()));
    dz.row(t) = weight * cache.posteriors.row(t);
    dz(t, label) -= weight;
  }

  Vec<S> dh1Next = Vec<S>::Zero(u), dc1Next = Vec<S>::Zero(u);
  Vec<S> dh2Next = Vec<S>::Zero(u), dc2Next = Vec<S>::Zero(u);
  for (long t = T - 1; t >= 0; --t) {
    const Vec<S> dzt = dz.row(t).transpose();
    const Vec<S> h2 = cache.l2[t].o.cwiseProduct(cache.l2[t].tanhC);
    grad.softmaxW.noalias() += dzt * h2.transpose();
    grad.softmaxB += dzt;

    const Vec<S> dh2 = net.softmaxW.transpose() * dzt + dh2Next;
    Vec<S> dc2 = dc2Next;
    Vec<S> dh2Prev(u), dc2Prev(u);
    const Vec<S> dh1FromL2 = detail::lstm_step_backward(
        net.lstm2, grad.lstm2, cache.l2[t], dh2, dc2, dh2Prev, dc2Prev);
    dh2Next = dh2Prev;
    dc2Next = dc2Prev;

    const Vec<S> dh1 = dh1FromL2 + dh1Next;
    Vec<S> dc1 = dc1Next;
    Vec<S> dh1Prev(u), dc1Prev(u);
    const Vec<S> dffOut = detail::lstm_step_backward(
        net.lstm1, grad.lstm1, cache.l1[t], dh1, dc1, dh1Prev, dc1Prev);
    dh1Next = dh1Prev;
    dc1Next = dc1Prev;

    const Vec<S>& a = cache.ffOut[t];
    const Vec<S> dpre =
        dffOut.cwiseProduct(Vec<S>::Ones(a.size()) - a.cwiseProduct(a));
    grad.ff.W.noalias() += dpre * frames.row(t);
    grad.ff.b += dpre;
  }
  return {loss, std::move(grad)};
}

// Averaged per-frame posterior, argmax with lowest-index tie-break.
template <class S>
std::pair<int, Vec<S>> predict_word(const LstmNetwork<S>& net, const Mat<S>& frames) {
  const Mat<S> posteriors = forward(net, frames);
  Vec<S> aggregate = posteriors.colwise().mean().transpose();
  int best = 0;
  for (int c = 1; c < aggregate.size(); ++c)
    if (aggregate(c) > aggregate(best)) best = c;
  return {best, std::move(aggregate)};
}

template <class S>
double word_accuracy(const LstmNetwork<S>& net,
                     const std::vector<LabeledSequence<S>>& samples) {
  if (samples.empty()) return 0.0;
  long correct = 0;
  for (const auto& s : samples)
    if (predict_word(net, s.frames).first == s.label) ++correct;
  return static_cast<double>(correct) / static_cast<double>(samples.size());
}

// Plain SGD (batch size 1, no momentum), seeded shuffle each epoch, early
// stopping on validation word accuracy with the configured patience. Returns
// the best-accuracy snapshot and the per-epoch history.
template <class S>
std::pair<LstmNetwork<S>, std::vector<EpochStats>> train(
    const LstmNetwork<S>& initial, const std::vector<LabeledSequence<S>>& trainSet,
    const std::vector<LabeledSequence<S>>& valSet, const TrainConfig& cfg) {
  if (trainSet.empty() || valSet.empty())
    throw std::invalid_argument("train: empty split");
  LstmNetwork<S> net = initial;
  LstmNetwork<S> best = net;
  EarlyStopper stopper(cfg.patience);
  std::vector<EpochStats> history;
  Rng rng(cfg.seed ^ 0xa5a5a5a55a5a5a5aULL);  // decorrelated from init stream
  std::vector<std::size_t> order(trainSet.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  const S lr = static_cast<S>(cfg.learningRate);
  for (int epoch = 1; epoch <= cfg.maxEpochs; ++epoch) {
    rng.shuffle(order);
    double epochLoss = 0.0;
    for (std::size_t k = 0; k < order.size(); ++k) {
      const auto& sample = trainSet[order[k]];
      auto [loss, grad] =
          loss_and_gradients(net, sample.frames, sample.label, cfg.lossPlacement);
      if (!std::isfinite(static_cast<double>(loss)))
        throw TrainingDivergedError(epoch, static_cast<long>(k));
      epochLoss += static_cast<double>(loss);
      if (cfg.gradientClip > 0.0) {
        double sq = 0.0;
        visit_params(grad, [&](const char*, auto& g) {
          sq += static_cast<double>(g.squaredNorm());
        });
        const double norm = std::sqrt(sq);
        if (norm > cfg.gradientClip) {
          const S scale = static_cast<S>(cfg.gradientClip / norm);
          visit_params(grad, [&](const char*, auto& g) { g *= scale; });
        }
      }
      zip_params(net, grad, [lr](auto& p, auto& g) { p -= lr * g; });
    }
    const double valAccuracy = word_accuracy(net, valSet);
    history.push_back({epoch, epochLoss / static_cast<double>(trainSet.size()),
                       valAccuracy});
    if (stopper.update(valAccuracy)) best = net;
    if (stopper.should_stop()) break;
  }
  return {std::move(best), std::move(history)};
}

}  // namespace lipnet
