#include "lipnet/pipeline.hpp"

#include <fstream>
#include <stdexcept>

#include "lipnet/checkpoint.hpp"

namespace lipnet {

void save_sample_archive(const std::string& path, const std::vector<WordSample>& samples) {
  TensorSet set;
  set.reserve(samples.size() * 2);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    const std::string prefix = "s" + std::to_string(i);
    Tensor frames({static_cast<std::uint32_t>(s.frames.size()),
                   static_cast<std::uint32_t>(kPatchSide),
                   static_cast<std::uint32_t>(kPatchSide)});
    std::size_t o = 0;
    for (const auto& p : s.frames)
      for (float v : p.pixels) frames.data[o++] = v;
    set.push_back({prefix + "/frames", std::move(frames)});
    Tensor meta({3});
    meta.data = {static_cast<float>(s.label), static_cast<float>(s.speakerId),
                 static_cast<float>(s.sentenceId)};
    set.push_back({prefix + "/meta", std::move(meta)});
  }
  save_tensors(path, set);
}

std::vector<WordSample> load_sample_archive(const std::string& path) {
  const TensorSet set = load_tensors(path);
  std::vector<WordSample> samples;
  for (std::size_t i = 0;; ++i) {
    const std::string prefix = "s" + std::to_string(i);
    const Tensor* frames = nullptr;
    for (const auto& nt : set)
      if (nt.name == prefix + "/frames") frames = &nt.tensor;
    if (!frames) break;
    if (frames->dims.size() != 3 || frames->dims[1] != kPatchSide ||
        frames->dims[2] != kPatchSide)
      throw TensorFormatError("bad frame tensor in " + path);
    const Tensor& meta = find_tensor(set, prefix + "/meta");
    WordSample s;
    s.label = static_cast<int>(meta.data.at(0));
    s.speakerId = static_cast<int>(meta.data.at(1));
    s.sentenceId = static_cast<int>(meta.data.at(2));
    const std::uint32_t t = frames->dims[0];
    s.frames.resize(t);
    std::size_t o = 0;
    for (std::uint32_t f = 0; f < t; ++f) {
      s.frames[f].sourceFrame = static_cast<int>(f);
      for (float& v : s.frames[f].pixels) v = frames->data[o++];
    }
    samples.push_back(std::move(s));
  }
  if (samples.empty())
    throw TensorFormatError("no samples found in archive: " + path);
  return samples;
}

Eigen::VectorXf patch_to_vector(const MouthPatch& patch) {
  Eigen::VectorXf v(kPatchPixels);
  for (int i = 0; i < kPatchPixels; ++i) v(i) = patch.pixels[i];
  return v;
}

Mat<float> sample_to_matrix(const WordSample& sample, const StandardizationStats& stats) {
  const float mean = static_cast<float>(stats.mean);
  const float inv = static_cast<float>(1.0 / stats.stdDev);
  Mat<float> m(static_cast<long>(sample.frames.size()), kPatchPixels);
  for (std::size_t f = 0; f < sample.frames.size(); ++f)
    for (int i = 0; i < kPatchPixels; ++i)
      m(static_cast<long>(f), i) = (sample.frames[f].pixels[i] - mean) * inv;
  return m;
}

std::vector<LabeledSequence<float>> to_sequences(const std::vector<WordSample>& samples,
                                                 const StandardizationStats& stats) {
  std::vector<LabeledSequence<float>> out;
  out.reserve(samples.size());
  for (const auto& s : samples)
    out.push_back({sample_to_matrix(s, stats), s.label});
  return out;
}

namespace {

StandardizationStats stats_of(const std::vector<WordSample>& samples) {
  std::vector<MouthPatch> all;
  for (const auto& s : samples)
    all.insert(all.end(), s.frames.begin(), s.frames.end());
  return compute_standardization(all);
}

Eigen::VectorXf svm_features(const SvmPipelineModel& model, const WordSample& sample) {
  std::vector<Eigen::VectorXf> perFrame;
  perFrame.reserve(sample.frames.size());
  const float mean = static_cast<float>(model.stats.mean);
  const float inv = static_cast<float>(1.0 / model.stats.stdDev);
  for (const auto& patch : sample.frames) {
    if (model.kind == SvmFeatureKind::Eigenlips) {
      Eigen::VectorXd frame(kPatchPixels);
      for (int i = 0; i < kPatchPixels; ++i)
        frame(i) = (patch.pixels[i] - mean) * inv;
      perFrame.push_back(project_eigenlips(model.pca, frame).cast<float>());
    } else {
      Eigen::MatrixXf m(kPatchSide, kPatchSide);
      for (int r = 0; r < kPatchSide; ++r)
        for (int c = 0; c < kPatchSide; ++c)
          m(r, c) = (patch.pixels[static_cast<std::size_t>(r) * kPatchSide + c] -
                     mean) * inv;
      perFrame.push_back(compute_hog(m, model.hog));
    }
  }
  return sequence_feature_vector(perFrame, model.seqLen);
}

}  // namespace

SvmPipelineModel train_svm_pipeline(const std::vector<WordSample>& train,
                                    SvmFeatureKind kind, const RunConfig& cfg) {
  if (train.empty())
    throw std::invalid_argument("train_svm_pipeline: empty training set");
  SvmPipelineModel model;
  model.kind = kind;
  model.seqLen = cfg.seqLen;
  model.hog.cellSize = cfg.hogCell;
  model.stats = stats_of(train);

  if (kind == SvmFeatureKind::Eigenlips) {
    const float mean = static_cast<float>(model.stats.mean);
    const float inv = static_cast<float>(1.0 / model.stats.stdDev);
    long rows = 0;
    for (const auto& s : train) rows += static_cast<long>(s.frames.size());
    Eigen::MatrixXd frames(rows, kPatchPixels);
    long r = 0;
    for (const auto& s : train)
      for (const auto& p : s.frames) {
        for (int i = 0; i < kPatchPixels; ++i)
          frames(r, i) = (p.pixels[i] - mean) * inv;
        ++r;
      }
    const int k = std::min<long>(cfg.pcaK, std::min<long>(rows, kPatchPixels));
    model.pca = fit_pca(frames, k);
  }

  Eigen::MatrixXf x;
  std::vector<int> y;
  y.reserve(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) {
    const Eigen::VectorXf f = svm_features(model, train[i]);
    if (x.size() == 0) x.resize(static_cast<long>(train.size()), f.size());
    x.row(static_cast<long>(i)) = f.transpose();
    y.push_back(train[i].label);
  }

  SvmTrainConfig svmCfg;
  svmCfg.c = static_cast<float>(cfg.svmC);
  svmCfg.epochs = cfg.svmEpochs;
  svmCfg.seed = cfg.seed;
  model.svm = train_linear_svm(x, y, svmCfg);
  return model;
}

int predict_svm_pipeline(const SvmPipelineModel& model, const WordSample& sample) {
  return predict_svm(model.svm, svm_features(model, sample)).first;
}

double svm_pipeline_accuracy(const SvmPipelineModel& model,
                             const std::vector<WordSample>& samples) {
  if (samples.empty()) return 0.0;
  long correct = 0;
  for (const auto& s : samples)
    if (predict_svm_pipeline(model, s) == s.label) ++correct;
  return static_cast<double>(correct) / static_cast<double>(samples.size());
}

LstmPipelineModel train_lstm_pipeline(const std::vector<WordSample>& train,
                                      const std::vector<WordSample>& val,
                                      int classCount, const RunConfig& cfg) {
  LstmPipelineModel model;
  model.stats = stats_of(train);

  NetShape shape;
  shape.inputDim = kPatchPixels;
  shape.ffUnits = cfg.netFf;
  shape.lstmUnits = cfg.netUnits;
  shape.classCount = classCount;

  TrainConfig tc;
  tc.learningRate = cfg.trainLr;
  tc.patience = cfg.trainPatience;
  tc.maxEpochs = cfg.trainMaxEpochs;
  tc.gradientClip = cfg.trainClip;
  tc.seed = cfg.seed;
  tc.lossPlacement = cfg.lossPlacement == "final-frame" ? LossPlacement::FinalFrame
                                                        : LossPlacement::PerFrame;

  const auto initial = init_network<float>(shape, tc);
  auto [best, history] = lipnet::train(initial, to_sequences(train, model.stats),
                                       to_sequences(val, model.stats), tc);
  model.net = std::move(best);
  model.history = std::move(history);
  return model;
}

int predict_lstm_pipeline(const LstmPipelineModel& model, const WordSample& sample) {
  return predict_word(model.net, sample_to_matrix(sample, model.stats)).first;
}

double lstm_pipeline_accuracy(const LstmPipelineModel& model,
                              const std::vector<WordSample>& samples) {
  if (samples.empty()) return 0.0;
  long correct = 0;
  for (const auto& s : samples)
    if (predict_lstm_pipeline(model, s) == s.label) ++correct;
  return static_cast<double>(correct) / static_cast<double>(samples.size());
}

namespace {

Tensor scalar_tensor(float v) {
  Tensor t({1});
  t.data[0] = v;
  return t;
}

Tensor stats_tensor(const StandardizationStats& stats) {
  Tensor t({2});
  t.data = {static_cast<float>(stats.mean), static_cast<float>(stats.stdDev)};
  return t;
}

StandardizationStats stats_from(const Tensor& t) {
  if (t.data.size() != 2) throw TensorFormatError("bad standardization record");
  return {t.data[0], t.data[1]};
}

}  // namespace

int checkpoint_kind(const std::string& path) {
  return static_cast<int>(find_tensor(load_tensors(path), "meta/kind").data.at(0));
}

void save_svm_pipeline(const std::string& path, const SvmPipelineModel& model) {
  TensorSet set = svm_to_tensors(model.svm);
  set.push_back({"meta/kind",
                 scalar_tensor(model.kind == SvmFeatureKind::Eigenlips ? 1.0f : 2.0f)});
  set.push_back({"meta/standardization", stats_tensor(model.stats)});
  set.push_back({"meta/seqlen", scalar_tensor(static_cast<float>(model.seqLen))});
  set.push_back({"meta/hogcell", scalar_tensor(static_cast<float>(model.hog.cellSize))});
  if (model.kind == SvmFeatureKind::Eigenlips)
    for (auto& nt : pca_to_tensors(model.pca))
      set.push_back({"pca/" + nt.name, std::move(nt.tensor)});
  save_tensors(path, set);
}

SvmPipelineModel load_svm_pipeline(const std::string& path) {
  const TensorSet set = load_tensors(path);
  SvmPipelineModel model;
  const int kind = static_cast<int>(find_tensor(set, "meta/kind").data.at(0));
  if (kind != 1 && kind != 2)
    throw TensorFormatError("checkpoint is not an SVM pipeline: " + path);
  model.kind = kind == 1 ? SvmFeatureKind::Eigenlips : SvmFeatureKind::Hog;
  model.stats = stats_from(find_tensor(set, "meta/standardization"));
  model.seqLen = static_cast<int>(find_tensor(set, "meta/seqlen").data.at(0));
  model.hog.cellSize = static_cast<int>(find_tensor(set, "meta/hogcell").data.at(0));
  model.svm = svm_from_tensors(set);
  if (model.kind == SvmFeatureKind::Eigenlips) {
    TensorSet pcaSet;
    for (const auto& nt : set)
      if (nt.name.rfind("pca/", 0) == 0)
        pcaSet.push_back({nt.name.substr(4), nt.tensor});
    model.pca = pca_from_tensors(pcaSet);
  }
  return model;
}

void save_lstm_pipeline(const std::string& path, LstmPipelineModel& model,
                        std::uint64_t seed) {
  CheckpointMeta meta;
  meta.seed = seed;
  if (!model.history.empty()) {
    for (const auto& e : model.history)
      if (e.valAccuracy > meta.valAccuracy) {
        meta.valAccuracy = e.valAccuracy;
        meta.epoch = e.epoch;
      }
  }
  TensorSet set = network_to_tensors(model.net, meta);
  set.push_back({"meta/kind", scalar_tensor(0.0f)});
  set.push_back({"meta/standardization", stats_tensor(model.stats)});
  save_tensors(path, set);
}

LstmPipelineModel load_lstm_pipeline(const std::string& path) {
  const TensorSet set = load_tensors(path);
  if (static_cast<int>(find_tensor(set, "meta/kind").data.at(0)) != 0)
    throw TensorFormatError("checkpoint is not an LSTM pipeline: " + path);
  LstmPipelineModel model;
  model.net = network_from_tensors(set);
  model.stats = stats_from(find_tensor(set, "meta/standardization"));
  return model;
}

void write_history_csv(const std::string& path, const std::vector<EpochStats>& history) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os << "epoch,trainLoss,valAccuracy\n";
  for (const auto& e : history)
    os << e.epoch << ',' << e.trainLoss << ',' << e.valAccuracy << '\n';
  if (!os) throw std::runtime_error("write failed: " + path);
}

}  // namespace lipnet
