#pragma once

#include <string>
#include <vector>

#include "lipnet/config.hpp"
#include "lipnet/corpus.hpp"
#include "lipnet/features.hpp"
#include "lipnet/net.hpp"
#include "lipnet/svm.hpp"

namespace lipnet {

// Patch-archive persistence: entries s<i>/frames (T x 40 x 40) and
// s<i>/meta (label, speakerId, sentenceId).
void save_sample_archive(const std::string& path, const std::vector<WordSample>& samples);
std::vector<WordSample> load_sample_archive(const std::string& path);

Eigen::VectorXf patch_to_vector(const MouthPatch& patch);

// T x 1600 matrix of standardized frames.
Mat<float> sample_to_matrix(const WordSample& sample, const StandardizationStats& stats);

std::vector<LabeledSequence<float>> to_sequences(const std::vector<WordSample>& samples,
                                                 const StandardizationStats& stats);

enum class SvmFeatureKind { Eigenlips, Hog };

// Feature extraction + sequence feature vector + one-vs-rest linear SVM,
// with standardization statistics fitted on the training partition only.
struct SvmPipelineModel {
  SvmFeatureKind kind = SvmFeatureKind::Hog;
  PcaModel pca;  // Eigenlips only
  HogConfig hog;
  int seqLen = 6;
  StandardizationStats stats;
  LinearSvmModel svm;
};

SvmPipelineModel train_svm_pipeline(const std::vector<WordSample>& train,
                                    SvmFeatureKind kind, const RunConfig& cfg);
int predict_svm_pipeline(const SvmPipelineModel& model, const WordSample& sample);
double svm_pipeline_accuracy(const SvmPipelineModel& model,
                             const std::vector<WordSample>& samples);

struct LstmPipelineModel {
  LstmNetwork<float> net;
  StandardizationStats stats;
  std::vector<EpochStats> history;
};

LstmPipelineModel train_lstm_pipeline(const std::vector<WordSample>& train,
                                      const std::vector<WordSample>& val,
                                      int classCount, const RunConfig& cfg);
int predict_lstm_pipeline(const LstmPipelineModel& model, const WordSample& sample);
double lstm_pipeline_accuracy(const LstmPipelineModel& model,
                              const std::vector<WordSample>& samples);

void write_history_csv(const std::string& path, const std::vector<EpochStats>& history);

// Checkpoint files carry a meta/kind tensor: 0 = lstm, 1 = svm-eigen,
// 2 = svm-hog.
int checkpoint_kind(const std::string& path);
void save_svm_pipeline(const std::string& path, const SvmPipelineModel& model);
SvmPipelineModel load_svm_pipeline(const std::string& path);
void save_lstm_pipeline(const std::string& path, LstmPipelineModel& model,
                        std::uint64_t seed);
LstmPipelineModel load_lstm_pipeline(const std::string& path);

}  // namespace lipnet
