#pragma once

#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace lipnet {

// rows = reference labels, columns = hypotheses
struct ConfusionMatrix {
  Eigen::MatrixXi counts;

  explicit ConfusionMatrix(int classCount = 51)
      : counts(Eigen::MatrixXi::Zero(classCount, classCount)) {}
  long total() const { return counts.sum(); }
  long correct() const { return counts.diagonal().sum(); }
};

struct EvalReport {
  double overallAccuracy = 0.0;
  double letterAccuracy = 0.0;
  double nonLetterAccuracy = 0.0;
  long letterCount = 0;
  long nonLetterCount = 0;
  ConfusionMatrix confusion;
  std::map<int, double> perSpeakerAccuracies;
};

struct TTestResult {
  double t = 0.0;
  double pValue = 1.0;
  bool significant = false;
  bool degenerateVariance = false;
};

// Scores (predicted, reference) label pairs against the 51-word vocabulary.
// The optional speaker list (parallel to predictions) feeds the per-speaker
// accuracy map.
EvalReport score(const std::vector<std::pair<int, int>>& predictions,
                 const std::vector<int>& speakers = {});

// Paired one-tailed t-test on per-speaker accuracies; tests whether A is
// better than B. df = n - 1, p from the Student-t CDF via the regularized
// incomplete beta function.
TTestResult paired_t_test_one_tailed(const std::vector<double>& accA,
                                     const std::vector<double>& accB,
                                     double alpha = 0.05);

// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double incomplete_beta(double a, double b, double x);

// One-tailed upper p-value of Student's t with df degrees of freedom.
double t_upper_tail(double t, double df);

// 51x51 greyscale PGM (P5, maxval 255), intensity = row-normalized count.
void render_confusion(const ConfusionMatrix& matrix, const std::string& path);

void write_report_csv(const EvalReport& report, const std::string& path);
void write_confusion_csv(const ConfusionMatrix& matrix, const std::string& path);

}  // namespace lipnet
