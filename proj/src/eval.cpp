#include "lipnet/eval.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <stdexcept>

#include "lipnet/corpus.hpp"
#include "lipnet/image.hpp"

namespace lipnet {
namespace {

// Continued fraction for the incomplete beta function (modified Lentz).
double beta_cf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-14;
  constexpr double kTiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double front = std::exp(std::lgamma(a + b) - std::lgamma(a) -
                                std::lgamma(b) + a * std::log(x) +
                                b * std::log1p(-x));
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
  return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double t_upper_tail(double t, double df) {
  const double half = 0.5 * incomplete_beta(df / 2.0, 0.5, df / (df + t * t));
  return t >= 0.0 ? half : 1.0 - half;
}

EvalReport score(const std::vector<std::pair<int, int>>& predictions,
                 const std::vector<int>& speakers) {
  if (predictions.empty())
    throw std::invalid_argument("score: no predictions");
  if (!speakers.empty() && speakers.size() != predictions.size())
    throw std::invalid_argument("score: speaker list length mismatch");
  const Vocabulary& vocab = vocabulary();

  EvalReport report;
  report.confusion = ConfusionMatrix(vocab.size());
  long correct = 0, letterCorrect = 0, nonLetterCorrect = 0;
  std::map<int, std::pair<long, long>> perSpeaker;  // correct, total
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const auto [hyp, ref] = predictions[i];
    if (hyp < 0 || hyp >= vocab.size() || ref < 0 || ref >= vocab.size())
      throw std::invalid_argument("score: label out of range");
    report.confusion.counts(ref, hyp) += 1;
    const bool hit = hyp == ref;
    if (hit) ++correct;
    if (vocab.category(ref) == WordCategory::Letter) {
      ++report.letterCount;
      if (hit) ++letterCorrect;
    } else {
      ++report.nonLetterCount;
      if (hit) ++nonLetterCorrect;
    }
    if (!speakers.empty()) {
      auto& [sc, st] = perSpeaker[speakers[i]];
      if (hit) ++sc;
      ++st;
    }
  }
  const auto total = static_cast<double>(predictions.size());
  report.overallAccuracy = correct / total;
  report.letterAccuracy =
      report.letterCount ? static_cast<double>(letterCorrect) / report.letterCount : 0.0;
  report.nonLetterAccuracy =
      report.nonLetterCount
          ? static_cast<double>(nonLetterCorrect) / report.nonLetterCount
          : 0.0;
  for (const auto& [speaker, counts] : perSpeaker)
    report.perSpeakerAccuracies[speaker] =
        static_cast<double>(counts.first) / counts.second;
  return report;
}

TTestResult paired_t_test_one_tailed(const std::vector<double>& accA,
                                     const std::vector<double>& accB,
                                     double alpha) {
  const std::size_t n = accA.size();
  if (n < 2 || accB.size() != n)
    throw std::invalid_argument("paired_t_test: need two equal lists, n >= 2");
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += accA[i] - accB[i];
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = accA[i] - accB[i] - mean;
    ss += d * d;
  }
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));

  TTestResult result;
  if (sd == 0.0) {
    if (mean == 0.0) {
      result.t = 0.0;
      result.pValue = 1.0;
      return result;
    }
    result.degenerateVariance = true;
    result.t = mean > 0.0 ? std::numeric_limits<double>::infinity()
                          : -std::numeric_limits<double>::infinity();
    result.pValue = mean > 0.0 ? 0.0 : 1.0;
    result.significant = mean > 0.0;
    return result;
  }
  result.t = mean / (sd / std::sqrt(static_cast<double>(n)));
  result.pValue = t_upper_tail(result.t, static_cast<double>(n - 1));
  result.significant = result.pValue < alpha;
  return result;
}

void render_confusion(const ConfusionMatrix& matrix, const std::string& path) {
  const long rows = matrix.counts.rows();
  const long cols = matrix.counts.cols();
  Image img(static_cast<int>(cols), static_cast<int>(rows), 1);
  for (long r = 0; r < rows; ++r) {
    const long rowSum = matrix.counts.row(r).sum();
    for (long c = 0; c < cols; ++c) {
      img.at(static_cast<int>(r), static_cast<int>(c)) =
          rowSum > 0 ? static_cast<float>(matrix.counts(r, c)) / rowSum : 0.0f;
    }
  }
  save_pgm(path, img);
}

void write_confusion_csv(const ConfusionMatrix& matrix, const std::string& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  const Vocabulary& vocab = vocabulary();
  const long cols = matrix.counts.cols();
  for (long c = 0; c < cols; ++c)
    os << (c ? "," : "") << (c < vocab.size() ? vocab.word(static_cast<int>(c))
                                              : std::to_string(c));
  os << '\n';
  for (long r = 0; r < matrix.counts.rows(); ++r) {
    for (long c = 0; c < cols; ++c)
      os << (c ? "," : "") << matrix.counts(r, c);
    os << '\n';
  }
  if (!os) throw std::runtime_error("write failed: " + path);
}

void write_report_csv(const EvalReport& report, const std::string& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os << std::setprecision(6);
  os << "metric,value\n";
  os << "overallAccuracy," << report.overallAccuracy << '\n';
  os << "letterAccuracy," << report.letterAccuracy << '\n';
  os << "nonLetterAccuracy," << report.nonLetterAccuracy << '\n';
  os << "letterCount," << report.letterCount << '\n';
  os << "nonLetterCount," << report.nonLetterCount << '\n';
  for (const auto& [speaker, acc] : report.perSpeakerAccuracies)
    os << "speakerAccuracy." << speaker << ',' << acc << '\n';
  if (!os) throw std::runtime_error("write failed: " + path);
}

}  // namespace lipnet
