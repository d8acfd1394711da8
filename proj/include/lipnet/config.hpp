#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace lipnet {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Flat key=value experiment configuration. Unknown keys are rejected and all
// values are validated before any work starts.
struct RunConfig {
  std::uint64_t seed = 1;
  int pcaK = 100;             // pca.k
  int hogCell = 8;            // hog.cell
  int seqLen = 6;             // seq.len
  int netUnits = 128;         // net.units
  int netFf = 128;            // net.ff
  double trainLr = 0.02;      // train.lr
  int trainPatience = 10;     // train.patience
  int trainMaxEpochs = 200;   // train.maxEpochs
  double trainClip = 0.0;     // train.clip (0 = off)
  std::string lossPlacement = "per-frame";  // train.loss: per-frame | final-frame
  double svmC = 1.0;          // svm.c
  int svmEpochs = 50;         // svm.epochs
  long alignUnitsPerFrame = 1000;  // align.unitsPerFrame
  double gaussSigma = 500.0;  // gauss.sigma
  std::string speakersDev = "1-9";     // speakers.dev
  std::string speakersEval = "10-19";  // speakers.eval

  void set(const std::string& key, const std::string& value);
  void validate() const;
};

// Parses `key=value` lines ('#' starts a comment) and applies the overrides
// afterwards, then validates.
RunConfig parse_config(const std::string& text,
                       const std::vector<std::pair<std::string, std::string>>&
                           overrides = {});
RunConfig load_config(const std::string& path,
                      const std::vector<std::pair<std::string, std::string>>&
                          overrides = {});

// "1-9" / "1,3,7-9" -> expanded integer list
std::vector<int> parse_speaker_list(const std::string& spec);

}  // namespace lipnet
