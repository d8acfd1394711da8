#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lipnet/preprocess.hpp"

namespace lipnet {

inline constexpr int kVocabularySize = 51;
inline constexpr int kFramesPerSentence = 75;

enum class WordCategory { Command, Color, Preposition, Letter, Digit, Adverb };

// The 51-word GRID vocabulary: command(4) + color(4) + preposition(4) +
// letter(25, 'w' excluded) + digit(10) + adverb(4), in that order.
class Vocabulary {
 public:
  Vocabulary();
  int size() const { return kVocabularySize; }
  const std::string& word(int index) const { return words_.at(index); }
  WordCategory category(int index) const { return categories_.at(index); }
  // -1 when the token is not a vocabulary word (silence markers etc.)
  int index_of(const std::string& token) const;

 private:
  std::vector<std::string> words_;
  std::vector<WordCategory> categories_;
};

const Vocabulary& vocabulary();

struct WordSample {
  std::vector<MouthPatch> frames;  // 1..75
  int label = 0;
  int speakerId = 0;
  int sentenceId = 0;
};

struct DatasetSplit {
  std::vector<WordSample> train, validation, test;
};

struct WordSegment {
  int startFrame = 0;
  int endFrame = 0;  // inclusive
  int label = 0;
  std::string word;
};

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SplitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Parses GRID-style alignment text (`<start> <end> <token>` per line).
// Times are divided by unitsPerFrame and floored to frame indices, clamped to
// [0, 74]; out-of-vocabulary tokens are dropped.
std::vector<WordSegment> parse_alignment(const std::string& text, long unitsPerFrame);

// Seeded stratified split: per word class, first 5 shuffled samples go to
// validation, the next 5 to test, the rest to train.
DatasetSplit make_splits(std::vector<WordSample> samples, std::uint64_t seed,
                         int perWordHoldout = 5);

// Deterministic desk-scale stand-in for GRID: a bright blob whose motion
// direction and deformation rhythm encode the class, plus seeded pixel noise.
// Sequence lengths are 3..12 frames.
std::vector<WordSample> synth_dataset(int classCount, int samplesPerClass,
                                      std::uint64_t seed);

// Dataset manifest row (CSV: speakerId,sentenceId,wordIndex,label,startFrame,
// endFrame,patchArchivePath).
struct ManifestEntry {
  int speakerId = 0;
  int sentenceId = 0;
  int wordIndex = 0;  // position within the sentence
  int label = 0;
  int startFrame = 0;
  int endFrame = 0;
  std::string patchArchivePath;
};

void save_manifest(const std::string& path, const std::vector<ManifestEntry>& entries);
std::vector<ManifestEntry> load_manifest(const std::string& path);

// Face-box sidecar: one `<frameIndex> <x> <y> <w> <h>` line per frame.
std::vector<std::pair<int, FaceBox>> parse_face_boxes(const std::string& text);

}  // namespace lipnet
