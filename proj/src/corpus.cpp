#include "lipnet/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "lipnet/rng.hpp"

namespace lipnet {

Vocabulary::Vocabulary() {
  auto add = [this](std::initializer_list<const char*> ws, WordCategory cat) {
    for (const char* w : ws) {
      words_.emplace_back(w);
      categories_.push_back(cat);
    }
  };
  add({"bin", "lay", "place", "set"}, WordCategory::Command);
  add({"blue", "green", "red", "white"}, WordCategory::Color);
  add({"at", "by", "in", "with"}, WordCategory::Preposition);
  // 'w' is excluded from the corpus
  for (char c = 'a'; c <= 'z'; ++c) {
    if (c == 'w') continue;
    words_.emplace_back(1, c);
    categories_.push_back(WordCategory::Letter);
  }
  add({"zero", "one", "two", "three", "four", "five", "six", "seven", "eight",
       "nine"},
      WordCategory::Digit);
  add({"again", "now", "please", "soon"}, WordCategory::Adverb);
}

int Vocabulary::index_of(const std::string& token) const {
  for (int i = 0; i < static_cast<int>(words_.size()); ++i)
    if (words_[i] == token) return i;
  return -1;
}

const Vocabulary& vocabulary() {
  static const Vocabulary vocab;
  return vocab;
}

std::vector<WordSegment> parse_alignment(const std::string& text, long unitsPerFrame) {
  if (unitsPerFrame <= 0)
    throw std::invalid_argument("parse_alignment: unitsPerFrame must be > 0");
  std::vector<WordSegment> segments;
  std::istringstream stream(text);
  std::string line;
  int lineNo = 0;
  while (std::getline(stream, line)) {
    ++lineNo;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    std::istringstream ls(line);
    long start = 0, end = 0;
    std::string token;
    if (!(ls >> start >> end >> token))
      throw ParseError("alignment line " + std::to_string(lineNo) +
                       ": expected '<start> <end> <token>'");
    if (end < start)
      throw ParseError("alignment line " + std::to_string(lineNo) +
                       ": end before start");
    const int label = vocabulary().index_of(token);
    if (label < 0) continue;  // silence and other non-vocabulary markers
    WordSegment seg;
    seg.startFrame = static_cast<int>(
        std::clamp(start / unitsPerFrame, 0L, static_cast<long>(kFramesPerSentence - 1)));
    seg.endFrame = static_cast<int>(
        std::clamp(end / unitsPerFrame, 0L, static_cast<long>(kFramesPerSentence - 1)));
    seg.label = label;
    seg.word = token;
    segments.push_back(std::move(seg));
  }
  return segments;
}

DatasetSplit make_splits(std::vector<WordSample> samples, std::uint64_t seed,
                         int perWordHoldout) {
  std::map<int, std::vector<std::size_t>> byLabel;
  for (std::size_t i = 0; i < samples.size(); ++i)
    byLabel[samples[i].label].push_back(i);

  Rng rng(seed);
  DatasetSplit split;
  for (auto& [label, indices] : byLabel) {
    if (static_cast<int>(indices.size()) < 2 * perWordHoldout + 1) {
      const std::string name = label < vocabulary().size()
                                   ? vocabulary().word(label)
                                   : std::to_string(label);
      throw SplitError("make_splits: too few samples of word '" + name + "' (" +
                       std::to_string(indices.size()) + " < " +
                       std::to_string(2 * perWordHoldout + 1) + ")");
    }
    rng.shuffle(indices);
    for (std::size_t k = 0; k < indices.size(); ++k) {
      auto& dst = k < static_cast<std::size_t>(perWordHoldout) ? split.validation
                  : k < static_cast<std::size_t>(2 * perWordHoldout) ? split.test
                                                                     : split.train;
      dst.push_back(samples[indices[k]]);
    }
  }
  return split;
}

std::vector<WordSample> synth_dataset(int classCount, int samplesPerClass,
                                      std::uint64_t seed) {
  if (classCount < 2)
    throw std::invalid_argument("synth_dataset: need at least 2 classes");
  Rng rng(seed);
  std::vector<WordSample> samples;
  samples.reserve(static_cast<std::size_t>(classCount) * samplesPerClass);
  constexpr double kTwoPi = 6.283185307179586;
  int sentence = 0;
  for (int c = 0; c < classCount; ++c) {
    const double baseAngle = kTwoPi * c / classCount;
    const double pulseRate = 0.35 + 0.11 * c;  // class-specific deformation rhythm
    for (int s = 0; s < samplesPerClass; ++s) {
      WordSample sample;
      sample.label = c;
      sample.speakerId = 0;
      sample.sentenceId = sentence++;
      const int frames = 3 + static_cast<int>(rng.next_below(10));  // 3..12
      const double angle = baseAngle + rng.uniform(-0.1, 0.1);
      const double speed = rng.uniform(1.4, 1.8);
      const double phase = rng.uniform(0.0, kTwoPi);
      double px = rng.uniform(14.0, 26.0);
      double py = rng.uniform(14.0, 26.0);
      double vx = speed * std::cos(angle);
      double vy = speed * std::sin(angle);
      for (int t = 0; t < frames; ++t) {
        MouthPatch patch;
        patch.sourceFrame = t;
        const double major = 4.0 + 1.5 * std::sin(kTwoPi * pulseRate * t + phase);
        const double minor = 2.5;
        const double ca = std::cos(angle), sa = std::sin(angle);
        for (int r = 0; r < kPatchSide; ++r) {
          for (int col = 0; col < kPatchSide; ++col) {
            const double dx = col - px;
            const double dy = r - py;
            const double u = dx * ca + dy * sa;
            const double v = -dx * sa + dy * ca;
            const double blob = std::exp(-(u * u / (2.0 * major * major) +
                                           v * v / (2.0 * minor * minor)));
            const double value = blob + 0.05 * rng.next_gaussian();
            patch.pixels[static_cast<std::size_t>(r) * kPatchSide + col] =
                static_cast<float>(std::clamp(value, 0.0, 1.0));
          }
        }
        sample.frames.push_back(std::move(patch));
        px += vx;
        py += vy;
        // reflect off the walls so the blob stays visible
        if (px < 4.0) { px = 8.0 - px; vx = -vx; }
        if (px > 36.0) { px = 72.0 - px; vx = -vx; }
        if (py < 4.0) { py = 8.0 - py; vy = -vy; }
        if (py > 36.0) { py = 72.0 - py; vy = -vy; }
      }
      samples.push_back(std::move(sample));
    }
  }
  return samples;
}

void save_manifest(const std::string& path, const std::vector<ManifestEntry>& entries) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  os << "speakerId,sentenceId,wordIndex,label,startFrame,endFrame,patchArchivePath\n";
  for (const auto& e : entries)
    os << e.speakerId << ',' << e.sentenceId << ',' << e.wordIndex << ','
       << e.label << ',' << e.startFrame << ',' << e.endFrame << ','
       << e.patchArchivePath << '\n';
  if (!os) throw std::runtime_error("write failed: " + path);
}

std::vector<ManifestEntry> load_manifest(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open manifest: " + path);
  std::vector<ManifestEntry> entries;
  std::string line;
  if (!std::getline(is, line))
    throw ParseError("manifest is empty: " + path);
  int lineNo = 1;
  while (std::getline(is, line)) {
    ++lineNo;
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    ManifestEntry e;
    if (!(ls >> e.speakerId >> e.sentenceId >> e.wordIndex >> e.label >>
          e.startFrame >> e.endFrame >> e.patchArchivePath))
      throw ParseError("manifest line " + std::to_string(lineNo) + ": malformed");
    entries.push_back(std::move(e));
  }
  return entries;
}

std::vector<std::pair<int, FaceBox>> parse_face_boxes(const std::string& text) {
  std::vector<std::pair<int, FaceBox>> boxes;
  std::istringstream stream(text);
  std::string line;
  int lineNo = 0;
  while (std::getline(stream, line)) {
    ++lineNo;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    std::istringstream ls(line);
    int frame = 0;
    FaceBox box;
    if (!(ls >> frame >> box.x >> box.y >> box.w >> box.h))
      throw ParseError("face-box line " + std::to_string(lineNo) +
                       ": expected '<frame> <x> <y> <w> <h>'");
    if (box.w <= 0 || box.h <= 0)
      throw ParseError("face-box line " + std::to_string(lineNo) +
                       ": non-positive box size");
    boxes.emplace_back(frame, box);
  }
  return boxes;
}

}  // namespace lipnet
