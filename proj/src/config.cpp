#include "lipnet/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace lipnet {
namespace {

long to_long(const std::string& key, const std::string& value) {
  long out = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size())
    throw ConfigError("config key '" + key + "': not an integer: " + value);
  return out;
}

double to_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double out = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return out;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': not a number: " + value);
  }
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
  if (key == "seed") seed = static_cast<std::uint64_t>(to_long(key, value));
  else if (key == "pca.k") pcaK = static_cast<int>(to_long(key, value));
  else if (key == "hog.cell") hogCell = static_cast<int>(to_long(key, value));
  else if (key == "seq.len") seqLen = static_cast<int>(to_long(key, value));
  else if (key == "net.units") netUnits = static_cast<int>(to_long(key, value));
  else if (key == "net.ff") netFf = static_cast<int>(to_long(key, value));
  else if (key == "train.lr") trainLr = to_double(key, value);
  else if (key == "train.patience") trainPatience = static_cast<int>(to_long(key, value));
  else if (key == "train.maxEpochs") trainMaxEpochs = static_cast<int>(to_long(key, value));
  else if (key == "train.clip") trainClip = to_double(key, value);
  else if (key == "train.loss") lossPlacement = value;
  else if (key == "svm.c") svmC = to_double(key, value);
  else if (key == "svm.epochs") svmEpochs = static_cast<int>(to_long(key, value));
  else if (key == "align.unitsPerFrame") alignUnitsPerFrame = to_long(key, value);
  else if (key == "gauss.sigma") gaussSigma = to_double(key, value);
  else if (key == "speakers.dev") speakersDev = value;
  else if (key == "speakers.eval") speakersEval = value;
  else throw ConfigError("unknown config key: " + key);
}

void RunConfig::validate() const {
  if (pcaK < 1) throw ConfigError("pca.k must be >= 1");
  if (hogCell < 1) throw ConfigError("hog.cell must be >= 1");
  if (seqLen < 1) throw ConfigError("seq.len must be >= 1");
  if (netUnits < 1 || netFf < 1) throw ConfigError("network sizes must be >= 1");
  if (trainLr <= 0.0) throw ConfigError("train.lr must be > 0");
  if (trainPatience < 1) throw ConfigError("train.patience must be >= 1");
  if (trainMaxEpochs < 1) throw ConfigError("train.maxEpochs must be >= 1");
  if (trainClip < 0.0) throw ConfigError("train.clip must be >= 0");
  if (lossPlacement != "per-frame" && lossPlacement != "final-frame")
    throw ConfigError("train.loss must be 'per-frame' or 'final-frame'");
  if (svmC <= 0.0) throw ConfigError("svm.c must be > 0");
  if (svmEpochs < 1) throw ConfigError("svm.epochs must be >= 1");
  if (alignUnitsPerFrame < 1) throw ConfigError("align.unitsPerFrame must be >= 1");
  if (gaussSigma <= 0.0) throw ConfigError("gauss.sigma must be > 0");
  parse_speaker_list(speakersDev);
  parse_speaker_list(speakersEval);
}

RunConfig parse_config(
    const std::string& text,
    const std::vector<std::pair<std::string, std::string>>& overrides) {
  RunConfig cfg;
  std::istringstream stream(text);
  std::string line;
  int lineNo = 0;
  while (std::getline(stream, line)) {
    ++lineNo;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto last = line.find_last_not_of(" \t\r");
    line = line.substr(first, last - first + 1);
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineNo) +
                        ": expected key=value");
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
    const auto vfirst = value.find_first_not_of(" \t");
    value = vfirst == std::string::npos ? "" : value.substr(vfirst);
    cfg.set(key, value);
  }
  for (const auto& [key, value] : overrides) cfg.set(key, value);
  cfg.validate();
  return cfg;
}

RunConfig load_config(
    const std::string& path,
    const std::vector<std::pair<std::string, std::string>>& overrides) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file: " + path);
  std::stringstream buffer;
  buffer << is.rdbuf();
  return parse_config(buffer.str(), overrides);
}

std::vector<int> parse_speaker_list(const std::string& spec) {
  std::vector<int> out;
  std::istringstream stream(spec);
  std::string part;
  while (std::getline(stream, part, ',')) {
    if (part.empty()) throw ConfigError("empty entry in speaker list: " + spec);
    const auto dash = part.find('-');
    try {
      if (dash == std::string::npos) {
        out.push_back(std::stoi(part));
      } else {
        const int lo = std::stoi(part.substr(0, dash));
        const int hi = std::stoi(part.substr(dash + 1));
        if (hi < lo) throw ConfigError("descending range in speaker list: " + spec);
        for (int s = lo; s <= hi; ++s) out.push_back(s);
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception&) {
      throw ConfigError("malformed speaker list: " + spec);
    }
  }
  if (out.empty()) throw ConfigError("empty speaker list: " + spec);
  return out;
}

}  // namespace lipnet
