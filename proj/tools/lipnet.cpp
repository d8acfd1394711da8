// lipnet: command-line driver for the lipreading pipeline.
// Subcommands: preprocess, synth, train, eval, gradcheck, report.
// Exit codes: 0 success, 2 usage/config/input error, 3 numerical failure.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "lipnet/checkpoint.hpp"
#include "lipnet/config.hpp"
#include "lipnet/corpus.hpp"
#include "lipnet/eval.hpp"
#include "lipnet/gradcheck.hpp"
#include "lipnet/pipeline.hpp"
#include "lipnet/preprocess.hpp"

namespace fs = std::filesystem;
using namespace lipnet;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

// Remaining `--key value` arguments become config overrides.
std::vector<std::pair<std::string, std::string>> overrides_from(
    const std::vector<std::string>& extras) {
  std::vector<std::pair<std::string, std::string>> overrides;
  for (std::size_t i = 0; i < extras.size(); i += 2) {
    const std::string& key = extras[i];
    if (key.rfind("--", 0) != 0 || i + 1 >= extras.size())
      throw ConfigError("expected '--key value' override, got: " + key);
    overrides.emplace_back(key.substr(2), extras[i + 1]);
  }
  return overrides;
}

RunConfig make_config(const std::string& configPath,
                      const std::vector<std::string>& extras) {
  const auto overrides = overrides_from(extras);
  if (configPath.empty()) {
    RunConfig cfg;
    for (const auto& [k, v] : overrides) cfg.set(k, v);
    cfg.validate();
    return cfg;
  }
  return load_config(configPath, overrides);
}

std::string read_file(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open: " + path.string());
  std::stringstream buffer;
  buffer << is.rdbuf();
  return buffer.str();
}

std::vector<WordSample> load_samples_from_manifest(const std::string& manifestPath) {
  const auto entries = load_manifest(manifestPath);
  const fs::path base = fs::path(manifestPath).parent_path();
  std::map<std::string, std::vector<WordSample>> archives;
  std::vector<WordSample> samples;
  samples.reserve(entries.size());
  for (const auto& e : entries) {
    const auto at = e.patchArchivePath.find('@');
    if (at == std::string::npos || e.patchArchivePath.compare(at + 1, 1, "s") != 0)
      throw ParseError("manifest archive reference must be '<file>@s<index>': " +
                       e.patchArchivePath);
    const std::string file = e.patchArchivePath.substr(0, at);
    const int index = std::stoi(e.patchArchivePath.substr(at + 2));
    auto it = archives.find(file);
    if (it == archives.end())
      it = archives.emplace(file, load_sample_archive((base / file).string())).first;
    if (index < 0 || index >= static_cast<int>(it->second.size()))
      throw ParseError("manifest index out of range: " + e.patchArchivePath);
    WordSample s = it->second[static_cast<std::size_t>(index)];
    s.label = e.label;
    s.speakerId = e.speakerId;
    s.sentenceId = e.sentenceId;
    samples.push_back(std::move(s));
  }
  if (samples.empty()) throw ParseError("manifest lists no samples: " + manifestPath);
  return samples;
}

int trailing_number(const std::string& name, int fallback) {
  std::size_t end = name.size();
  while (end > 0 && std::isdigit(static_cast<unsigned char>(name[end - 1]))) --end;
  if (end == name.size()) return fallback;
  return std::stoi(name.substr(end));
}

int cmd_synth(int classes, int perClass, const std::string& outDir,
              const RunConfig& cfg) {
  fs::create_directories(outDir);
  const auto samples = synth_dataset(classes, perClass, cfg.seed);
  save_sample_archive((fs::path(outDir) / "synth_data.lrt").string(), samples);
  std::vector<ManifestEntry> entries;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    entries.push_back({s.speakerId, s.sentenceId, 0, s.label, 0,
                       static_cast<int>(s.frames.size()) - 1,
                       "synth_data.lrt@s" + std::to_string(i)});
  }
  save_manifest((fs::path(outDir) / "manifest.csv").string(), entries);
  std::cout << "synth: wrote " << samples.size() << " samples to " << outDir << "\n";
  return kExitOk;
}

int cmd_preprocess(const std::string& framesDir, const std::string& alignDir,
                   const std::string& boxesDir, const std::string& outDir,
                   const RunConfig& cfg) {
  if (!fs::is_directory(framesDir)) {
    std::cerr << "preprocess: frames directory not found: " << framesDir << "\n";
    return kExitUsage;
  }
  fs::create_directories(outDir);
  std::vector<ManifestEntry> manifest;
  std::vector<fs::path> speakerDirs;
  for (const auto& entry : fs::directory_iterator(framesDir))
    if (entry.is_directory()) speakerDirs.push_back(entry.path());
  std::sort(speakerDirs.begin(), speakerDirs.end());

  for (const auto& spkDir : speakerDirs) {
    const std::string spkName = spkDir.filename().string();
    const int speakerId = trailing_number(spkName, 0);
    std::vector<fs::path> sentenceDirs;
    for (const auto& entry : fs::directory_iterator(spkDir))
      if (entry.is_directory()) sentenceDirs.push_back(entry.path());
    std::sort(sentenceDirs.begin(), sentenceDirs.end());

    int sentenceIndex = 0;
    for (const auto& sentDir : sentenceDirs) {
      const std::string sentence = sentDir.filename().string();
      const int sentenceId = trailing_number(sentence, sentenceIndex);
      ++sentenceIndex;
      const fs::path alignPath = fs::path(alignDir) / spkName / (sentence + ".align");
      const fs::path boxesPath = fs::path(boxesDir) / spkName / (sentence + ".boxes");
      if (!fs::exists(alignPath)) {
        std::cerr << "preprocess: missing alignment sidecar: " << alignPath << "\n";
        return kExitUsage;
      }
      if (!fs::exists(boxesPath)) {
        std::cerr << "preprocess: missing face-box sidecar: " << boxesPath << "\n";
        return kExitUsage;
      }
      const auto segments = parse_alignment(read_file(alignPath), cfg.alignUnitsPerFrame);
      std::map<int, FaceBox> boxes;
      for (const auto& [frame, box] : parse_face_boxes(read_file(boxesPath)))
        boxes[frame] = box;

      std::map<int, fs::path> frameFiles;
      for (const auto& entry : fs::directory_iterator(sentDir)) {
        if (!entry.is_regular_file()) continue;
        const std::string ext = entry.path().extension().string();
        if (ext != ".pgm" && ext != ".ppm") continue;
        frameFiles[trailing_number(entry.path().stem().string(), -1)] = entry.path();
      }

      std::vector<WordSample> sentenceSamples;
      bool skipped = false;
      for (const auto& seg : segments) {
        WordSample sample;
        sample.label = seg.label;
        sample.speakerId = speakerId;
        sample.sentenceId = sentenceId;
        for (int f = seg.startFrame; f <= seg.endFrame; ++f) {
          const auto fileIt = frameFiles.find(f);
          const auto boxIt = boxes.find(f);
          if (fileIt == frameFiles.end() || boxIt == boxes.end()) {
            std::cerr << "preprocess: warning: " << spkName << "/" << sentence
                      << " frame " << f << " missing image or face box, "
                      << "skipping sentence\n";
            skipped = true;
            break;
          }
          MouthPatch patch = extract_mouth_patch(
              load_pnm(fileIt->second.string()), boxIt->second,
              static_cast<float>(cfg.gaussSigma));
          patch.sourceFrame = f;
          sample.frames.push_back(std::move(patch));
        }
        if (skipped) break;
        if (!sample.frames.empty()) sentenceSamples.push_back(std::move(sample));
      }
      if (skipped || sentenceSamples.empty()) continue;

      fs::create_directories(fs::path(outDir) / spkName);
      const std::string relArchive = spkName + "/" + sentence + ".lrt";
      save_sample_archive((fs::path(outDir) / relArchive).string(), sentenceSamples);
      for (std::size_t w = 0; w < sentenceSamples.size(); ++w) {
        const auto& seg = segments[w];
        manifest.push_back({speakerId, sentenceId, static_cast<int>(w), seg.label,
                            seg.startFrame, seg.endFrame,
                            relArchive + "@s" + std::to_string(w)});
      }
    }
  }
  if (manifest.empty()) {
    std::cerr << "preprocess: no word samples produced\n";
    return kExitUsage;
  }
  save_manifest((fs::path(outDir) / "manifest.csv").string(), manifest);
  std::cout << "preprocess: wrote " << manifest.size() << " word samples\n";
  return kExitOk;
}

int cmd_train(const std::string& manifestPath, const std::string& model,
              const std::string& outDir, const RunConfig& cfg) {
  if (model != "lstm" && model != "svm-eigen" && model != "svm-hog") {
    std::cerr << "train: unknown model '" << model
              << "' (expected lstm | svm-eigen | svm-hog)\n";
    return kExitUsage;
  }
  fs::create_directories(outDir);
  const auto samples = load_samples_from_manifest(manifestPath);
  const DatasetSplit split = make_splits(samples, cfg.seed);

  if (model == "lstm") {
    int classCount = 0;
    for (const auto& s : samples) classCount = std::max(classCount, s.label + 1);
    LstmPipelineModel trained =
        train_lstm_pipeline(split.train, split.validation, classCount, cfg);
    save_lstm_pipeline((fs::path(outDir) / "model.lrt").string(), trained, cfg.seed);
    write_history_csv((fs::path(outDir) / "history.csv").string(), trained.history);
    double best = 0.0;
    for (const auto& e : trained.history) best = std::max(best, e.valAccuracy);
    std::cout << "train: validation accuracy " << best << "\n";
  } else {
    const SvmFeatureKind kind =
        model == "svm-eigen" ? SvmFeatureKind::Eigenlips : SvmFeatureKind::Hog;
    const SvmPipelineModel trained = train_svm_pipeline(split.train, kind, cfg);
    save_svm_pipeline((fs::path(outDir) / "model.lrt").string(), trained);
    std::cout << "train: validation accuracy "
              << svm_pipeline_accuracy(trained, split.validation) << "\n";
  }
  return kExitOk;
}

int cmd_eval(const std::string& manifestPath, const std::string& checkpointPath,
             const std::string& outDir, const RunConfig& cfg) {
  fs::create_directories(outDir);
  const auto samples = load_samples_from_manifest(manifestPath);
  const DatasetSplit split = make_splits(samples, cfg.seed);

  std::vector<std::pair<int, int>> predictions;
  std::vector<int> speakers;
  const int kind = checkpoint_kind(checkpointPath);
  if (kind == 0) {
    const LstmPipelineModel model = load_lstm_pipeline(checkpointPath);
    if (model.net.shape.inputDim != kPatchPixels) {
      std::cerr << "eval: checkpoint input dimension mismatch\n";
      return kExitUsage;
    }
    for (const auto& s : split.test) {
      predictions.emplace_back(predict_lstm_pipeline(model, s), s.label);
      speakers.push_back(s.speakerId);
    }
  } else {
    const SvmPipelineModel model = load_svm_pipeline(checkpointPath);
    for (const auto& s : split.test) {
      predictions.emplace_back(predict_svm_pipeline(model, s), s.label);
      speakers.push_back(s.speakerId);
    }
  }
  const EvalReport report = score(predictions, speakers);
  write_report_csv(report, (fs::path(outDir) / "report.csv").string());
  write_confusion_csv(report.confusion, (fs::path(outDir) / "confusion.csv").string());
  render_confusion(report.confusion, (fs::path(outDir) / "confusion.pgm").string());
  std::cout << "eval: scored " << predictions.size() << " samples, overall accuracy "
            << report.overallAccuracy << "\n";
  return kExitOk;
}

std::vector<std::pair<int, double>> speaker_accuracies_from_report(
    const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open report: " + path);
  std::vector<std::pair<int, double>> out;
  std::string line;
  while (std::getline(is, line)) {
    const std::string prefix = "speakerAccuracy.";
    if (line.rfind(prefix, 0) != 0) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) continue;
    out.emplace_back(std::stoi(line.substr(prefix.size(), comma - prefix.size())),
                     std::stod(line.substr(comma + 1)));
  }
  std::sort(out.begin(), out.end());
  return out;
}

int cmd_report(const std::string& reportA, const std::string& reportB, double alpha) {
  const auto a = speaker_accuracies_from_report(reportA);
  const auto b = speaker_accuracies_from_report(reportB);
  std::vector<double> accA, accB;
  for (const auto& [spk, acc] : a)
    for (const auto& [spk2, acc2] : b)
      if (spk == spk2) {
        accA.push_back(acc);
        accB.push_back(acc2);
      }
  if (accA.size() < 2) {
    std::cerr << "report: need per-speaker accuracies for >= 2 common speakers\n";
    return kExitUsage;
  }
  const TTestResult r = paired_t_test_one_tailed(accA, accB, alpha);
  std::cout << "ttest,t=" << r.t << ",p=" << r.pValue
            << ",significant=" << (r.significant ? "yes" : "no")
            << (r.degenerateVariance ? ",degenerateVariance" : "") << "\n";
  return kExitOk;
}

int cmd_gradcheck(int inputDim, int units, int classes, int frames, double tolerance,
                  std::uint64_t seed) {
  NetShape shape{inputDim, units, units, classes};
  const GradCheckReport report = gradient_check(shape, tolerance, seed, frames);
  std::cout << "gradcheck: max relative error " << report.maxRelError << " in "
            << report.worstBlock << "[" << report.worstIndex << "] -> "
            << (report.passed ? "pass" : "FAIL") << "\n";
  return report.passed ? kExitOk : kExitNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lipreading toolkit: mouth-patch preprocessing, Eigenlips/HOG + "
               "SVM baselines, and an LSTM word classifier"};
  app.require_subcommand(1);

  std::string configPath;
  app.add_option("--config", configPath, "key=value configuration file");

  auto* synth = app.add_subcommand("synth", "emit a synthetic labeled dataset");
  int classes = 10, perClass = 50;
  std::string synthOut = "synth";
  synth->add_option("--classes", classes, "number of classes");
  synth->add_option("--per-class", perClass, "samples per class");
  synth->add_option("--out", synthOut, "output directory");
  synth->allow_extras();

  auto* preprocess = app.add_subcommand("preprocess", "extract mouth patches");
  std::string framesDir, alignDir, boxesDir, preOut = "preprocessed";
  preprocess->add_option("--frames-dir", framesDir, "frame images root")->required();
  preprocess->add_option("--align-dir", alignDir, "alignment files root")->required();
  preprocess->add_option("--boxes-dir", boxesDir, "face-box sidecars root")->required();
  preprocess->add_option("--out", preOut, "output directory");
  preprocess->allow_extras();

  auto* train = app.add_subcommand("train", "train a classifier");
  std::string manifestPath, model = "lstm", trainOut = "run";
  train->add_option("--manifest", manifestPath, "dataset manifest CSV")->required();
  train->add_option("--model", model, "lstm | svm-eigen | svm-hog");
  train->add_option("--out", trainOut, "output directory");
  train->allow_extras();

  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on the test split");
  std::string evalManifest, checkpointPath, evalOut = "eval";
  eval->add_option("--manifest", evalManifest, "dataset manifest CSV")->required();
  eval->add_option("--checkpoint", checkpointPath, "model checkpoint")->required();
  eval->add_option("--out", evalOut, "output directory");
  eval->allow_extras();

  auto* gradcheck = app.add_subcommand("gradcheck", "verify BPTT gradients");
  int gcIn = 10, gcUnits = 8, gcClasses = 5, gcFrames = 7;
  double gcTolerance = 1e-4;
  std::uint64_t gcSeed = 7;
  gradcheck->add_option("--in", gcIn, "input dimension");
  gradcheck->add_option("--units", gcUnits, "LSTM units");
  gradcheck->add_option("--classes", gcClasses, "output classes");
  gradcheck->add_option("--frames", gcFrames, "sequence length");
  gradcheck->add_option("--tolerance", gcTolerance, "max relative error");
  gradcheck->add_option("--seed", gcSeed, "generator seed");

  auto* report = app.add_subcommand("report", "compare two evaluation reports");
  std::vector<std::string> compare;
  double alpha = 0.05;
  report->add_option("--compare", compare, "two report.csv files")
      ->expected(2)->required();
  report->add_option("--alpha", alpha, "significance level");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (synth->parsed())
      return cmd_synth(classes, perClass, synthOut,
                       make_config(configPath, synth->remaining()));
    if (preprocess->parsed())
      return cmd_preprocess(framesDir, alignDir, boxesDir, preOut,
                            make_config(configPath, preprocess->remaining()));
    if (train->parsed())
      return cmd_train(manifestPath, model, trainOut,
                       make_config(configPath, train->remaining()));
    if (eval->parsed())
      return cmd_eval(evalManifest, checkpointPath, evalOut,
                      make_config(configPath, eval->remaining()));
    if (gradcheck->parsed())
      return cmd_gradcheck(gcIn, gcUnits, gcClasses, gcFrames, gcTolerance, gcSeed);
    if (report->parsed()) return cmd_report(compare[0], compare[1], alpha);
  } catch (const TrainingDivergedError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
