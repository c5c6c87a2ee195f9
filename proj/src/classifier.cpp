#include "gripsim/classifier.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "gripsim/rng.hpp"

namespace gripsim {

using nlohmann::json;

void validate(const TrainParams& p) {
  if (!(p.learning_rate > 0)) throw ValidationError("classifier learning_rate must be > 0");
  if (p.epochs < 1) throw ValidationError("classifier epochs must be >= 1");
  if (!(p.l2 >= 0)) throw ValidationError("classifier l2 must be >= 0");
}

std::array<double, kNumClasses> inverse_frequency_weights(std::span<const int> labels) {
  std::array<int, kNumClasses> counts{};
  for (int y : labels) ++counts[y];
  std::array<double, kNumClasses> w{};
  for (int c = 0; c < kNumClasses; ++c)
    w[c] = counts[c] > 0 ? static_cast<double>(labels.size()) / (kNumClasses * counts[c]) : 0.0;
  return w;
}

SlipModel train(std::span<const LabeledExample> examples, const TrainParams& params, int tau_f,
                std::vector<double>* loss_history) {
  validate(params);
  if (tau_f < 1) throw ValidationError("tau_f must be >= 1");
  if (examples.empty()) throw ValidationError("training set is empty");

  const auto& first = examples.front().features;
  const Eigen::Index dim = first.values.size();
  std::array<int, kNumClasses> counts{};
  Eigen::MatrixXd raw(dim, examples.size());
  std::vector<int> labels(examples.size());
  for (std::size_t j = 0; j < examples.size(); ++j) {
    const auto& fv = examples[j].features;
    if (fv.variant != first.variant || fv.tau_h != first.tau_h || fv.values.size() != dim)
      throw ValidationError("training examples mix feature layouts");
    if (!fv.values.allFinite()) throw ValidationError("training example has non-finite features");
    raw.col(j) = fv.values;
    labels[j] = index_of(examples[j].label);
    ++counts[labels[j]];
  }
  for (int c = 0; c < kNumClasses; ++c)
    if (counts[c] == 0)
      throw ValidationError("training set has no '" + std::string(to_string(label_at(c))) +
                            "' examples; all three classes are required");

  SlipModel model;
  model.variant = first.variant;
  model.tau_h = first.tau_h;
  model.tau_f = tau_f;
  model.seed = params.seed;
  model.epochs = params.epochs;
  model.normalizer = fit_normalizer(raw);

  Eigen::MatrixXd x(dim, raw.cols());
  for (Eigen::Index j = 0; j < raw.cols(); ++j) x.col(j) = model.normalizer.apply(raw.col(j));

  Eigen::VectorXd sample_weights = Eigen::VectorXd::Ones(x.cols());
  if (params.class_weighting) {
    const auto cw = inverse_frequency_weights(labels);
    for (Eigen::Index j = 0; j < x.cols(); ++j) sample_weights[j] = cw[labels[j]];
  }

  Rng rng = Rng(params.seed).fork("classifier/init");
  model.weights.resize(kNumClasses, dim);
  for (Eigen::Index i = 0; i < model.weights.size(); ++i) model.weights(i) = rng.normal(0, 0.01);
  model.bias.setZero();

  if (loss_history) loss_history->clear();
  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    const auto lg = weighted_cross_entropy<double>(model.weights, model.bias, x, labels,
                                                   sample_weights, params.l2);
    if (loss_history) loss_history->push_back(lg.loss);
    model.weights -= params.learning_rate * lg.grad_weights;
    model.bias -= params.learning_rate * lg.grad_bias;
  }
  model.final_loss = weighted_cross_entropy<double>(model.weights, model.bias, x, labels,
                                                    sample_weights, params.l2)
                         .loss;
  if (loss_history) loss_history->push_back(model.final_loss);
  return model;
}

Label argmax_label(const ClassVector<double>& p) {
  int best = 0;
  for (int c = 1; c < kNumClasses; ++c)
    if (p[c] > p[best]) best = c;
  return label_at(best);
}

Prediction predict(const SlipModel& model, const FeatureVector& features) {
  if (model.layout_version != kFeatureLayoutVersion)
    throw VersionError("model feature layout v" + std::to_string(model.layout_version) +
                       " does not match this build (v" + std::to_string(kFeatureLayoutVersion) +
                       ")");
  if (features.variant != model.variant)
    throw ValidationError("feature vector from " + std::string(to_string(features.variant)) +
                          " given to a model trained on " + std::string(to_string(model.variant)));
  if (features.tau_h != model.tau_h || features.values.size() != model.weights.cols())
    throw ValidationError("feature vector layout does not match the model (tau_h or length)");

  ClassMatrix<double> logits = model.weights * model.normalizer.apply(features.values);
  logits.col(0) += model.bias;
  Prediction out;
  out.probabilities = softmax_columns<double>(logits).col(0);
  out.label = argmax_label(out.probabilities);
  return out;
}

Evaluation evaluate_predictions(std::span<const Label> truth, std::span<const Label> predicted) {
  if (truth.size() != predicted.size()) throw ValidationError("prediction count mismatch");
  if (truth.empty()) throw ValidationError("cannot evaluate on an empty test set");
  Evaluation e;
  for (std::size_t i = 0; i < truth.size(); ++i)
    ++e.confusion(index_of(truth[i]), index_of(predicted[i]));
  e.total = static_cast<int>(truth.size());
  int correct = 0;
  for (int c = 0; c < kNumClasses; ++c) {
    correct += e.confusion(c, c);
    e.support[c] = e.confusion.row(c).sum();
    const int predicted_c = e.confusion.col(c).sum();
    e.precision[c] = predicted_c > 0 ? static_cast<double>(e.confusion(c, c)) / predicted_c : 0.0;
    e.recall[c] = e.support[c] > 0 ? static_cast<double>(e.confusion(c, c)) / e.support[c] : 0.0;
  }
  e.accuracy = static_cast<double>(correct) / e.total;
  return e;
}

Evaluation evaluate(const SlipModel& model, std::span<const LabeledExample> examples) {
  std::vector<Label> truth, predicted;
  truth.reserve(examples.size());
  predicted.reserve(examples.size());
  for (const auto& ex : examples) {
    truth.push_back(ex.label);
    predicted.push_back(predict(model, ex.features).label);
  }
  return evaluate_predictions(truth, predicted);
}

namespace {

std::string format_real(double x) {
  std::ostringstream os;
  os.precision(std::numeric_limits<double>::max_digits10);
  os << x;
  return os.str();
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

void write_evaluation_csv(const std::filesystem::path& path, const Evaluation& e) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "class,precision,recall,support\n";
  for (int c = 0; c < kNumClasses; ++c)
    out << to_string(label_at(c)) << ',' << format_real(e.precision[c]) << ','
        << format_real(e.recall[c]) << ',' << e.support[c] << '\n';
  out << "accuracy," << format_real(e.accuracy) << ",," << e.total << '\n';
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

Evaluation read_evaluation_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open evaluation CSV " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "class,precision,recall,support")
    throw ParseError(path.string() + ": missing evaluation CSV header");
  Evaluation e;
  try {
    for (int c = 0; c < kNumClasses; ++c) {
      if (!std::getline(in, line)) throw ParseError(path.string() + ": truncated evaluation CSV");
      const auto cells = split_csv(line);
      if (cells.size() != 4) throw ParseError(path.string() + ": bad row '" + line + "'");
      const int k = index_of(parse_label(cells[0]));
      e.precision[k] = std::stod(cells[1]);
      e.recall[k] = std::stod(cells[2]);
      e.support[k] = std::stoi(cells[3]);
    }
    if (!std::getline(in, line)) throw ParseError(path.string() + ": missing accuracy footer");
    const auto cells = split_csv(line);
    if (cells.size() != 4 || cells[0] != "accuracy")
      throw ParseError(path.string() + ": bad accuracy footer");
    e.accuracy = std::stod(cells[1]);
    e.total = std::stoi(cells[3]);
  } catch (const std::invalid_argument&) {
    throw ParseError(path.string() + ": non-numeric metric value");
  }
  return e;
}

std::string model_to_json(const SlipModel& m) {
  json j;
  j["format"] = "gripsim-slip-model";
  j["layout_version"] = m.layout_version;
  j["variant"] = std::string(to_string(m.variant));
  j["tau_h"] = m.tau_h;
  j["tau_f"] = m.tau_f;
  j["feature_names"] = json::array();
  for (auto n : feature_names()) j["feature_names"].push_back(std::string(n));
  j["weights"] = json::array();
  for (int c = 0; c < kNumClasses; ++c) {
    json row = json::array();
    for (Eigen::Index k = 0; k < m.weights.cols(); ++k) row.push_back(m.weights(c, k));
    j["weights"].push_back(row);
  }
  j["bias"] = {m.bias[0], m.bias[1], m.bias[2]};
  j["normalizer"]["mean"] = std::vector<double>(m.normalizer.mean.data(),
                                                m.normalizer.mean.data() + m.normalizer.mean.size());
  j["normalizer"]["stddev"] = std::vector<double>(
      m.normalizer.stddev.data(), m.normalizer.stddev.data() + m.normalizer.stddev.size());
  j["training"] = {{"seed", m.seed}, {"epochs", m.epochs}, {"final_loss", m.final_loss}};
  return j.dump(2) + "\n";
}

SlipModel model_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("corrupt model file: ") + e.what());
  }
  try {
    if (j.at("format") != "gripsim-slip-model") throw ParseError("not a gripsim model file");
    SlipModel m;
    m.layout_version = j.at("layout_version").get<int>();
    if (m.layout_version != kFeatureLayoutVersion)
      throw VersionError("model feature layout v" + std::to_string(m.layout_version) +
                         " does not match this build (v" +
                         std::to_string(kFeatureLayoutVersion) + "); retrain the model");
    m.variant = parse_variant(j.at("variant").get<std::string>());
    m.tau_h = j.at("tau_h").get<int>();
    m.tau_f = j.at("tau_f").get<int>();
    const auto& w = j.at("weights");
    if (w.size() != kNumClasses) throw ParseError("model weights must have 3 rows");
    const auto dim = static_cast<Eigen::Index>(w.at(0).size());
    if (dim != kFeatureCount) throw ParseError("model weights have the wrong feature count");
    m.weights.resize(kNumClasses, dim);
    for (int c = 0; c < kNumClasses; ++c) {
      if (static_cast<Eigen::Index>(w.at(c).size()) != dim) throw ParseError("ragged weights");
      for (Eigen::Index k = 0; k < dim; ++k) m.weights(c, k) = w.at(c).at(k).get<double>();
    }
    const auto& b = j.at("bias");
    if (b.size() != kNumClasses) throw ParseError("model bias must have 3 entries");
    for (int c = 0; c < kNumClasses; ++c) m.bias[c] = b.at(c).get<double>();
    const auto mean = j.at("normalizer").at("mean").get<std::vector<double>>();
    const auto sd = j.at("normalizer").at("stddev").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(mean.size()) != dim || static_cast<Eigen::Index>(sd.size()) != dim)
      throw ParseError("normalizer size does not match the weights");
    m.normalizer.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), dim);
    m.normalizer.stddev = Eigen::Map<const Eigen::VectorXd>(sd.data(), dim);
    m.seed = j.at("training").at("seed").get<std::uint64_t>();
    m.epochs = j.at("training").at("epochs").get<int>();
    m.final_loss = j.at("training").at("final_loss").get<double>();
    if (!m.weights.allFinite() || !m.bias.allFinite())
      throw ParseError("model parameters are not finite");
    return m;
  } catch (const json::exception& e) {
    throw ParseError(std::string("corrupt model file: ") + e.what());
  }
}

void save_model(const std::filesystem::path& path, const SlipModel& model) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write model " + path.string());
  out << model_to_json(model);
  if (!out) throw std::runtime_error("failed writing model " + path.string());
}

SlipModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open model file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str());
}

Label ThresholdBaseline::predict(double p) const {
  if (p <= low) return interval_labels[0];
  if (p <= high) return interval_labels[1];
  return interval_labels[2];
}

ThresholdBaseline fit_threshold_baseline(std::span<const LabeledExample> examples) {
  if (examples.empty()) throw ValidationError("cannot fit a baseline on an empty set");
  std::vector<std::pair<double, int>> pts;
  pts.reserve(examples.size());
  for (const auto& ex : examples) pts.emplace_back(ex.features.values[kPdcMean], index_of(ex.label));
  std::sort(pts.begin(), pts.end());

  // Candidate cut positions: prefix lengths at up to 512 quantiles.
  const std::size_t n = pts.size();
  std::vector<std::size_t> cuts{0};
  const std::size_t steps = std::min<std::size_t>(512, n);
  for (std::size_t k = 1; k <= steps; ++k) {
    std::size_t pos = k * n / steps;
    while (pos < n && pos > 0 && pts[pos].first == pts[pos - 1].first) ++pos;
    if (pos != cuts.back()) cuts.push_back(pos);
  }
  if (cuts.back() != n) cuts.push_back(n);

  std::vector<std::array<int, kNumClasses>> prefix(n + 1);
  prefix[0] = {};
  for (std::size_t i = 0; i < n; ++i) {
    prefix[i + 1] = prefix[i];
    ++prefix[i + 1][pts[i].second];
  }
  auto best_in = [&](std::size_t a, std::size_t b, int& cls) {
    int best = -1;
    for (int c = 0; c < kNumClasses; ++c) {
      const int cnt = prefix[b][c] - prefix[a][c];
      if (cnt > best) {
        best = cnt;
        cls = c;
      }
    }
    return best;
  };

  ThresholdBaseline out;
  int best_correct = -1;
  for (std::size_t i = 0; i < cuts.size(); ++i) {
    for (std::size_t k = i; k < cuts.size(); ++k) {
      int c0 = 0, c1 = 0, c2 = 0;
      const int correct =
          best_in(0, cuts[i], c0) + best_in(cuts[i], cuts[k], c1) + best_in(cuts[k], n, c2);
      if (correct > best_correct) {
        best_correct = correct;
        auto cut_value = [&](std::size_t pos) {
          if (pos == 0) return -std::numeric_limits<double>::infinity();
          return pts[pos - 1].first;
        };
        out.low = cut_value(cuts[i]);
        out.high = cut_value(cuts[k]);
        out.interval_labels = {label_at(c0), label_at(c1), label_at(c2)};
      }
    }
  }
  return out;
}

double baseline_accuracy(const ThresholdBaseline& baseline,
                         std::span<const LabeledExample> examples) {
  if (examples.empty()) throw ValidationError("cannot evaluate on an empty test set");
  int correct = 0;
  for (const auto& ex : examples)
    correct += baseline.predict(ex.features.values[kPdcMean]) == ex.label ? 1 : 0;
  return static_cast<double>(correct) / examples.size();
}

}  // namespace gripsim
