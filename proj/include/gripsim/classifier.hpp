#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "gripsim/features.hpp"
#include "gripsim/types.hpp"

namespace gripsim {

template <typename Scalar>
using ClassMatrix = Eigen::Matrix<Scalar, kNumClasses, Eigen::Dynamic>;
template <typename Scalar>
using ClassVector = Eigen::Matrix<Scalar, kNumClasses, 1>;

// Column-wise softmax with max subtraction.
template <typename Scalar>
ClassMatrix<Scalar> softmax_columns(const ClassMatrix<Scalar>& logits) {
  ClassMatrix<Scalar> p(kNumClasses, logits.cols());
  for (Eigen::Index j = 0; j < logits.cols(); ++j) {
    const Scalar top = logits.col(j).maxCoeff();
    p.col(j) = (logits.col(j).array() - top).exp().matrix();
    p.col(j) /= p.col(j).sum();
  }
  return p;
}

template <typename Scalar>
struct LossAndGradient {
  Scalar loss;
  ClassMatrix<Scalar> grad_weights;
  ClassVector<Scalar> grad_bias;
};

// Sample-weighted mean cross-entropy plus (l2 / 2) * ||W||^2. Columns of `x`
// are standardized feature vectors.
template <typename Scalar>
LossAndGradient<Scalar> weighted_cross_entropy(
    const ClassMatrix<Scalar>& weights, const ClassVector<Scalar>& bias,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& x, std::span<const int> labels,
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& sample_weights, Scalar l2) {
  ClassMatrix<Scalar> logits = weights * x;
  logits.colwise() += bias;
  ClassMatrix<Scalar> residual = softmax_columns<Scalar>(logits);

  const Scalar total_weight = sample_weights.sum();
  Scalar loss(0);
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const int y = labels[j];
    loss -= sample_weights[j] * std::log(residual(y, j));
    residual(y, j) -= Scalar(1);
    residual.col(j) *= sample_weights[j] / total_weight;
  }
  LossAndGradient<Scalar> out;
  out.loss = loss / total_weight + Scalar(0.5) * l2 * weights.squaredNorm();
  out.grad_weights = residual * x.transpose() + l2 * weights;
  out.grad_bias = residual.rowwise().sum();
  return out;
}

struct LabeledExample {
  FeatureVector features;
  Label label = Label::NoContact;
};

struct TrainParams {
  double learning_rate = 0.1;
  int epochs = 500;
  double l2 = 1e-4;
  bool class_weighting = true;
  std::uint64_t seed = 0;
};

void validate(const TrainParams& params);

// The slip predictor f: multinomial logistic regression on standardized features.
struct SlipModel {
  ClassMatrix<double> weights;
  ClassVector<double> bias = ClassVector<double>::Zero();
  Normalizer normalizer;
  SensorKind variant = SensorKind::BioTac;
  int tau_h = 10;
  int tau_f = 3;
  int layout_version = kFeatureLayoutVersion;
  std::uint64_t seed = 0;
  int epochs = 0;
  double final_loss = 0.0;

  bool operator==(const SlipModel&) const = default;
};

// Full-batch gradient descent. `loss_history`, when given, receives the loss
// before every epoch followed by the final loss.
SlipModel train(std::span<const LabeledExample> examples, const TrainParams& params, int tau_f,
                std::vector<double>* loss_history = nullptr);

std::array<double, kNumClasses> inverse_frequency_weights(std::span<const int> labels);

struct Prediction {
  Label label = Label::Slip;
  ClassVector<double> probabilities = ClassVector<double>::Constant(1.0 / kNumClasses);
};

Prediction predict(const SlipModel& model, const FeatureVector& features);

// First maximum wins, i.e. slip > contact > no_contact on ties.
Label argmax_label(const ClassVector<double>& probabilities);

struct Evaluation {
  Eigen::Matrix<int, kNumClasses, kNumClasses> confusion =
      Eigen::Matrix<int, kNumClasses, kNumClasses>::Zero();  // rows: truth, cols: predicted
  std::array<double, kNumClasses> precision{};
  std::array<double, kNumClasses> recall{};
  std::array<int, kNumClasses> support{};
  double accuracy = 0.0;
  int total = 0;
};

Evaluation evaluate_predictions(std::span<const Label> truth, std::span<const Label> predicted);
Evaluation evaluate(const SlipModel& model, std::span<const LabeledExample> examples);

void write_evaluation_csv(const std::filesystem::path& path, const Evaluation& eval);
// Reads back precision, recall, support and accuracy (no confusion matrix).
Evaluation read_evaluation_csv(const std::filesystem::path& path);

void save_model(const std::filesystem::path& path, const SlipModel& model);
SlipModel load_model(const std::filesystem::path& path);
std::string model_to_json(const SlipModel& model);
SlipModel model_from_json(const std::string& text);

// Baseline that only sees the p_dc mean: two thresholds split the axis into
// three intervals, each mapped to its majority class.
struct ThresholdBaseline {
  double low = 0.0;
  double high = 0.0;
  std::array<Label, 3> interval_labels{Label::NoContact, Label::Contact, Label::Contact};

  Label predict(double p_dc_mean) const;
};

ThresholdBaseline fit_threshold_baseline(std::span<const LabeledExample> examples);
double baseline_accuracy(const ThresholdBaseline& baseline,
                         std::span<const LabeledExample> examples);

}  // namespace gripsim
