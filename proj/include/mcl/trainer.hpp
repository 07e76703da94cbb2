#pragma once

#include <string>
#include <vector>

#include "mcl/collector.hpp"
#include "mcl/mlp.hpp"

namespace mcl {

struct TrainConfig {
  std::vector<int> hidden{128, 64, 64};
  int minibatch_size = 64;
  double test_fraction = 0.05;
  int eval_every = 5;
  int patience = 20;
  int max_epochs = 2000;
  AdamConfig adam;

  void validate() const;
};

struct TrainReport {
  struct Row {
    int epoch = 0;
    double train_loss = 0.0;
    /// NaN on epochs without a test evaluation.
    double test_loss = 0.0;
    bool checkpointed = false;
  };
  /// Row 0 holds the losses of the initial parameters.
  std::vector<Row> rows;
  int best_epoch = 0;
  double best_test_loss = 0.0;
  int epochs_run = 0;
  int train_size = 0;
  int test_size = 0;
};

/// Labeled states in raw (unnormalized) coordinates.
struct ClassificationData {
  std::vector<State> states;
  std::vector<Action> labels;
  std::vector<std::vector<Action>> allowed;
  int action_count = 0;
};

ClassificationData classification_data(const ExogenousModel& model, const LabeledSampleSet& set);

struct TrainResult {
  NeuralPolicyArtifact artifact;
  TrainReport report;
};

/// Minibatch Adam on the mean masked loss with a random train/test split,
/// periodic test evaluation and early stopping; returns the parameters with
/// the best test loss. Randomness: key.derive(0) initializes, key.derive(1)
/// splits, key.derive(2, epoch) shuffles. Throws DegenerateDataset when all
/// states coincide and ValidationError for fewer than 20 samples.
TrainResult train_classifier(const ClassificationData& data, const TrainConfig& cfg, RngKey key);

/// train_classifier on a collected sample set; the artifact's generation is
/// set.generation + 1.
TrainResult train(const ExogenousModel& model, const LabeledSampleSet& set, const TrainConfig& cfg,
                  RngKey key);

struct ClassifierScore {
  double mean_loss = 0.0;
  double accuracy = 0.0;
};

ClassifierScore score_classifier(const NeuralPolicyArtifact& artifact,
                                 const ClassificationData& data);

std::string write_train_report_csv(const TrainReport& report);

}  // namespace mcl
