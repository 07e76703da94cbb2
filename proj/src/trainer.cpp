#include "mcl/trainer.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "mcl/error.hpp"
#include "mcl/text_config.hpp"

namespace mcl {

namespace {

void shuffle(std::vector<int>& items, RngKey key) {
  RngStream stream(key, 0);
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(stream.below(i));
    std::swap(items[i - 1], items[j]);
  }
}

Batch gather(const ClassificationData& data, const NeuralPolicyArtifact& norm,
             std::span<const int> idx) {
  Batch b;
  b.x.resize(norm.shift.size(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t c = 0; c < idx.size(); ++c) {
    b.x.col(static_cast<Eigen::Index>(c)) = norm.normalize(data.states[idx[c]]);
    b.labels.push_back(data.labels[idx[c]]);
    b.allowed.push_back(data.allowed[idx[c]]);
  }
  return b;
}

}  // namespace

void TrainConfig::validate() const {
  for (int h : hidden) {
    if (h < 1) {
      throw ValidationError("train: hidden widths must be positive");
    }
  }
  if (minibatch_size < 1) {
    throw ValidationError("train: minibatch_size must be positive");
  }
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ValidationError("train: test_fraction must lie in (0, 1)");
  }
  if (eval_every < 1 || patience < eval_every || patience % eval_every != 0) {
    throw ValidationError("train: patience must be a positive multiple of eval_every");
  }
  if (max_epochs < 1) {
    throw ValidationError("train: max_epochs must be positive");
  }
  if (!(adam.step_size > 0.0) || !(adam.beta1 >= 0.0 && adam.beta1 < 1.0) ||
      !(adam.beta2 >= 0.0 && adam.beta2 < 1.0) || !(adam.epsilon > 0.0)) {
    throw ValidationError("train: invalid optimizer parameters");
  }
}

ClassificationData classification_data(const ExogenousModel& model, const LabeledSampleSet& set) {
  ClassificationData data;
  data.action_count = model.action_count();
  for (const auto& s : set.samples) {
    data.states.push_back(s.state);
    data.labels.push_back(s.label);
    data.allowed.push_back(model.allowed_actions(s.state));
  }
  return data;
}

TrainResult train_classifier(const ClassificationData& data, const TrainConfig& cfg, RngKey key) {
  cfg.validate();
  const int n = static_cast<int>(data.states.size());
  if (n < 20) {
    throw ValidationError("train: need at least 20 samples");
  }
  if (data.labels.size() != data.states.size() || data.allowed.size() != data.states.size()) {
    throw LengthMismatch("train: states, labels and allowed sets differ in length");
  }
  const auto dim = static_cast<Eigen::Index>(data.states.front().size());
  bool varied = false;
  for (const auto& s : data.states) {
    if (static_cast<Eigen::Index>(s.size()) != dim) {
      throw DimensionMismatch("train: states differ in dimension");
    }
    varied = varied || s != data.states.front();
  }
  if (!varied) {
    throw DegenerateDataset("train: every sample has the same state");
  }

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  shuffle(order, key.derive(1));
  const int n_test = std::max(1, static_cast<int>(std::lround(cfg.test_fraction * n)));
  const std::vector<int> test_idx(order.begin(), order.begin() + n_test);
  std::vector<int> train_idx(order.begin() + n_test, order.end());

  NeuralPolicyArtifact art;
  art.train_key = key;
  art.shift = Eigen::VectorXd::Zero(dim);
  art.scale = Eigen::VectorXd::Ones(dim);
  for (int i : train_idx) {
    for (Eigen::Index k = 0; k < dim; ++k) {
      art.shift(k) += data.states[i][k];
    }
  }
  art.shift /= static_cast<double>(train_idx.size());
  Eigen::VectorXd var = Eigen::VectorXd::Zero(dim);
  for (int i : train_idx) {
    for (Eigen::Index k = 0; k < dim; ++k) {
      const double d = data.states[i][k] - art.shift(k);
      var(k) += d * d;
    }
  }
  var /= static_cast<double>(train_idx.size());
  for (Eigen::Index k = 0; k < dim; ++k) {
    art.scale(k) = var(k) > 0.0 ? std::sqrt(var(k)) : 1.0;
  }

  MlpArchitecture arch;
  arch.input_dim = static_cast<int>(dim);
  arch.hidden = cfg.hidden;
  arch.output_dim = data.action_count;
  MlpParameters params = MlpParameters::init(arch, key.derive(0));

  const Batch train_all = gather(data, art, train_idx);
  const Batch test_all = gather(data, art, test_idx);

  TrainReport report;
  report.train_size = static_cast<int>(train_idx.size());
  report.test_size = n_test;
  report.rows.push_back({0, batch_loss(params, train_all), batch_loss(params, test_all), false});

  MlpParameters best = params;
  double best_loss = std::numeric_limits<double>::infinity();
  int best_epoch = 0;
  Adam adam(params, cfg.adam);
  Gradients grads;
  const auto nan = std::numeric_limits<double>::quiet_NaN();

  int epoch = 0;
  while (epoch < cfg.max_epochs) {
    ++epoch;
    std::vector<int> perm(train_idx.size());
    std::iota(perm.begin(), perm.end(), 0);
    shuffle(perm, key.derive(2, static_cast<std::uint64_t>(epoch)));
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < perm.size();
         start += static_cast<std::size_t>(cfg.minibatch_size)) {
      const std::size_t end = std::min(perm.size(), start + cfg.minibatch_size);
      Batch b;
      b.x.resize(dim, static_cast<Eigen::Index>(end - start));
      for (std::size_t c = start; c < end; ++c) {
        const int col = perm[c];
        b.x.col(static_cast<Eigen::Index>(c - start)) = train_all.x.col(col);
        b.labels.push_back(train_all.labels[col]);
        b.allowed.push_back(train_all.allowed[col]);
      }
      loss_sum += batch_loss(params, b, &grads) * static_cast<double>(end - start);
      adam.step(params, grads);
    }
    TrainReport::Row row{epoch, loss_sum / static_cast<double>(perm.size()), nan, false};

    if (epoch % cfg.eval_every == 0 || epoch == cfg.max_epochs) {
      row.test_loss = batch_loss(params, test_all);
      if (row.test_loss < best_loss) {
        best_loss = row.test_loss;
        best = params;
        best_epoch = epoch;
        row.checkpointed = true;
      }
    }
    report.rows.push_back(row);
    if (epoch - best_epoch >= cfg.patience && std::isfinite(best_loss)) {
      break;
    }
  }

  report.best_epoch = best_epoch;
  report.best_test_loss = best_loss;
  report.epochs_run = epoch;
  art.params = std::move(best);
  return {std::move(art), std::move(report)};
}

TrainResult train(const ExogenousModel& model, const LabeledSampleSet& set, const TrainConfig& cfg,
                  RngKey key) {
  auto result = train_classifier(classification_data(model, set), cfg, key);
  result.artifact.generation = set.generation + 1;
  return result;
}

ClassifierScore score_classifier(const NeuralPolicyArtifact& artifact,
                                 const ClassificationData& data) {
  ClassifierScore score;
  if (data.states.empty()) {
    return score;
  }
  int correct = 0;
  for (std::size_t i = 0; i < data.states.size(); ++i) {
    const auto scores = artifact.scores(data.states[i]);
    score.mean_loss += masked_loss_from_scores(scores, data.labels[i], data.allowed[i]);
    correct += masked_argmax(scores, data.allowed[i]) == data.labels[i] ? 1 : 0;
  }
  score.mean_loss /= static_cast<double>(data.states.size());
  score.accuracy = static_cast<double>(correct) / static_cast<double>(data.states.size());
  return score;
}

std::string write_train_report_csv(const TrainReport& report) {
  std::ostringstream out;
  out << "# mcl-train-report v1\n";
  out << "epoch,train_loss,test_loss,checkpointed\n";
  for (const auto& row : report.rows) {
    out << row.epoch << ',' << format_double(row.train_loss) << ','
        << (std::isnan(row.test_loss) ? std::string() : format_double(row.test_loss)) << ','
        << (row.checkpointed ? 1 : 0) << '\n';
  }
  return out.str();
}

}  // namespace mcl
