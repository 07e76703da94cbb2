#include <gtest/gtest.h>

#include <cmath>
#include <memory>

#include "mcl/error.hpp"
#include "mcl/lost_sales.hpp"
#include "mcl/mlp.hpp"
#include "mcl/neural_policy.hpp"
#include "mcl/trainer.hpp"

using namespace mcl;

namespace {

// Uniform points in the plane labeled by quadrant. Action 4 is disallowed on
// the left half-plane to exercise the mask.
ClassificationData quadrant_data(int n, RngKey key) {
  ClassificationData data;
  data.action_count = 4;
  RngStream s(key, 0);
  for (int i = 0; i < n; ++i) {
    const double x = 20.0 * s.uniform() - 10.0;
    const double y = 20.0 * s.uniform() - 10.0;
    if (std::abs(x) < 0.5 || std::abs(y) < 0.5) {
      continue;
    }
    data.states.push_back({x, y});
    const Action label = x > 0 ? (y > 0 ? 1 : 2) : (y > 0 ? 3 : 1);
    data.labels.push_back(label);
    data.allowed.push_back(x > 0 ? std::vector<Action>{1, 2, 3, 4} : std::vector<Action>{1, 2, 3});
  }
  return data;
}

// Relative error of an analytic vs central-difference derivative.
double rel_err(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max(1e-8, std::abs(analytic) + std::abs(numeric));
}

}  // namespace

TEST(Mlp, ZeroParametersGiveZeroScores) {
  MlpArchitecture arch{3, {4, 5}, 6};
  const auto p = MlpParameters::zeros(arch);
  const auto y = forward(p, Eigen::VectorXd::Ones(3));
  EXPECT_EQ(y.size(), 6);
  EXPECT_EQ(y.norm(), 0.0);
  EXPECT_THROW(forward(p, Eigen::VectorXd::Ones(2)), DimensionMismatch);
}

TEST(Mlp, IdentityNetworkPassesPositiveInputs) {
  MlpArchitecture arch{2, {2}, 2};
  auto p = MlpParameters::zeros(arch);
  p.weights[0] = Eigen::MatrixXd::Identity(2, 2);
  p.weights[1] = Eigen::MatrixXd::Identity(2, 2);
  Eigen::VectorXd x(2);
  x << 3.0, -1.0;
  const auto y = forward(p, x);
  EXPECT_EQ(y(0), 3.0);
  EXPECT_EQ(y(1), 0.0);  // ReLU clips the negative coordinate
}

TEST(Mlp, InitIsKeyedAndBounded) {
  MlpArchitecture arch{2, {16, 8}, 3};
  const auto a = MlpParameters::init(arch, RngKey(1));
  const auto b = MlpParameters::init(arch, RngKey(1));
  const auto c = MlpParameters::init(arch, RngKey(2));
  EXPECT_TRUE(a == b);
  EXPECT_FALSE(a == c);
  EXPECT_EQ(a.parameter_count(), 2u * 16 + 16 + 16 * 8 + 8 + 8 * 3 + 3);
  EXPECT_LE(a.weights[1].cwiseAbs().maxCoeff(), 1.0 / std::sqrt(16.0));
}

TEST(MaskedArgmax, HandExamples) {
  Eigen::VectorXd scores(4);
  scores << 1, 5, 5, 2;
  EXPECT_EQ(masked_argmax(scores, std::vector<Action>{2, 3, 4}), 2);
  EXPECT_EQ(masked_argmax(scores, std::vector<Action>{1, 4}), 4);
  EXPECT_EQ(masked_argmax(scores, std::vector<Action>{3}), 3);
}

TEST(MaskedLoss, HandExamples) {
  Eigen::VectorXd scores(3);
  scores << 7.0, -2.0, 0.3;
  EXPECT_EQ(masked_loss_from_scores(scores, 2, std::vector<Action>{2}), 0.0);

  const Eigen::VectorXd flat = Eigen::VectorXd::Constant(5, 0.7);
  EXPECT_NEAR(masked_loss_from_scores(flat, 3, std::vector<Action>{1, 2, 3, 4, 5}), std::log(5.0),
              1e-14);
  EXPECT_NEAR(masked_loss_from_scores(flat, 3, std::vector<Action>{1, 3}), std::log(2.0), 1e-14);

  Eigen::VectorXd two(2);
  two << 2.0, 0.0;
  EXPECT_NEAR(masked_loss_from_scores(two, 1, std::vector<Action>{1, 2}), 0.1269280110429725,
              1e-12);

  EXPECT_THROW(masked_loss_from_scores(two, 1, std::vector<Action>{2}), ActionNotAllowed);

  // Huge scores stay finite thanks to max subtraction.
  two << 1000.0, -1000.0;
  EXPECT_TRUE(std::isfinite(masked_loss_from_scores(two, 2, std::vector<Action>{1, 2})));
}

TEST(MaskedLoss, GradientVanishesOffMask) {
  Eigen::VectorXd scores(5);
  scores << 0.1, 2.0, -1.0, 0.5, 3.0;
  Eigen::VectorXd d;
  masked_loss_from_scores(scores, 2, std::vector<Action>{2, 4}, &d);
  EXPECT_EQ(d(0), 0.0);
  EXPECT_EQ(d(2), 0.0);
  EXPECT_EQ(d(4), 0.0);
  EXPECT_NEAR(d(1) + d(3), 0.0, 1e-15);
  EXPECT_LT(d(1), 0.0);
}

TEST(Backprop, MatchesFiniteDifferences) {
  MlpArchitecture arch{3, {7, 5}, 4};
  auto p = MlpParameters::init(arch, RngKey(8));
  // Nudge biases away from zero so no ReLU sits on its kink.
  for (auto& b : p.biases) {
    b.array() += 0.05;
  }
  Batch batch;
  batch.x.resize(3, 6);
  RngStream s(RngKey(9), 0);
  for (Eigen::Index c = 0; c < 6; ++c) {
    for (Eigen::Index r = 0; r < 3; ++r) {
      batch.x(r, c) = 2.0 * s.uniform() - 1.0;
    }
  }
  batch.labels = {1, 2, 3, 4, 2, 1};
  batch.allowed = {{1, 2, 3, 4}, {2, 3}, {1, 3}, {4}, {1, 2, 4}, {1, 2, 3, 4}};

  Gradients g;
  batch_loss(p, batch, &g);
  const double h = 1e-6;
  RngStream pick(RngKey(10), 0);
  int checked = 0;
  for (int probe = 0; probe < 100; ++probe) {
    const auto layer = static_cast<std::size_t>(pick.below(p.weights.size()));
    const bool bias = pick.uniform() < 0.3;
    double* theta;
    double analytic;
    if (bias) {
      const auto r = static_cast<Eigen::Index>(pick.below(p.biases[layer].size()));
      theta = &p.biases[layer](r);
      analytic = g.biases[layer](r);
    } else {
      const auto r = static_cast<Eigen::Index>(pick.below(p.weights[layer].rows()));
      const auto c = static_cast<Eigen::Index>(pick.below(p.weights[layer].cols()));
      theta = &p.weights[layer](r, c);
      analytic = g.weights[layer](r, c);
    }
    const double saved = *theta;
    *theta = saved + h;
    const double up = batch_loss(p, batch);
    *theta = saved - h;
    const double down = batch_loss(p, batch);
    *theta = saved;
    const double numeric = (up - down) / (2 * h);
    if (std::abs(analytic) < 1e-9 && std::abs(numeric) < 1e-9) {
      continue;
    }
    ++checked;
    EXPECT_LT(rel_err(analytic, numeric), 1e-5) << "probe " << probe;
  }
  EXPECT_GT(checked, 50);
}

TEST(Adam, FirstStepMovesEachParameterByStepSize) {
  MlpArchitecture arch{1, {2}, 2};
  auto p = MlpParameters::zeros(arch);
  Gradients g{{Eigen::MatrixXd::Constant(2, 1, 3.0), Eigen::MatrixXd::Constant(2, 2, -0.01)},
              {Eigen::VectorXd::Constant(2, 1e3), Eigen::VectorXd::Zero(2)}};
  Adam adam(p, AdamConfig{});
  adam.step(p, g);
  EXPECT_NEAR(p.weights[0](0, 0), -1e-3, 1e-9);
  EXPECT_NEAR(p.weights[1](1, 0), 1e-3, 1e-9);
  EXPECT_NEAR(p.biases[0](1), -1e-3, 1e-9);
  EXPECT_EQ(p.biases[1](0), 0.0);
}

TEST(Trainer, LearnsSeparableQuadrants) {
  const auto data = quadrant_data(2000, RngKey(1));
  TrainConfig cfg;
  cfg.hidden = {32, 32};
  cfg.max_epochs = 200;
  const auto r = train_classifier(data, cfg, RngKey(4));
  const auto score = score_classifier(r.artifact, data);
  EXPECT_GE(score.accuracy, 0.99);
  ASSERT_GE(r.report.rows.size(), 2u);
  EXPECT_LT(r.report.rows[1].train_loss, r.report.rows[0].train_loss);
  EXPECT_EQ(r.report.train_size + r.report.test_size, static_cast<int>(data.states.size()));
  EXPECT_EQ(r.report.test_size, static_cast<int>(std::lround(0.05 * data.states.size())));
  EXPECT_GT(r.report.best_epoch, 0);
  EXPECT_EQ(r.report.best_epoch % cfg.eval_every, 0);
}

TEST(Trainer, BitwiseDeterministic) {
  const auto data = quadrant_data(300, RngKey(2));
  TrainConfig cfg;
  cfg.hidden = {16};
  cfg.max_epochs = 30;
  const auto a = train_classifier(data, cfg, RngKey(6));
  const auto b = train_classifier(data, cfg, RngKey(6));
  EXPECT_TRUE(a.artifact == b.artifact);
  EXPECT_EQ(write_artifact(a.artifact), write_artifact(b.artifact));
  EXPECT_EQ(write_train_report_csv(a.report), write_train_report_csv(b.report));
}

TEST(Trainer, StandardizesOnTrainingSplit) {
  auto data = quadrant_data(400, RngKey(3));
  // A constant coordinate keeps scale 1.
  for (auto& s : data.states) {
    s.push_back(5.0);
  }
  TrainConfig cfg;
  cfg.hidden = {8};
  cfg.max_epochs = 5;
  const auto r = train_classifier(data, cfg, RngKey(7));
  EXPECT_EQ(r.artifact.scale(2), 1.0);
  EXPECT_EQ(r.artifact.shift(2), 5.0);
  // Over all samples the normalized coordinates are close to mean 0, variance 1.
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(3);
  Eigen::VectorXd sq = Eigen::VectorXd::Zero(3);
  for (const auto& s : data.states) {
    const auto z = r.artifact.normalize(s);
    mean += z;
    sq += z.cwiseProduct(z);
  }
  const double n = static_cast<double>(data.states.size());
  mean /= n;
  sq /= n;
  for (int k = 0; k < 2; ++k) {
    EXPECT_NEAR(mean(k), 0.0, 0.1);
    EXPECT_NEAR(sq(k) - mean(k) * mean(k), 1.0, 0.1);
  }
}

TEST(Trainer, DuplicatedSamplesStillTrain) {
  auto data = quadrant_data(100, RngKey(5));
  const auto copy = data;
  data.states.insert(data.states.end(), copy.states.begin(), copy.states.end());
  data.labels.insert(data.labels.end(), copy.labels.begin(), copy.labels.end());
  data.allowed.insert(data.allowed.end(), copy.allowed.begin(), copy.allowed.end());
  TrainConfig cfg;
  cfg.hidden = {16};
  cfg.max_epochs = 40;
  const auto r = train_classifier(data, cfg, RngKey(1));
  EXPECT_TRUE(std::isfinite(r.report.best_test_loss));
}

TEST(Trainer, RejectsDegenerateInput) {
  ClassificationData data;
  data.action_count = 2;
  for (int i = 0; i < 30; ++i) {
    data.states.push_back({1.0, 2.0});
    data.labels.push_back(1 + i % 2);
    data.allowed.push_back({1, 2});
  }
  EXPECT_THROW(train_classifier(data, TrainConfig{}, RngKey(1)), DegenerateDataset);
  data.states.resize(10);
  data.labels.resize(10);
  data.allowed.resize(10);
  EXPECT_THROW(train_classifier(data, TrainConfig{}, RngKey(1)), ValidationError);
  TrainConfig bad;
  bad.patience = 7;
  EXPECT_THROW(bad.validate(), ValidationError);
}

TEST(Artifact, RoundTripIsExact) {
  const auto data = quadrant_data(200, RngKey(11));
  TrainConfig cfg;
  cfg.hidden = {12, 6};
  cfg.max_epochs = 10;
  auto r = train_classifier(data, cfg, RngKey(12));
  r.artifact.instance_hash = "00112233aabbccdd";
  r.artifact.generation = 3;
  const auto text = write_artifact(r.artifact);
  const auto back = read_artifact(text);
  EXPECT_TRUE(back == r.artifact);
  EXPECT_EQ(write_artifact(back), text);
  for (const auto& s : data.states) {
    EXPECT_EQ(act(back, s, std::vector<Action>{1, 2, 3}), act(r.artifact, s, std::vector<Action>{1, 2, 3}));
  }
  EXPECT_THROW(read_artifact("mcl-neural-policy v0\n"), ValidationError);
  EXPECT_THROW(read_artifact(text.substr(0, text.size() / 2)), ValidationError);
}

TEST(NeuralPolicy, ActsInsideAllowedSet) {
  const LostSalesModel model(LostSalesConfig{});
  MlpArchitecture arch{model.state_dim(), {8}, model.action_count()};
  auto art = std::make_shared<NeuralPolicyArtifact>();
  art->params = MlpParameters::zeros(arch);
  art->params.biases[1](model.action_count() - 1) = 1.0;  // prefers the largest order
  art->shift = Eigen::VectorXd::Zero(model.state_dim());
  art->scale = Eigen::VectorXd::Ones(model.state_dim());
  const NeuralPolicy pi(model, art);
  const State empty{0, 0};
  EXPECT_EQ(pi.act(empty), model.action_count());
  // With the position near the cap the largest order is masked out.
  const State full{static_cast<double>(model.caps().position_cap) - 1, 0};
  EXPECT_EQ(pi.act(full), 1);

  auto wrong = std::make_shared<NeuralPolicyArtifact>(*art);
  wrong->params = MlpParameters::zeros(MlpArchitecture{3, {8}, model.action_count()});
  wrong->shift = Eigen::VectorXd::Zero(3);
  wrong->scale = Eigen::VectorXd::Ones(3);
  EXPECT_THROW(NeuralPolicy(model, wrong), DimensionMismatch);
}
