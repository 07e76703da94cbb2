#include "mcl/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mcl/error.hpp"
#include "mcl/text_config.hpp"

namespace mcl {

void MlpArchitecture::validate() const {
  if (input_dim < 1 || output_dim < 1) {
    throw ValidationError("mlp: input and output dimensions must be positive");
  }
  for (int h : hidden) {
    if (h < 1) {
      throw ValidationError("mlp: hidden layer widths must be positive");
    }
  }
}

MlpParameters MlpParameters::zeros(const MlpArchitecture& arch) {
  arch.validate();
  MlpParameters p;
  p.arch = arch;
  int in = arch.input_dim;
  for (int l = 0; l < arch.layers(); ++l) {
    const int out = l + 1 < arch.layers() ? arch.hidden[l] : arch.output_dim;
    p.weights.push_back(Eigen::MatrixXd::Zero(out, in));
    p.biases.push_back(Eigen::VectorXd::Zero(out));
    in = out;
  }
  return p;
}

MlpParameters MlpParameters::init(const MlpArchitecture& arch, RngKey key) {
  MlpParameters p = zeros(arch);
  for (int l = 0; l < arch.layers(); ++l) {
    RngStream stream(key.derive(static_cast<std::uint64_t>(l)), 0);
    auto& w = p.weights[l];
    const double bound = 1.0 / std::sqrt(static_cast<double>(w.cols()));
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) {
        w(r, c) = bound * (2.0 * stream.uniform() - 1.0);
      }
    }
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      p.biases[l](r) = bound * (2.0 * stream.uniform() - 1.0);
    }
  }
  return p;
}

std::size_t MlpParameters::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    n += static_cast<std::size_t>(weights[l].size() + biases[l].size());
  }
  return n;
}

bool operator==(const MlpParameters& a, const MlpParameters& b) {
  if (!(a.arch == b.arch) || a.weights.size() != b.weights.size()) {
    return false;
  }
  for (std::size_t l = 0; l < a.weights.size(); ++l) {
    if (a.weights[l] != b.weights[l] || a.biases[l] != b.biases[l]) {
      return false;
    }
  }
  return true;
}

Eigen::VectorXd forward(const MlpParameters& params, const Eigen::VectorXd& x) {
  if (x.size() != params.arch.input_dim) {
    throw DimensionMismatch("mlp: input has dimension " + std::to_string(x.size()) +
                            ", expected " + std::to_string(params.arch.input_dim));
  }
  Eigen::VectorXd a = x;
  const std::size_t last = params.weights.size() - 1;
  for (std::size_t l = 0; l <= last; ++l) {
    Eigen::VectorXd z = params.weights[l] * a + params.biases[l];
    a = l < last ? Eigen::VectorXd(z.cwiseMax(0.0)) : z;
  }
  return a;
}

namespace {

void check_allowed(const Eigen::VectorXd& scores, std::span<const Action> allowed) {
  if (allowed.empty()) {
    throw ValidationError("mlp: empty allowed set");
  }
  for (Action a : allowed) {
    if (a < 1 || a > scores.size()) {
      throw DimensionMismatch("mlp: action " + std::to_string(a) + " outside the output layer");
    }
  }
}

}  // namespace

Action masked_argmax(const Eigen::VectorXd& scores, std::span<const Action> allowed) {
  check_allowed(scores, allowed);
  Action best = allowed.front();
  for (Action a : allowed) {
    if (scores(a - 1) > scores(best - 1) || (scores(a - 1) == scores(best - 1) && a < best)) {
      best = a;
    }
  }
  return best;
}

double masked_loss_from_scores(const Eigen::VectorXd& scores, Action label,
                               std::span<const Action> allowed, Eigen::VectorXd* dscores) {
  check_allowed(scores, allowed);
  if (std::find(allowed.begin(), allowed.end(), label) == allowed.end()) {
    throw ActionNotAllowed("masked_loss: label " + std::to_string(label) + " not allowed");
  }
  double top = -std::numeric_limits<double>::infinity();
  for (Action a : allowed) {
    top = std::max(top, scores(a - 1));
  }
  double sum = 0.0;
  for (Action a : allowed) {
    sum += std::exp(scores(a - 1) - top);
  }
  if (dscores != nullptr) {
    dscores->setZero(scores.size());
    for (Action a : allowed) {
      (*dscores)(a - 1) = std::exp(scores(a - 1) - top) / sum;
    }
    (*dscores)(label - 1) -= 1.0;
  }
  return std::log(sum) - (scores(label - 1) - top);
}

double masked_loss(const MlpParameters& params, const Eigen::VectorXd& x, Action label,
                   std::span<const Action> allowed) {
  return masked_loss_from_scores(forward(params, x), label, allowed);
}

double batch_loss(const MlpParameters& params, const Batch& batch, Gradients* grads) {
  const Eigen::Index n = batch.x.cols();
  if (n == 0) {
    throw ValidationError("mlp: empty batch");
  }
  if (batch.x.rows() != params.arch.input_dim) {
    throw DimensionMismatch("mlp: batch rows do not match the input dimension");
  }
  const std::size_t layers = params.weights.size();
  // acts[l] is the input to layer l; acts[layers] holds the scores.
  std::vector<Eigen::MatrixXd> acts(layers + 1);
  acts[0] = batch.x;
  for (std::size_t l = 0; l < layers; ++l) {
    Eigen::MatrixXd z = params.weights[l] * acts[l];
    z.colwise() += params.biases[l];
    acts[l + 1] = l + 1 < layers ? Eigen::MatrixXd(z.cwiseMax(0.0)) : z;
  }

  const auto& scores = acts[layers];
  Eigen::MatrixXd delta(scores.rows(), n);
  Eigen::VectorXd dcol;
  double total = 0.0;
  for (Eigen::Index c = 0; c < n; ++c) {
    const Eigen::VectorXd col = scores.col(c);
    total += masked_loss_from_scores(col, batch.labels[c], batch.allowed[c],
                                     grads != nullptr ? &dcol : nullptr);
    if (grads != nullptr) {
      delta.col(c) = dcol / static_cast<double>(n);
    }
  }
  if (grads != nullptr) {
    grads->weights.resize(layers);
    grads->biases.resize(layers);
    for (std::size_t l = layers; l-- > 0;) {
      grads->weights[l] = delta * acts[l].transpose();
      grads->biases[l] = delta.rowwise().sum();
      if (l > 0) {
        delta = (params.weights[l].transpose() * delta).cwiseProduct(
            (acts[l].array() > 0.0).cast<double>().matrix());
      }
    }
  }
  return total / static_cast<double>(n);
}

Adam::Adam(const MlpParameters& shape, AdamConfig cfg) : cfg_(cfg) {
  for (std::size_t l = 0; l < shape.weights.size(); ++l) {
    m_.weights.push_back(Eigen::MatrixXd::Zero(shape.weights[l].rows(), shape.weights[l].cols()));
    m_.biases.push_back(Eigen::VectorXd::Zero(shape.biases[l].size()));
  }
  v_ = m_;
}

void Adam::step(MlpParameters& params, const Gradients& grads) {
  ++t_;
  const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  const auto update = [&](auto& theta, const auto& g, auto& m, auto& v) {
    m = cfg_.beta1 * m + (1.0 - cfg_.beta1) * g;
    v = cfg_.beta2 * v + (1.0 - cfg_.beta2) * g.cwiseProduct(g);
    theta.array() -=
        cfg_.step_size * (m.array() / c1) / ((v.array() / c2).sqrt() + cfg_.epsilon);
  };
  for (std::size_t l = 0; l < params.weights.size(); ++l) {
    update(params.weights[l], grads.weights[l], m_.weights[l], v_.weights[l]);
    update(params.biases[l], grads.biases[l], m_.biases[l], v_.biases[l]);
  }
}

Eigen::VectorXd NeuralPolicyArtifact::normalize(std::span<const double> s) const {
  if (static_cast<Eigen::Index>(s.size()) != shift.size()) {
    throw DimensionMismatch("policy: state has dimension " + std::to_string(s.size()) +
                            ", expected " + std::to_string(shift.size()));
  }
  Eigen::VectorXd x(shift.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    x(k) = (s[static_cast<std::size_t>(k)] - shift(k)) / scale(k);
  }
  return x;
}

Eigen::VectorXd NeuralPolicyArtifact::scores(std::span<const double> s) const {
  return forward(params, normalize(s));
}

bool operator==(const NeuralPolicyArtifact& a, const NeuralPolicyArtifact& b) {
  return a.params == b.params && a.shift == b.shift && a.scale == b.scale &&
         a.instance_hash == b.instance_hash && a.generation == b.generation &&
         a.train_key == b.train_key;
}

Action act(const NeuralPolicyArtifact& artifact, std::span<const double> s,
           std::span<const Action> allowed) {
  if (allowed.size() == 1) {
    return allowed.front();
  }
  return masked_argmax(artifact.scores(s), allowed);
}

// ---------------------------------------------------------------------------
// Text artifact

namespace {

constexpr const char* kArtifactMagic = "mcl-neural-policy v1";

void write_row(std::ostringstream& out, const double* data, Eigen::Index n) {
  for (Eigen::Index k = 0; k < n; ++k) {
    out << (k == 0 ? "" : " ") << format_double(data[k]);
  }
  out << '\n';
}

class Reader {
 public:
  explicit Reader(const std::string& text) : in_(text) {}

  std::string word() {
    std::string w;
    if (!(in_ >> w)) {
      throw ValidationError("artifact: unexpected end of file");
    }
    return w;
  }
  void expect(const std::string& label) {
    const auto w = word();
    if (w != label) {
      throw ValidationError("artifact: expected '" + label + "', found '" + w + "'");
    }
  }
  long integer() {
    const auto w = word();
    try {
      std::size_t used = 0;
      const long v = std::stol(w, &used);
      if (used != w.size()) {
        throw std::invalid_argument(w);
      }
      return v;
    } catch (const std::logic_error&) {
      throw ValidationError("artifact: expected an integer, found '" + w + "'");
    }
  }
  double real() { return parse_double(word()); }
  std::string line() {
    std::string l;
    std::getline(in_ >> std::ws, l);
    return l;
  }

 private:
  std::istringstream in_;
};

}  // namespace

std::string write_artifact(const NeuralPolicyArtifact& artifact) {
  const auto& arch = artifact.params.arch;
  std::ostringstream out;
  out << kArtifactMagic << '\n';
  out << "instance_hash " << artifact.instance_hash << '\n';
  out << "generation " << artifact.generation << '\n';
  out << "train_key " << to_hex(artifact.train_key) << '\n';
  out << "input_dim " << arch.input_dim << '\n';
  out << "output_dim " << arch.output_dim << '\n';
  out << "hidden " << arch.hidden.size();
  for (int h : arch.hidden) {
    out << ' ' << h;
  }
  out << '\n';
  out << "shift ";
  write_row(out, artifact.shift.data(), artifact.shift.size());
  out << "scale ";
  write_row(out, artifact.scale.data(), artifact.scale.size());
  for (std::size_t l = 0; l < artifact.params.weights.size(); ++l) {
    const auto& w = artifact.params.weights[l];
    out << "weights " << l + 1 << ' ' << w.rows() << ' ' << w.cols() << '\n';
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      const Eigen::VectorXd row = w.row(r).transpose();
      write_row(out, row.data(), row.size());
    }
    const auto& b = artifact.params.biases[l];
    out << "bias " << l + 1 << ' ' << b.size() << '\n';
    write_row(out, b.data(), b.size());
  }
  out << "end\n";
  return out.str();
}

NeuralPolicyArtifact read_artifact(const std::string& text) {
  Reader in(text);
  if (in.line() != kArtifactMagic) {
    throw ValidationError(std::string("artifact: missing '") + kArtifactMagic + "' header");
  }
  NeuralPolicyArtifact art;
  in.expect("instance_hash");
  art.instance_hash = in.word();
  in.expect("generation");
  art.generation = static_cast<int>(in.integer());
  in.expect("train_key");
  art.train_key = key_from_hex(in.word());
  MlpArchitecture arch;
  in.expect("input_dim");
  arch.input_dim = static_cast<int>(in.integer());
  in.expect("output_dim");
  arch.output_dim = static_cast<int>(in.integer());
  in.expect("hidden");
  const long depth = in.integer();
  if (depth < 0 || depth > 64) {
    throw ValidationError("artifact: implausible hidden layer count");
  }
  arch.hidden.resize(static_cast<std::size_t>(depth));
  for (auto& h : arch.hidden) {
    h = static_cast<int>(in.integer());
  }
  art.params = MlpParameters::zeros(arch);
  art.shift.resize(arch.input_dim);
  art.scale.resize(arch.input_dim);
  in.expect("shift");
  for (Eigen::Index k = 0; k < arch.input_dim; ++k) {
    art.shift(k) = in.real();
  }
  in.expect("scale");
  for (Eigen::Index k = 0; k < arch.input_dim; ++k) {
    art.scale(k) = in.real();
    if (!(art.scale(k) > 0.0)) {
      throw ValidationError("artifact: scale entries must be positive");
    }
  }
  for (std::size_t l = 0; l < art.params.weights.size(); ++l) {
    auto& w = art.params.weights[l];
    in.expect("weights");
    if (in.integer() != static_cast<long>(l + 1) || in.integer() != w.rows() ||
        in.integer() != w.cols()) {
      throw DimensionMismatch("artifact: layer " + std::to_string(l + 1) +
                              " weight shape does not match the architecture");
    }
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) {
        w(r, c) = in.real();
      }
    }
    auto& b = art.params.biases[l];
    in.expect("bias");
    if (in.integer() != static_cast<long>(l + 1) || in.integer() != b.size()) {
      throw DimensionMismatch("artifact: layer " + std::to_string(l + 1) +
                              " bias shape does not match the architecture");
    }
    for (Eigen::Index r = 0; r < b.size(); ++r) {
      b(r) = in.real();
    }
  }
  in.expect("end");
  return art;
}

}  // namespace mcl
