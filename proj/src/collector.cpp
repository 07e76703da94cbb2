#include "mcl/collector.hpp"

#include <sstream>

#include <json.hpp>

#include "mcl/error.hpp"
#include "mcl/parallel.hpp"
#include "mcl/policy.hpp"
#include "mcl/text_config.hpp"

namespace mcl {

namespace {

constexpr const char* kCsvMagic = "# mcl-samples v1";
constexpr const char* kProvenanceFormat = "mcl-samples-provenance v1";

struct WalkOutput {
  std::vector<LabeledSample> samples;
  CollectionStats stats;
};

WalkOutput run_walk(const ExogenousModel& model, const Policy& policy, const CollectionConfig& cfg,
                    RngKey walk_key, int walk, int length) {
  WalkOutput out;
  const MemoizedPolicy memo(policy);
  State s = model.initial_state();
  State next(s.size());
  for (int k = 0; k < length; ++k) {
    LabeledSample sample;
    sample.state = s;
    sample.walk = walk;
    sample.step = k;
    sample.scenario_key = walk_key.derive(static_cast<std::uint64_t>(k), 0);
    sample.advance_key = walk_key.derive(static_cast<std::uint64_t>(k), 1);

    const auto race = improved_action(model, memo, s, cfg.racing, sample.scenario_key);
    sample.label = race.action;
    out.stats.rollouts += race.diagnostics.rollouts;
    out.stats.replications += race.diagnostics.replications;
    if (race.diagnostics.replications >= cfg.racing.n_max &&
        race.diagnostics.survivors_per_round.back() > 1) {
      ++out.stats.stopped_at_budget;
    }

    if (k + 1 < length) {
      RngStream stream(sample.advance_key, 0);
      Action a = sample.label;
      if (stream.uniform() < cfg.explore_prob) {
        const auto allowed = model.allowed_actions(s);
        a = allowed[stream.below(allowed.size())];
      }
      sample.taken = a;
      sample.w = model.sample_w(stream);
      model.transition(s, a, sample.w, next);
      s.swap(next);
    }
    out.samples.push_back(std::move(sample));
  }
  return out;
}

}  // namespace

void CollectionConfig::validate() const {
  if (total_samples < 1) {
    throw ValidationError("collection: total_samples must be at least 1");
  }
  if (!(explore_prob >= 0.0 && explore_prob <= 1.0)) {
    throw ValidationError("collection: explore_prob must lie in [0, 1]");
  }
  if (walks < 1) {
    throw ValidationError("collection: walks must be at least 1");
  }
  if (worker_count < 1) {
    throw ValidationError("collection: worker_count must be at least 1");
  }
  racing.validate();
}

int CollectionConfig::walk_share(int w) const {
  return total_samples / walks + (w < total_samples % walks ? 1 : 0);
}

LabeledSampleSet collect(const ExogenousModel& model, const Policy& policy,
                         const CollectionConfig& cfg, RngKey key, int generation,
                         CollectionStats* stats) {
  cfg.validate();
  std::vector<WalkOutput> outputs(static_cast<std::size_t>(cfg.walks));
  parallel_tasks(outputs.size(), cfg.worker_count, [&](std::size_t w) {
    const int walk = static_cast<int>(w);
    outputs[w] = run_walk(model, policy, cfg, key.derive(w), walk, cfg.walk_share(walk));
  });

  LabeledSampleSet set;
  set.generation = generation;
  set.master_key = key;
  set.initial_state = model.initial_state();
  set.explore_prob = cfg.explore_prob;
  set.walks = cfg.walks;
  set.racing = cfg.racing;
  set.samples.reserve(static_cast<std::size_t>(cfg.total_samples));
  CollectionStats total;
  for (auto& out : outputs) {
    for (auto& sample : out.samples) {
      set.samples.push_back(std::move(sample));
    }
    total.rollouts += out.stats.rollouts;
    total.replications += out.stats.replications;
    total.stopped_at_budget += out.stats.stopped_at_budget;
  }
  if (stats != nullptr) {
    *stats = total;
  }
  return set;
}

std::string write_samples_csv(const LabeledSampleSet& set) {
  std::ostringstream out;
  out << kCsvMagic << '\n';
  const std::size_t dim = set.initial_state.size();
  for (std::size_t k = 0; k < dim; ++k) {
    out << 's' << k + 1 << ',';
  }
  out << "label,worker,step\n";
  for (const auto& sample : set.samples) {
    for (double x : sample.state) {
      out << format_double(x) << ',';
    }
    out << sample.label << ',' << sample.walk << ',' << sample.step << '\n';
  }
  return out.str();
}

std::string write_provenance_json(const LabeledSampleSet& set) {
  nlohmann::ordered_json j;
  j["format"] = kProvenanceFormat;
  j["generation"] = set.generation;
  j["master_key"] = to_hex(set.master_key);
  j["initial_state"] = set.initial_state;
  j["explore_prob"] = set.explore_prob;
  j["walks"] = set.walks;
  j["racing"] = {{"n_min", set.racing.n_min},
                 {"n_max", set.racing.n_max},
                 {"epsilon", set.racing.epsilon}};
  auto samples = nlohmann::ordered_json::array();
  for (const auto& s : set.samples) {
    samples.push_back({{"scenario_key", to_hex(s.scenario_key)},
                       {"advance_key", to_hex(s.advance_key)},
                       {"taken", s.taken},
                       {"w", s.w}});
  }
  j["samples"] = std::move(samples);
  return j.dump(1) + "\n";
}

LabeledSampleSet read_samples(const std::string& csv, const std::string& provenance_json) {
  LabeledSampleSet set;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(provenance_json);
    if (j.at("format").get<std::string>() != kProvenanceFormat) {
      throw ValidationError("provenance: unsupported format");
    }
    set.generation = j.at("generation").get<int>();
    set.master_key = key_from_hex(j.at("master_key").get<std::string>());
    set.initial_state = j.at("initial_state").get<State>();
    set.explore_prob = j.at("explore_prob").get<double>();
    set.walks = j.at("walks").get<int>();
    set.racing.n_min = j.at("racing").at("n_min").get<int>();
    set.racing.n_max = j.at("racing").at("n_max").get<int>();
    set.racing.epsilon = j.at("racing").at("epsilon").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("provenance: ") + e.what());
  }

  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line) || line != kCsvMagic) {
    throw ValidationError("samples: missing '" + std::string(kCsvMagic) + "' header");
  }
  std::getline(in, line);  // column names
  const std::size_t dim = set.initial_state.size();
  int lineno = 2;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) {
      continue;
    }
    std::vector<std::string> fields;
    std::istringstream row(line);
    std::string field;
    while (std::getline(row, field, ',')) {
      fields.push_back(field);
    }
    if (fields.size() != dim + 3) {
      throw ValidationError("samples:" + std::to_string(lineno) + ": expected " +
                            std::to_string(dim + 3) + " fields");
    }
    LabeledSample sample;
    try {
      for (std::size_t k = 0; k < dim; ++k) {
        sample.state.push_back(parse_double(fields[k]));
      }
      sample.label = std::stoi(fields[dim]);
      sample.walk = std::stoi(fields[dim + 1]);
      sample.step = std::stoi(fields[dim + 2]);
    } catch (const std::logic_error&) {
      throw ValidationError("samples:" + std::to_string(lineno) + ": malformed number");
    }
    set.samples.push_back(std::move(sample));
  }

  const auto& records = j.at("samples");
  if (records.size() != set.samples.size()) {
    throw LengthMismatch("samples: provenance lists " + std::to_string(records.size()) +
                         " records for " + std::to_string(set.samples.size()) + " rows");
  }
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto& s = set.samples[i];
    s.scenario_key = key_from_hex(records[i].at("scenario_key").get<std::string>());
    s.advance_key = key_from_hex(records[i].at("advance_key").get<std::string>());
    s.taken = records[i].at("taken").get<int>();
    s.w = records[i].at("w").get<double>();
  }
  return set;
}

}  // namespace mcl
