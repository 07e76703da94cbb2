#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "mcl/error.hpp"
#include "mcl/exact_solver.hpp"
#include "mcl/experiment.hpp"
#include "mcl/mlp.hpp"
#include "mcl/parallel.hpp"
#include "mcl/report.hpp"
#include "mcl/tabular_mdp.hpp"
#include "mcl/text_config.hpp"

namespace fs = std::filesystem;

namespace {

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  int workers = mcl::default_worker_count(1);
  std::string out;
  bool quiet = false;
};

void add_common(CLI::App* cmd, CommonOptions& opt, const std::string& config_help) {
  cmd->add_option("--config", opt.config, config_help)->required();
  cmd->add_option("--seed", opt.seed, "Master seed (overrides the config)");
  cmd->add_option("--workers", opt.workers, "Worker threads (default: MCL_WORKERS or 1)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--out", opt.out, "Output directory");
  cmd->add_flag("--quiet", opt.quiet, "Only print errors");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw mcl::ValidationError(path + ": cannot open file");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
}

int cmd_solve(const CommonOptions& opt) {
  const auto instance = mcl::load_instance_any(opt.config);
  mcl::SolverOptions solver;
  solver.workers = opt.workers;
  const mcl::LostSalesModel model(instance);
  const mcl::LostSalesMdp mdp(model);
  const auto optimal = mcl::solve_optimal_average_cost(mdp, solver);
  const auto bs = mcl::best_base_stock(mdp, solver);

  std::cout << "instance " << mcl::instance_id(instance) << " (hash " << mcl::instance_hash(instance)
            << ", " << mdp.size() << " states, order_cap " << model.caps().order_cap
            << ", position_cap " << model.caps().position_cap << ")\n";
  std::cout << "optimal gain " << mcl::format_double(optimal.gain) << " (" << optimal.iterations
            << " iterations)\n";
  std::cout << "best base-stock S=" << bs.level << " gain " << mcl::format_double(bs.gain)
            << " gap " << mcl::format_double(mcl::gap_percent(bs.gain, optimal.gain)) << "%\n";

  if (!opt.out.empty()) {
    fs::create_directories(opt.out);
    const auto hash = mcl::instance_hash(instance);
    write_file(fs::path(opt.out) / "instance.txt", mcl::write_instance(instance));
    write_file(fs::path(opt.out) / "optimal_policy.txt",
               mcl::write_tabular_policy(optimal.policy, hash));
    write_file(fs::path(opt.out) / "relative_values.txt",
               mcl::write_value_table(optimal.relative, hash));
    std::ostringstream csv;
    csv << "# mcl-base-stock v1\nlevel,gain,gap_percent\n";
    for (std::size_t s = 0; s < bs.gains.size(); ++s) {
      csv << s << ',' << mcl::format_double(bs.gains[s]) << ','
          << mcl::format_double(mcl::gap_percent(bs.gains[s], optimal.gain)) << '\n';
    }
    write_file(fs::path(opt.out) / "base_stock.csv", csv.str());
  }
  return 0;
}

int cmd_mcl(const CommonOptions& opt) {
  auto cfg = mcl::load_experiment(opt.config);
  if (opt.seed) {
    cfg.seed = *opt.seed;
  }
  cfg.set_workers(opt.workers);
  cfg.validate();
  const std::string out =
      opt.out.empty() ? (fs::path("runs") / mcl::instance_id(cfg.instance)).string() : opt.out;
  const auto result = mcl::run_mcl(cfg, out, opt.quiet ? nullptr : &std::cerr);
  if (!opt.quiet) {
    std::cout << mcl::render_gap_table({result.report});
    std::cout << "artifacts written to " << out << "\n";
  }
  return 0;
}

int cmd_bench(const CommonOptions& opt) {
  auto bench = mcl::load_bench(opt.config);
  if (opt.seed) {
    bench.experiment.seed = *opt.seed;
  }
  bench.experiment.set_workers(opt.workers);
  bench.experiment.validate();
  const std::string out = opt.out.empty() ? std::string("runs/bench") : opt.out;
  fs::create_directories(out);
  const auto reports = mcl::run_benchmark(bench.instances(), bench.experiment, bench.run_mcl, out,
                                          opt.quiet ? nullptr : &std::cerr);
  const auto table = mcl::render_gap_table(reports);
  write_file(fs::path(out) / "bench_gap.csv", mcl::write_gap_csv(reports));
  write_file(fs::path(out) / "bench_timings.csv", mcl::write_timings_csv(reports));
  write_file(fs::path(out) / "bench_table.txt", table);
  if (!opt.quiet) {
    std::cout << table;
  }
  for (const auto& r : reports) {
    if (!r.error.empty()) {
      return 2;
    }
  }
  return 0;
}

int cmd_eval(const CommonOptions& opt, const std::string& artifact_path) {
  const auto instance = mcl::load_instance_any(opt.config);
  const auto artifact = mcl::read_artifact(read_file(artifact_path));
  mcl::SolverOptions solver;
  solver.workers = opt.workers;
  const double gain = mcl::evaluate_artifact(instance, artifact, solver);
  const mcl::LostSalesModel model(instance);
  const double optimal = mcl::solve_optimal_average_cost(mcl::LostSalesMdp(model), solver).gain;
  std::cout << "instance " << mcl::instance_id(instance) << " generation " << artifact.generation
            << "\n";
  std::cout << "gain " << mcl::format_double(gain) << "\n";
  std::cout << "optimal gain " << mcl::format_double(optimal) << "\n";
  std::cout << "gap " << mcl::format_double(mcl::gap_percent(gain, optimal)) << "%\n";
  return 0;
}

int cmd_report(const std::string& path) {
  std::string file = path;
  if (fs::is_directory(path)) {
    file = (fs::path(path) / "gap_report.csv").string();
    if (!fs::exists(file)) {
      file = (fs::path(path) / "bench_gap.csv").string();
    }
  }
  std::cout << mcl::render_gap_table(mcl::read_gap_csv(read_file(file)));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Approximate policy iteration with rollouts and neural classifiers"};
  app.require_subcommand(1);

  CommonOptions solve_opt;
  auto* solve = app.add_subcommand("solve", "Exact optimum and best base-stock for an instance");
  add_common(solve, solve_opt, "Instance or experiment file");

  CommonOptions mcl_opt;
  auto* run = app.add_subcommand("mcl", "Run MCL generations from an experiment file");
  add_common(run, mcl_opt, "Experiment file");

  CommonOptions bench_opt;
  auto* bench = app.add_subcommand("bench", "Sweep a grid of instances");
  add_common(bench, bench_opt, "Benchmark file");

  CommonOptions eval_opt;
  std::string artifact;
  auto* eval = app.add_subcommand("eval", "Exactly evaluate a stored policy artifact");
  add_common(eval, eval_opt, "Instance or experiment file");
  eval->add_option("--artifact", artifact, "Neural policy artifact")->required();

  std::string report_path;
  auto* report = app.add_subcommand("report", "Render a stored gap report");
  report->add_option("--out,path", report_path, "Run directory or gap CSV")->required();
  report->add_flag("--quiet", "Ignored");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*solve) {
      return cmd_solve(solve_opt);
    }
    if (*run) {
      return cmd_mcl(mcl_opt);
    }
    if (*bench) {
      return cmd_bench(bench_opt);
    }
    if (*eval) {
      return cmd_eval(eval_opt, artifact);
    }
    if (*report) {
      return cmd_report(report_path);
    }
  } catch (const mcl::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
