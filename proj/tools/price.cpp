// price: command-line driver for the pricing experiments.
//
//   price run --example ex1 --config configs/ex1.json --workers 4 --out out
//   price oracle
//   price reference --rebuild

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "lapbs/experiments.hpp"

namespace {

void print_sweeps(const lapbs::ExperimentReport& rep) {
  for (const auto& [name, rows] : rep.sweeps) {
    std::printf("%s\n", name.c_str());
    for (const auto& r : rows)
      std::printf("  %6d  h=%-10.6g  err=%.6e  rate=%s\n", r.cells, r.h, r.error, lapbs::rate_str(r.rate).c_str());
  }
  for (const auto& r : rep.speedup)
    std::printf("workers=%d  %.3f s  speedup %.3f\n", r.workers, r.seconds, r.speedup);
  std::printf("max imaginary residual = %.3e (%.3e of max|u|)\n", rep.max_imag_residual, rep.max_imag_residual_ratio);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Laplace-transform option pricing experiments"};
  app.require_subcommand(1);

  std::string example = "ex1", config_path, out_dir;
  int workers = 0;
  auto* run = app.add_subcommand("run", "run one example and write its tables");
  run->add_option("--example", example, "ex1 | ex2 | ex3")->check(CLI::IsMember({"ex1", "ex2", "ex3"}));
  run->add_option("--config", config_path, "JSON config (defaults are used when omitted)");
  run->add_option("--workers", workers, "threads for the per-node solves")->check(CLI::PositiveNumber);
  run->add_option("--out", out_dir, "output directory");

  auto* oracle = app.add_subcommand("oracle", "run the transform oracles and property suites");

  bool rebuild = false;
  std::string ref_config;
  auto* reference = app.add_subcommand("reference", "build or check the basket reference cache");
  reference->add_flag("--rebuild", rebuild, "rebuild even if a matching cache exists");
  reference->add_option("--config", ref_config, "ex3 config naming the cache");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      auto cfg = config_path.empty() ? lapbs::default_config(example) : lapbs::load_config(config_path, example);
      if (cfg.example != example) throw lapbs::ConfigError("config is for " + cfg.example + ", not " + example);
      if (workers > 0) cfg.workers = workers;
      if (!out_dir.empty()) cfg.out_dir = out_dir;
      lapbs::ExperimentReport rep;
      if (example == "ex1")
        rep = lapbs::run_example1(cfg);
      else if (example == "ex2")
        rep = lapbs::run_example2(cfg);
      else
        rep = lapbs::run_example3(cfg);
      rep.write(cfg.out_dir);
      print_sweeps(rep);
      std::printf("wrote %zu tables to %s\n", rep.tables.size(), cfg.out_dir.c_str());
      return 0;
    }
    if (*oracle) {
      const auto rep = lapbs::run_oracles();
      for (const auto& c : rep.checks)
        std::printf("%s  %s  (%s)\n", c.passed ? "PASS" : "FAIL", c.name.c_str(), c.detail.c_str());
      return rep.ok() ? 0 : 1;
    }
    if (*reference) {
      const auto cfg = ref_config.empty() ? lapbs::default_config("ex3") : lapbs::load_config(ref_config, "ex3");
      bool built = false;
      const auto f = lapbs::basket_reference(cfg, rebuild, &built);
      std::printf("%s %s (%d x %d cells, %zu values)\n", built ? "built" : "loaded", cfg.reference.cache.c_str(),
                  f.mesh.M1, f.mesh.M2, f.values.size());
      return 0;
    }
  } catch (const lapbs::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
