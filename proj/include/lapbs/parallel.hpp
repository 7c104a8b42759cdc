#pragma once

// Fan-out of the per-node elliptic solves. Each node is solved exactly once
// by a statically assigned worker (node j -> worker j mod W) into its own
// result slot; the caller's reduction runs after all workers have joined.

#include <chrono>
#include <exception>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "lapbs/contour.hpp"
#include "lapbs/inversion.hpp"

namespace lapbs {

struct SpeedupRow {
  int workers{1};
  double seconds{0.0};
  double speedup{1.0};
};

class EnsembleError : public std::runtime_error {
 public:
  EnsembleError(const std::string& what, int node) : std::runtime_error(what), node_(node) {}
  int node() const { return node_; }

 private:
  int node_;
};

struct EnsembleRun {
  TransformEnsemble ensemble;
  SpeedupRow timing;  // speedup is relative to itself until compared
};

/// Solve `solver(z)` for every conjugate-half node of `contour` using
/// `workers` threads. `solver` must be safe to call concurrently; it sees only
/// its own z. A failing node is retried once before the run aborts.
template <class Solver>
EnsembleRun solve_ensemble(const Solver& solver, const ContourParams& contour, int workers) {
  if (workers < 1) throw std::invalid_argument("solve_ensemble: need at least one worker");
  EnsembleRun run{TransformEnsemble{contour, conjugate_half_nodes(contour), {}}, SpeedupRow{workers, 0.0, 1.0}};
  auto& ens = run.ensemble;
  const int n = static_cast<int>(ens.nodes.size());
  ens.values.assign(n, {});
  std::vector<std::exception_ptr> failure(n);
  std::vector<char> failed(n, 0);

  auto work = [&](int w) {
    for (int j = w; j < n; j += workers) {
      for (int attempt = 0; attempt < 2; ++attempt) {
        try {
          ens.values[j] = solver(ens.nodes[j].z);
          failed[j] = 0;
          break;
        } catch (...) {
          failed[j] = 1;
          failure[j] = std::current_exception();
        }
      }
    }
  };

  const auto t0 = std::chrono::steady_clock::now();
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
  }  // join
  run.timing.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  for (int j = 0; j < n; ++j)
    if (failed[j]) {
      std::string msg = "solve_ensemble: node " + std::to_string(j) + " failed twice";
      try {
        std::rethrow_exception(failure[j]);
      } catch (const std::exception& e) {
        msg += ": ";
        msg += e.what();
      } catch (...) {
      }
      throw EnsembleError(msg, j);
    }
  return run;
}

/// Time the ensemble at each worker count; speedup = time(first) / time(k).
/// The first entry is the baseline and should be 1.
template <class Solver>
std::vector<SpeedupRow> speedup_table(const Solver& solver, const ContourParams& contour,
                                      const std::vector<int>& worker_counts) {
  std::vector<SpeedupRow> rows;
  for (int w : worker_counts) rows.push_back(solve_ensemble(solver, contour, w).timing);
  if (!rows.empty())
    for (auto& r : rows) r.speedup = rows.front().seconds / r.seconds;
  return rows;
}

}  // namespace lapbs
