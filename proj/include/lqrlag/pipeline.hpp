#pragma once

#include "lqrlag/certificate.hpp"
#include "lqrlag/hamiltonian.hpp"
#include "lqrlag/scenario.hpp"

#include <optional>
#include <vector>

namespace lqrlag {

/// How far the pipeline runs. Stationary: Frequency < Lagrange < Riccati < Full.
/// Spatial averaging: Search runs the gap search only; anything else runs everything.
enum class Stage { Frequency, Lagrange, Riccati, Search, Full };

struct PipelineOptions {
  Stage stage = Stage::Full;
  unsigned seed = 42;
  std::optional<double> tol;  // overrides Tolerances::base
};

/// Module errors become failed records; only malformed scenarios throw.
Certificate run_pipeline(const Scenario& scenario, const PipelineOptions& opts = {});

/// Processes through v(0) = 0: a random smooth control on [0, t_on], then the feedback
/// xi = K v, both realized as piecewise-linear controls so each sample is an exact trajectory
/// on the uniform grid. The grid runs until |v| has decayed by 1e-10.
std::vector<ControlTrajectory> m0_samples(const Mat& a, const Mat& b, const Mat& K, int count, unsigned seed,
                                          double t_on = 4.0);

}  // namespace lqrlag
