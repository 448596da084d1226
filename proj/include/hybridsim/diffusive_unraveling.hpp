#pragma once

#include <optional>
#include <vector>

#include "hybridsim/hybrid_state.hpp"
#include "hybridsim/model_spec.hpp"
#include "hybridsim/rng.hpp"

namespace hybridsim {

// Choice of the free complex-noise self correlation E[dxi dxi^T].
enum class XiXiChoice {
  Zero,       // quantum-state-diffusion convention
  Monitored,  // dxi = G^dag DC^+ dW, deterministic in dW
  Custom,     // user-supplied symmetric matrix
};

enum class QuantumNoiseLevel {
  Full,        // E[dxi dxi^dag] = DQ
  ReducedMin,  // E[dxi dxi^dag] = eta * G^dag DC^+ G
};

struct NoiseSpec {
  XiXiChoice choice = XiXiChoice::Zero;
  cmat custom_C;  // used by Custom; must be complex symmetric, A x A
  QuantumNoiseLevel level = QuantumNoiseLevel::Full;
  double eta = 1.0;
};

// Real covariance of the stacked vector (Re dxi, Im dxi, dW) per unit time.
// Correlation conventions: E[dW dxi^T] = G dt, E[dW dxi^dag] = conj(G) dt,
// E[dxi dxi^dag] = DQ_target dt, E[dW dW^T] = DC dt.
struct NoiseCovariance {
  int A = 0;
  int N = 0;
  rmat sigma;
  rmat factor;  // sigma = factor * factor^T (eigen factorization)
  bool monitored = false;
  cmat F;        // monitored: dxi = F dW
  rmat W_factor;  // monitored: DC = W_factor * W_factor^T
};

// Assembles and PSD-checks the joint covariance; throws InfeasibleNoiseChoice
// (with the most negative 2x2 principal minor) when the requested dxi.dxi
// correlation cannot coexist with (DQ_target, DC, G).
NoiseCovariance build_noise_covariance(const cmat& DQ_target, const rmat& DC,
                                       const cmat& G, const NoiseSpec& spec,
                                       double tol = 1e-9);

struct NoiseIncrement {
  rvec dW;
  cvec dxi;
};

// Zero-mean Gaussian increments with covariance sigma * dt.  Always consumes
// the same number of variates for a given covariance object.
NoiseIncrement sample_increments(const NoiseCovariance& cov, double dt,
                                 Philox& rng);

// The non-Hermitian deterministic drift generator (-i H_fr) built from the
// current expectations <L_a>.
cmat frictional_generator(const std::vector<cmat>& L, const cvec& Lmean,
                          const cmat& DQ);
// Convenience wrapper evaluating the model at the trajectory's location.
cmat frictional_h_diffusive(const TrajectoryState& traj,
                            const DiffusiveModel& m);

// One Euler-Maruyama step of the pure-state unraveling; psi is renormalized.
TrajectoryState step_pure(const TrajectoryState& traj, const DiffusiveModel& m,
                          const NoiseSpec& spec, double dt, Philox& rng,
                          const NoiseCovariance* fixed_cov = nullptr,
                          NoiseIncrement* used = nullptr);

// Mixed-state variant; sigma is symmetrized and trace-renormalized.
TrajectoryState step_mixed(const TrajectoryState& traj,
                           const DiffusiveModel& m, const NoiseSpec& spec,
                           double dt, Philox& rng,
                           const NoiseCovariance* fixed_cov = nullptr,
                           NoiseIncrement* used = nullptr);

// d E[tr sigma^2]/dt of the full-noise mixed unraveling.
double purity_rate(const cmat& sigma, const cmat& DQ,
                   const std::vector<cmat>& L);

// dxi = G^dag DC^+ dW; requires the monitoring condition DQ = G^dag DC^+ G.
cvec monitored_xi(const rvec& dW, const cmat& G, const rmat& DC,
                  double tol = 1e-8);

// Signal-replayable stepper: a single real noise dW drives both x and psi,
// and the psi update consumes exactly the dW recoverable from the recorded
// x increments, so replay is bit-identical.
TrajectoryState step_monitored(const TrajectoryState& traj,
                               const DiffusiveModel& m, double dt, Philox& rng,
                               const NoiseCovariance* fixed_cov = nullptr,
                               NoiseIncrement* used = nullptr);

// Reconstruct the psi series from a recorded classical path.
std::vector<cvec> replay_monitored(const std::vector<std::vector<double>>& xs,
                                   const cvec& psi0, const DiffusiveModel& m,
                                   double dt);

// ---------------------------------------------------------------------------
// Ensemble driver
// ---------------------------------------------------------------------------

enum class DiffusiveKind { Pure, Mixed, Monitored };

struct DiffusiveOptions {
  double dt = 1e-3;
  double t_end = 1.0;
  std::vector<double> sample_times;
  NoiseSpec spec;
  DiffusiveKind kind = DiffusiveKind::Pure;
  bool record_path = false;   // keep x at every step (replay tests)
  bool record_noise = false;  // keep dW at every step
};

struct DiffusiveSample {
  double t = 0.0;
  std::vector<double> x;
  cvec psi;
  cmat sigma;
};

struct DiffusiveTrajectory {
  std::vector<DiffusiveSample> samples;
  std::vector<std::vector<double>> x_path;
  std::vector<rvec> dW_path;
};

DiffusiveTrajectory simulate_diffusive_trajectory(const TrajectoryState& init,
                                                  const DiffusiveModel& m,
                                                  const DiffusiveOptions& opt,
                                                  Philox& rng);

// Histogram of trajectory samples on a grid: mean density blocks plus
// elementwise standard errors.
struct EnsembleGrid {
  HybridStateGrid mean;
  std::vector<rmat> se_re;
  std::vector<rmat> se_im;
  int count = 0;
};

EnsembleGrid ensemble_estimate_grid(const std::vector<DiffusiveSample>& at_time,
                                    const GridSpec& grid, int dim);

}  // namespace hybridsim
