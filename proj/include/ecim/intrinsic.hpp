#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "ecim/adam.hpp"
#include "ecim/matrix.hpp"
#include "ecim/mlp.hpp"
#include "ecim/rng.hpp"

namespace ecim {

inline constexpr int kFeatureDim = 16;

// Curiosity module: encoder phi, forward model f (feature+action -> feature),
// inverse model g (feature pair -> action). Training weights the two losses
// 0.2 forward / 0.8 inverse, and phi only receives gradients from the inverse
// loss (forward-loss inputs and targets are treated as constants), which
// keeps the features from collapsing to a constant.
struct IcmNets {
  MlpParams encoder;
  MlpParams forward_model;
  MlpParams inverse_model;
  double eta = 0.1;
  AdamState encoder_adam;
  AdamState forward_adam;
  AdamState inverse_adam;
};

IcmNets make_icm(int obs_dim, int action_dim, double eta, double lr, Rng& enc_rng,
                 Rng& fwd_rng, Rng& inv_rng);

// r_icm per row: eta * ||phi(s') - f(phi(s), a)||^2, using the nets as they
// are (training happens separately).
std::vector<double> icm_reward(const IcmNets& nets, const Matrix& obs,
                               const Matrix& actions, const Matrix& next_obs);

struct IcmLosses {
  double forward_loss = 0.0;
  double inverse_loss = 0.0;
};

// One Adam step on 0.2*L_fwd + 0.8*L_inv over the given transitions.
// Skips the step (returning the measured losses) if anything is non-finite.
IcmLosses icm_train(IcmNets& nets, const Matrix& obs, const Matrix& actions,
                    const Matrix& next_obs);

// Distillation novelty: frozen random target vs trained predictor.
struct RndNets {
  MlpParams target;   // frozen after construction
  MlpParams predictor;
  double eta = 0.1;
  AdamState predictor_adam;
};

RndNets make_rnd(int obs_dim, double eta, double lr, Rng& target_rng, Rng& predictor_rng);

// r_rnd per row: eta * ||f_tgt(s) - f_pred(s)||^2.
std::vector<double> rnd_reward(const RndNets& nets, const Matrix& obs);

// One Adam step on mean ||f_tgt - f_pred||^2; returns the pre-step loss.
double rnd_train(RndNets& nets, const Matrix& obs);

// XOR-fold over the raw bit patterns of the target parameters; constant for
// the lifetime of a run by construction.
std::uint64_t rnd_target_checksum(const RndNets& nets);

// Product-of-marginals density with Laplace smoothing: per observation
// dimension, B bins over [-5, 5] (values clamped into range), prior alpha=1.
class DensityModel {
 public:
  DensityModel(int dims, int bins = 16, double alpha = 1.0,
               double lo = -5.0, double hi = 5.0);

  struct Densities {
    double rho_before = 0.0;
    double rho_after = 0.0;
  };

  // rho(s) before counting the visit, then rho'(s) after; both in (0, 1).
  Densities observe(std::span<const double> obs);

  // Read-only density query (no count update).
  double density(std::span<const double> obs) const;

  int bin_of(double value) const;
  std::int64_t total() const { return total_; }

 private:
  int dims_;
  int bins_;
  double alpha_;
  double lo_, hi_;
  std::vector<std::int64_t> counts_;  // dims x bins
  std::int64_t total_ = 0;
};

// N-hat = rho*(1 - rho') / (rho'*(1 - rho)). rho' < rho signals an
// inconsistent density model: callers substitute 1 (see count_bonus_for).
double pseudo_count(double rho_before, double rho_after);

// r_cnt = eta / sqrt(max(N-hat, 1e-8)).
double count_bonus(double pseudo_count_value, double eta);

// Convenience: density update + Eq.-chain bonus for one observation.
double count_bonus_for(DensityModel& model, std::span<const double> obs, double eta);

// Per-source running scale (Welford). normalize() divides by the running
// population std (floored at 1e-4; defined as 1 until two samples have been
// seen) and clips to [0, clip_bound].
class RunningNormalizer {
 public:
  explicit RunningNormalizer(double clip_bound = 5.0) : clip_(clip_bound) {}

  void observe(double v);
  double std() const;
  double normalize(double v) const;
  double observe_and_normalize(double v) {
    observe(v);
    return normalize(v);
  }
  std::int64_t count() const { return count_; }

 private:
  double clip_;
  std::int64_t count_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

struct IntrinsicNormalizer {
  RunningNormalizer icm{5.0};
  RunningNormalizer rnd{5.0};
  RunningNormalizer cnt{5.0};
};

// r-tilde = r + sum of normalized intrinsic sources. Each raw source is fed
// to its running normalizer (state updates) and the normalized, clipped
// value enters the sum; the extrinsic reward passes through untouched.
double combine_rewards(double r, double icm, double rnd, double cnt,
                       IntrinsicNormalizer& normalizer);

}  // namespace ecim
