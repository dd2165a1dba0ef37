#include "ecim/intrinsic.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace ecim {

namespace {

constexpr int kIcmHidden[] = {32, 32};

// Mean over rows of the squared Euclidean distance between two equal-shape
// matrices; also writes d(mean)/d(a) into dout if given.
double mean_sq_dist(const Matrix& a, const Matrix& b, Matrix* dout) {
  const double inv_n = 1.0 / a.rows;
  double total = 0.0;
  if (dout != nullptr) *dout = Matrix(a.rows, a.cols);
  for (std::size_t k = 0; k < a.data.size(); ++k) {
    const double diff = a.data[k] - b.data[k];
    total += diff * diff;
    if (dout != nullptr) dout->data[k] = 2.0 * diff * inv_n;
  }
  return total * inv_n;
}

Matrix hcat(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows, a.cols + b.cols);
  for (int i = 0; i < a.rows; ++i) {
    std::copy(a.row(i), a.row(i) + a.cols, out.row(i));
    std::copy(b.row(i), b.row(i) + b.cols, out.row(i) + a.cols);
  }
  return out;
}

void split_cols(const Matrix& m, int left_cols, Matrix& left, Matrix& right) {
  left = Matrix(m.rows, left_cols);
  right = Matrix(m.rows, m.cols - left_cols);
  for (int i = 0; i < m.rows; ++i) {
    std::copy(m.row(i), m.row(i) + left_cols, left.row(i));
    std::copy(m.row(i) + left_cols, m.row(i) + m.cols, right.row(i));
  }
}

}  // namespace

IcmNets make_icm(int obs_dim, int action_dim, double eta, double lr, Rng& enc_rng,
                 Rng& fwd_rng, Rng& inv_rng) {
  MlpParams encoder = make_mlp(obs_dim, kIcmHidden, kFeatureDim, enc_rng);
  MlpParams forward_model = make_mlp(kFeatureDim + action_dim, kIcmHidden, kFeatureDim, fwd_rng);
  MlpParams inverse_model = make_mlp(2 * kFeatureDim, kIcmHidden, action_dim, inv_rng);
  IcmNets nets{std::move(encoder), std::move(forward_model), std::move(inverse_model), eta,
               AdamState(0, lr), AdamState(0, lr), AdamState(0, lr)};
  nets.encoder_adam = AdamState(nets.encoder.param_count(), lr);
  nets.forward_adam = AdamState(nets.forward_model.param_count(), lr);
  nets.inverse_adam = AdamState(nets.inverse_model.param_count(), lr);
  return nets;
}

std::vector<double> icm_reward(const IcmNets& nets, const Matrix& obs,
                               const Matrix& actions, const Matrix& next_obs) {
  std::vector<double> rewards(obs.rows, 0.0);
  if (nets.eta == 0.0) return rewards;
  const Matrix phi_s = mlp_forward(nets.encoder, obs);
  const Matrix phi_s2 = mlp_forward(nets.encoder, next_obs);
  const Matrix pred = mlp_forward(nets.forward_model, hcat(phi_s, actions));
  for (int i = 0; i < obs.rows; ++i) {
    double err = 0.0;
    const double* p = pred.row(i);
    const double* f = phi_s2.row(i);
    for (int d = 0; d < kFeatureDim; ++d) {
      const double diff = f[d] - p[d];
      err += diff * diff;
    }
    rewards[i] = nets.eta * err;
  }
  return rewards;
}

IcmLosses icm_train(IcmNets& nets, const Matrix& obs, const Matrix& actions,
                    const Matrix& next_obs) {
  constexpr double kForwardWeight = 0.2;
  constexpr double kInverseWeight = 0.8;

  MlpCache enc_cache_s, enc_cache_s2, fwd_cache, inv_cache;
  const Matrix phi_s = mlp_forward(nets.encoder, obs, &enc_cache_s);
  const Matrix phi_s2 = mlp_forward(nets.encoder, next_obs, &enc_cache_s2);

  // Forward model sees phi(s) as a constant input; its loss neither shapes
  // the encoder (stop-gradient) nor the target phi(s').
  const Matrix pred = mlp_forward(nets.forward_model, hcat(phi_s, actions), &fwd_cache);
  Matrix dpred;
  IcmLosses losses;
  losses.forward_loss = mean_sq_dist(pred, phi_s2, &dpred);

  const Matrix inv_in = hcat(phi_s, phi_s2);
  const Matrix a_hat = mlp_forward(nets.inverse_model, inv_in, &inv_cache);
  Matrix da_hat;
  losses.inverse_loss = mean_sq_dist(a_hat, actions, &da_hat);

  if (!std::isfinite(losses.forward_loss) || !std::isfinite(losses.inverse_loss)) {
    return losses;  // skip the step, report what was measured
  }

  MlpGrads enc_grads = make_grads(nets.encoder);
  MlpGrads fwd_grads = make_grads(nets.forward_model);
  MlpGrads inv_grads = make_grads(nets.inverse_model);

  for (double& v : dpred.data) v *= kForwardWeight;
  mlp_backward(nets.forward_model, fwd_cache, dpred, fwd_grads);  // input grad dropped

  for (double& v : da_hat.data) v *= kInverseWeight;
  const Matrix dinv_in = mlp_backward(nets.inverse_model, inv_cache, da_hat, inv_grads);
  Matrix dphi_s, dphi_s2;
  split_cols(dinv_in, kFeatureDim, dphi_s, dphi_s2);
  mlp_backward(nets.encoder, enc_cache_s, dphi_s, enc_grads);
  mlp_backward(nets.encoder, enc_cache_s2, dphi_s2, enc_grads);

  try {
    adam_step(param_blocks(nets.encoder), grad_blocks(enc_grads), nets.encoder_adam);
    adam_step(param_blocks(nets.forward_model), grad_blocks(fwd_grads), nets.forward_adam);
    adam_step(param_blocks(nets.inverse_model), grad_blocks(inv_grads), nets.inverse_adam);
  } catch (const std::runtime_error&) {
    // non-finite gradients: leave parameters as they are
  }
  return losses;
}

RndNets make_rnd(int obs_dim, double eta, double lr, Rng& target_rng, Rng& predictor_rng) {
  MlpParams target = make_mlp(obs_dim, kIcmHidden, kFeatureDim, target_rng);
  MlpParams predictor = make_mlp(obs_dim, kIcmHidden, kFeatureDim, predictor_rng);
  RndNets nets{std::move(target), std::move(predictor), eta, AdamState(0, lr)};
  nets.predictor_adam = AdamState(nets.predictor.param_count(), lr);
  return nets;
}

std::vector<double> rnd_reward(const RndNets& nets, const Matrix& obs) {
  std::vector<double> rewards(obs.rows, 0.0);
  if (nets.eta == 0.0) return rewards;
  const Matrix tgt = mlp_forward(nets.target, obs);
  const Matrix pred = mlp_forward(nets.predictor, obs);
  for (int i = 0; i < obs.rows; ++i) {
    double err = 0.0;
    const double* p = pred.row(i);
    const double* f = tgt.row(i);
    for (int d = 0; d < kFeatureDim; ++d) {
      const double diff = f[d] - p[d];
      err += diff * diff;
    }
    rewards[i] = nets.eta * err;
  }
  return rewards;
}

double rnd_train(RndNets& nets, const Matrix& obs) {
  const Matrix tgt = mlp_forward(nets.target, obs);
  MlpCache cache;
  const Matrix pred = mlp_forward(nets.predictor, obs, &cache);
  Matrix dpred;
  const double loss = mean_sq_dist(pred, tgt, &dpred);
  if (!std::isfinite(loss)) return loss;
  MlpGrads grads = make_grads(nets.predictor);
  mlp_backward(nets.predictor, cache, dpred, grads);
  try {
    adam_step(param_blocks(nets.predictor), grad_blocks(grads), nets.predictor_adam);
  } catch (const std::runtime_error&) {
  }
  return loss;
}

std::uint64_t rnd_target_checksum(const RndNets& nets) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto fold = [&h](double v) { h = (h * 0x100000001b3ULL) ^ std::bit_cast<std::uint64_t>(v); };
  for (const auto& layer : nets.target.layers) {
    for (double w : layer.weight.data) fold(w);
    for (double b : layer.bias) fold(b);
  }
  return h;
}

DensityModel::DensityModel(int dims, int bins, double alpha, double lo, double hi)
    : dims_(dims), bins_(bins), alpha_(alpha), lo_(lo), hi_(hi),
      counts_(static_cast<std::size_t>(dims) * bins, 0) {
  if (dims < 1 || bins < 2 || alpha <= 0.0 || hi <= lo) {
    throw std::invalid_argument("DensityModel: bad construction parameters");
  }
}

int DensityModel::bin_of(double value) const {
  const double clamped = std::clamp(value, lo_, hi_);
  const int bin = static_cast<int>(std::floor((clamped - lo_) / (hi_ - lo_) * bins_));
  return std::clamp(bin, 0, bins_ - 1);
}

double DensityModel::density(std::span<const double> obs) const {
  if (obs.size() != static_cast<std::size_t>(dims_)) {
    throw std::invalid_argument("DensityModel: dimension mismatch");
  }
  const double denom = static_cast<double>(total_) + alpha_ * bins_;
  double rho = 1.0;
  for (int d = 0; d < dims_; ++d) {
    const std::int64_t c = counts_[static_cast<std::size_t>(d) * bins_ + bin_of(obs[d])];
    rho *= (static_cast<double>(c) + alpha_) / denom;
  }
  return rho;
}

DensityModel::Densities DensityModel::observe(std::span<const double> obs) {
  Densities out;
  out.rho_before = density(obs);
  for (int d = 0; d < dims_; ++d) {
    counts_[static_cast<std::size_t>(d) * bins_ + bin_of(obs[d])] += 1;
  }
  total_ += 1;
  out.rho_after = density(obs);
  return out;
}

double pseudo_count(double rho_before, double rho_after) {
  if (!(rho_before > 0.0 && rho_before < 1.0 && rho_after > 0.0 && rho_after < 1.0)) {
    throw std::invalid_argument("pseudo_count: densities must lie in (0, 1)");
  }
  if (rho_after < rho_before) {
    throw std::domain_error("pseudo_count: density decreased for the visited state");
  }
  return rho_before * (1.0 - rho_after) / (rho_after * (1.0 - rho_before));
}

double count_bonus(double pseudo_count_value, double eta) {
  return eta / std::sqrt(std::max(pseudo_count_value, 1e-8));
}

double count_bonus_for(DensityModel& model, std::span<const double> obs, double eta) {
  const auto d = model.observe(obs);
  double n_hat = 1.0;
  try {
    n_hat = pseudo_count(d.rho_before, d.rho_after);
  } catch (const std::domain_error&) {
    n_hat = 1.0;  // inconsistent density update: fall back to a unit count
  }
  return count_bonus(n_hat, eta);
}

void RunningNormalizer::observe(double v) {
  count_ += 1;
  const double delta = v - mean_;
  mean_ += delta / static_cast<double>(count_);
  m2_ += delta * (v - mean_);
}

double RunningNormalizer::std() const {
  if (count_ < 2) return 1.0;
  return std::sqrt(m2_ / static_cast<double>(count_));
}

double RunningNormalizer::normalize(double v) const {
  const double divisor = std::max(std(), 1e-4);
  return std::clamp(v / divisor, 0.0, clip_);
}

double combine_rewards(double r, double icm, double rnd, double cnt,
                       IntrinsicNormalizer& normalizer) {
  return r + normalizer.icm.observe_and_normalize(icm) +
         normalizer.rnd.observe_and_normalize(rnd) +
         normalizer.cnt.observe_and_normalize(cnt);
}

}  // namespace ecim
