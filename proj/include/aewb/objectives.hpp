#pragma once

#include <optional>
#include <vector>

#include "aewb/layers.hpp"

namespace aewb {

enum class Distance : uint8_t { Mse, Bce };

const char* distance_name(Distance d);
Distance distance_from_name(const std::string& s);

enum class PenaltyKind : uint8_t { SparseQuadratic, SparseKl, Contractive, VaeKl };

const char* penalty_name(PenaltyKind k);
PenaltyKind penalty_from_name(const std::string& s);

enum class NoiseKind : uint8_t { Gaussian, Cauchy, ZeroMask, ZeroOneMask };

const char* noise_name(NoiseKind k);
NoiseKind noise_from_name(const std::string& s);

struct NoiseSpec {
  NoiseKind kind = NoiseKind::Gaussian;
  double sigma = 0.1;  // gaussian std / cauchy scale
  double p = 0.1;      // mask probability per coordinate
  void validate() const;
};

struct Penalty {
  PenaltyKind kind = PenaltyKind::Contractive;
  double weight = 1e-3;
  double rho = 0.05;  // sparse target activation rate
  void validate() const;
};

struct ObjectiveSpec {
  Distance distance = Distance::Mse;
  std::vector<Penalty> penalties;
  std::optional<NoiseSpec> corruption;
  std::optional<double> class_weight;  // alpha; applied via weighted_reconstruction
  void validate() const;
};

// Reconstruction distances: mean over instances of the per-instance value
// (mse: mean squared coordinate error; bce: mean coordinate cross entropy).
Val mse_loss(Tape& t, Val x, Val xr);
Val bce_loss(Tape& t, Val x, Val xr);
Val distance_loss(Tape& t, Distance d, Val x, Val xr);

Val sparse_penalty_quadratic(Tape& t, Val codes, double rho);
Val sparse_penalty_kl(Tape& t, Val codes, double rho);

// Squared Frobenius norm of the encoder Jacobian, summed over the batch,
// built from tape ops so the penalty is differentiable w.r.t. the weights.
// The encoder (layers before code_index) must be all dense.
Val contractive_penalty(Tape& t, const Network& net, const ForwardTrace& trace);

Val vae_kl(Tape& t, Val mu, Val logvar);

// Input corruption nu(x); identity when the network runs in eval mode.
Tensor corrupt(const Tensor& x, const NoiseSpec& spec, Rng& rng, Mode mode);

// Eq-style class weighting: (1-alpha) * sum over negatives of d + alpha *
// sum over positives. Either batch may be empty.
Val weighted_reconstruction(Tape& t, const Network& net, const Tensor& neg, const Tensor& pos,
                            double alpha, Distance d, Rng* rng);

// d(x, g(f(nu(x)))) + sum of weighted penalties; reconstruction is always
// compared against the clean x. Returns the scalar objective; the forward
// trace is exposed for callers that need the code or sampler stats.
Val total_objective(Tape& t, const Network& net, const Tensor& x, const ObjectiveSpec& spec,
                    Rng* rng, ForwardTrace* trace_out = nullptr);

}  // namespace aewb
