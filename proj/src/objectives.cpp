#include "aewb/objectives.hpp"

#include <cmath>

#include "aewb/errors.hpp"

namespace aewb {

const char* distance_name(Distance d) { return d == Distance::Mse ? "mse" : "bce"; }

Distance distance_from_name(const std::string& s) {
  if (s == "mse") return Distance::Mse;
  if (s == "bce") return Distance::Bce;
  throw ConfigError("unknown distance: " + s);
}

const char* penalty_name(PenaltyKind k) {
  switch (k) {
    case PenaltyKind::SparseQuadratic: return "sparse_quadratic";
    case PenaltyKind::SparseKl: return "sparse_kl";
    case PenaltyKind::Contractive: return "contractive";
    case PenaltyKind::VaeKl: return "vae_kl";
  }
  return "contractive";
}

PenaltyKind penalty_from_name(const std::string& s) {
  if (s == "sparse_quadratic") return PenaltyKind::SparseQuadratic;
  if (s == "sparse_kl") return PenaltyKind::SparseKl;
  if (s == "contractive") return PenaltyKind::Contractive;
  if (s == "vae_kl") return PenaltyKind::VaeKl;
  throw ConfigError("unknown penalty kind: " + s);
}

const char* noise_name(NoiseKind k) {
  switch (k) {
    case NoiseKind::Gaussian: return "gaussian";
    case NoiseKind::Cauchy: return "cauchy";
    case NoiseKind::ZeroMask: return "zero_mask";
    case NoiseKind::ZeroOneMask: return "zero_one_mask";
  }
  return "gaussian";
}

NoiseKind noise_from_name(const std::string& s) {
  if (s == "gaussian") return NoiseKind::Gaussian;
  if (s == "cauchy") return NoiseKind::Cauchy;
  if (s == "zero_mask") return NoiseKind::ZeroMask;
  if (s == "zero_one_mask") return NoiseKind::ZeroOneMask;
  throw ConfigError("unknown noise kind: " + s);
}

void NoiseSpec::validate() const {
  if (kind == NoiseKind::Gaussian || kind == NoiseKind::Cauchy) {
    if (!(sigma > 0)) throw ConfigError("noise sigma/scale must be positive");
  } else if (p < 0 || p > 1) {
    throw ConfigError("noise p must lie in [0,1]");
  } else if (kind == NoiseKind::ZeroOneMask && p > 0.5) {
    throw ConfigError("zero_one_mask needs p <= 0.5 (zero and one each drawn with prob p)");
  }
}

void Penalty::validate() const {
  if (weight < 0) throw ConfigError("penalty weight must be >= 0");
  if ((kind == PenaltyKind::SparseQuadratic || kind == PenaltyKind::SparseKl) &&
      !(rho > 0 && rho < 1))
    throw ConfigError("sparse rho must lie in (0,1)");
}

void ObjectiveSpec::validate() const {
  for (const auto& p : penalties) p.validate();
  if (corruption) corruption->validate();
  if (class_weight && (*class_weight < 0 || *class_weight > 1))
    throw ConfigError("class_weight must lie in [0,1]");
}

Val mse_loss(Tape& t, Val x, Val xr) {
  if (!x.value().same_shape(xr.value()))
    throw DimensionError("mse shape mismatch: " + shape_str(x.value().shape()) + " vs " +
                         shape_str(xr.value().shape()));
  return t.mean(t.square(t.sub(x, xr)));
}

Val bce_loss(Tape& t, Val x, Val xr) {
  if (!x.value().same_shape(xr.value()))
    throw DimensionError("bce shape mismatch: " + shape_str(x.value().shape()) + " vs " +
                         shape_str(xr.value().shape()));
  Val one = t.leaf(Tensor::scalar(1.0));
  Val xc = t.clamp(xr, kLogEps, 1.0 - kLogEps);
  Val pos = t.mul(x, t.log(xc));
  Val neg = t.mul(t.sub(one, x), t.log(t.sub(one, xc)));
  return t.scale(t.mean(t.add(pos, neg)), -1.0);
}

Val distance_loss(Tape& t, Distance d, Val x, Val xr) {
  return d == Distance::Mse ? mse_loss(t, x, xr) : bce_loss(t, x, xr);
}

Val sparse_penalty_quadratic(Tape& t, Val codes, double rho) {
  Val rho_j = t.mean_rows(codes);
  return t.sum(t.square(t.sub(t.leaf(Tensor::scalar(rho)), rho_j)));
}

Val sparse_penalty_kl(Tape& t, Val codes, double rho) {
  Val rho_j = t.clamp(t.mean_rows(codes), kLogEps, 1.0 - kLogEps);
  Val one = t.leaf(Tensor::scalar(1.0));
  Val term_on = t.scale(t.sub(t.leaf(Tensor::scalar(std::log(rho))), t.log(rho_j)), rho);
  Val term_off = t.scale(
      t.sub(t.leaf(Tensor::scalar(std::log(1.0 - rho))), t.log(t.sub(one, rho_j))), 1.0 - rho);
  return t.sum(t.add(term_on, term_off));
}

namespace {

// Elementwise activation derivative expressed through the activated output.
Val act_derivative(Tape& t, Act act, Val h) {
  switch (act) {
    case Act::Sigmoid: return t.sub(h, t.square(h));  // h(1-h)
    case Act::Tanh: return t.sub(t.leaf(Tensor::scalar(1.0)), t.square(h));
    case Act::Relu: return t.relu_mask(h);
    case Act::Linear: return t.leaf(Tensor::full(h.value().shape(), 1.0));
  }
  throw ContractError("unreachable activation kind");
}

}  // namespace

Val contractive_penalty(Tape& t, const Network& net, const ForwardTrace& trace) {
  const int enc = net.code_index();
  for (int l = 0; l < enc; ++l)
    if (net.spec(l).kind != LayerKind::Dense)
      throw ContractError("contractive penalty requires a dense encoder; layer " +
                          std::to_string(l) + " is " + layer_kind_name(net.spec(l).kind));

  const Tensor& code = trace.code.value();
  const int B = code.dim(0), k = code.dim(1);

  // One derivative factor per encoder layer, shared across code units.
  std::vector<Val> deriv(static_cast<size_t>(enc));
  for (int l = 0; l < enc; ++l)
    deriv[static_cast<size_t>(l)] =
        act_derivative(t, net.spec(l).act, trace.outputs[static_cast<size_t>(l)]);

  // Row r of the Jacobian: back-substitute e_j through D_l W_l^T per layer.
  Val total = t.leaf(Tensor::scalar(0.0));
  for (int j = 0; j < k; ++j) {
    Tensor e({B, k});
    for (int b = 0; b < B; ++b) e.at(b, j) = 1.0;
    Val row = t.leaf(std::move(e));
    for (int l = enc - 1; l >= 0; --l) {
      Val scaled = net.spec(l).act == Act::Linear ? row : t.mul(row, deriv[static_cast<size_t>(l)]);
      row = t.matmul_tb(scaled, trace.params[static_cast<size_t>(l)][0]);
    }
    total = t.add(total, t.sum(t.square(row)));
  }
  return total;
}

Val vae_kl(Tape& t, Val mu, Val logvar) {
  if (!mu.value().same_shape(logvar.value()))
    throw DimensionError("vae_kl shape mismatch: " + shape_str(mu.value().shape()) + " vs " +
                         shape_str(logvar.value().shape()));
  const int B = mu.value().dim(0);
  Val terms = t.sub(t.add(t.add(t.square(mu), t.exp(logvar)), t.scale(logvar, -1.0)),
                    t.leaf(Tensor::scalar(1.0)));
  return t.scale(t.sum(terms), 0.5 / B);
}

Tensor corrupt(const Tensor& x, const NoiseSpec& spec, Rng& rng, Mode mode) {
  if (mode == Mode::Eval) return x;
  Tensor out = x;
  switch (spec.kind) {
    case NoiseKind::Gaussian:
      for (auto& v : out.vals()) v += rng.normal(0.0, spec.sigma);
      break;
    case NoiseKind::Cauchy:
      for (auto& v : out.vals()) v += rng.cauchy(spec.sigma);
      break;
    case NoiseKind::ZeroMask:
      for (auto& v : out.vals())
        if (rng.uniform() < spec.p) v = 0.0;
      break;
    case NoiseKind::ZeroOneMask:
      for (auto& v : out.vals()) {
        const double u = rng.uniform();
        if (u < spec.p)
          v = 0.0;
        else if (u < 2.0 * spec.p)
          v = 1.0;
      }
      break;
  }
  return out;
}

Val weighted_reconstruction(Tape& t, const Network& net, const Tensor& neg, const Tensor& pos,
                            double alpha, Distance d, Rng* rng) {
  if (alpha < 0 || alpha > 1) throw ContractError("class weight alpha must lie in [0,1]");
  Val total = t.leaf(Tensor::scalar(0.0));
  auto side = [&](const Tensor& batch, double w) {
    if (batch.size() == 0 || w == 0.0) return;
    Val x = t.leaf(batch);
    ForwardTrace tr = net.forward(t, x, rng);
    // Sum over instances: per-instance distances are means, so scale by B.
    total = t.add(total, t.scale(distance_loss(t, d, x, tr.output), w * batch.dim(0)));
  };
  side(neg, 1.0 - alpha);
  side(pos, alpha);
  return total;
}

Val total_objective(Tape& t, const Network& net, const Tensor& x, const ObjectiveSpec& spec,
                    Rng* rng, ForwardTrace* trace_out) {
  spec.validate();
  Val clean = t.leaf(x);
  Val input = clean;
  if (spec.corruption && net.mode() == Mode::Train) {
    if (rng == nullptr) throw ContractError("corruption needs a PRNG in train mode");
    input = t.leaf(corrupt(x, *spec.corruption, *rng, net.mode()));
  }

  ForwardTrace tr = net.forward(t, input, rng);
  Val loss = distance_loss(t, spec.distance, clean, tr.output);

  for (const auto& pen : spec.penalties) {
    Val term;
    switch (pen.kind) {
      case PenaltyKind::SparseQuadratic:
        term = sparse_penalty_quadratic(t, tr.code, pen.rho);
        break;
      case PenaltyKind::SparseKl:
        term = sparse_penalty_kl(t, tr.code, pen.rho);
        break;
      case PenaltyKind::Contractive:
        term = contractive_penalty(t, net, tr);
        break;
      case PenaltyKind::VaeKl:
        if (!tr.mu.valid())
          throw ContractError("vae_kl penalty requires a sampling layer in the network");
        term = vae_kl(t, tr.mu, tr.logvar);
        break;
    }
    loss = t.add(loss, t.scale(term, pen.weight));
  }

  if (trace_out) *trace_out = tr;
  return loss;
}

}  // namespace aewb
