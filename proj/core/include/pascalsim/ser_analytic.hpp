#pragma once

#include <vector>

#include "pascalsim/equalize.hpp"
#include "pascalsim/localization.hpp"
#include "pascalsim/rng.hpp"

namespace pascalsim {

/// Post-equalization terms for one drone and one symbol combination. nu is
/// referred to the target's own transmitted symbol, so a correct decision
/// corresponds to arg(nu) near 0.
struct ConditionalSerTerms {
  cplx nu;
  double gamma = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

/// beta holds 1-based symbol indices, one per drone; k is 0-based.
ConditionalSerTerms conditional_terms(const CMatrix& weights, const ChannelMatrix& true_channel,
                                      const std::vector<double>& powers, const std::vector<int>& beta, int order,
                                      double noise_variance, std::size_t k);

/// Union bound Q(sqrt2 d1/sqrt Gamma) + Q(sqrt2 d2/sqrt Gamma), clamped to [0, 1].
double conditional_ser(const EqualizerWeights& weights, const ChannelMatrix& true_channel,
                       const std::vector<double>& powers, const std::vector<int>& beta, int order,
                       double noise_variance, std::size_t k);

/// Decision distances for d_l = sin(pi/M) nu_x + (-1)^l cos(pi/M) nu_y.
double decision_distance(cplx nu, int order, int l);

/// How average_ser evaluates E[nu~^j] and the Gamma moments under the
/// small-angle error law: tensor Gauss quadrature over the truncated error
/// densities, or full expansion into phase monomials (exact, but the monomial
/// count grows quickly with K and R_T).
enum class MomentEngine { Quadrature, Expansion };

struct MomentContext {
  SystemConfig system;
  std::vector<DroneParams> drones;
  LocalizationErrorModel errors;
  int modulation_order = 4;
  EqualizerKind kind = EqualizerKind::ZF;
  ApproxConfig approx;
  std::size_t target = 0;
  std::vector<int> beta;  // per-drone symbol indices for the per-combination operations
  std::size_t term_budget = 10'000'000;
  int range_nodes = 3;  // Gauss-Hermite nodes per drone for range errors
  MomentEngine engine = MomentEngine::Quadrature;

  double symbol_power() const noexcept;
  double regularizer() const noexcept;
  void validate() const;
};

/// nu and Gamma evaluated from the symbolic Neumann expansion at one error draw
/// (exact sines, raw path gains).
cplx nu_expansion(const MomentContext& ctx, const std::vector<ParamTriple>& errors);
double gamma_expansion(const MomentContext& ctx, const std::vector<ParamTriple>& errors);

enum class NuMoment { E7, E8 };

/// E7 = E[nu_y^k2 nu_x^(k1-k2)], E8 = E[nu_y^k1] for the context's beta.
double moment_nu_power(const MomentContext& ctx, int k1, int k2, NuMoment which);

struct GammaMoments {
  double mean = 0.0;
  double second = 0.0;
  double variance() const noexcept { return second - mean * mean; }
};

GammaMoments gamma_moments(const MomentContext& ctx);

/// E[Gamma^(k/2)] by second-order expansion around E[Gamma].
double sqrt_gamma_power_moment(double mean, double variance, int k);

/// Closed-form average SER of the target drone (union bound, Neumann order
/// R_N, Taylor order R_T), averaged over all symbol combinations.
double average_ser(const MomentContext& ctx);

struct SemiAnalyticSer {
  double ser = 0.0;
  double ci95 = 0.0;
  std::size_t draws = 0;
};

/// Sample mean over error draws of the beta-averaged conditional SER, with
/// Neumann-order weights built from the perturbed parameters.
SemiAnalyticSer average_ser_semianalytic(const MomentContext& ctx, std::size_t n_draws, const CounterRng& rng);

/// All M^(K-1) combinations with the target fixed at index 1.
std::vector<std::vector<int>> relative_combinations(std::size_t drones, std::size_t target, int order);

}  // namespace pascalsim
