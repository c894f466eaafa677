#pragma once

#include <string_view>

#include "pascalsim/signal_model.hpp"

namespace pascalsim {

enum class EqualizerKind { MRC, ZF, MMSE };

/// Diagonal used to precondition the Neumann series. Nominal is the constant
/// C*I (C = N for ZF, N + alpha for MMSE); Measured is diag(G) itself.
enum class DiagonalMode { Nominal, Measured };

std::string_view to_string(EqualizerKind kind) noexcept;
std::string_view to_string(DiagonalMode mode) noexcept;

struct ApproxConfig {
  int neumann_order = 3;  // R_N
  int taylor_order = 8;   // R_T
  double symbol_power = 0.0;  // sigma_s^2; 0 selects the mean drone power
  DiagonalMode diagonal = DiagonalMode::Measured;

  void validate() const;
  bool operator==(const ApproxConfig&) const = default;
};

struct EqualizerWeights {
  CMatrix matrix;  // K x N
  EqualizerKind kind = EqualizerKind::MRC;
  int neumann_order = -1;  // -1: exact inverse
  double regularizer = 0.0;
  DiagonalMode diagonal = DiagonalMode::Nominal;
  double spectral_radius = 0.0;  // of G_d^-1 G_e; Neumann only
  bool series_valid = true;

  bool exact() const noexcept { return neumann_order < 0; }
};

struct NeumannInverse {
  CMatrix matrix;
  double spectral_radius = 0.0;
  bool valid = true;
};

EqualizerWeights mrc_weights(const ChannelMatrix& h_hat);

/// Inverse of a Hermitian positive-definite matrix; throws IllConditioned
/// when the 2-norm condition number reaches max_condition.
CMatrix gram_exact_inverse(const CMatrix& g, double max_condition = 1e12);

EqualizerWeights zf_weights_exact(const ChannelMatrix& h_hat);
EqualizerWeights mmse_weights_exact(const ChannelMatrix& h_hat, double noise_variance, double symbol_power);

/// sum_{r=0}^{R} (-G_d^-1 G_e)^r G_d^-1 for G = H^H H + alpha I.
NeumannInverse neumann_gram_inverse(const ChannelMatrix& h_hat, double regularizer, int order,
                                    DiagonalMode diagonal = DiagonalMode::Nominal);

EqualizerWeights zf_weights_neumann(const ChannelMatrix& h_hat, int order,
                                    DiagonalMode diagonal = DiagonalMode::Nominal);
EqualizerWeights mmse_weights_neumann(const ChannelMatrix& h_hat, double noise_variance, double symbol_power,
                                      int order, DiagonalMode diagonal = DiagonalMode::Nominal);

/// Same truncated series written as the double binomial sum over (r, k~), with
/// G^k~ further expanded over powers of H^H H in nominal mode.
CMatrix neumann_weights_binomial(const ChannelMatrix& h_hat, double regularizer, int order, DiagonalMode diagonal);

/// Dispatch helper used by the simulation and analytic paths.
EqualizerWeights build_weights(EqualizerKind kind, const ChannelMatrix& h_hat, double noise_variance,
                               double symbol_power, int neumann_order, DiagonalMode diagonal);

CVector equalize_apply(const EqualizerWeights& w, const CVector& y);

/// Nearest MPSK phase; ties go to the smaller index, x = 0 gives 1.
int detect_mpsk(cplx x, int order);

/// Largest |eigenvalue| estimate from power iteration.
double spectral_radius_estimate(const CMatrix& m, int iterations = 30);

}  // namespace pascalsim
