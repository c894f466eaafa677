#include "pascalsim/equalize.hpp"

#include <cmath>
#include <utility>
#include <vector>

namespace pascalsim {

std::string_view to_string(EqualizerKind kind) noexcept {
  switch (kind) {
    case EqualizerKind::MRC: return "MRC";
    case EqualizerKind::ZF: return "ZF";
    case EqualizerKind::MMSE: return "MMSE";
  }
  return "?";
}

std::string_view to_string(DiagonalMode mode) noexcept {
  return mode == DiagonalMode::Nominal ? "nominal" : "measured";
}

void ApproxConfig::validate() const {
  if (neumann_order < 0 || neumann_order > 8) throw DomainError("neumann_order must lie in 0..8");
  if (taylor_order < 0 || taylor_order > 16) throw DomainError("taylor_order must lie in 0..16");
  if (!(symbol_power >= 0.0)) throw DomainError("symbol_power must be >= 0");
}

EqualizerWeights mrc_weights(const ChannelMatrix& h_hat) {
  EqualizerWeights w;
  w.matrix = h_hat.entries.adjoint();
  w.kind = EqualizerKind::MRC;
  return w;
}

CMatrix gram_exact_inverse(const CMatrix& g, double max_condition) {
  if (g.rows() != g.cols() || g.rows() == 0) throw DomainError("Gram matrix must be square and non-empty");
  Eigen::JacobiSVD<CMatrix> svd(g);
  const auto& s = svd.singularValues();
  const double smax = s(0);
  const double smin = s(s.size() - 1);
  const double cond = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
  if (!(cond < max_condition)) throw IllConditioned(cond);
  return g.fullPivLu().inverse();
}

namespace {

CMatrix gram(const ChannelMatrix& h_hat, double regularizer) {
  CMatrix g = h_hat.entries.adjoint() * h_hat.entries;
  if (regularizer != 0.0) g.diagonal().array() += regularizer;
  return g;
}

Eigen::VectorXd diagonal_entries(const ChannelMatrix& h_hat, const CMatrix& g, double regularizer, DiagonalMode mode) {
  const Eigen::Index k = g.rows();
  if (mode == DiagonalMode::Nominal) return Eigen::VectorXd::Constant(k, h_hat.antenna_count() + regularizer);
  return g.diagonal().real();
}

// G_d^-1 H^H with each row divided (not multiplied by a reciprocal)
CMatrix scaled_adjoint(const ChannelMatrix& h_hat, const Eigen::VectorXd& gd) {
  CMatrix a = h_hat.entries.adjoint();
  for (Eigen::Index k = 0; k < a.rows(); ++k) a.row(k) /= gd[k];
  return a;
}

CMatrix iteration_matrix(const CMatrix& g, const Eigen::VectorXd& gd) {
  CMatrix m = -g;
  for (Eigen::Index k = 0; k < m.rows(); ++k) m.row(k) /= gd[k];
  m.diagonal().array() += 1.0;
  return m;  // I - G_d^-1 G = -G_d^-1 G_e
}

// Horner: I + M (I + M (... ))
CMatrix neumann_sum(const CMatrix& m, int order) {
  const Eigen::Index k = m.rows();
  CMatrix s = CMatrix::Identity(k, k);
  for (int r = 0; r < order; ++r) {
    CMatrix next = m * s;
    next.diagonal().array() += 1.0;
    s = std::move(next);
  }
  return s;
}

EqualizerWeights neumann_weights(EqualizerKind kind, const ChannelMatrix& h_hat, double regularizer, int order,
                                 DiagonalMode diagonal) {
  if (order < 0) throw DomainError("Neumann order must be >= 0");
  const CMatrix g = gram(h_hat, regularizer);
  const Eigen::VectorXd gd = diagonal_entries(h_hat, g, regularizer, diagonal);
  const CMatrix m = iteration_matrix(g, gd);
  EqualizerWeights w;
  w.kind = kind;
  w.neumann_order = order;
  w.regularizer = regularizer;
  w.diagonal = diagonal;
  w.spectral_radius = spectral_radius_estimate(m);
  w.series_valid = w.spectral_radius < 1.0;
  const CMatrix base = scaled_adjoint(h_hat, gd);
  w.matrix = order == 0 ? base : CMatrix(neumann_sum(m, order) * base);
  return w;
}

double binomial(int n, int k) {
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

}  // namespace

double spectral_radius_estimate(const CMatrix& m, int iterations) {
  const Eigen::Index k = m.rows();
  if (k == 0) return 0.0;
  CVector v(k);
  for (Eigen::Index i = 0; i < k; ++i) v[i] = cplx(1.0, 0.1 * static_cast<double>(i + 1));
  v.normalize();
  double est = 0.0;
  for (int it = 0; it < iterations; ++it) {
    CVector next = m * v;
    const double nrm = next.norm();
    if (nrm == 0.0) return 0.0;
    est = nrm;
    v = next / nrm;
  }
  return est;
}

EqualizerWeights zf_weights_exact(const ChannelMatrix& h_hat) {
  if (h_hat.antenna_count() < h_hat.drone_count()) throw DomainError("ZF needs N >= K");
  EqualizerWeights w;
  w.kind = EqualizerKind::ZF;
  w.matrix = gram_exact_inverse(gram(h_hat, 0.0)) * h_hat.entries.adjoint();
  return w;
}

EqualizerWeights mmse_weights_exact(const ChannelMatrix& h_hat, double noise_variance, double symbol_power) {
  if (!(symbol_power > 0.0)) throw DomainError("symbol_power must be positive");
  EqualizerWeights w;
  w.kind = EqualizerKind::MMSE;
  w.regularizer = noise_variance / symbol_power;
  w.matrix = gram_exact_inverse(gram(h_hat, w.regularizer)) * h_hat.entries.adjoint();
  return w;
}

NeumannInverse neumann_gram_inverse(const ChannelMatrix& h_hat, double regularizer, int order, DiagonalMode diagonal) {
  if (order < 0) throw DomainError("Neumann order must be >= 0");
  const CMatrix g = gram(h_hat, regularizer);
  const Eigen::VectorXd gd = diagonal_entries(h_hat, g, regularizer, diagonal);
  const CMatrix m = iteration_matrix(g, gd);
  NeumannInverse out;
  out.matrix = neumann_sum(m, order);
  for (Eigen::Index k = 0; k < out.matrix.cols(); ++k) out.matrix.col(k) /= gd[k];
  out.spectral_radius = spectral_radius_estimate(m);
  out.valid = out.spectral_radius < 1.0;
  return out;
}

EqualizerWeights zf_weights_neumann(const ChannelMatrix& h_hat, int order, DiagonalMode diagonal) {
  return neumann_weights(EqualizerKind::ZF, h_hat, 0.0, order, diagonal);
}

EqualizerWeights mmse_weights_neumann(const ChannelMatrix& h_hat, double noise_variance, double symbol_power,
                                      int order, DiagonalMode diagonal) {
  if (!(symbol_power > 0.0)) throw DomainError("symbol_power must be positive");
  return neumann_weights(EqualizerKind::MMSE, h_hat, noise_variance / symbol_power, order, diagonal);
}

CMatrix neumann_weights_binomial(const ChannelMatrix& h_hat, double regularizer, int order, DiagonalMode diagonal) {
  if (order < 0) throw DomainError("Neumann order must be >= 0");
  const Eigen::Index k = h_hat.drone_count();
  const CMatrix b = h_hat.entries.adjoint() * h_hat.entries;
  CMatrix g = b;
  g.diagonal().array() += regularizer;
  const Eigen::VectorXd gd = diagonal_entries(h_hat, g, regularizer, diagonal);
  const CMatrix hh = h_hat.entries.adjoint();

  // powers[j] = (G_d^-1 G)^j
  std::vector<CMatrix> powers;
  powers.emplace_back(CMatrix::Identity(k, k));
  if (diagonal == DiagonalMode::Nominal) {
    const double c = gd[0];
    std::vector<CMatrix> bpow{CMatrix::Identity(k, k)};
    for (int v = 1; v <= order; ++v) bpow.push_back(bpow.back() * b);
    for (int j = 1; j <= order; ++j) {
      CMatrix gj = CMatrix::Zero(k, k);
      for (int v = 0; v <= j; ++v) gj += binomial(j, v) * std::pow(regularizer, j - v) * bpow[v];
      powers.push_back(gj / std::pow(c, j));
    }
  } else {
    CMatrix dg = g;
    for (Eigen::Index i = 0; i < k; ++i) dg.row(i) /= gd[i];
    for (int j = 1; j <= order; ++j) powers.push_back(powers.back() * dg);
  }

  CMatrix s = CMatrix::Zero(k, k);
  for (int r = 0; r <= order; ++r)
    for (int kt = 0; kt <= r; ++kt) {
      const double sign = ((r + (r - kt)) % 2 == 0) ? 1.0 : -1.0;  // (-1)^r (-1)^(r-k~)
      s += (sign * binomial(r, kt)) * powers[kt];
    }
  CMatrix scaled = hh;
  for (Eigen::Index i = 0; i < k; ++i) scaled.row(i) /= gd[i];
  return s * scaled;
}

EqualizerWeights build_weights(EqualizerKind kind, const ChannelMatrix& h_hat, double noise_variance,
                               double symbol_power, int neumann_order, DiagonalMode diagonal) {
  switch (kind) {
    case EqualizerKind::MRC: return mrc_weights(h_hat);
    case EqualizerKind::ZF:
      return neumann_order < 0 ? zf_weights_exact(h_hat) : zf_weights_neumann(h_hat, neumann_order, diagonal);
    case EqualizerKind::MMSE:
      return neumann_order < 0 ? mmse_weights_exact(h_hat, noise_variance, symbol_power)
                               : mmse_weights_neumann(h_hat, noise_variance, symbol_power, neumann_order, diagonal);
  }
  throw DomainError("unknown equalizer kind");
}

CVector equalize_apply(const EqualizerWeights& w, const CVector& y) {
  if (w.matrix.cols() != y.size()) throw DomainError("weight/observation shape mismatch");
  return w.matrix * y;
}

int detect_mpsk(cplx x, int order) {
  if (order < 2) throw DomainError("modulation order must be >= 2");
  thread_local int cached_order = 0;
  thread_local std::vector<std::pair<double, double>> table;
  if (cached_order != order) {
    table.clear();
    for (int m = 1; m <= order; ++m) {
      const double phase = 2.0 * kPi * (m - 1) / order;
      // snap so that exact-boundary inputs tie exactly (e.g. 1 + j for QPSK)
      double c = std::cos(phase), s = std::sin(phase);
      if (std::abs(c) < 1e-15) c = 0.0;
      if (std::abs(s) < 1e-15) s = 0.0;
      table.emplace_back(c, s);
    }
    cached_order = order;
  }
  int best = 1;
  double best_corr = x.real();
  for (int m = 2; m <= order; ++m) {
    const auto [c, s] = table[static_cast<std::size_t>(m - 1)];
    const double corr = x.real() * c + x.imag() * s;
    if (corr > best_corr) {
      best_corr = corr;
      best = m;
    }
  }
  return best;
}

}  // namespace pascalsim
