#include "pascalsim/signal_model.hpp"

#include <cmath>
#include <string>

namespace pascalsim {

SystemConfig SystemConfig::half_wavelength(int n_antennas, double wavelength, double sample_rate,
                                           double noise_variance) {
  SystemConfig cfg;
  cfg.n_antennas = n_antennas;
  cfg.wavelength = wavelength;
  cfg.element_spacing = 0.5 * wavelength;
  cfg.sample_rate = sample_rate;
  cfg.noise_variance = noise_variance;
  return cfg;
}

void SystemConfig::validate() const {
  if (n_antennas < 1) throw DomainError("n_antennas must be >= 1");
  if (!(wavelength > 0.0)) throw DomainError("wavelength must be positive");
  if (element_spacing < 0.0) throw DomainError("element_spacing must be positive");
  if (!(sample_rate > 0.0)) throw DomainError("sample_rate must be positive");
  if (!(noise_variance >= 0.0)) throw DomainError("noise_variance must be non-negative");
}

void DroneParams::validate(const SystemConfig& cfg) const {
  if (!(std::abs(doa) < 0.5 * kPi)) throw DomainError("doa must lie in (-pi/2, pi/2)");
  if (!(range > 0.0)) throw DomainError("range must be positive");
  if (!(std::abs(doppler) < 0.5 * cfg.sample_rate)) throw DomainError("|doppler| must be below sample_rate/2");
  if (!(power > 0.0)) throw DomainError("power must be positive");
}

bool is_power_of_two(int m) noexcept { return m > 0 && (m & (m - 1)) == 0; }

void FrameConfig::validate() const {
  if (n_subframes < 1) throw DomainError("n_subframes must be >= 1");
  if (symbols_per_subframe < 1) throw DomainError("symbols_per_subframe must be >= 1");
  if (modulation_order < 2 || !is_power_of_two(modulation_order))
    throw DomainError("modulation_order must be a power of two >= 2");
}

CVector steering_vector(double doa, const SystemConfig& cfg) {
  const double step = cfg.phase_factor() * std::sin(doa);
  CVector a(cfg.n_antennas);
  for (int n = 0; n < cfg.n_antennas; ++n) a[n] = std::polar(1.0, -step * n);
  return a;
}

double path_gain(double range, const SystemConfig& cfg) {
  if (!(range > 0.0)) throw DomainError("range must be positive");
  return cfg.wavelength / (4.0 * kPi * range);
}

CMatrix omega_matrix(const std::vector<DroneParams>& drones, const SystemConfig& cfg) {
  if (drones.empty()) throw DomainError("empty drone list");
  const auto k = static_cast<Eigen::Index>(drones.size());
  CMatrix w = CMatrix::Zero(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const auto& d = drones[i];
    w(i, i) = std::polar(path_gain(d.range, cfg), 2.0 * kPi * d.doppler / cfg.sample_rate);
  }
  return w;
}

ChannelMatrix channel_matrix(const std::vector<DroneParams>& drones, const SystemConfig& cfg) {
  if (drones.empty()) throw DomainError("empty drone list");
  ChannelMatrix h;
  h.entries.resize(cfg.n_antennas, static_cast<Eigen::Index>(drones.size()));
  for (std::size_t k = 0; k < drones.size(); ++k) {
    const auto& d = drones[k];
    const cplx g = std::polar(path_gain(d.range, cfg), 2.0 * kPi * d.doppler / cfg.sample_rate);
    h.entries.col(static_cast<Eigen::Index>(k)) = g * steering_vector(d.doa, cfg);
  }
  return h;
}

cplx mpsk_symbol(int m, int order) {
  if (order < 2) throw DomainError("modulation order must be >= 2");
  if (m < 1 || m > order) throw DomainError("symbol index " + std::to_string(m) + " outside 1.." + std::to_string(order));
  return std::polar(1.0, 2.0 * kPi * (m - 1) / order);
}

std::vector<double> powers_of(const std::vector<DroneParams>& drones) {
  std::vector<double> p;
  p.reserve(drones.size());
  for (const auto& d : drones) p.push_back(d.power);
  return p;
}

CVector noiseless_signal(const ChannelMatrix& h, const std::vector<double>& powers, const CVector& symbols) {
  if (symbols.size() != h.entries.cols() || powers.size() != static_cast<std::size_t>(h.entries.cols()))
    throw DomainError("symbol/power vector length must equal drone count");
  CVector y = CVector::Zero(h.entries.rows());
  for (Eigen::Index k = 0; k < h.entries.cols(); ++k)
    y += (std::sqrt(powers[static_cast<std::size_t>(k)]) * symbols[k]) * h.entries.col(k);
  return y;
}

CVector received_signal(const std::vector<DroneParams>& drones, const SystemConfig& cfg,
                        const CVector& symbols, CounterRng& rng) {
  CVector y = noiseless_signal(channel_matrix(drones, cfg), powers_of(drones), symbols);
  if (cfg.noise_variance > 0.0)
    for (Eigen::Index n = 0; n < y.size(); ++n) y[n] += rng.complex_normal(cfg.noise_variance);
  return y;
}

CVector pilot_stack(const std::vector<DroneParams>& drones, const SystemConfig& cfg, int n_pilots,
                    CounterRng& rng) {
  if (n_pilots < 1) throw DomainError("n_pilots must be >= 1");
  const CVector clean = noiseless_signal(channel_matrix(drones, cfg), powers_of(drones),
                                         CVector::Ones(static_cast<Eigen::Index>(drones.size())));
  const Eigen::Index n = clean.size();
  CVector stack(n * n_pilots);
  for (int l = 0; l < n_pilots; ++l) {
    for (Eigen::Index i = 0; i < n; ++i) {
      stack[l * n + i] = clean[i];
      if (cfg.noise_variance > 0.0) stack[l * n + i] += rng.complex_normal(cfg.noise_variance);
    }
  }
  return stack;
}

double noise_variance_for_snr(const DroneParams& reference, const SystemConfig& cfg, double snr_db) {
  const double eta = path_gain(reference.range, cfg);
  return reference.power * eta * eta / std::pow(10.0, snr_db / 10.0);
}

}  // namespace pascalsim
