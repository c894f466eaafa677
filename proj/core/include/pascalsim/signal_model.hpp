#pragma once

#include <vector>

#include "pascalsim/common.hpp"
#include "pascalsim/rng.hpp"

namespace pascalsim {

/// Receiver array and link constants.
struct SystemConfig {
  int n_antennas = 1;
  double element_spacing = 0.0;  // m; 0 selects wavelength / 2
  double wavelength = 0.0;       // m
  double sample_rate = 0.0;      // Hz
  double noise_variance = 0.0;   // W, per complex antenna sample

  static SystemConfig half_wavelength(int n_antennas, double wavelength, double sample_rate,
                                      double noise_variance);

  double spacing() const noexcept { return element_spacing > 0.0 ? element_spacing : 0.5 * wavelength; }
  /// Phase step factor 2*pi*d0/lambda.
  double phase_factor() const noexcept { return 2.0 * kPi * spacing() / wavelength; }
  void validate() const;

  bool operator==(const SystemConfig&) const = default;
};

struct DroneParams {
  double doa = 0.0;      // rad
  double range = 1.0;    // m
  double doppler = 0.0;  // Hz
  double power = 1.0;    // W

  void validate(const SystemConfig& cfg) const;
  bool operator==(const DroneParams&) const = default;
};

struct FrameConfig {
  int n_subframes = 1;           // L; subframe l carries l pilots
  int symbols_per_subframe = 1;  // T
  int modulation_order = 4;      // M

  void validate() const;
  bool operator==(const FrameConfig&) const = default;
};

struct ChannelMatrix {
  CMatrix entries;  // N x K

  int drone_count() const noexcept { return static_cast<int>(entries.cols()); }
  int antenna_count() const noexcept { return static_cast<int>(entries.rows()); }
};

CVector steering_vector(double doa, const SystemConfig& cfg);
double path_gain(double range, const SystemConfig& cfg);
CMatrix omega_matrix(const std::vector<DroneParams>& drones, const SystemConfig& cfg);
ChannelMatrix channel_matrix(const std::vector<DroneParams>& drones, const SystemConfig& cfg);

/// Symbol index m is 1-based: exp(j 2 pi (m-1) / M).
cplx mpsk_symbol(int m, int order);
bool is_power_of_two(int m) noexcept;

std::vector<double> powers_of(const std::vector<DroneParams>& drones);

/// H diag(sqrt P) s without noise.
CVector noiseless_signal(const ChannelMatrix& h, const std::vector<double>& powers, const CVector& symbols);
/// y = H diag(sqrt P) s + n, n ~ CN(0, sigma_n^2 I).
CVector received_signal(const std::vector<DroneParams>& drones, const SystemConfig& cfg,
                        const CVector& symbols, CounterRng& rng);
/// l noisy all-ones pilot observations stacked into an (N*l)-vector.
CVector pilot_stack(const std::vector<DroneParams>& drones, const SystemConfig& cfg, int n_pilots,
                    CounterRng& rng);

/// Noise variance giving the requested per-antenna receive SNR P*eta^2/sigma^2 for one drone.
double noise_variance_for_snr(const DroneParams& reference, const SystemConfig& cfg, double snr_db);

}  // namespace pascalsim
