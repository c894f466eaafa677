#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "pascalsim/rng.hpp"
#include "pascalsim/signal_model.hpp"

using namespace pascalsim;

namespace {

SystemConfig sys(int n, double noise = 0.0) { return SystemConfig::half_wavelength(n, 2e-3, 1e5, noise); }

}  // namespace

TEST(SteeringVector, HalfWavelengthThirtyDegrees) {
  const CVector a = steering_vector(kPi / 6, sys(2));
  EXPECT_NEAR(std::abs(a[0] - cplx(1, 0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(a[1] - cplx(0, -1)), 0.0, 1e-15);
}

TEST(SteeringVector, UnitModulusEntries) {
  const CVector a = steering_vector(0.37, sys(8));
  for (Eigen::Index n = 0; n < a.size(); ++n) EXPECT_NEAR(std::abs(a[n]), 1.0, 1e-15);
}

TEST(SteeringVector, CustomSpacingScalesPhase) {
  SystemConfig c = sys(3);
  c.element_spacing = c.wavelength;  // twice the default phase step
  const CVector a = steering_vector(kPi / 6, c);
  EXPECT_NEAR(std::abs(a[1] - std::polar(1.0, -kPi)), 0.0, 1e-14);
}

TEST(PathGain, FreeSpaceAmplitude) {
  EXPECT_NEAR(path_gain(80.0, sys(1)), 1.9894e-6, 1e-10);
  EXPECT_THROW(path_gain(0.0, sys(1)), DomainError);
}

TEST(OmegaMatrix, QuarterSampleRateGivesQuarterTurn) {
  const std::vector<DroneParams> d{{0.1, 80.0, 25e3, 1.0}};
  const CMatrix w = omega_matrix(d, sys(4));
  EXPECT_NEAR(std::arg(w(0, 0)), kPi / 2, 1e-14);
  EXPECT_NEAR(std::abs(w(0, 0)), path_gain(80.0, sys(4)), 1e-20);
}

TEST(OmegaMatrix, ZeroDopplerIsRealPositiveDiagonal) {
  const std::vector<DroneParams> d{{0.1, 80.0, 0.0, 1.0}, {0.3, 40.0, 0.0, 1.0}};
  const CMatrix w = omega_matrix(d, sys(4));
  EXPECT_GT(w(0, 0).real(), 0.0);
  EXPECT_EQ(w(0, 0).imag(), 0.0);
  EXPECT_EQ(w(1, 1).imag(), 0.0);
  EXPECT_EQ(w(0, 1), cplx(0.0));
}

TEST(ChannelMatrix, ColumnNormsAreSqrtNTimesGain) {
  const std::vector<DroneParams> d{{0.2, 80.0, 1000.0, 1.0}, {-0.5, 120.0, -3000.0, 2.0}};
  const SystemConfig c = sys(6);
  const ChannelMatrix h = channel_matrix(d, c);
  ASSERT_EQ(h.antenna_count(), 6);
  ASSERT_EQ(h.drone_count(), 2);
  for (int k = 0; k < 2; ++k)
    EXPECT_NEAR(h.entries.col(k).norm(), std::sqrt(6.0) * path_gain(d[k].range, c), 1e-18);
  // H = A omega
  CMatrix a(6, 2);
  a.col(0) = steering_vector(d[0].doa, c);
  a.col(1) = steering_vector(d[1].doa, c);
  EXPECT_LT((a * omega_matrix(d, c) - h.entries).norm(), 1e-18);
}

TEST(MpskSymbol, IndexOneBasedPhases) {
  EXPECT_NEAR(std::abs(mpsk_symbol(2, 4) - cplx(0, 1)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(mpsk_symbol(1, 8) - cplx(1, 0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(mpsk_symbol(2, 2) - cplx(-1, 0)), 0.0, 1e-15);
  EXPECT_THROW(mpsk_symbol(5, 4), DomainError);
  EXPECT_THROW(mpsk_symbol(0, 4), DomainError);
}

TEST(PilotStack, NoiselessStackRepeatsHsqrtP) {
  const std::vector<DroneParams> d{{0.2, 80.0, 1000.0, 1.0}, {-0.4, 80.0, 2000.0, 4.0}};
  const SystemConfig c = sys(4);
  CounterRng rng(1);
  const CVector stack = pilot_stack(d, c, 3, rng);
  ASSERT_EQ(stack.size(), 12);
  const ChannelMatrix h = channel_matrix(d, c);
  const CVector one = h.entries.col(0) * 1.0 + h.entries.col(1) * 2.0;
  for (int l = 0; l < 3; ++l) EXPECT_LT((stack.segment(4 * l, 4) - one).norm(), 1e-20);
}

TEST(ReceivedSignal, NoiseVarianceMatchesConfig) {
  const std::vector<DroneParams> d{{0.2, 80.0, 1000.0, 1.0}};
  const SystemConfig c = sys(4, 2.5);
  CounterRng rng(3);
  const CVector s = CVector::Ones(1);
  double acc = 0.0;
  const int trials = 20000;
  const CVector clean = noiseless_signal(channel_matrix(d, c), {1.0}, s);
  for (int t = 0; t < trials; ++t) acc += (received_signal(d, c, s, rng) - clean).squaredNorm();
  EXPECT_NEAR(acc / (4.0 * trials), 2.5, 0.05);
}

TEST(NoiseVarianceForSnr, PerAntennaDefinition) {
  const DroneParams d{0.1, 80.0, 0.0, 2.0};
  const SystemConfig c = sys(4);
  const double eta = path_gain(80.0, c);
  EXPECT_NEAR(noise_variance_for_snr(d, c, 10.0), 2.0 * eta * eta / 10.0, 1e-25);
}

TEST(Validation, RejectsOutOfDomainParameters) {
  const SystemConfig c = sys(4);
  EXPECT_THROW((DroneParams{2.0, 80.0, 0.0, 1.0}.validate(c)), DomainError);
  EXPECT_THROW((DroneParams{0.1, 80.0, 6e4, 1.0}.validate(c)), DomainError);
  EXPECT_THROW((FrameConfig{1, 1, 6}.validate()), DomainError);
  SystemConfig bad = c;
  bad.n_antennas = 0;
  EXPECT_THROW(bad.validate(), DomainError);
}

TEST(CounterRng, SameKeySameSequence) {
  CounterRng a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(CounterRng, SubstreamsAreStableAndDistinct) {
  const CounterRng root(5);
  EXPECT_EQ(root.substream(3).key(), root.substream(3).key());
  std::set<std::uint64_t> keys;
  for (std::uint64_t i = 0; i < 1000; ++i) keys.insert(root.substream(i).key());
  EXPECT_EQ(keys.size(), 1000u);
}

TEST(CounterRng, UniformAndNormalMoments) {
  CounterRng r(9);
  const int n = 200000;
  double su = 0, sn = 0, sn2 = 0;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    su += u;
    const double z = r.normal();
    sn += z;
    sn2 += z * z;
  }
  EXPECT_NEAR(su / n, 0.5, 0.003);
  EXPECT_NEAR(sn / n, 0.0, 0.01);
  EXPECT_NEAR(sn2 / n, 1.0, 0.01);
}

TEST(CounterRng, BelowCoversRange) {
  CounterRng r(11);
  std::vector<int> hist(5, 0);
  for (int i = 0; i < 50000; ++i) ++hist[r.below(5)];
  for (int h : hist) EXPECT_NEAR(h, 10000, 400);
}
