#include <gtest/gtest.h>

#include <cmath>

#include "gencom/bits.hpp"
#include "gencom/lpf.hpp"
#include "gencom/phy.hpp"
#include "gencom/rng.hpp"
#include "test_support.hpp"

using namespace gencom;

namespace {

BitVec random_bits(std::size_t n, std::uint64_t seed) {
  BitVec b(n);
  for (std::size_t i = 0; i < n; ++i) b[i] = counter_u64(seed, i) & 1u;
  return b;
}

ChannelConfig awgn(double snr_db, std::uint64_t seed) { return {ChannelConfig::Model::awgn, 64, snr_db, seed}; }

}  // namespace

TEST(Qpsk, GrayMappingTable) {
  const double a = std::sqrt(0.5);
  const auto s = qpsk_modulate(BitVec{0, 0, 0, 1, 1, 0, 1, 1});
  ASSERT_EQ(s.symbols.size(), 4u);
  EXPECT_EQ(s.symbols[0], Symbol(a, a));
  EXPECT_EQ(s.symbols[1], Symbol(a, -a));
  EXPECT_EQ(s.symbols[2], Symbol(-a, a));
  EXPECT_EQ(s.symbols[3], Symbol(-a, -a));
}

TEST(Qpsk, OddLengthPadsOneBit) {
  const auto s = qpsk_modulate(BitVec{1, 0, 1});
  EXPECT_EQ(s.symbols.size(), 2u);
  EXPECT_EQ(s.bit_count, 3u);
  const auto llr = qpsk_demodulate(apply_channel(s, awgn(300, 1)), awgn(300, 1));
  EXPECT_EQ(hard_decisions(llr), (BitVec{1, 0, 1}));
}

TEST(Qpsk, UnitAverageEnergy) {
  EXPECT_NEAR(average_power(qpsk_modulate(random_bits(10000, 3)).symbols), 1.0, 1e-12);
}

TEST(Qpsk, WeightedProfileKeepsUnitPower) {
  const PowerProfile prof{{4.0, 1.0}};
  const auto s = qpsk_modulate(random_bits(4096, 4), prof);
  EXPECT_NEAR(average_power(s.symbols), 1.0, 1e-9);
  EXPECT_NEAR(average_power(qpsk_modulate(random_bits(4096, 5), PowerProfile::importance_default()).symbols), 1.0,
              1e-9);
  // I carries weight 4, Q weight 1, normalized by their mean 2.5
  EXPECT_NEAR(std::norm(s.symbols[0].real()), 4.0 / 2.5 / 2.0, 1e-12);
  EXPECT_NEAR(std::norm(s.symbols[0].imag()), 1.0 / 2.5 / 2.0, 1e-12);
}

TEST(Qpsk, NonPositiveWeightRejected) {
  EXPECT_THROW(qpsk_modulate(BitVec{0, 1}, PowerProfile{{1.0, 0.0}}), ContractViolation);
}

TEST(Channel, EssentiallyNoiselessAtHighSnr) {
  const auto bits = random_bits(100000, 9);
  const auto llr = qpsk_demodulate(apply_channel(qpsk_modulate(bits), awgn(300, 2)), awgn(300, 2));
  EXPECT_EQ(count_bit_errors(hard_decisions(llr), bits), 0u);
}

TEST(Channel, NoiseVariancePerDimension) {
  const auto tx = qpsk_modulate(random_bits(2'000'000, 1));
  const auto rx = apply_channel(tx, awgn(0.0, 77));
  double sr = 0, si = 0, srr = 0, sii = 0;
  const double n = static_cast<double>(tx.symbols.size());
  for (std::size_t k = 0; k < tx.symbols.size(); ++k) {
    const Symbol e = rx.received.symbols[k] - tx.symbols[k];
    sr += e.real();
    si += e.imag();
    srr += e.real() * e.real();
    sii += e.imag() * e.imag();
  }
  EXPECT_NEAR(srr / n - (sr / n) * (sr / n), 0.5, 0.005);
  EXPECT_NEAR(sii / n - (si / n) * (si / n), 0.5, 0.005);
  EXPECT_NEAR(sr / n, 0.0, 0.005);
}

TEST(Channel, DeterministicPerSeed) {
  const auto tx = qpsk_modulate(random_bits(1000, 1));
  const auto a = apply_channel(tx, awgn(3.0, 5)), b = apply_channel(tx, awgn(3.0, 5)), c = apply_channel(tx, awgn(3.0, 6));
  EXPECT_EQ(a.received.symbols, b.received.symbols);
  EXPECT_NE(a.received.symbols, c.received.symbols);
}

TEST(Channel, RayleighGainsConstantPerBlock) {
  const ChannelConfig cfg{ChannelConfig::Model::rayleigh_block, 16, 10.0, 3};
  const auto rx = apply_channel(qpsk_modulate(random_bits(2 * 160, 2)), cfg);
  ASSERT_EQ(rx.gains.size(), 160u);
  for (std::size_t k = 0; k < 160; ++k) EXPECT_EQ(rx.gains[k], rx.gains[k - k % 16]);
  EXPECT_NE(rx.gains[0], rx.gains[16]);
  // unit mean power gains
  const auto big = apply_channel(qpsk_modulate(random_bits(2 * 400000, 2)), {ChannelConfig::Model::rayleigh_block, 1, 10.0, 4});
  EXPECT_NEAR(average_power(big.gains), 1.0, 0.01);
}

TEST(Channel, FadingWithoutGainsRejected) {
  const ChannelConfig cfg{ChannelConfig::Model::rayleigh_block, 8, 5.0, 1};
  auto rx = apply_channel(qpsk_modulate(random_bits(64, 1)), cfg);
  rx.gains.clear();
  EXPECT_THROW(qpsk_demodulate(rx, cfg), ContractViolation);
}

TEST(Demod, LlrSignsAndScale) {
  const auto llr = qpsk_demodulate(apply_channel(qpsk_modulate(BitVec{0, 1}), awgn(300, 1)), awgn(0.0, 1));
  // noiseless receive, N0 = 1: L = 4 * sqrt(1/2) * (+-sqrt(1/2)) = +-2
  EXPECT_NEAR(llr[0], 2.0, 1e-6);
  EXPECT_NEAR(llr[1], -2.0, 1e-6);
}

TEST(Demod, BerTracksAnalyticCurve) {
  for (double snr : {0.0, 4.0}) {
    const auto bits = random_bits(1'000'000, 10);
    const auto llr = qpsk_demodulate(apply_channel(qpsk_modulate(bits), awgn(snr, 11)), awgn(snr, 11));
    const double ber = static_cast<double>(count_bit_errors(hard_decisions(llr), bits)) / 1e6;
    const double theory = q_function(std::sqrt(std::pow(10.0, snr / 10.0)));
    EXPECT_NEAR(ber / theory, 1.0, 0.02) << snr;
  }
}

TEST(Demod, HigherWeightGivesLargerLlrs) {
  const auto bits = random_bits(20000, 12);
  const PowerProfile prof{{2.0, 1.0}};
  const auto llr = qpsk_demodulate(apply_channel(qpsk_modulate(bits, prof), awgn(0.0, 13)), awgn(0.0, 13), prof);
  double heavy = 0, light = 0;
  for (std::size_t i = 0; i < llr.size(); i += 2) {
    heavy += std::fabs(llr[i]);
    light += std::fabs(llr[i + 1]);
  }
  EXPECT_GT(heavy, light * 1.2);
}

TEST(Chase, CombineSemantics) {
  const LlrVec a{1.0, -2.0, 0.5}, b{-1.0, 2.0, 0.25};
  const std::vector<LlrVec> one{a};
  EXPECT_EQ(chase_combine(one), a);
  const std::vector<LlrVec> two{a, b};
  EXPECT_EQ(chase_combine(two), (LlrVec{0.0, 0.0, 0.75}));
  LlrVec buf;
  chase_accumulate(buf, a);
  chase_accumulate(buf, b);
  EXPECT_EQ(buf, chase_combine(two));
  const std::vector<LlrVec> bad{a, LlrVec{1.0}};
  EXPECT_THROW(chase_combine(bad), ContractViolation);
  EXPECT_THROW(chase_combine(std::span<const LlrVec>{}), ContractViolation);
}

TEST(Chase, TwoCopiesMatchThreeDbGain) {
  const auto bits = random_bits(400000, 14);
  const auto tx = qpsk_modulate(bits);
  std::vector<LlrVec> copies;
  for (std::uint64_t s : {21u, 22u}) copies.push_back(qpsk_demodulate(apply_channel(tx, awgn(-3.0, s)), awgn(-3.0, s)));
  const double ber = static_cast<double>(count_bit_errors(hard_decisions(chase_combine(copies)), bits)) / 4e5;
  const double theory = qpsk_ber_awgn(-3.0 + 10.0 * std::log10(2.0));
  EXPECT_NEAR(ber / theory, 1.0, 0.05);
}

TEST(Ebn0, Conversion) {
  EXPECT_NEAR(ebn0_db_from_esn0_db(3.0, 1.0), 3.0 - 10 * std::log10(2.0), 1e-12);
  EXPECT_NEAR(ebn0_db_from_esn0_db(3.0, 0.5), 3.0, 1e-12);
}

TEST(PowerAllocation, ImportanceProfileProtectsPayloadBytes) {
  // Uncoded LPF payload at -3 dB: more power on the high-order bits of each
  // byte lowers the block-mean MSE compared with uniform power.
  const auto img = test_support::shipped_images().front();
  const auto ci = lpf_encode(img, {8, ReconstructionMode::bilinear});
  const auto bits = unpack_bytes(ci.payload);
  double mse_uniform = 0, mse_weighted = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    for (const auto& prof : {PowerProfile::uniform(), PowerProfile::importance_default()}) {
      const auto llr = qpsk_demodulate(apply_channel(qpsk_modulate(bits, prof), awgn(-3.0, seed)), awgn(-3.0, seed), prof);
      const auto rx = pack_bits(hard_decisions(llr));
      double acc = 0;
      for (std::size_t i = 0; i < rx.size(); ++i) {
        const double d = static_cast<double>(rx[i]) - ci.payload[i];
        acc += d * d;
      }
      (prof.is_uniform() ? mse_uniform : mse_weighted) += acc / static_cast<double>(rx.size());
    }
  }
  EXPECT_LT(mse_weighted, mse_uniform);
}
