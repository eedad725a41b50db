#include <gtest/gtest.h>

#include <array>
#include <set>
#include <sstream>
#include <string>

#include "gencom/bits.hpp"
#include "gencom/codes.hpp"
#include "gencom/crc.hpp"
#include "gencom/interleaver.hpp"
#include "gencom/phy.hpp"
#include "gencom/rng.hpp"

using namespace gencom;

namespace {

BitVec random_bits(std::size_t n, std::uint64_t seed) {
  BitVec b(n);
  for (std::size_t i = 0; i < n; ++i) b[i] = counter_u64(seed, i) & 1u;
  return b;
}

// Table-driven byte-at-a-time CRC-16/CCITT-FALSE, independent of the bit-serial library routine.
std::uint16_t crc16_table_oracle(const std::string& s) {
  std::array<std::uint16_t, 256> table{};
  for (int i = 0; i < 256; ++i) {
    std::uint16_t c = static_cast<std::uint16_t>(i << 8);
    for (int k = 0; k < 8; ++k) c = static_cast<std::uint16_t>((c & 0x8000) ? (c << 1) ^ 0x1021 : (c << 1));
    table[i] = c;
  }
  std::uint16_t crc = 0xFFFF;
  for (unsigned char ch : s) crc = static_cast<std::uint16_t>((crc << 8) ^ table[((crc >> 8) ^ ch) & 0xFF]);
  return crc;
}

BitVec ascii_bits(const std::string& s) {
  return unpack_bytes(std::vector<std::uint8_t>(s.begin(), s.end()));
}

}  // namespace

TEST(Crc, PublishedCheckValue) {
  EXPECT_EQ(crc16_table_oracle("123456789"), 0x29B1);
  EXPECT_EQ(crc16_ccitt_false(ascii_bits("123456789")), 0x29B1);
  for (const std::string s : {"", "a", "GenCom uplink", "The quick brown fox jumps over the lazy dog"})
    EXPECT_EQ(crc16_ccitt_false(ascii_bits(s)), crc16_table_oracle(s)) << s;
}

TEST(Crc, AppendThenCheckPasses) {
  for (std::size_t n : {0u, 1u, 7u, 64u, 1000u}) {
    const auto framed = crc_append(random_bits(n, n + 1));
    EXPECT_EQ(framed.size(), n + 16);
    EXPECT_TRUE(crc_check(framed));
    EXPECT_EQ(crc_strip(framed), random_bits(n, n + 1));
  }
}

TEST(Crc, EverySingleBitFlipDetected) {
  const auto framed = crc_append(random_bits(64, 5));
  for (std::size_t i = 0; i < framed.size(); ++i) {
    auto bad = framed;
    bad[i] ^= 1u;
    EXPECT_FALSE(crc_check(bad)) << "position " << i;
  }
}

TEST(Crc, ShortStreamIsContractViolation) { EXPECT_THROW(crc_check(BitVec(15, 0)), ContractViolation); }

TEST(Repetition, DefinitionExamples) {
  const ChannelCode rep(CodeSpec::repeat(3));
  EXPECT_EQ(rep.encode(BitVec{1, 0}), (BitVec{1, 1, 1, 0, 0, 0}));
  EXPECT_EQ(rep.decode_hard(BitVec{1, 1, 0}, 1), BitVec{1});
  EXPECT_EQ(rep.decode_hard(BitVec{0, 1, 0}, 1), BitVec{0});
  // soft: LLR sum decides even when the majority of signs disagrees
  EXPECT_EQ(rep.decode(LlrVec{-5.0, 1.0, 1.0}, 1), BitVec{1});
}

TEST(Hamming74, ExhaustiveSingleErrorCorrection) {
  const ChannelCode ham(CodeSpec::hamming());
  int cases = 0;
  for (int m = 0; m < 16; ++m) {
    const BitVec msg = {std::uint8_t((m >> 3) & 1), std::uint8_t((m >> 2) & 1), std::uint8_t((m >> 1) & 1),
                        std::uint8_t(m & 1)};
    const auto cw = ham.encode(msg);
    ASSERT_EQ(cw.size(), 7u);
    EXPECT_EQ(ham.decode_hard(cw, 4), msg);
    for (int e = 0; e < 7; ++e) {
      auto bad = cw;
      bad[e] ^= 1u;
      EXPECT_EQ(ham.decode_hard(bad, 4), msg) << "msg " << m << " err " << e;
      ++cases;
    }
  }
  EXPECT_EQ(cases, 112);
}

TEST(Hamming74, MinimumDistanceIsThree) {
  const ChannelCode ham(CodeSpec::hamming());
  std::vector<BitVec> cws;
  for (int m = 0; m < 16; ++m)
    cws.push_back(ham.encode(BitVec{std::uint8_t(m >> 3 & 1), std::uint8_t(m >> 2 & 1), std::uint8_t(m >> 1 & 1),
                                    std::uint8_t(m & 1)}));
  std::size_t dmin = 7;
  for (std::size_t i = 0; i < cws.size(); ++i)
    for (std::size_t j = i + 1; j < cws.size(); ++j) dmin = std::min(dmin, count_bit_errors(cws[i], cws[j]));
  EXPECT_EQ(dmin, 3u);
}

TEST(Convolutional, ZeroInputZeroOutput) {
  const ChannelCode cc(CodeSpec::conv());
  const auto out = cc.encode(BitVec(64, 0));
  EXPECT_EQ(out, BitVec(2 * (64 + 6), 0));
  EXPECT_EQ(cc.decode_hard(out, 64), BitVec(64, 0));
  EXPECT_EQ(cc.decode(bits_to_llr(out), 64), BitVec(64, 0));
}

TEST(Convolutional, ImpulseResponseMatchesGenerators) {
  // A single 1 walks through the register; output pair t carries tap t of each
  // generator, tap 0 being the register's newest bit.
  const auto out = ConvolutionalCode::encode(BitVec{1});
  ASSERT_EQ(out.size(), 14u);
  for (int t = 0; t < 7; ++t) {
    EXPECT_EQ(out[2 * t], (0171 >> t) & 1) << t;
    EXPECT_EQ(out[2 * t + 1], (0133 >> t) & 1) << t;
  }
}

TEST(Convolutional, CorrectsSparseErrors) {
  const ChannelCode cc(CodeSpec::conv());
  const auto msg = random_bits(500, 17);
  auto coded = cc.encode(msg);
  for (std::size_t i = 10; i < coded.size(); i += 40) coded[i] ^= 1u;  // well below d_free/2 per window
  EXPECT_EQ(cc.decode_hard(coded, msg.size()), msg);
}

TEST(Convolutional, SoftBeatsHardAtTwoDb) {
  // Same noise realizations for both decoders, 1e6 information bits.
  const ChannelCode cc(CodeSpec::conv());
  std::size_t soft_err = 0, hard_err = 0, total = 0;
  for (std::uint64_t blk = 0; blk < 100; ++blk) {
    const auto msg = random_bits(10000, 1000 + blk);
    const auto coded = cc.encode(msg);
    const auto rx = apply_channel(qpsk_modulate(coded), {ChannelConfig::Model::awgn, 64, 2.0, 500 + blk});
    const auto llr = qpsk_demodulate(rx, {ChannelConfig::Model::awgn, 64, 2.0, 500 + blk});
    soft_err += count_bit_errors(cc.decode(llr, msg.size()), msg);
    hard_err += count_bit_errors(cc.decode_hard(hard_decisions(llr), msg.size()), msg);
    total += msg.size();
  }
  EXPECT_GE(total, 1'000'000u);
  EXPECT_LT(soft_err, hard_err);
}

TEST(ChannelCode, NoiselessIdentityAllKinds) {
  const std::vector<CodeSpec> specs = {CodeSpec::uncoded(), CodeSpec::repeat(3), CodeSpec::repeat(4),
                                       CodeSpec::hamming(), CodeSpec::conv(),    CodeSpec::ldpc(96),
                                       CodeSpec::ldpc(1024)};
  for (const auto& spec : specs) {
    const ChannelCode code(spec);
    for (std::uint64_t t = 0; t < 50; ++t) {
      const std::size_t len = 1 + counter_u64(t, 99) % 1500;
      const auto msg = random_bits(len, t * 7 + 3);
      const auto coded = code.encode(msg);
      ASSERT_EQ(coded.size(), code.coded_length(len)) << to_string(spec.kind);
      EXPECT_EQ(code.decode_hard(coded, len), msg) << to_string(spec.kind);
      EXPECT_EQ(code.decode(bits_to_llr(coded, 4.0), len), msg) << to_string(spec.kind);
    }
  }
}

TEST(ChannelCode, LengthBookkeeping) {
  EXPECT_EQ(ChannelCode(CodeSpec::uncoded()).coded_length(13), 13u);
  EXPECT_EQ(ChannelCode(CodeSpec::repeat(5)).coded_length(13), 65u);
  EXPECT_EQ(ChannelCode(CodeSpec::hamming()).coded_length(13), 28u);  // 4 blocks, 3 pad bits
  EXPECT_EQ(ChannelCode(CodeSpec::conv()).coded_length(13), 38u);     // 2*(13+6)
  const ChannelCode ldpc(CodeSpec::ldpc(1024));
  const std::size_t k = ldpc.ldpc()->k();
  EXPECT_EQ(ldpc.coded_length(k), 1024u);
  EXPECT_EQ(ldpc.coded_length(k + 1), 2048u);
  EXPECT_NEAR(ldpc.rate(), static_cast<double>(k) / 1024.0, 1e-15);
}

TEST(ChannelCode, WrongLengthIsContractViolation) {
  EXPECT_THROW(ChannelCode(CodeSpec::hamming()).decode_hard(BitVec(8, 0), 4), ContractViolation);
  EXPECT_THROW(ChannelCode(CodeSpec::conv()).decode(LlrVec(10, 1.0), 4), ContractViolation);
  EXPECT_THROW(ChannelCode(CodeSpec::ldpc(96)).decode(LlrVec(95, 1.0), 10), ContractViolation);
}

TEST(Ldpc, RegularDegreesAndSimpleGraph) {
  for (std::size_t n : {12u, 96u, 1024u, 1026u}) {
    const LdpcCode code(n, 7);
    EXPECT_EQ(code.m(), n / 2);
    for (const auto& col : code.variable_neighbors()) {
      EXPECT_EQ(col.size(), 3u);
      EXPECT_EQ(std::set<std::uint32_t>(col.begin(), col.end()).size(), 3u);  // no parallel edges
    }
    for (const auto& row : code.check_neighbors()) EXPECT_EQ(row.size(), 6u);
    EXPECT_GE(code.k(), n / 2);
  }
}

TEST(Ldpc, NoFourCyclesAtPracticalLengths) {
  for (std::size_t n : {256u, 1024u}) EXPECT_EQ(LdpcCode(n, kDefaultLdpcSeed).four_cycle_count(), 0u) << n;
}

TEST(Ldpc, EncoderOutputsSatisfyParity) {
  const LdpcCode code(1024, kDefaultLdpcSeed);
  for (std::uint64_t t = 0; t < 300; ++t) {
    const auto cw = code.encode(random_bits(code.k(), t));
    EXPECT_TRUE(code.parity_ok(cw));
    EXPECT_EQ(code.extract_info(cw), random_bits(code.k(), t));
  }
  EXPECT_THROW(code.encode(BitVec(code.k() + 1, 0)), ContractViolation);
}

TEST(Ldpc, DeterministicFromSeed) {
  EXPECT_EQ(LdpcCode(192, 3).to_alist(), LdpcCode(192, 3).to_alist());
  EXPECT_NE(LdpcCode(192, 3).to_alist(), LdpcCode(192, 4).to_alist());
}

TEST(Ldpc, MinSumCorrectsChannelErrors) {
  const LdpcCode code(1024, kDefaultLdpcSeed);
  const auto cw = code.encode(random_bits(code.k(), 11));
  const ChannelConfig ch{ChannelConfig::Model::awgn, 64, 3.0, 21};
  const auto llr = qpsk_demodulate(apply_channel(qpsk_modulate(cw), ch), ch);
  ASSERT_GT(count_bit_errors(hard_decisions(llr), cw), 10u);
  const auto res = code.decode(llr);
  EXPECT_TRUE(res.parity_satisfied);
  EXPECT_EQ(res.codeword, cw);
  EXPECT_LE(res.iterations, 50);
}

TEST(Ldpc, IterationCapRespected) {
  const LdpcCode code(96, 1);
  const ChannelConfig ch{ChannelConfig::Model::awgn, 64, -10.0, 2};
  const auto cw = code.encode(random_bits(code.k(), 1));
  const auto res = code.decode(qpsk_demodulate(apply_channel(qpsk_modulate(cw), ch), ch), {7, 0.75});
  EXPECT_LE(res.iterations, 7);
}

TEST(Ldpc, AlistFormat) {
  const LdpcCode code(24, 5);
  std::istringstream in(code.to_alist());
  std::size_t n, m, max_col, max_row;
  in >> n >> m >> max_col >> max_row;
  EXPECT_EQ(n, 24u);
  EXPECT_EQ(m, 12u);
  EXPECT_EQ(max_col, 3u);
  EXPECT_EQ(max_row, 6u);
  for (std::size_t i = 0; i < n; ++i) {
    int w;
    in >> w;
    EXPECT_EQ(w, 3);
  }
  for (std::size_t i = 0; i < m; ++i) {
    int w;
    in >> w;
    EXPECT_EQ(w, 6);
  }
  // column lists reproduce the graph (1-based)
  for (std::size_t v = 0; v < n; ++v) {
    std::set<std::uint32_t> expect(code.variable_neighbors()[v].begin(), code.variable_neighbors()[v].end());
    std::set<std::uint32_t> got;
    for (int j = 0; j < 3; ++j) {
      std::uint32_t r;
      in >> r;
      got.insert(r - 1);
    }
    EXPECT_EQ(got, expect);
  }
}

TEST(Ldpc, RejectsBadLength) {
  EXPECT_THROW(LdpcCode(11, 1), ContractViolation);
  EXPECT_THROW(LdpcCode(10, 1), ContractViolation);
}

TEST(Interleaver, NoneIsIdentity) {
  const auto b = random_bits(33, 1);
  EXPECT_EQ(interleave(b, InterleaverSpec::identity()), b);
}

TEST(Interleaver, BlockColumnMajorReadout) {
  const std::vector<int> in = {0, 1, 2, 3, 4, 5};
  EXPECT_EQ(interleave(in, InterleaverSpec::block(2, 3)), (std::vector<int>{0, 3, 1, 4, 2, 5}));
  EXPECT_EQ(deinterleave(interleave(in, InterleaverSpec::block(2, 3)), InterleaverSpec::block(2, 3)), in);
  EXPECT_THROW(interleave(in, InterleaverSpec::block(2, 2)), ContractViolation);
}

TEST(Interleaver, RandomRoundTripAndBijection) {
  const auto b = random_bits(1024, 3);
  const auto spec = InterleaverSpec::random(7);
  EXPECT_EQ(deinterleave(interleave(b, spec), spec), b);
  for (std::size_t len : {1u, 2u, 17u, 1000u, 4096u}) {
    const auto perm = interleaver_permutation(InterleaverSpec::random(len), len);
    EXPECT_EQ(std::set<std::size_t>(perm.begin(), perm.end()).size(), len);
    std::vector<double> x(len);
    for (std::size_t i = 0; i < len; ++i) x[i] = static_cast<double>(i) * 0.5;
    EXPECT_EQ(deinterleave(interleave(x, InterleaverSpec::random(99)), InterleaverSpec::random(99)), x);
  }
  EXPECT_NE(interleaver_permutation(InterleaverSpec::random(1), 64), interleaver_permutation(InterleaverSpec::random(2), 64));
}

TEST(Interleaver, EmptyStreamRejected) {
  EXPECT_THROW(interleave(BitVec{}, InterleaverSpec::identity()), ContractViolation);
}
