#include <gtest/gtest.h>

#include <cmath>

#include "nvc/bytes.hpp"
#include "nvc/entropy_model.hpp"
#include "nvc/model.hpp"
#include "nvc/rate_control.hpp"
#include "test_support.hpp"

namespace nvc {
namespace {

const RateModuleBank& bank() {
  static const RateModuleBank b = generate_bank(CodecConfig{}, 0);
  return b;
}

TEST(Qstep, PowerOfTwoEveryEightQp) {
  EXPECT_DOUBLE_EQ(qstep_of(32), 1.0);
  EXPECT_DOUBLE_EQ(qstep_of(40), 2.0);
  EXPECT_DOUBLE_EQ(qstep_of(0), 0.0625);
  EXPECT_THROW(qstep_of(63.5), std::invalid_argument);
  EXPECT_THROW(qstep_of(-0.1), std::invalid_argument);
}

TEST(QpQ8, FixedPointRoundTrip) {
  EXPECT_EQ(qp_to_q8(10.5), 2688);
  EXPECT_DOUBLE_EQ(qp_from_q8(qp_to_q8(37.25)), 37.25);
  EXPECT_EQ(qp_to_q8(63), 63 * 256);
}

TEST(SelectEntry, BoundsAndIdentity) {
  EXPECT_NO_THROW(bank().select_entry(0));
  EXPECT_NO_THROW(bank().select_entry(63));
  EXPECT_THROW(bank().select_entry(64), std::invalid_argument);
  EXPECT_THROW(bank().select_entry(-1), std::invalid_argument);
  EXPECT_EQ(&bank().select_entry(17), &bank().entries()[17]);
}

TEST(InterpolateEntry, IntegerPointsMatchSelect) {
  for (int qp = 0; qp <= kMaxQp; ++qp) EXPECT_EQ(bank().interpolate_entry(qp), bank().select_entry(qp));
}

TEST(InterpolateEntry, MidpointIsLinearInScales) {
  std::vector<BankEntry> entries(bank().entries().begin(), bank().entries().end());
  for (float& v : entries[10].q_e) v = 1.0f;
  for (float& v : entries[11].q_e) v = 3.0f;
  const RateModuleBank b(bank().latent_channels(), bank().hyper_channels(), entries);
  const BankEntry mid = b.interpolate_entry(10.5);
  for (float v : mid.q_e) EXPECT_FLOAT_EQ(v, 2.0f);
  EXPECT_NEAR(mid.qstep, std::sqrt(entries[10].qstep * entries[11].qstep), 1e-12);
  EXPECT_THROW(b.interpolate_entry(63.01), std::invalid_argument);
}

TEST(InterpolateEntry, ZPriorFromNearestEntryTiesLow) {
  EXPECT_EQ(bank().interpolate_entry(10.4).z_freqs, bank().select_entry(10).z_freqs);
  EXPECT_EQ(bank().interpolate_entry(10.6).z_freqs, bank().select_entry(11).z_freqs);
  EXPECT_EQ(bank().interpolate_entry(10.5).z_freqs, bank().select_entry(10).z_freqs);
}

TEST(QpSchedule, GopOffsetsAndClipping) {
  QpSchedule s;
  s.base_qp = 20;
  const double expected[8] = {20, 28, 20, 24, 20, 24, 20, 24};
  for (std::size_t t = 0; t < 16; ++t) EXPECT_DOUBLE_EQ(s.effective_qp(t), expected[t % 8]);
  s.base_qp = 60;
  EXPECT_DOUBLE_EQ(s.effective_qp(1), 63.0);
  EXPECT_DOUBLE_EQ(s.effective_qp(0), 60.0);
  s.base_qp = 10.5;
  EXPECT_DOUBLE_EQ(s.effective_qp(3), 14.5);
}

TEST(GenerateBank, DeterministicAndValid) {
  EXPECT_EQ(generate_bank(CodecConfig{}, 0), bank());
  EXPECT_NE(generate_bank(CodecConfig{}, 1), bank());
  for (int qp = 0; qp <= kMaxQp; ++qp) EXPECT_DOUBLE_EQ(bank().select_entry(qp).qstep, qstep_of(qp));
  const auto& lo = bank().select_entry(0).z_freqs[0];
  const auto& hi = bank().select_entry(63).z_freqs[0];
  EXPECT_GT(hi[32], lo[32]);  // the z prior narrows as qp grows
}

TEST(BankContainer, RoundTripAndCorruption) {
  const auto bytes = serialize_bank(bank());
  EXPECT_EQ(parse_bank(bytes), bank());
  auto bad = bytes;
  bad[bad.size() / 2] ^= 0x40;
  EXPECT_THROW(parse_bank(bad), FormatError);
  auto short_bytes = bytes;
  short_bytes.resize(bytes.size() - 3);
  EXPECT_THROW(parse_bank(short_bytes), FormatError);
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_THROW(parse_bank(bad_magic), FormatError);

  test::TempDir dir("bank");
  save_bank(bank(), dir / "b.nvcb");
  EXPECT_EQ(load_bank(dir / "b.nvcb"), bank());
}

TEST(BankInvariants, ConstructorRejectsMalformedEntries) {
  std::vector<BankEntry> entries(bank().entries().begin(), bank().entries().end());
  const int c = bank().latent_channels();
  const int h = bank().hyper_channels();
  EXPECT_THROW(RateModuleBank(c, h, std::vector<BankEntry>(entries.begin(), entries.end() - 1)), std::invalid_argument);
  {
    auto e = entries;
    e[3].q_d[0] = 0.0f;
    EXPECT_THROW(RateModuleBank(c, h, e), std::invalid_argument);
  }
  {
    auto e = entries;
    e[5].q_r.pop_back();
    EXPECT_THROW(RateModuleBank(c, h, e), std::invalid_argument);
  }
  {
    auto e = entries;
    e[7].qstep = e[6].qstep;
    EXPECT_THROW(RateModuleBank(c, h, e), std::invalid_argument);
  }
  {
    auto e = entries;
    e[9].z_freqs[0][0] += 1;
    EXPECT_THROW(RateModuleBank(c, h, e), std::invalid_argument);
  }
  EXPECT_THROW(RateModuleBank(c, h + 1, entries), std::invalid_argument);
}

}  // namespace
}  // namespace nvc
