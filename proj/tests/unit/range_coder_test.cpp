#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "nvc/range_coder.hpp"

namespace nvc {
namespace {

CdfTable uniform_table(std::int32_t min, std::size_t n) {
  std::vector<std::uint32_t> f(n, CdfTable::kTotal / static_cast<std::uint32_t>(n));
  std::uint32_t rest = CdfTable::kTotal - std::accumulate(f.begin(), f.end(), 0u);
  for (std::size_t i = 0; rest > 0; i = (i + 1) % n, --rest) ++f[i];
  return CdfTable(min, f);
}

// Random table with every frequency >= 1; `skew` concentrates mass on one symbol.
CdfTable random_table(std::mt19937_64& rng, std::size_t n, bool skew) {
  std::vector<double> w(n);
  std::exponential_distribution<double> e(1.0);
  for (double& x : w) x = e(rng);
  if (skew) w[rng() % n] += 1e6;
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  const std::uint32_t budget = CdfTable::kTotal - static_cast<std::uint32_t>(n);
  std::vector<std::uint32_t> f(n);
  std::uint32_t used = 0;
  for (std::size_t i = 0; i < n; ++i) {
    f[i] = 1 + static_cast<std::uint32_t>(std::floor(w[i] / total * budget));
    used += f[i];
  }
  f[static_cast<std::size_t>(std::max_element(w.begin(), w.end()) - w.begin())] += CdfTable::kTotal - used;
  return CdfTable(-static_cast<std::int32_t>(n / 2), f);
}

std::int32_t sample(const CdfTable& t, std::mt19937_64& rng) {
  const auto target = static_cast<std::uint32_t>(rng() % CdfTable::kTotal);
  return t.alphabet().min + static_cast<std::int32_t>(t.find(target));
}

TEST(CdfTable, ValidatesFrequencies) {
  EXPECT_THROW(CdfTable(0, std::vector<std::uint32_t>{65535, 0, 1}), std::invalid_argument);
  EXPECT_THROW(CdfTable(0, std::vector<std::uint32_t>{100, 100}), std::invalid_argument);
  EXPECT_THROW(CdfTable(0, std::vector<std::uint32_t>{}), std::invalid_argument);
  const CdfTable t(-1, std::vector<std::uint32_t>{1, 65534, 1});
  EXPECT_EQ(t.alphabet(), (Alphabet{-1, 1}));
  EXPECT_EQ(t.cumulative().front(), 0u);
  EXPECT_EQ(t.cumulative().back(), 65536u);
  EXPECT_EQ(t.find(0), 0u);
  EXPECT_EQ(t.find(1), 1u);
  EXPECT_EQ(t.find(65535), 2u);
}

TEST(RangeCoder, EmptySequenceIsFlushOnly) {
  const std::vector<CdfTable> tables{uniform_table(0, 4)};
  const auto bytes = encode_symbols({}, {}, tables);
  EXPECT_EQ(bytes.size(), 7u);
  EXPECT_TRUE(decode_symbols(bytes, {}, tables).empty());
}

TEST(RangeCoder, UniformByteAlphabetCostsEightBitsPerSymbol) {
  std::mt19937_64 rng(1);
  const std::vector<CdfTable> tables{uniform_table(0, 256)};
  std::vector<std::int32_t> syms(10000);
  for (auto& s : syms) s = static_cast<std::int32_t>(rng() % 256);
  const std::vector<std::uint16_t> idx(syms.size(), 0);
  const auto bytes = encode_symbols(syms, idx, tables);
  EXPECT_LE(std::abs(static_cast<double>(bytes.size()) - 10000.0), 100.0);
  EXPECT_EQ(decode_symbols(bytes, idx, tables), syms);
}

TEST(RangeCoder, NearCertainSymbolFitsInEightBytes) {
  const std::vector<CdfTable> tables{CdfTable(0, std::vector<std::uint32_t>{65535, 1})};
  const std::vector<std::int32_t> syms{0};
  const std::vector<std::uint16_t> idx{0};
  const auto bytes = encode_symbols(syms, idx, tables);
  EXPECT_LE(bytes.size(), 8u);
  EXPECT_EQ(decode_symbols(bytes, idx, tables), syms);
}

TEST(RangeCoder, MillionRandomSymbolsRoundTrip) {
  std::mt19937_64 rng(2024);
  std::vector<CdfTable> tables;
  for (int i = 0; i < 24; ++i) tables.push_back(random_table(rng, 2 + rng() % 300, i % 3 == 0));
  tables.push_back(CdfTable(5, std::vector<std::uint32_t>{65536}));  // single-symbol table
  tables.push_back(CdfTable(0, std::vector<std::uint32_t>{1, 65535}));
  const std::size_t n = 1000000;
  std::vector<std::int32_t> syms(n);
  std::vector<std::uint16_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) {
    idx[i] = static_cast<std::uint16_t>(rng() % tables.size());
    // Occasionally force the rarest symbols to exercise carries and tiny ranges.
    const CdfTable& t = tables[idx[i]];
    syms[i] = (rng() % 64 == 0) ? t.alphabet().min : sample(t, rng);
  }
  const auto bytes = encode_symbols(syms, idx, tables);
  EXPECT_EQ(decode_symbols(bytes, idx, tables), syms);
}

TEST(RangeCoder, CompressesWithinOnePercentOfEntropy) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 6; ++trial) {
    const CdfTable table = random_table(rng, 2 + rng() % 120, trial % 2 == 1);
    const std::vector<CdfTable> tables{table};
    const std::size_t n = 200000;
    std::vector<std::int32_t> syms(n);
    double info_bits = 0.0;
    for (auto& s : syms) {
      s = sample(table, rng);
      info_bits += -std::log2(table.probability(s));
    }
    const std::vector<std::uint16_t> idx(n, 0);
    const auto bytes = encode_symbols(syms, idx, tables);
    EXPECT_LE(bytes.size() * 8.0, info_bits * 1.01 + 64.0) << "trial " << trial;
    EXPECT_EQ(decode_symbols(bytes, idx, tables), syms);
  }
}

TEST(RangeCoder, DeterministicOutput) {
  std::mt19937_64 rng(3);
  const std::vector<CdfTable> tables{random_table(rng, 50, false)};
  std::vector<std::int32_t> syms(5000);
  for (auto& s : syms) s = sample(tables[0], rng);
  const std::vector<std::uint16_t> idx(syms.size(), 0);
  EXPECT_EQ(encode_symbols(syms, idx, tables), encode_symbols(syms, idx, tables));
}

TEST(RangeCoder, RejectsOutOfAlphabetSymbol) {
  const std::vector<CdfTable> tables{uniform_table(-2, 5)};
  const std::vector<std::uint16_t> idx{0};
  EXPECT_THROW(encode_symbols(std::vector<std::int32_t>{3}, idx, tables), EntropyError);
  EXPECT_THROW(encode_symbols(std::vector<std::int32_t>{-3}, idx, tables), EntropyError);
  EXPECT_THROW(encode_symbols(std::vector<std::int32_t>{0}, std::vector<std::uint16_t>{1}, tables),
               std::exception);
}

TEST(RangeCoder, TruncatedOrPaddedStreamIsRejected) {
  std::mt19937_64 rng(4);
  const std::vector<CdfTable> tables{uniform_table(0, 256)};
  std::vector<std::int32_t> syms(400);
  for (auto& s : syms) s = static_cast<std::int32_t>(rng() % 256);
  const std::vector<std::uint16_t> idx(syms.size(), 0);
  const auto bytes = encode_symbols(syms, idx, tables);
  for (std::size_t cut : {std::size_t{0}, std::size_t{3}, bytes.size() / 2, bytes.size() - 1}) {
    const std::vector<std::uint8_t> part(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(cut));
    EXPECT_THROW(decode_symbols(part, idx, tables), EntropyError) << "cut at " << cut;
  }
  auto padded = bytes;
  padded.push_back(0);
  EXPECT_THROW(decode_symbols(padded, idx, tables), EntropyError);
}

}  // namespace
}  // namespace nvc
