#include "nvc/entropy_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace nvc {

namespace {

constexpr std::uint64_t kOneQ32 = 1ull << 32;
constexpr std::uint64_t kLn2Q32 = 2977044472ull;  // round(ln 2 * 2^32)
// Log-grid ratio 12800^(1/63) ~ 1.16203 in Q16, so 64 levels span 0.01 .. ~128.
constexpr std::int64_t kLevelRatioQ16 = 76155;

std::int32_t clamp_to(double v, Alphabet a) {
  if (!(v > a.min)) return a.min;  // also catches NaN
  if (v > a.max) return a.max;
  return static_cast<std::int32_t>(std::lround(v));
}

}  // namespace

std::uint64_t exp_neg_q32(std::uint64_t t_q32) {
  const std::uint64_t k = t_q32 / kLn2Q32;
  if (k >= 33) return 0;
  const std::uint64_t r = t_q32 - k * kLn2Q32;  // [0, ln 2)
  // Taylor series of exp(-r); terms shrink geometrically since r < 0.7.
  std::uint64_t term = kOneQ32;
  std::int64_t sum = static_cast<std::int64_t>(kOneQ32);
  for (std::uint64_t n = 1; n < 24 && term != 0; ++n) {
    term = ((term * r) >> 32) / n;
    sum += (n % 2 == 1) ? -static_cast<std::int64_t>(term) : static_cast<std::int64_t>(term);
  }
  return static_cast<std::uint64_t>(std::max<std::int64_t>(sum, 0)) >> k;
}

CdfTable laplace_table(std::int64_t mean_q16, std::int64_t scale_q16, Alphabet alphabet) {
  const std::size_t n = alphabet.size();
  if (alphabet.max < alphabet.min || n > CdfTable::kTotal / 2) {
    throw std::invalid_argument("laplace_table: unsupported alphabet size " + std::to_string(n));
  }
  scale_q16 = std::max(scale_q16, kScaleMinQ16);

  // Q32 Laplace cdf at the bin boundaries; cdf[0] and cdf[n] absorb the tails.
  std::vector<std::uint64_t> cdf(n + 1, 0);
  cdf[n] = kOneQ32;
  for (std::size_t i = 1; i < n; ++i) {
    const std::int64_t boundary = (static_cast<std::int64_t>(alphabet.min) + static_cast<std::int64_t>(i)) * 65536 - 32768;
    const std::int64_t d = boundary - mean_q16;
    const std::uint64_t mag = static_cast<std::uint64_t>(d < 0 ? -d : d);
    std::uint64_t e = 0;
    if (mag < 48ull * static_cast<std::uint64_t>(scale_q16)) {
      const auto t = static_cast<std::uint64_t>((static_cast<unsigned __int128>(mag) << 32) /
                                                static_cast<std::uint64_t>(scale_q16));
      e = exp_neg_q32(t);
    }
    cdf[i] = d < 0 ? e / 2 : kOneQ32 - e / 2;
    cdf[i] = std::max(cdf[i], cdf[i - 1]);
  }

  const std::uint64_t budget = CdfTable::kTotal - n;
  std::vector<std::uint32_t> freq(n);
  std::uint64_t used = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t pmf = cdf[i + 1] - cdf[i];
    freq[i] = static_cast<std::uint32_t>(((pmf * budget) >> 32) + 1);
    used += freq[i];
  }
  const std::int64_t mode_symbol = alphabet.clamp(static_cast<std::int32_t>(
      std::clamp<std::int64_t>(round_div(mean_q16, 65536), alphabet.min, alphabet.max)));
  freq[static_cast<std::size_t>(mode_symbol - alphabet.min)] +=
      static_cast<std::uint32_t>(CdfTable::kTotal - used);
  return CdfTable(alphabet.min, freq);
}

CdfTable discretize_laplace(double mean, double scale, Alphabet alphabet) {
  const double limit = 1e9;
  const auto mean_q16 = static_cast<std::int64_t>(std::llround(std::clamp(mean, -limit, limit) * 65536.0));
  const auto scale_q16 = static_cast<std::int64_t>(std::llround(std::clamp(scale, 0.0, limit) * 65536.0));
  return laplace_table(mean_q16, scale_q16, alphabet);
}

ScaleTableSet::ScaleTableSet(Alphabet alphabet) : alphabet_(alphabet) {
  levels_.resize(kLevels);
  levels_[0] = kScaleMinQ16;
  for (int k = 1; k < kLevels; ++k) {
    levels_[static_cast<std::size_t>(k)] = (levels_[static_cast<std::size_t>(k - 1)] * kLevelRatioQ16 + 32768) >> 16;
  }
  thresholds_.resize(kLevels - 1);
  for (std::size_t k = 0; k + 1 < levels_.size(); ++k) thresholds_[k] = (levels_[k] + levels_[k + 1]) / 2;
  tables_.reserve(kLevels);
  for (std::int64_t s : levels_) tables_.push_back(laplace_table(0, s, alphabet));
}

std::uint16_t ScaleTableSet::index_for_q16(std::int64_t scale_q16) const {
  const auto it = std::upper_bound(thresholds_.begin(), thresholds_.end(), scale_q16);
  return static_cast<std::uint16_t>(it - thresholds_.begin());
}

std::uint16_t ScaleTableSet::index_for(double scale) const {
  const double limit = 1e9;
  if (!(scale > 0)) return 0;
  return index_for_q16(static_cast<std::int64_t>(std::llround(std::min(scale, limit) * 65536.0)));
}

const ScaleTableSet& default_scale_tables() {
  static const ScaleTableSet tables(kLatentAlphabet);
  return tables;
}

QuantStep QuantStep::of(double qstep) {
  if (!(qstep > 0)) throw std::invalid_argument("quantization step must be positive");
  QuantStep s;
  s.q16 = std::max<std::int64_t>(1, std::llround(qstep * 65536.0));
  s.value = static_cast<double>(s.q16) / 65536.0;
  return s;
}

// ---------------------------------------------------------------------------
// Latent symbol mapping

template <>
std::vector<std::uint16_t> latent_table_index(const RealTensor& scale, const QuantStep& step,
                                              const ScaleTableSet& tables, const QuantScheme&) {
  std::vector<std::uint16_t> idx(scale.size());
  const auto s = scale.data();
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = tables.index_for(s[i] / step.value);
  return idx;
}

template <>
std::vector<std::uint16_t> latent_table_index(const QTensor& scale, const QuantStep& step,
                                              const ScaleTableSet& tables,
                                              const QuantScheme& scheme) {
  std::vector<std::uint16_t> idx(scale.size());
  const auto s = scale.data();
  const std::int64_t den = static_cast<std::int64_t>(scheme.k1) * step.q16;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const std::int64_t b = std::max<std::int64_t>(s[i], 0);
    idx[i] = tables.index_for_q16((b << 32) / den);
  }
  return idx;
}

namespace {

float dequantize_symbol(std::int32_t s, float mean, const QuantStep& step) {
  return static_cast<float>(static_cast<double>(mean) + s * step.value);
}

std::int16_t dequantize_symbol(std::int32_t s, std::int16_t mean, const QuantStep& step,
                               const QuantScheme& scheme) {
  return saturate_int16(mean + round_div(static_cast<std::int64_t>(s) * step.q16 * scheme.k1, 65536));
}

void check_same(const Shape& a, const Shape& b, const char* what) {
  if (!(a == b)) {
    throw std::invalid_argument(std::string(what) + ": shape " + to_string(a) + " vs " + to_string(b));
  }
}

}  // namespace

template <>
LatentSymbols<float> quantize_latent(const RealTensor& y, const PriorParams<float>& prior,
                                     const QuantStep& step, const ScaleTableSet& tables,
                                     const QuantScheme& scheme) {
  check_same(y.shape(), prior.mean.shape(), "quantize_latent");
  check_same(y.shape(), prior.scale.shape(), "quantize_latent");
  LatentSymbols<float> out;
  out.symbols.resize(y.size());
  out.dequantized = RealTensor(y.shape());
  const auto yv = y.data();
  const auto mv = prior.mean.data();
  auto dq = out.dequantized.data();
  for (std::size_t i = 0; i < yv.size(); ++i) {
    const double r = (static_cast<double>(yv[i]) - mv[i]) / step.value;
    out.symbols[i] = clamp_to(r, tables.alphabet());
    dq[i] = dequantize_symbol(out.symbols[i], mv[i], step);
  }
  out.table_index = latent_table_index(prior.scale, step, tables, scheme);
  return out;
}

template <>
LatentSymbols<std::int16_t> quantize_latent(const QTensor& y, const PriorParams<std::int16_t>& prior,
                                            const QuantStep& step, const ScaleTableSet& tables,
                                            const QuantScheme& scheme) {
  check_same(y.shape(), prior.mean.shape(), "quantize_latent");
  check_same(y.shape(), prior.scale.shape(), "quantize_latent");
  LatentSymbols<std::int16_t> out;
  out.symbols.resize(y.size());
  out.dequantized = QTensor(y.shape());
  const auto yv = y.data();
  const auto mv = prior.mean.data();
  auto dq = out.dequantized.data();
  const std::int64_t den = static_cast<std::int64_t>(scheme.k1) * step.q16;
  const Alphabet a = tables.alphabet();
  for (std::size_t i = 0; i < yv.size(); ++i) {
    const std::int64_t diff = static_cast<std::int64_t>(yv[i]) - mv[i];
    const std::int64_t s = round_div(diff * 65536, den);
    out.symbols[i] = static_cast<std::int32_t>(std::clamp<std::int64_t>(s, a.min, a.max));
    dq[i] = dequantize_symbol(out.symbols[i], mv[i], step, scheme);
  }
  out.table_index = latent_table_index(prior.scale, step, tables, scheme);
  return out;
}

template <>
RealTensor dequantize_latent(std::span<const std::int32_t> symbols, const RealTensor& mean,
                             const QuantStep& step, const QuantScheme&) {
  if (symbols.size() != mean.size()) throw std::invalid_argument("dequantize_latent: size mismatch");
  RealTensor out(mean.shape());
  const auto mv = mean.data();
  auto o = out.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = dequantize_symbol(symbols[i], mv[i], step);
  return out;
}

template <>
QTensor dequantize_latent(std::span<const std::int32_t> symbols, const QTensor& mean,
                          const QuantStep& step, const QuantScheme& scheme) {
  if (symbols.size() != mean.size()) throw std::invalid_argument("dequantize_latent: size mismatch");
  QTensor out(mean.shape());
  const auto mv = mean.data();
  auto o = out.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = dequantize_symbol(symbols[i], mv[i], step, scheme);
  return out;
}

// ---------------------------------------------------------------------------
// Hyper latent

ZCoding factorized_z_tables(const BankEntry& entry, const Shape& z_shape) {
  if (static_cast<std::size_t>(z_shape.channels) != entry.z_freqs.size()) {
    throw std::invalid_argument("bank entry has z priors for " + std::to_string(entry.z_freqs.size()) +
                                " channels, hyper latent has " + std::to_string(z_shape.channels));
  }
  ZCoding out;
  out.tables.reserve(entry.z_freqs.size());
  for (const auto& f : entry.z_freqs) out.tables.emplace_back(kHyperAlphabet.min, f);
  out.table_index.resize(z_shape.size());
  const std::size_t plane = z_shape.plane();
  for (std::size_t i = 0; i < out.table_index.size(); ++i) {
    out.table_index[i] = static_cast<std::uint16_t>(i / plane);
  }
  return out;
}

template <>
LatentSymbols<float> quantize_hyper(const RealTensor& z, const ZCoding& coding, const QuantScheme&) {
  LatentSymbols<float> out;
  out.symbols.resize(z.size());
  out.dequantized = RealTensor(z.shape());
  const auto zv = z.data();
  auto dq = out.dequantized.data();
  for (std::size_t i = 0; i < zv.size(); ++i) {
    out.symbols[i] = clamp_to(zv[i], kHyperAlphabet);
    dq[i] = static_cast<float>(out.symbols[i]);
  }
  out.table_index = coding.table_index;
  return out;
}

template <>
LatentSymbols<std::int16_t> quantize_hyper(const QTensor& z, const ZCoding& coding,
                                           const QuantScheme& scheme) {
  LatentSymbols<std::int16_t> out;
  out.symbols.resize(z.size());
  out.dequantized = QTensor(z.shape());
  const auto zv = z.data();
  auto dq = out.dequantized.data();
  for (std::size_t i = 0; i < zv.size(); ++i) {
    const std::int64_t s = round_div(zv[i], scheme.k1);
    out.symbols[i] = static_cast<std::int32_t>(std::clamp<std::int64_t>(s, kHyperAlphabet.min, kHyperAlphabet.max));
    dq[i] = saturate_int16(static_cast<std::int64_t>(out.symbols[i]) * scheme.k1);
  }
  out.table_index = coding.table_index;
  return out;
}

template <>
RealTensor dequantize_hyper(std::span<const std::int32_t> symbols, const Shape& shape,
                            const QuantScheme&) {
  if (symbols.size() != shape.size()) throw std::invalid_argument("dequantize_hyper: size mismatch");
  RealTensor out(shape);
  auto o = out.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = static_cast<float>(symbols[i]);
  return out;
}

template <>
QTensor dequantize_hyper(std::span<const std::int32_t> symbols, const Shape& shape,
                         const QuantScheme& scheme) {
  if (symbols.size() != shape.size()) throw std::invalid_argument("dequantize_hyper: size mismatch");
  QTensor out(shape);
  auto o = out.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = saturate_int16(static_cast<std::int64_t>(symbols[i]) * scheme.k1);
  return out;
}

}  // namespace nvc
