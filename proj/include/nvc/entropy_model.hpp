#pragma once

// Probability models on top of the range coder: integer-only discretized
// Laplace tables, the scale-indexed table set used for y, the factorized z
// prior, and the symbol mappings between latents and coder symbols.
//
// y is coded as s = round((y - mean) / qstep) against a zero-mean Laplace of
// scale b / qstep, so only the scale selects a table and the mean enters the
// reconstruction y_hat = mean + s * qstep.

#include <cstdint>
#include <span>
#include <vector>

#include "nvc/model.hpp"
#include "nvc/range_coder.hpp"
#include "nvc/rate_control.hpp"
#include "nvc/tensor_ops.hpp"

namespace nvc {

inline constexpr Alphabet kLatentAlphabet{-128, 127};
inline constexpr double kScaleMin = 0.01;
inline constexpr std::int64_t kScaleMinQ16 = 655;  // round(0.01 * 65536)

// exp(-t) for t >= 0, both in Q32, integer-only.
std::uint64_t exp_neg_q32(std::uint64_t t_q32);

// Laplace(mean, scale) masses on unit bins around each symbol, floor-quantized
// to 16 bits with +1 smoothing and tails folded into the edge symbols. The
// rounding deficit goes to the symbol nearest the mean, so the table is exactly
// symmetric when the mean is zero. mean and scale are Q16; scale is clamped to
// kScaleMinQ16.
CdfTable laplace_table(std::int64_t mean_q16, std::int64_t scale_q16, Alphabet alphabet);
CdfTable discretize_laplace(double mean, double scale, Alphabet alphabet);

class ScaleTableSet {
 public:
  static constexpr int kLevels = 64;

  explicit ScaleTableSet(Alphabet alphabet = kLatentAlphabet);

  Alphabet alphabet() const { return alphabet_; }
  std::span<const CdfTable> tables() const { return tables_; }
  // Log-spaced Q16 scales from kScaleMin to about 128.
  std::span<const std::int64_t> levels_q16() const { return levels_; }

  // Nearest level on the log grid (midpoint thresholds in Q16).
  std::uint16_t index_for_q16(std::int64_t scale_q16) const;
  std::uint16_t index_for(double scale) const;

 private:
  Alphabet alphabet_;
  std::vector<std::int64_t> levels_;
  std::vector<std::int64_t> thresholds_;
  std::vector<CdfTable> tables_;
};

// Shared immutable instance over kLatentAlphabet.
const ScaleTableSet& default_scale_tables();

struct QuantStep {
  double value = 1.0;
  std::int64_t q16 = 65536;

  static QuantStep of(double qstep);
};

template <typename T>
struct LatentSymbols {
  std::vector<std::int32_t> symbols;
  std::vector<std::uint16_t> table_index;
  Tensor<T> dequantized;
};

// Table index per element from the stepped scale b / qstep.
template <typename T>
std::vector<std::uint16_t> latent_table_index(const Tensor<T>& scale, const QuantStep& step,
                                              const ScaleTableSet& tables,
                                              const QuantScheme& scheme = kDefaultScheme);

template <typename T>
LatentSymbols<T> quantize_latent(const Tensor<T>& y, const PriorParams<T>& prior,
                                 const QuantStep& step, const ScaleTableSet& tables,
                                 const QuantScheme& scheme = kDefaultScheme);

template <typename T>
Tensor<T> dequantize_latent(std::span<const std::int32_t> symbols, const Tensor<T>& mean,
                            const QuantStep& step, const QuantScheme& scheme = kDefaultScheme);

struct ZCoding {
  std::vector<CdfTable> tables;            // one per hyper channel
  std::vector<std::uint16_t> table_index;  // per z element
};

// Per-channel static tables from the bank entry, shared across spatial positions.
ZCoding factorized_z_tables(const BankEntry& entry, const Shape& z_shape);

// z symbols are round(z) clamped to kHyperAlphabet.
template <typename T>
LatentSymbols<T> quantize_hyper(const Tensor<T>& z, const ZCoding& coding,
                                const QuantScheme& scheme = kDefaultScheme);
template <typename T>
Tensor<T> dequantize_hyper(std::span<const std::int32_t> symbols, const Shape& shape,
                           const QuantScheme& scheme = kDefaultScheme);

#define NVC_DECLARE_SYMBOL_MAPPING(T)                                                          \
  template <>                                                                                 \
  std::vector<std::uint16_t> latent_table_index<T>(const Tensor<T>&, const QuantStep&,        \
                                                   const ScaleTableSet&, const QuantScheme&); \
  template <>                                                                                 \
  LatentSymbols<T> quantize_latent<T>(const Tensor<T>&, const PriorParams<T>&,                \
                                      const QuantStep&, const ScaleTableSet&,                 \
                                      const QuantScheme&);                                    \
  template <>                                                                                 \
  Tensor<T> dequantize_latent<T>(std::span<const std::int32_t>, const Tensor<T>&,             \
                                 const QuantStep&, const QuantScheme&);                       \
  template <>                                                                                 \
  LatentSymbols<T> quantize_hyper<T>(const Tensor<T>&, const ZCoding&, const QuantScheme&);   \
  template <>                                                                                 \
  Tensor<T> dequantize_hyper<T>(std::span<const std::int32_t>, const Shape&, const QuantScheme&);

NVC_DECLARE_SYMBOL_MAPPING(float)
NVC_DECLARE_SYMBOL_MAPPING(std::int16_t)
#undef NVC_DECLARE_SYMBOL_MAPPING

// Two-step coding of y: the first channel half against the hyperprior, the
// second against parameters re-estimated from the decoded first half.
// step2(y1_hat) must return PriorParams for the second half.
template <typename T>
struct TwoStepStreams {
  std::vector<std::uint8_t> y1;
  std::vector<std::uint8_t> y2;
  Tensor<T> y_hat;
};

template <typename T, typename Step2>
TwoStepStreams<T> two_step_encode(const Tensor<T>& y, const PriorParams<T>& step1, Step2&& step2,
                                  const QuantStep& step, const ScaleTableSet& tables,
                                  const QuantScheme& scheme = kDefaultScheme) {
  auto [y1, y2] = chunk2(y);
  LatentSymbols<T> s1 = quantize_latent(y1, step1, step, tables, scheme);
  const PriorParams<T> p2 = step2(s1.dequantized);
  LatentSymbols<T> s2 = quantize_latent(y2, p2, step, tables, scheme);
  TwoStepStreams<T> out;
  out.y1 = encode_symbols(s1.symbols, s1.table_index, tables.tables());
  out.y2 = encode_symbols(s2.symbols, s2.table_index, tables.tables());
  out.y_hat = concat_channels(s1.dequantized, s2.dequantized);
  return out;
}

template <typename T, typename Step2>
Tensor<T> two_step_decode(std::span<const std::uint8_t> bytes1, std::span<const std::uint8_t> bytes2,
                          const PriorParams<T>& step1, Step2&& step2, const QuantStep& step,
                          const ScaleTableSet& tables, const QuantScheme& scheme = kDefaultScheme) {
  const auto idx1 = latent_table_index(step1.scale, step, tables, scheme);
  const auto sym1 = decode_symbols(bytes1, idx1, tables.tables());
  Tensor<T> y1_hat = dequantize_latent(sym1, step1.mean, step, scheme);
  const PriorParams<T> p2 = step2(y1_hat);
  const auto idx2 = latent_table_index(p2.scale, step, tables, scheme);
  const auto sym2 = decode_symbols(bytes2, idx2, tables.tables());
  return concat_channels(y1_hat, dequantize_latent(sym2, p2.mean, step, scheme));
}

}  // namespace nvc
