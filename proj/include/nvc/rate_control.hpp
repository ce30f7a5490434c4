#pragma once

// Rate-adjustment module bank: 64 qp-indexed entries of per-channel scale
// vectors (q_e, q_d, q_f, q_r), factorized z priors and a quantization step.

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "nvc/range_coder.hpp"

namespace nvc {

struct CodecConfig;

inline constexpr int kMaxQp = 63;
inline constexpr Alphabet kHyperAlphabet{-32, 32};

// 2^((qp - 32) / 8)
double qstep_of(double qp);

// qp values travel through the stream as Q8 fixed point so that encoder and
// decoder pick identical interpolated entries.
std::uint16_t qp_to_q8(double qp);
inline double qp_from_q8(std::uint16_t q8) { return q8 / 256.0; }

struct BankEntry {
  std::vector<float> q_e;
  std::vector<float> q_d;
  std::vector<float> q_f;
  std::vector<float> q_r;
  // Per hyper channel, kHyperAlphabet.size() frequencies summing to CdfTable::kTotal.
  std::vector<std::vector<std::uint32_t>> z_freqs;
  double qstep = 1.0;

  friend bool operator==(const BankEntry&, const BankEntry&) = default;
};

class RateModuleBank {
 public:
  static constexpr int kEntries = 64;

  RateModuleBank(int latent_channels, int hyper_channels, std::vector<BankEntry> entries);

  int latent_channels() const { return latent_channels_; }
  int hyper_channels() const { return hyper_channels_; }
  std::span<const BankEntry> entries() const { return entries_; }

  // Throws std::invalid_argument outside [0, 63].
  const BankEntry& select_entry(int qp) const;
  // Scale vectors linear between floor/ceil entries, z prior from the nearest
  // entry (ties to the lower one), qstep geometric.
  BankEntry interpolate_entry(double qp) const;

  friend bool operator==(const RateModuleBank&, const RateModuleBank&) = default;

 private:
  int latent_channels_;
  int hyper_channels_;
  std::vector<BankEntry> entries_;
};

// Seeded desk-scale bank: scale vectors drift gently with qp around 1, z priors
// are discretized Laplace tables whose width shrinks with qp.
RateModuleBank generate_bank(const CodecConfig& config, std::uint64_t seed);

// "NVCB" bank container with a trailing CRC-32.
std::vector<std::uint8_t> serialize_bank(const RateModuleBank& bank);
RateModuleBank parse_bank(std::span<const std::uint8_t> bytes);
RateModuleBank load_bank(const std::filesystem::path& path);
void save_bank(const RateModuleBank& bank, const std::filesystem::path& path);

struct QpSchedule {
  static constexpr std::array<std::int8_t, 8> kDefaultOffsets{0, 8, 0, 4, 0, 4, 0, 4};

  double base_qp = 32.0;
  std::array<std::int8_t, 8> gop_offsets = kDefaultOffsets;

  // clip(base + offset[t mod 8], 0, 63), in Q8.
  std::uint16_t effective_q8(std::size_t frame_index) const;
  double effective_qp(std::size_t frame_index) const {
    return qp_from_q8(effective_q8(frame_index));
  }
};

}  // namespace nvc
