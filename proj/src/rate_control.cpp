#include "nvc/rate_control.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "nvc/bytes.hpp"
#include "nvc/entropy_model.hpp"
#include "nvc/model.hpp"

namespace nvc {

namespace {

constexpr std::uint8_t kBankVersion = 1;

void check_qp(double qp) {
  if (!(qp >= 0.0 && qp <= kMaxQp)) {
    throw std::invalid_argument("qp " + std::to_string(qp) + " outside [0, 63]");
  }
}

std::vector<float> lerp(const std::vector<float>& a, const std::vector<float>& b, double t) {
  std::vector<float> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    out[i] = static_cast<float>((1.0 - t) * a[i] + t * b[i]);
  }
  return out;
}

}  // namespace

double qstep_of(double qp) {
  check_qp(qp);
  return std::exp2((qp - 32.0) / 8.0);
}

std::uint16_t qp_to_q8(double qp) {
  check_qp(qp);
  return static_cast<std::uint16_t>(std::lround(qp * 256.0));
}

RateModuleBank::RateModuleBank(int latent_channels, int hyper_channels, std::vector<BankEntry> entries)
    : latent_channels_(latent_channels), hyper_channels_(hyper_channels), entries_(std::move(entries)) {
  if (entries_.size() != kEntries) {
    throw std::invalid_argument("rate bank needs 64 entries, got " + std::to_string(entries_.size()));
  }
  const auto c = static_cast<std::size_t>(latent_channels);
  for (std::size_t qp = 0; qp < entries_.size(); ++qp) {
    const BankEntry& e = entries_[qp];
    const std::string where = "rate bank entry " + std::to_string(qp);
    for (const auto* v : {&e.q_e, &e.q_d, &e.q_f, &e.q_r}) {
      if (v->size() != c) throw std::invalid_argument(where + ": scale vector length mismatch");
      for (float s : *v) {
        if (!(s > 0.0f) || !std::isfinite(s)) throw std::invalid_argument(where + ": non-positive scale");
      }
    }
    if (e.z_freqs.size() != static_cast<std::size_t>(hyper_channels)) {
      throw std::invalid_argument(where + ": z prior channel count mismatch");
    }
    for (const auto& f : e.z_freqs) {
      if (f.size() != kHyperAlphabet.size()) throw std::invalid_argument(where + ": z prior size mismatch");
      CdfTable(kHyperAlphabet.min, f);  // validates sum and positivity
    }
    if (!(e.qstep > 0.0)) throw std::invalid_argument(where + ": qstep must be positive");
    if (qp > 0 && !(e.qstep > entries_[qp - 1].qstep)) {
      throw std::invalid_argument(where + ": qstep not strictly increasing");
    }
  }
}

const BankEntry& RateModuleBank::select_entry(int qp) const {
  if (qp < 0 || qp > kMaxQp) {
    throw std::invalid_argument("qp " + std::to_string(qp) + " outside [0, 63]");
  }
  return entries_[static_cast<std::size_t>(qp)];
}

BankEntry RateModuleBank::interpolate_entry(double qp) const {
  check_qp(qp);
  const int lo = static_cast<int>(std::floor(qp));
  const double t = qp - lo;
  if (t == 0.0) return select_entry(lo);
  const BankEntry& a = select_entry(lo);
  const BankEntry& b = select_entry(lo + 1);
  BankEntry out;
  out.q_e = lerp(a.q_e, b.q_e, t);
  out.q_d = lerp(a.q_d, b.q_d, t);
  out.q_f = lerp(a.q_f, b.q_f, t);
  out.q_r = lerp(a.q_r, b.q_r, t);
  out.z_freqs = t <= 0.5 ? a.z_freqs : b.z_freqs;
  out.qstep = std::exp((1.0 - t) * std::log(a.qstep) + t * std::log(b.qstep));
  return out;
}

RateModuleBank generate_bank(const CodecConfig& config, std::uint64_t seed) {
  config.validate();
  std::mt19937_64 rng(seed ^ 0x4e564342ull);
  const auto uniform = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53 * 2.0 - 1.0; };
  const auto c = static_cast<std::size_t>(config.latent_channels);
  std::vector<BankEntry> entries(RateModuleBank::kEntries);
  for (int qp = 0; qp < RateModuleBank::kEntries; ++qp) {
    BankEntry& e = entries[static_cast<std::size_t>(qp)];
    e.qstep = qstep_of(qp);
    const double drift = std::exp2(-(qp - 32.0) / 256.0);
    for (std::size_t i = 0; i < c; ++i) {
      const double qe = drift * (1.0 + 0.02 * uniform());
      e.q_e.push_back(static_cast<float>(qe));
      e.q_d.push_back(static_cast<float>(1.0 / qe));
      e.q_f.push_back(static_cast<float>(1.0 + 0.01 * uniform()));
      e.q_r.push_back(static_cast<float>(1.0 + 0.01 * uniform()));
    }
    const double z_scale = 3.0 * std::exp2(-(qp - 32.0) / 32.0);
    const std::vector<std::uint32_t> freqs = discretize_laplace(0.0, z_scale, kHyperAlphabet).frequencies();
    e.z_freqs.assign(static_cast<std::size_t>(config.hyper_channels), freqs);
  }
  return RateModuleBank(config.latent_channels, config.hyper_channels, std::move(entries));
}

std::vector<std::uint8_t> serialize_bank(const RateModuleBank& bank) {
  ByteWriter w;
  w.tag("NVCB");
  w.u8(kBankVersion);
  w.u16(static_cast<std::uint16_t>(bank.latent_channels()));
  w.u16(static_cast<std::uint16_t>(bank.hyper_channels()));
  w.u8(static_cast<std::uint8_t>(RateModuleBank::kEntries));
  w.i16(static_cast<std::int16_t>(kHyperAlphabet.min));
  w.u16(static_cast<std::uint16_t>(kHyperAlphabet.size()));
  for (const BankEntry& e : bank.entries()) {
    w.f64(e.qstep);
    for (const auto* v : {&e.q_e, &e.q_d, &e.q_f, &e.q_r}) {
      for (float s : *v) w.f32(s);
    }
    for (const auto& f : e.z_freqs) {
      for (std::uint32_t x : f) w.u16(static_cast<std::uint16_t>(x));
    }
  }
  w.u32(crc32_of(w.buffer()));
  return w.take();
}

RateModuleBank parse_bank(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) throw FormatError("bank file too short", 0);
  const auto body = bytes.first(bytes.size() - 4);
  ByteReader tail(bytes.last(4));
  if (crc32_of(body) != tail.u32()) throw FormatError("bank checksum mismatch", bytes.size() - 4);

  ByteReader r(body);
  r.expect_tag("NVCB", "rate bank");
  const std::size_t version_at = r.position();
  if (r.u8() != kBankVersion) throw FormatError("unsupported bank version", version_at);
  const int c = r.u16();
  const int ch = r.u16();
  const std::size_t count_at = r.position();
  if (r.u8() != RateModuleBank::kEntries) throw FormatError("bank must hold 64 entries", count_at);
  const std::size_t alphabet_at = r.position();
  const int zmin = r.i16();
  const int zsize = r.u16();
  if (zmin != kHyperAlphabet.min || static_cast<std::size_t>(zsize) != kHyperAlphabet.size()) {
    throw FormatError("unsupported z alphabet", alphabet_at);
  }
  std::vector<BankEntry> entries(RateModuleBank::kEntries);
  for (BankEntry& e : entries) {
    e.qstep = r.f64();
    for (auto* v : {&e.q_e, &e.q_d, &e.q_f, &e.q_r}) {
      v->resize(static_cast<std::size_t>(c));
      for (float& s : *v) s = r.f32();
    }
    e.z_freqs.assign(static_cast<std::size_t>(ch), std::vector<std::uint32_t>(static_cast<std::size_t>(zsize)));
    for (auto& f : e.z_freqs) {
      for (std::uint32_t& x : f) x = r.u16();
    }
  }
  if (r.remaining() != 0) throw FormatError("trailing bytes in bank file", r.position());
  try {
    return RateModuleBank(c, ch, std::move(entries));
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string("invalid bank contents: ") + e.what(), r.position());
  }
}

RateModuleBank load_bank(const std::filesystem::path& path) { return parse_bank(read_file(path)); }

void save_bank(const RateModuleBank& bank, const std::filesystem::path& path) {
  write_file(path, serialize_bank(bank));
}

std::uint16_t QpSchedule::effective_q8(std::size_t frame_index) const {
  const int base = qp_to_q8(base_qp);
  const int q = base + 256 * gop_offsets[frame_index % gop_offsets.size()];
  return static_cast<std::uint16_t>(std::clamp(q, 0, kMaxQp * 256));
}

}  // namespace nvc
