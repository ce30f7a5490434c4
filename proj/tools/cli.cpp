#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

#include "nvc/bitstream.hpp"
#include "nvc/bytes.hpp"
#include "nvc/complexity_lab.hpp"
#include "nvc/pipeline.hpp"
#include "nvc/rate_control.hpp"
#include "nvc/video_io.hpp"

namespace nvc::cli {

namespace {

struct CodingFlags {
  std::string input;
  int width = 0;
  int height = 0;
  int frames = 0;
  double qp = 32.0;
  std::string mode = "int16";
  std::string weights;
  std::string bank;
  std::string gop_offsets = "0,8,0,4,0,4,0,4";
  int threads = 1;
  std::string parallel = "serial";
  std::string output;
  std::string recon;
};

struct DecodeFlags {
  std::string input;
  std::string weights;
  std::string bank;
  int threads = 1;
  std::string parallel = "serial";
  std::string output;
};

struct GenFlags {
  std::uint64_t seed = 0;
  std::string weights;
  std::string bank;
  CodecConfig config;
  std::string colorspace = "yuv420";
};

struct PsnrFlags {
  std::string a;
  std::string b;
  int width = 0;
  int height = 0;
  int frames = 0;
  std::string colorspace = "yuv420";
};

struct BenchFlags {
  BenchConfig base;
  int threads = 1;
  std::uint64_t seed = 0;
  std::string output = "bench_report.csv";
  std::string plot;
};

std::array<std::int8_t, 8> parse_offsets(const std::string& text) {
  std::array<std::int8_t, 8> out{};
  std::stringstream ss(text);
  std::string item;
  std::size_t n = 0;
  while (std::getline(ss, item, ',')) {
    if (n >= out.size()) throw CLI::ValidationError("--gop-offsets", "expected exactly 8 comma-separated offsets");
    int v = 0;
    try {
      std::size_t used = 0;
      v = std::stoi(item, &used);
      if (used != item.size()) throw std::invalid_argument("junk");
    } catch (const std::exception&) {
      throw CLI::ValidationError("--gop-offsets", "'" + item + "' is not an integer");
    }
    if (v < -63 || v > 63) throw CLI::ValidationError("--gop-offsets", "offset " + item + " outside [-63, 63]");
    out[n++] = static_cast<std::int8_t>(v);
  }
  if (n != out.size()) throw CLI::ValidationError("--gop-offsets", "expected exactly 8 comma-separated offsets");
  return out;
}

Parallelism parse_parallel(const std::string& s) {
  return s == "overlapped" ? Parallelism::overlapped : Parallelism::serial;
}

// The first `frames` frames of a raw file (all of them when frames is 0).
std::vector<Frame> load_input(const std::string& path, Colorspace cs, int width, int height, int frames) {
  const std::size_t per_frame = Frame::blank(cs, width, height).byte_size();
  const auto size = std::filesystem::file_size(path);
  if (size == 0 || size % per_frame != 0) {
    throw IoError(path + " holds " + std::to_string(size) + " bytes, not a whole number of " +
                  std::to_string(width) + "x" + std::to_string(height) + " frames");
  }
  const int available = static_cast<int>(size / per_frame);
  if (frames > available) {
    throw IoError(path + " holds " + std::to_string(available) + " frames, " + std::to_string(frames) +
                  " requested");
  }
  auto video = load_video(path, cs, width, height, available);
  if (frames > 0) video.resize(static_cast<std::size_t>(frames));
  return video;
}

std::string fmt_db(double db) {
  if (std::isinf(db)) return "inf";
  std::ostringstream s;
  s << std::fixed << std::setprecision(4) << db;
  return s.str();
}

void print_psnr(std::ostream& out, const PsnrReport& r) {
  out << "psnr Y=" << fmt_db(r.plane_db[0]) << " U=" << fmt_db(r.plane_db[1]) << " V=" << fmt_db(r.plane_db[2])
      << '\n';
}

struct Loaded {
  CodecModel model;
  RateModuleBank bank;
};

Loaded load_codec(const std::string& weights, const std::string& bank) {
  return Loaded{CodecModel(load_weights(weights)), load_bank(bank)};
}

EncodeResult run_encode(const CodingFlags& f, const Loaded& codec, bool reconstruct, std::ostream& out) {
  const CodecConfig& cfg = codec.model.config();
  const auto frames = load_input(f.input, cfg.colorspace, f.width, f.height, f.frames);

  CodecSettings s;
  s.mode = parse_precision(f.mode);
  s.schedule.base_qp = f.qp;
  s.schedule.gop_offsets = parse_offsets(f.gop_offsets);
  s.parallelism = parse_parallel(f.parallel);
  s.threads = f.threads;
  s.reconstruct_on_encode = reconstruct;
  EncodeResult r = encode_video(frames, codec.model, codec.bank, s);

  const double pixels = static_cast<double>(f.width) * f.height;
  std::size_t total_bits = 0;
  for (std::size_t t = 0; t < r.stream.chunks.size(); ++t) {
    const FrameChunk& c = r.stream.chunks[t];
    const std::size_t bits = c.byte_size() * 8;
    total_bits += bits;
    out << "frame " << t << " qp=" << std::fixed << std::setprecision(4) << qp_from_q8(c.qp_q8) << " bits=" << bits
        << " bpp=" << std::setprecision(6) << static_cast<double>(bits) / pixels << " ms=" << std::setprecision(3)
        << r.frame_seconds[t] * 1e3 << '\n';
  }
  out << "total frames=" << r.stream.chunks.size() << " bytes=" << r.bytes.size() << " payload_bits=" << total_bits
      << " bpp=" << std::setprecision(6)
      << (r.stream.chunks.empty() ? 0.0 : static_cast<double>(total_bits) / (pixels * r.stream.chunks.size()))
      << " seconds=" << std::setprecision(4) << r.seconds << " mode=" << to_string(s.mode)
      << " parallel=" << to_string(s.parallelism) << " threads=" << s.threads << '\n';
  return r;
}

void add_coding_flags(CLI::App* sub, CodingFlags& f) {
  sub->add_option("--input", f.input, "Raw 8-bit video (planar YUV 4:2:0 or RGB)")->required()->check(CLI::ExistingFile);
  sub->add_option("--width", f.width, "Frame width")->required()->check(CLI::PositiveNumber);
  sub->add_option("--height", f.height, "Frame height")->required()->check(CLI::PositiveNumber);
  sub->add_option("--frames", f.frames, "Frame count (default: whole file)")->check(CLI::PositiveNumber);
  sub->add_option("--qp", f.qp, "Base qp in [0, 63]; fractional values interpolate the bank")
      ->check(CLI::Range(0.0, static_cast<double>(kMaxQp)));
  sub->add_option("--mode", f.mode, "Arithmetic: real or int16")->check(CLI::IsMember({"real", "int16"}));
  sub->add_option("--weights", f.weights, "Weight file")->required()->check(CLI::ExistingFile);
  sub->add_option("--bank", f.bank, "Rate bank file")->required()->check(CLI::ExistingFile);
  sub->add_option("--gop-offsets", f.gop_offsets, "8 comma-separated qp offsets");
  sub->add_option("--threads", f.threads, "Worker threads")->check(CLI::Range(1, 256));
  sub->add_option("--parallel", f.parallel, "Entropy coding lane: serial or overlapped")
      ->check(CLI::IsMember({"serial", "overlapped"}));
}

int cmd_encode(const CodingFlags& f, std::ostream& out) {
  const Loaded codec = load_codec(f.weights, f.bank);
  const EncodeResult r = run_encode(f, codec, !f.recon.empty(), out);
  write_file(f.output, r.bytes);
  if (!f.recon.empty()) save_video(f.recon, r.reconstructions);
  out << "wrote " << f.output << '\n';
  return kExitOk;
}

int cmd_decode(const DecodeFlags& f, std::ostream& out) {
  const Loaded codec = load_codec(f.weights, f.bank);
  const auto bytes = read_file(f.input);
  DecodeSettings s;
  s.parallelism = parse_parallel(f.parallel);
  s.threads = f.threads;
  const DecodeResult r = decode_video(bytes, codec.model, codec.bank, s);
  save_video(f.output, r.frames);
  out << "decoded frames=" << r.frames.size() << " size=" << r.header.width << "x" << r.header.height
      << " mode=" << to_string(r.header.mode) << " seconds=" << std::fixed << std::setprecision(4) << r.seconds
      << '\n';
  out << "wrote " << f.output << '\n';
  return kExitOk;
}

int cmd_roundtrip(const CodingFlags& f, std::ostream& out) {
  const Loaded codec = load_codec(f.weights, f.bank);
  const EncodeResult enc = run_encode(f, codec, true, out);
  DecodeSettings s;
  s.parallelism = parse_parallel(f.parallel);
  s.threads = f.threads;
  const DecodeResult dec = decode_video(enc.bytes, codec.model, codec.bank, s);
  const auto source = load_input(f.input, codec.model.config().colorspace, f.width, f.height, f.frames);
  print_psnr(out, psnr(source, dec.frames));
  const bool match = dec.frames == enc.reconstructions;
  out << "encoder/decoder reconstructions " << (match ? "identical" : "differ") << '\n';
  if (!f.output.empty()) write_file(f.output, enc.bytes);
  if (!f.recon.empty()) save_video(f.recon, dec.frames);
  return kExitOk;
}

int cmd_psnr(const PsnrFlags& f, std::ostream& out) {
  const Colorspace cs = parse_colorspace(f.colorspace);
  const auto a = load_input(f.a, cs, f.width, f.height, f.frames);
  const auto b = load_input(f.b, cs, f.width, f.height, f.frames);
  if (a.size() != b.size()) {
    throw IoError("frame counts differ: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
  print_psnr(out, psnr(a, b));
  return kExitOk;
}

int cmd_info(const std::string& input, std::ostream& out) {
  const auto bytes = read_file(input);
  const Bitstream s = read_stream(bytes);
  const StreamHeader& h = s.header;
  out << "stream NVCR v" << int(kStreamVersion) << '\n';
  out << "size " << h.width << "x" << h.height << " colorspace=" << to_string(h.config.colorspace)
      << " mode=" << to_string(h.mode) << " frames=" << h.frame_count << '\n';
  out << "base_qp " << std::fixed << std::setprecision(4) << qp_from_q8(h.base_qp_q8) << '\n';
  out << "gop_offsets";
  for (std::int8_t o : h.gop_offsets) out << ' ' << int(o);
  out << '\n';
  out << "model_hash " << std::hex << std::setw(8) << std::setfill('0') << h.model_hash << std::dec
      << std::setfill(' ') << '\n';
  out << "config latent_channels=" << h.config.latent_channels << " hyper_channels=" << h.config.hyper_channels
      << " patch=" << h.config.patch << " dc_blocks=" << h.config.dc_blocks << '\n';
  for (std::size_t t = 0; t < s.chunks.size(); ++t) {
    const FrameChunk& c = s.chunks[t];
    out << "chunk " << t << " qp=" << std::setprecision(4) << qp_from_q8(c.qp_q8) << " z=" << c.z.size()
        << " y1=" << c.y1.size() << " y2=" << c.y2.size() << " bytes=" << c.byte_size() << '\n';
  }
  return kExitOk;
}

int cmd_genweights(GenFlags& f, std::ostream& out) {
  f.config.colorspace = parse_colorspace(f.colorspace);
  f.config.validate();
  const ModelWeights w = generate_weights(f.config, f.seed);
  const RateModuleBank bank = generate_bank(f.config, f.seed);
  save_weights(w, f.weights);
  save_bank(bank, f.bank);
  out << "seed " << f.seed << " model_hash " << std::hex << std::setw(8) << std::setfill('0') << model_hash(w, bank)
      << std::dec << std::setfill(' ') << '\n';
  out << "wrote " << f.weights << " and " << f.bank << '\n';
  return kExitOk;
}

int cmd_bench(const BenchFlags& f, std::ostream& out) {
  const auto configs = default_suite(f.base);
  const auto results = run_bench(configs, f.threads, f.seed);
  {
    std::ofstream csv(f.output);
    if (!csv) throw IoError("cannot write " + f.output);
    write_report(csv, results, f.threads);
  }
  const std::string plot = f.plot.empty() ? std::filesystem::path(f.output).replace_extension(".dat").string() : f.plot;
  {
    std::ofstream dat(plot);
    if (!dat) throw IoError("cannot write " + plot);
    write_plot_data(dat, results);
  }
  write_report(out, results, f.threads);
  const auto find = [&](const std::string& label) -> const BenchResult* {
    for (const auto& r : results)
      if (r.config.label == label) return &r;
    return nullptr;
  };
  const BenchResult* base = find("base");
  out << std::fixed << std::setprecision(3);
  if (const BenchResult* half = find("halve_c")) {
    out << "halve_c speedup " << base->median_ms / half->median_ms << "x (linear reference 2x, quadratic 4x)\n";
  }
  if (const BenchResult* comp = find("comp_1/4")) {
    const double ratio = base->median_ms / comp->median_ms;
    out << "comp_1/4 speedup " << ratio << "x with P_size and P_num held (" << (ratio < 4.0 ? "below" : "not below")
        << " the 4x MAC reduction)\n";
  }
  out << "wrote " << f.output << " and " << plot << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Neural video codec: encode, decode and inspect streams, run complexity benchmarks", "nvc"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  CodingFlags enc;
  auto* encode = app.add_subcommand("encode", "Encode raw video to a stream");
  add_coding_flags(encode, enc);
  encode->add_option("--output", enc.output, "Stream file")->required();
  encode->add_option("--recon", enc.recon, "Also write the encoder-side reconstruction");

  DecodeFlags dec;
  auto* decode = app.add_subcommand("decode", "Decode a stream to raw video");
  decode->add_option("--input", dec.input, "Stream file")->required()->check(CLI::ExistingFile);
  decode->add_option("--weights", dec.weights, "Weight file")->required()->check(CLI::ExistingFile);
  decode->add_option("--bank", dec.bank, "Rate bank file")->required()->check(CLI::ExistingFile);
  decode->add_option("--threads", dec.threads, "Worker threads")->check(CLI::Range(1, 256));
  decode->add_option("--parallel", dec.parallel, "Entropy coding lane: serial or overlapped")
      ->check(CLI::IsMember({"serial", "overlapped"}));
  decode->add_option("--output", dec.output, "Raw video file")->required();

  CodingFlags rt;
  auto* roundtrip = app.add_subcommand("roundtrip", "Encode, decode and report PSNR");
  add_coding_flags(roundtrip, rt);
  roundtrip->add_option("--output", rt.output, "Optional stream file");
  roundtrip->add_option("--recon", rt.recon, "Optional decoded video file");

  PsnrFlags pf;
  auto* psnr_cmd = app.add_subcommand("psnr", "Per-plane PSNR between two raw videos");
  psnr_cmd->add_option("--a", pf.a, "Reference video")->required()->check(CLI::ExistingFile);
  psnr_cmd->add_option("--b", pf.b, "Test video")->required()->check(CLI::ExistingFile);
  psnr_cmd->add_option("--width", pf.width, "Frame width")->required()->check(CLI::PositiveNumber);
  psnr_cmd->add_option("--height", pf.height, "Frame height")->required()->check(CLI::PositiveNumber);
  psnr_cmd->add_option("--frames", pf.frames, "Frame count (default: whole file)")->check(CLI::PositiveNumber);
  psnr_cmd->add_option("--colorspace", pf.colorspace, "yuv420 or rgb")->check(CLI::IsMember({"yuv420", "rgb"}));

  BenchFlags bf;
  auto* bench = app.add_subcommand("bench", "Complexity benchmark: P_comp, P_size, P_num controls");
  bench->add_option("--blocks", bf.base.n, "Base block count")->check(CLI::PositiveNumber);
  bench->add_option("--channels", bf.base.c, "Base channels")->check(CLI::PositiveNumber);
  bench->add_option("--height", bf.base.h, "Base height")->check(CLI::PositiveNumber);
  bench->add_option("--width", bf.base.w, "Base width")->check(CLI::PositiveNumber);
  bench->add_option("--warmup", bf.base.warmup, "Warmup iterations (>= 3)")->check(CLI::Range(3, 1000000));
  bench->add_option("--repeats", bf.base.repeats, "Timed iterations (>= 20)")->check(CLI::Range(20, 1000000));
  bench->add_option("--threads", bf.threads, "Worker threads")->check(CLI::Range(1, 256));
  bench->add_option("--seed", bf.seed, "Seed for bench tensors");
  bench->add_option("--output", bf.output, "Report table (CSV)");
  bench->add_option("--plot", bf.plot, "Plot-data file (default: report path with .dat)");

  std::string info_input;
  auto* info = app.add_subcommand("info", "Dump stream header and chunk table");
  info->add_option("--input", info_input, "Stream file")->required()->check(CLI::ExistingFile);

  GenFlags gf;
  auto* gen = app.add_subcommand("genweights", "Write seeded deterministic weights and rate bank");
  gen->add_option("--seed", gf.seed, "Seed (default 0)");
  gen->add_option("--weights", gf.weights, "Weight file to write")->required();
  gen->add_option("--bank", gf.bank, "Bank file to write")->required();
  gen->add_option("--latent-channels", gf.config.latent_channels, "Latent channels C")->check(CLI::PositiveNumber);
  gen->add_option("--hyper-channels", gf.config.hyper_channels, "Hyper latent channels")->check(CLI::PositiveNumber);
  gen->add_option("--patch", gf.config.patch, "Patch size")->check(CLI::PositiveNumber);
  gen->add_option("--dc-blocks", gf.config.dc_blocks, "DC blocks per stage")->check(CLI::PositiveNumber);
  gen->add_option("--colorspace", gf.colorspace, "yuv420 or rgb")->check(CLI::IsMember({"yuv420", "rgb"}));

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*encode) return cmd_encode(enc, out);
    if (*decode) return cmd_decode(dec, out);
    if (*roundtrip) return cmd_roundtrip(rt, out);
    if (*psnr_cmd) return cmd_psnr(pf, out);
    if (*bench) return cmd_bench(bf, out);
    if (*info) return cmd_info(info_input, out);
    if (*gen) return cmd_genweights(gf, out);
  } catch (const CLI::ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const StreamError& e) {
    err << "error: stream " << e.what() << '\n';
    return kExitFormat;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << '\n';
    return kExitFormat;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace nvc::cli
