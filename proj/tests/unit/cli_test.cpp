#include <gtest/gtest.h>

#include <fstream>
#include <iterator>
#include <regex>
#include <sstream>

#include "cli.hpp"
#include "nvc/pipeline.hpp"
#include "test_support.hpp"

namespace nvc {
namespace {

using cli::run_cli;

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string fx(const std::string& name) { return test::fixture(name).string(); }

std::vector<std::string> coding_args() {
  return {"--input", fx("noise_64x64_8f.yuv"), "--width", "64", "--height", "64",
          "--weights", fx("weights_seed0.nvcw"), "--bank", fx("bank_seed0.nvcb")};
}

std::vector<std::string> operator+(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

TEST(Cli, EncodeMatchesGoldenAndDecodeMatchesRecon) {
  test::TempDir dir("cli");
  const std::string stream = (dir / "s.nvcr").string();
  const CliRun enc = run(std::vector<std::string>{"encode"} + coding_args() +
                      std::vector<std::string>{"--qp", "32", "--frames", "8", "--output", stream});
  ASSERT_EQ(enc.code, 0) << enc.err;
  EXPECT_EQ(read_file(stream), read_file(fx("golden_int16_qp32.nvcr")));
  EXPECT_NE(enc.out.find("frame 7 qp="), std::string::npos);
  EXPECT_NE(enc.out.find("bpp="), std::string::npos);

  const std::string recon = (dir / "r.yuv").string();
  const CliRun dec = run({"decode", "--input", stream, "--weights", fx("weights_seed0.nvcw"), "--bank",
                       fx("bank_seed0.nvcb"), "--parallel", "overlapped", "--threads", "2", "--output", recon});
  ASSERT_EQ(dec.code, 0) << dec.err;
  EXPECT_EQ(read_file(recon), read_file(fx("golden_int16_qp32_recon.yuv")));
}

TEST(Cli, FractionalQpAcceptedOutOfRangeRejected) {
  test::TempDir dir("cliqp");
  const CliRun ok = run(std::vector<std::string>{"encode"} + coding_args() +
                     std::vector<std::string>{"--qp", "10.5", "--output", (dir / "a.nvcr").string()});
  EXPECT_EQ(ok.code, 0) << ok.err;
  const CliRun bad = run(std::vector<std::string>{"encode"} + coding_args() +
                      std::vector<std::string>{"--qp", "70", "--output", (dir / "b.nvcr").string()});
  EXPECT_EQ(bad.code, cli::kExitUsage);
  EXPECT_FALSE(bad.err.empty());
  EXPECT_FALSE(std::filesystem::exists(dir / "b.nvcr"));
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, cli::kExitUsage);
  EXPECT_EQ(run({"frobnicate"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"info", "--input", fx("golden_int16_qp32.nvcr"), "--bogus"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"info"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"info", "--input", "/nonexistent/file"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"--help"}).code, 0);
  test::TempDir dir("cliuse");
  // 64x64 frames do not divide a file of 8 * 6144 bytes into 48x48 frames evenly.
  EXPECT_NE(run(std::vector<std::string>{"encode", "--input", fx("noise_64x64_8f.yuv"), "--width", "48", "--height",
                                         "48", "--weights", fx("weights_seed0.nvcw"), "--bank", fx("bank_seed0.nvcb"),
                                         "--output", (dir / "x.nvcr").string()})
                .code,
            0);
  EXPECT_EQ(run(std::vector<std::string>{"encode"} + coding_args() +
                std::vector<std::string>{"--gop-offsets", "1,2,3", "--output", (dir / "y.nvcr").string()})
                .code,
            cli::kExitUsage);
}

TEST(Cli, WrongWeightsRefused) {
  test::TempDir dir("cliw");
  const std::string w = (dir / "w1.nvcw").string(), b = (dir / "b1.nvcb").string();
  ASSERT_EQ(run({"genweights", "--seed", "1", "--weights", w, "--bank", b}).code, 0);
  const CliRun r = run({"decode", "--input", fx("golden_int16_qp32.nvcr"), "--weights", w, "--bank",
                     fx("bank_seed0.nvcb"), "--output", (dir / "r.yuv").string()});
  EXPECT_EQ(r.code, cli::kExitConfig);
  EXPECT_NE(r.err.find("different model"), std::string::npos) << r.err;
}

TEST(Cli, TruncatedStreamReportsChunk) {
  test::TempDir dir("clit");
  const CliRun r = run({"decode", "--input", fx("truncated_chunk2.nvcr"), "--weights", fx("weights_seed0.nvcw"),
                     "--bank", fx("bank_seed0.nvcb"), "--output", (dir / "r.yuv").string()});
  EXPECT_EQ(r.code, cli::kExitFormat);
  EXPECT_NE(r.err.find("chunk 2"), std::string::npos) << r.err;
}

TEST(Cli, GenweightsIsReproducible) {
  test::TempDir dir("clig");
  const auto w1 = dir / "a.nvcw", b1 = dir / "a.nvcb", w2 = dir / "b.nvcw", b2 = dir / "b.nvcb";
  const CliRun r1 = run({"genweights", "--weights", w1.string(), "--bank", b1.string()});
  ASSERT_EQ(r1.code, 0);
  ASSERT_EQ(run({"genweights", "--seed", "0", "--weights", w2.string(), "--bank", b2.string()}).code, 0);
  EXPECT_EQ(read_file(w1), read_file(w2));
  EXPECT_EQ(read_file(b1), read_file(b2));
  EXPECT_EQ(read_file(w1), read_file(fx("weights_seed0.nvcw")));
  EXPECT_EQ(read_file(b1), read_file(fx("bank_seed0.nvcb")));
  EXPECT_NE(r1.out.find("seed 0 model_hash"), std::string::npos);
  EXPECT_EQ(run({"genweights", "--latent-channels", "5", "--weights", w1.string(), "--bank", b1.string()}).code,
            cli::kExitUsage);
}

TEST(Cli, PsnrIdenticalIsInf) {
  const CliRun r = run({"psnr", "--a", fx("noise_64x64_8f.yuv"), "--b", fx("noise_64x64_8f.yuv"), "--width", "64",
                     "--height", "64"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("psnr Y=inf U=inf V=inf"), std::string::npos) << r.out;
  const CliRun d = run({"psnr", "--a", fx("noise_64x64_8f.yuv"), "--b", fx("golden_int16_qp32_recon.yuv"), "--width",
                     "64", "--height", "64", "--frames", "8"});
  ASSERT_EQ(d.code, 0);
  EXPECT_EQ(d.out.find("inf"), std::string::npos) << d.out;
}

TEST(Cli, RoundtripReportsIdenticalReconstructions) {
  for (const char* mode : {"int16", "real"}) {
    const CliRun r = run(std::vector<std::string>{"roundtrip"} + coding_args() +
                      std::vector<std::string>{"--qp", "24", "--mode", mode, "--frames", "3"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("encoder/decoder reconstructions identical"), std::string::npos) << mode;
    EXPECT_NE(r.out.find("psnr Y="), std::string::npos);
  }
}

TEST(Cli, InfoListsChunkQps) {
  const CliRun r = run({"info", "--input", fx("golden_int16_qp32.nvcr")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("stream NVCR v1"), std::string::npos);
  EXPECT_NE(r.out.find("gop_offsets 0 8 0 4 0 4 0 4"), std::string::npos);
  const std::regex chunk_re(R"(chunk (\d+) qp=([0-9.]+))");
  const double expected[8] = {32, 40, 32, 36, 32, 36, 32, 36};
  int seen = 0;
  for (auto it = std::sregex_iterator(r.out.begin(), r.out.end(), chunk_re); it != std::sregex_iterator(); ++it) {
    const int t = std::stoi((*it)[1]);
    EXPECT_DOUBLE_EQ(std::stod((*it)[2]), expected[t]);
    ++seen;
  }
  EXPECT_EQ(seen, 8);
  EXPECT_EQ(run({"info", "--input", fx("bad_magic.nvcr")}).code, cli::kExitFormat);
}

TEST(Cli, BenchWritesReport) {
  test::TempDir dir("clib");
  const std::string report = (dir / "bench.csv").string();
  const CliRun r = run({"bench", "--blocks", "2", "--channels", "8", "--height", "8", "--width", "8", "--output", report});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(std::filesystem::exists(report));
  EXPECT_TRUE(std::filesystem::exists(dir / "bench.dat"));
  EXPECT_NE(r.out.find("halve_c speedup"), std::string::npos);
  EXPECT_NE(r.out.find("comp_1/4 speedup"), std::string::npos);
  EXPECT_EQ(run({"bench", "--repeats", "5", "--output", report}).code, cli::kExitUsage);
}

}  // namespace
}  // namespace nvc
