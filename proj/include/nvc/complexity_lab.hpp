#pragma once

// Operational vs computational complexity micro-benchmarks.
//
// The workload is a stack of N dense k x k convolutions (C -> C, stride 1) on a
// C x H x W tensor, which isolates three quantities:
//   P_comp = N * k^2 * C^2 * H * W   (MACs)
//   P_size = C * H * W               (latent elements)
//   P_num  = N                       (module calls)

#include <cstdint>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace nvc {

class PlanningError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BenchConfig {
  std::string label;
  int n = 4;
  int c = 64;
  int h = 64;
  int w = 64;
  int kernel = 1;
  int warmup = 3;
  int repeats = 20;

  void validate() const;
  friend bool operator==(const BenchConfig&, const BenchConfig&) = default;
};

struct ComplexityTriple {
  std::uint64_t p_comp = 0;
  std::uint64_t p_size = 0;
  std::uint64_t p_num = 0;
  friend bool operator==(const ComplexityTriple&, const ComplexityTriple&) = default;
};

ComplexityTriple analytic_metrics(const BenchConfig& cfg);

// Exact rational scale factor, e.g. {1, 4} for a 4x reduction.
struct Factor {
  std::int64_t num = 1;
  std::int64_t den = 1;

  static Factor parse(const std::string& text);  // "1/4", "2", "0.5" is rejected
  std::string to_string() const;
};

enum class Quantity { comp, size, num };
const char* to_string(Quantity q);
Quantity parse_quantity(const std::string& s);

// One config per factor in which only the chosen quantity is scaled; the other
// two stay exactly equal to the base. Solutions:
//   comp x f : C' = f C,  H'W' = HW / f
//   size x f : C' = C / f, H'W' = f^2 HW
//   num  x f : N' = f N,  C' = C / f, H'W' = f HW
// Throws PlanningError when a solution needs non-integer dimensions.
std::vector<BenchConfig> plan_isocontrol(const BenchConfig& base, Quantity vary,
                                         std::span<const Factor> factors);

struct BenchResult {
  BenchConfig config;
  ComplexityTriple metrics;
  std::vector<double> samples_ms;
  double median_ms = 0.0;
  double iqr_ms = 0.0;
};

// Runs each config on a pool of `threads` workers with a monotonic clock.
std::vector<BenchResult> run_bench(std::span<const BenchConfig> configs, int threads,
                                   std::uint64_t seed = 0);

double median(std::vector<double> v);
double interquartile_range(std::vector<double> v);

// Delimiter-separated table: label,N,C,H,W,k,P_comp,P_size,P_num,median_ms,iqr_ms,threads
void write_report(std::ostream& out, std::span<const BenchResult> results, int threads);
// Whitespace-separated columns for plotting tools, one row per result.
void write_plot_data(std::ostream& out, std::span<const BenchResult> results);

// Base point, channel halving, and one iso-control sweep per quantity.
std::vector<BenchConfig> default_suite(const BenchConfig& base);

}  // namespace nvc
