#include "nvc/complexity_lab.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>

#include "nvc/parallel.hpp"
#include "nvc/tensor_ops.hpp"

namespace nvc {

namespace {

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r = 0;
  if (__builtin_mul_overflow(a, b, &r)) throw std::invalid_argument("complexity metric overflows 64 bits");
  return r;
}

std::string describe(const BenchConfig& c) {
  std::ostringstream s;
  s << "N=" << c.n << " C=" << c.c << " H=" << c.h << " W=" << c.w << " k=" << c.kernel;
  return s.str();
}

// Exact value * num / den, or nullopt when it is not a positive integer.
std::optional<std::int64_t> scale_exact(std::int64_t value, std::int64_t num, std::int64_t den) {
  __int128 p = static_cast<__int128>(value) * num;
  if (p % den != 0) return std::nullopt;
  p /= den;
  if (p <= 0 || p > std::numeric_limits<int>::max()) return std::nullopt;
  return static_cast<std::int64_t>(p);
}

// Splits `area` into H x W keeping the aspect ratio of the base as close as possible.
std::pair<int, int> split_area(std::int64_t area, const BenchConfig& base) {
  const double ratio = static_cast<double>(area) / (static_cast<double>(base.h) * base.w);
  const double target = base.h * std::sqrt(ratio);
  std::int64_t best = 1;
  double best_err = std::numeric_limits<double>::infinity();
  for (std::int64_t d = 1; d * d <= area; ++d) {
    if (area % d != 0) continue;
    for (std::int64_t cand : {d, area / d}) {
      const double err = std::abs(std::log(static_cast<double>(cand) / target));
      if (err < best_err - 1e-12 || (std::abs(err - best_err) <= 1e-12 && cand < best)) {
        best = cand;
        best_err = err;
      }
    }
  }
  return {static_cast<int>(best), static_cast<int>(area / best)};
}

double quantile(std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("quantile of an empty sample");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

void BenchConfig::validate() const {
  if (n <= 0 || c <= 0 || h <= 0 || w <= 0 || kernel <= 0) {
    throw std::invalid_argument("bench config needs positive N, C, H, W, k: " + describe(*this));
  }
  if (kernel % 2 == 0) throw std::invalid_argument("bench kernel size must be odd");
  if (warmup < 3) throw std::invalid_argument("bench warmup must be at least 3 iterations");
  if (repeats < 20) throw std::invalid_argument("bench repeats must be at least 20");
}

ComplexityTriple analytic_metrics(const BenchConfig& cfg) {
  if (cfg.n <= 0 || cfg.c <= 0 || cfg.h <= 0 || cfg.w <= 0 || cfg.kernel <= 0) {
    throw std::invalid_argument("bench config needs positive N, C, H, W, k: " + describe(cfg));
  }
  const auto c = static_cast<std::uint64_t>(cfg.c);
  const std::uint64_t size = checked_mul(checked_mul(c, static_cast<std::uint64_t>(cfg.h)),
                                         static_cast<std::uint64_t>(cfg.w));
  const auto k2 = checked_mul(static_cast<std::uint64_t>(cfg.kernel), static_cast<std::uint64_t>(cfg.kernel));
  const std::uint64_t comp = checked_mul(checked_mul(static_cast<std::uint64_t>(cfg.n), k2), checked_mul(c, size));
  return {comp, size, static_cast<std::uint64_t>(cfg.n)};
}

Factor Factor::parse(const std::string& text) {
  std::int64_t num = 0;
  std::int64_t den = 1;
  std::size_t used = 0;
  try {
    const auto slash = text.find('/');
    num = std::stoll(text.substr(0, slash), &used);
    if (used != (slash == std::string::npos ? text.size() : slash)) throw std::invalid_argument("junk");
    if (slash != std::string::npos) {
      const std::string d = text.substr(slash + 1);
      den = std::stoll(d, &used);
      if (used != d.size()) throw std::invalid_argument("junk");
    }
  } catch (const std::exception&) {
    throw std::invalid_argument("factor must be an integer or a fraction like 1/4, got '" + text + "'");
  }
  if (num <= 0 || den <= 0) throw std::invalid_argument("factor must be positive, got '" + text + "'");
  const std::int64_t g = std::gcd(num, den);
  return {num / g, den / g};
}

std::string Factor::to_string() const {
  return den == 1 ? std::to_string(num) : std::to_string(num) + "/" + std::to_string(den);
}

const char* to_string(Quantity q) {
  switch (q) {
    case Quantity::comp: return "comp";
    case Quantity::size: return "size";
    case Quantity::num: return "num";
  }
  return "?";
}

Quantity parse_quantity(const std::string& s) {
  if (s == "comp") return Quantity::comp;
  if (s == "size") return Quantity::size;
  if (s == "num") return Quantity::num;
  throw std::invalid_argument("unknown quantity '" + s + "' (expected comp, size or num)");
}

std::vector<BenchConfig> plan_isocontrol(const BenchConfig& base, Quantity vary,
                                         std::span<const Factor> factors) {
  const ComplexityTriple ref = analytic_metrics(base);
  const std::int64_t area = static_cast<std::int64_t>(base.h) * base.w;
  std::vector<BenchConfig> out;
  std::vector<std::string> conflicts;
  for (const Factor& f : factors) {
    if (f.num <= 0 || f.den <= 0) throw std::invalid_argument("factor must be positive");
    std::optional<std::int64_t> n = base.n;
    std::optional<std::int64_t> c;
    std::optional<std::int64_t> a;
    switch (vary) {
      case Quantity::comp:
        c = scale_exact(base.c, f.num, f.den);
        a = scale_exact(area, f.den, f.num);
        break;
      case Quantity::size:
        c = scale_exact(base.c, f.den, f.num);
        a = scale_exact(area, f.num * f.num, f.den * f.den);
        break;
      case Quantity::num:
        n = scale_exact(base.n, f.num, f.den);
        c = scale_exact(base.c, f.den, f.num);
        a = scale_exact(area, f.num, f.den);
        break;
    }
    if (!n || !c || !a) {
      std::string why;
      if (!n) why += " N";
      if (!c) why += " C";
      if (!a) why += " H*W";
      conflicts.push_back(std::string(to_string(vary)) + " x" + f.to_string() + " needs non-integer" + why +
                          " from base " + describe(base));
      continue;
    }
    BenchConfig cfg = base;
    cfg.n = static_cast<int>(*n);
    cfg.c = static_cast<int>(*c);
    std::tie(cfg.h, cfg.w) = split_area(*a, base);
    cfg.label = std::string(to_string(vary)) + "_" + f.to_string();

    const ComplexityTriple got = analytic_metrics(cfg);
    const auto scaled = [&](std::uint64_t v) {
      const unsigned __int128 p = static_cast<unsigned __int128>(v) * static_cast<std::uint64_t>(f.num);
      return p % static_cast<std::uint64_t>(f.den) == 0 &&
             static_cast<std::uint64_t>(p / static_cast<std::uint64_t>(f.den)) ==
                 (vary == Quantity::comp ? got.p_comp : vary == Quantity::size ? got.p_size : got.p_num);
    };
    const bool held = (vary == Quantity::comp || got.p_comp == ref.p_comp) &&
                      (vary == Quantity::size || got.p_size == ref.p_size) &&
                      (vary == Quantity::num || got.p_num == ref.p_num);
    const std::uint64_t varied = vary == Quantity::comp ? ref.p_comp : vary == Quantity::size ? ref.p_size : ref.p_num;
    if (!held || !scaled(varied)) {
      conflicts.push_back(std::string(to_string(vary)) + " x" + f.to_string() + " produced " + describe(cfg) +
                          " which does not hold the other quantities");
      continue;
    }
    out.push_back(std::move(cfg));
  }
  if (!conflicts.empty()) {
    std::string msg = "infeasible iso-control plan:";
    for (const auto& c : conflicts) msg += "\n  " + c;
    throw PlanningError(msg);
  }
  return out;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return quantile(v, 0.5);
}

double interquartile_range(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return quantile(v, 0.75) - quantile(v, 0.25);
}

std::vector<BenchResult> run_bench(std::span<const BenchConfig> configs, int threads, std::uint64_t seed) {
  WorkerPool pool(threads);
  std::vector<BenchResult> results;
  results.reserve(configs.size());
  std::mt19937_64 rng(seed);
  for (const BenchConfig& cfg : configs) {
    cfg.validate();
    const ConvSpec spec = dense(cfg.c, cfg.c, cfg.kernel);
    const float bound = 1.0f / std::sqrt(static_cast<float>(cfg.c * cfg.kernel * cfg.kernel));
    std::uniform_real_distribution<float> dist(-bound, bound);
    std::vector<std::vector<float>> weights(static_cast<std::size_t>(cfg.n));
    std::vector<std::vector<float>> biases(static_cast<std::size_t>(cfg.n));
    for (int i = 0; i < cfg.n; ++i) {
      weights[i].resize(spec.weight_count());
      for (float& x : weights[i]) x = dist(rng);
      biases[i].resize(static_cast<std::size_t>(cfg.c));
      for (float& x : biases[i]) x = dist(rng);
    }
    RealTensor input(Shape{cfg.c, cfg.h, cfg.w});
    std::uniform_real_distribution<float> unit(-1.0f, 1.0f);
    for (float& x : input.data()) x = unit(rng);

    const auto forward = [&] {
      RealTensor x = input;
      for (int i = 0; i < cfg.n; ++i) x = conv2d(x, weights[i], biases[i], spec);
      return x;
    };

    BenchResult r;
    r.config = cfg;
    r.metrics = analytic_metrics(cfg);
    pool.run([&] {
      for (int i = 0; i < cfg.warmup; ++i) (void)forward();
      for (int i = 0; i < cfg.repeats; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        const RealTensor y = forward();
        const auto t1 = std::chrono::steady_clock::now();
        if (y.empty()) throw std::logic_error("bench produced an empty tensor");
        r.samples_ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
      }
    });
    r.median_ms = median(r.samples_ms);
    r.iqr_ms = interquartile_range(r.samples_ms);
    results.push_back(std::move(r));
  }
  return results;
}

void write_report(std::ostream& out, std::span<const BenchResult> results, int threads) {
  out << "label,N,C,H,W,k,P_comp,P_size,P_num,median_ms,iqr_ms,threads\n";
  out << std::setprecision(6) << std::fixed;
  for (const BenchResult& r : results) {
    const BenchConfig& c = r.config;
    out << c.label << ',' << c.n << ',' << c.c << ',' << c.h << ',' << c.w << ',' << c.kernel << ','
        << r.metrics.p_comp << ',' << r.metrics.p_size << ',' << r.metrics.p_num << ',' << r.median_ms << ','
        << r.iqr_ms << ',' << threads << '\n';
  }
}

void write_plot_data(std::ostream& out, std::span<const BenchResult> results) {
  out << "# label p_comp p_size p_num median_ms iqr_ms\n";
  out << std::setprecision(6) << std::fixed;
  for (const BenchResult& r : results) {
    out << r.config.label << ' ' << r.metrics.p_comp << ' ' << r.metrics.p_size << ' ' << r.metrics.p_num << ' '
        << r.median_ms << ' ' << r.iqr_ms << '\n';
  }
}

std::vector<BenchConfig> default_suite(const BenchConfig& base) {
  std::vector<BenchConfig> suite;
  BenchConfig b = base;
  b.label = "base";
  suite.push_back(b);
  if (base.c % 2 == 0) {
    BenchConfig half = base;
    half.c /= 2;
    half.label = "halve_c";
    suite.push_back(half);
  }
  const Factor quarter{1, 4};
  const Factor half{1, 2};
  for (auto& c : plan_isocontrol(base, Quantity::comp, std::span(&quarter, 1))) suite.push_back(c);
  for (auto& c : plan_isocontrol(base, Quantity::size, std::span(&half, 1))) suite.push_back(c);
  for (auto& c : plan_isocontrol(base, Quantity::num, std::span(&half, 1))) suite.push_back(c);
  return suite;
}

}  // namespace nvc
