#include "nvc/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <condition_variable>
#include <deque>
#include <functional>
#include <future>
#include <limits>
#include <mutex>
#include <thread>

#include "nvc/entropy_model.hpp"
#include "nvc/parallel.hpp"
#include "nvc/tensor_ops.hpp"

namespace nvc {

const char* to_string(Parallelism p) { return p == Parallelism::serial ? "serial" : "overlapped"; }

namespace {

using Bytes = std::vector<std::uint8_t>;
using Symbols = std::vector<std::int32_t>;

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Single worker thread running entropy-coding jobs in submission order.
class EntropyLane {
 public:
  EntropyLane() : worker_([this] { loop(); }) {}
  ~EntropyLane() {
    {
      std::lock_guard lock(mutex_);
      stop_ = true;
    }
    cv_.notify_one();
    worker_.join();
  }

  template <typename R>
  std::future<R> submit(std::function<R()> fn) {
    auto task = std::make_shared<std::packaged_task<R()>>(std::move(fn));
    std::future<R> result = task->get_future();
    {
      std::lock_guard lock(mutex_);
      jobs_.emplace_back([task] { (*task)(); });
    }
    cv_.notify_one();
    return result;
  }

 private:
  void loop() {
    for (;;) {
      std::function<void()> job;
      {
        std::unique_lock lock(mutex_);
        cv_.wait(lock, [this] { return stop_ || !jobs_.empty(); });
        if (jobs_.empty()) return;
        job = std::move(jobs_.front());
        jobs_.pop_front();
      }
      job();
    }
  }

  std::mutex mutex_;
  std::condition_variable cv_;
  std::deque<std::function<void()>> jobs_;
  bool stop_ = false;
  std::thread worker_;
};

// Runs fn on the lane when there is one, inline otherwise. The destructor waits
// for an outstanding job so captured references never dangle.
template <typename R>
class Deferred {
 public:
  Deferred(EntropyLane* lane, std::function<R()> fn) {
    if (lane) {
      future_ = lane->submit(std::move(fn));
    } else {
      value_ = fn();
    }
  }
  ~Deferred() {
    if (future_.valid()) future_.wait();
  }
  Deferred(const Deferred&) = delete;
  Deferred& operator=(const Deferred&) = delete;

  R get() { return future_.valid() ? future_.get() : std::move(*value_); }

 private:
  std::future<R> future_;
  std::optional<R> value_;
};

struct QpModules {
  BankEntry entry;
  ScaleVector q_e, q_d, q_f, q_r;
  QuantStep step;
};

QpModules modules_for(const RateModuleBank& bank, std::uint16_t qp_q8, const QuantScheme& scheme) {
  QpModules m;
  m.entry = bank.interpolate_entry(qp_from_q8(qp_q8));
  m.q_e = make_scale_vector(m.entry.q_e, scheme);
  m.q_d = make_scale_vector(m.entry.q_d, scheme);
  m.q_f = make_scale_vector(m.entry.q_f, scheme);
  m.q_r = make_scale_vector(m.entry.q_r, scheme);
  m.step = QuantStep::of(m.entry.qstep);
  return m;
}

void check_compatible(const CodecModel& model, const RateModuleBank& bank) {
  if (bank.latent_channels() != model.config().latent_channels ||
      bank.hyper_channels() != model.config().hyper_channels) {
    throw ConfigError("rate bank is for " + std::to_string(bank.latent_channels()) + "/" +
                      std::to_string(bank.hyper_channels()) + " channels, model has " +
                      std::to_string(model.config().latent_channels) + "/" +
                      std::to_string(model.config().hyper_channels));
  }
}

template <typename T>
std::vector<double> to_real(const Tensor<T>& t, const QuantScheme& scheme) {
  std::vector<double> out(t.size());
  const auto v = t.data();
  for (std::size_t i = 0; i < out.size(); ++i) {
    if constexpr (std::is_same_v<T, float>) {
      out[i] = v[i];
    } else {
      out[i] = dequantize_value(v[i], scheme);
    }
  }
  return out;
}

// Latent reference of either precision.
struct Reference {
  std::optional<RealTensor> real;
  std::optional<QTensor> fixed;

  template <typename T>
  std::optional<Tensor<T>>& get() {
    if constexpr (std::is_same_v<T, float>) {
      return real;
    } else {
      return fixed;
    }
  }
  std::vector<double> values(const QuantScheme& scheme) const {
    if (real) return to_real(*real, scheme);
    if (fixed) return to_real(*fixed, scheme);
    return {};
  }
};

}  // namespace

// ---------------------------------------------------------------------------
// Encoder

struct Encoder::Impl {
  const CodecModel& model;
  const RateModuleBank& bank;
  CodecSettings settings;
  WorkerPool pool;
  std::unique_ptr<EntropyLane> lane;
  Reference reference;
  std::optional<Frame> reconstruction;
  std::size_t frames = 0;

  Impl(const CodecModel& m, const RateModuleBank& b, const CodecSettings& s)
      : model(m), bank(b), settings(s), pool(s.threads) {
    check_compatible(model, bank);
    if (settings.parallelism == Parallelism::overlapped) lane = std::make_unique<EntropyLane>();
  }

  template <typename T>
  FrameChunk encode(const Frame& frame);
};

template <typename T>
FrameChunk Encoder::Impl::encode(const Frame& frame) {
  if (frame.colorspace != model.config().colorspace) {
    throw std::invalid_argument("encoder configured for " + std::string(to_string(model.config().colorspace)) +
                                " got a " + to_string(frame.colorspace) + " frame");
  }
  const QuantScheme& sc = model.scheme();
  const Shape latent = model.latent_shape(frame.height, frame.width);
  const std::uint16_t qp_q8 = settings.schedule.effective_q8(frames);
  const QpModules m = modules_for(bank, qp_q8, sc);
  const ScaleTableSet& tables = default_scale_tables();
  std::optional<Tensor<T>>& f_prev = reference.get<T>();
  EntropyLane* entropy = lane.get();

  return pool.run([&] {
    const Tensor<T> x_lat = model.patch_embed(frame_to_tensor<T>(frame, sc));
    const TemporalContext<T> ctx =
        f_prev ? model.extract_context(*f_prev, m.q_f) : TemporalContext<T>::zeros(latent);
    const Tensor<T> y = model.encode_latent(x_lat, ctx.for_encoder, m.q_e);

    const Tensor<T> z = model.hyper_encode(y);
    auto zc = std::make_shared<const ZCoding>(factorized_z_tables(m.entry, z.shape()));
    LatentSymbols<T> zs = quantize_hyper(z, *zc, sc);
    Deferred<Bytes> z_bytes(entropy, [zc, sym = std::move(zs.symbols)] {
      return encode_symbols(sym, zc->table_index, zc->tables);
    });

    const HyperPrior<T> hp = model.hyper_decode(zs.dequantized, ctx.for_entropy);
    auto [y1, y2] = chunk2(y);
    LatentSymbols<T> s1 = quantize_latent(y1, hp.step1, m.step, tables, sc);
    Deferred<Bytes> y1_bytes(entropy, [&tables, sym = std::move(s1.symbols), idx = std::move(s1.table_index)] {
      return encode_symbols(sym, idx, tables.tables());
    });

    const PriorParams<T> p2 = model.estimate_step2(hp.feature, s1.dequantized);
    LatentSymbols<T> s2 = quantize_latent(y2, p2, m.step, tables, sc);
    Deferred<Bytes> y2_bytes(entropy, [&tables, sym = std::move(s2.symbols), idx = std::move(s2.table_index)] {
      return encode_symbols(sym, idx, tables.tables());
    });

    Tensor<T> f_t = model.decode_latent(concat_channels(s1.dequantized, s2.dequantized),
                                        ctx.for_decoder, m.q_d);
    std::optional<Frame> recon;
    if (settings.reconstruct_on_encode) {
      recon = tensor_to_frame(model.reconstruct(f_t, m.q_r), frame.colorspace, sc);
    }

    FrameChunk chunk;
    chunk.qp_q8 = qp_q8;
    chunk.z = z_bytes.get();
    chunk.y1 = y1_bytes.get();
    chunk.y2 = y2_bytes.get();

    f_prev = std::move(f_t);
    reconstruction = std::move(recon);
    ++frames;
    return chunk;
  });
}

Encoder::Encoder(const CodecModel& model, const RateModuleBank& bank, const CodecSettings& settings)
    : impl_(std::make_unique<Impl>(model, bank, settings)) {}

Encoder::~Encoder() = default;

FrameChunk Encoder::encode_frame(const Frame& frame) {
  return impl_->settings.mode == Precision::real ? impl_->encode<float>(frame)
                                                 : impl_->encode<std::int16_t>(frame);
}

std::size_t Encoder::frames_coded() const { return impl_->frames; }

std::vector<double> Encoder::latent() const { return impl_->reference.values(impl_->model.scheme()); }

const std::optional<Frame>& Encoder::reconstruction() const { return impl_->reconstruction; }

// ---------------------------------------------------------------------------
// Decoder

struct Decoder::Impl {
  const CodecModel& model;
  const RateModuleBank& bank;
  Precision mode;
  WorkerPool pool;
  std::unique_ptr<EntropyLane> lane;
  Reference reference;
  std::size_t frames = 0;
  std::optional<std::size_t> perturb_frame;

  Impl(const CodecModel& m, const RateModuleBank& b, Precision md, Parallelism p, int threads)
      : model(m), bank(b), mode(md), pool(threads) {
    check_compatible(model, bank);
    if (p == Parallelism::overlapped) lane = std::make_unique<EntropyLane>();
  }

  template <typename T>
  Frame decode(const FrameChunk& chunk, int width, int height);

  template <typename T>
  void perturb(Tensor<T>& f) const {
    if (f.empty()) return;
    // The largest-magnitude activation, so the nudge is not lost in later sums.
    const auto v = f.data();
    std::size_t at = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
      if (std::abs(static_cast<double>(v[i])) > std::abs(static_cast<double>(v[at]))) at = i;
    }
    if constexpr (std::is_same_v<T, float>) {
      v[at] = std::nextafter(v[at], std::numeric_limits<float>::infinity());
    } else {
      const double x = dequantize_value(v[at], model.scheme());
      v[at] = quantize_value(std::nextafter(x, std::numeric_limits<double>::infinity()), model.scheme());
    }
  }
};

template <typename T>
Frame Decoder::Impl::decode(const FrameChunk& chunk, int width, int height) {
  const QuantScheme& sc = model.scheme();
  const Shape latent = model.latent_shape(height, width);
  const Shape hyper = model.hyper_shape(latent);
  if (chunk.qp_q8 > kMaxQp * 256) throw std::invalid_argument("chunk qp out of range");
  const QpModules m = modules_for(bank, chunk.qp_q8, sc);
  const ScaleTableSet& tables = default_scale_tables();
  std::optional<Tensor<T>>& f_prev = reference.get<T>();
  EntropyLane* entropy = lane.get();

  return pool.run([&] {
    auto zc = std::make_shared<const ZCoding>(factorized_z_tables(m.entry, hyper));
    Deferred<Symbols> z_sym(entropy, [zc, bytes = std::span<const std::uint8_t>(chunk.z)] {
      return decode_symbols(bytes, zc->table_index, zc->tables);
    });

    // First extractor half runs while z is decoded.
    TemporalContext<T> ctx;
    Tensor<T> head;
    if (f_prev) {
      head = model.extract_context_head(*f_prev, m.q_f);
      ctx.for_entropy = model.entropy_context(head);
    } else {
      ctx = TemporalContext<T>::zeros(latent);
    }

    const HyperPrior<T> hp = model.hyper_decode(dequantize_hyper<T>(z_sym.get(), hyper, sc), ctx.for_entropy);
    Deferred<Symbols> y1_sym(entropy, [&tables, idx = latent_table_index(hp.step1.scale, m.step, tables, sc),
                                       bytes = std::span<const std::uint8_t>(chunk.y1)] {
      return decode_symbols(bytes, idx, tables.tables());
    });

    // Second half runs while y1 is decoded.
    if (f_prev) model.extract_context_tail(head, ctx);

    const Tensor<T> y1_hat = dequantize_latent(y1_sym.get(), hp.step1.mean, m.step, sc);
    const PriorParams<T> p2 = model.estimate_step2(hp.feature, y1_hat);
    const auto idx2 = latent_table_index(p2.scale, m.step, tables, sc);
    const Tensor<T> y2_hat = dequantize_latent(decode_symbols(chunk.y2, idx2, tables.tables()), p2.mean, m.step, sc);

    Tensor<T> f_t = model.decode_latent(concat_channels(y1_hat, y2_hat), ctx.for_decoder, m.q_d);
    if (perturb_frame && *perturb_frame == frames) perturb(f_t);
    Frame out = tensor_to_frame(model.reconstruct(f_t, m.q_r), model.config().colorspace, sc);

    f_prev = std::move(f_t);
    ++frames;
    return out;
  });
}

Decoder::Decoder(const CodecModel& model, const RateModuleBank& bank, Precision mode,
                 Parallelism parallelism, int threads)
    : impl_(std::make_unique<Impl>(model, bank, mode, parallelism, threads)) {}

Decoder::~Decoder() = default;

Frame Decoder::decode_frame(const FrameChunk& chunk, int padded_width, int padded_height) {
  return impl_->mode == Precision::real ? impl_->decode<float>(chunk, padded_width, padded_height)
                                        : impl_->decode<std::int16_t>(chunk, padded_width, padded_height);
}

std::size_t Decoder::frames_decoded() const { return impl_->frames; }

std::vector<double> Decoder::latent() const { return impl_->reference.values(impl_->model.scheme()); }

void Decoder::perturb_latent_at(std::size_t frame_index) { impl_->perturb_frame = frame_index; }

// ---------------------------------------------------------------------------
// Sequences

namespace {

int round_up(int v, int m) { return (v + m - 1) / m * m; }

}  // namespace

EncodeResult encode_video(const std::vector<Frame>& frames, const CodecModel& model,
                          const RateModuleBank& bank, const CodecSettings& settings) {
  const CodecConfig& cfg = model.config();
  EncodeResult r;
  StreamHeader& h = r.stream.header;
  if (!frames.empty()) {
    h.width = static_cast<std::uint32_t>(frames.front().width);
    h.height = static_cast<std::uint32_t>(frames.front().height);
  }
  for (const Frame& f : frames) {
    if (f.width != frames.front().width || f.height != frames.front().height ||
        f.colorspace != cfg.colorspace) {
      throw std::invalid_argument("all frames must share the model colorspace and one size");
    }
  }
  h.mode = settings.mode;
  h.frame_count = static_cast<std::uint32_t>(frames.size());
  h.base_qp_q8 = qp_to_q8(settings.schedule.base_qp);
  h.gop_offsets = settings.schedule.gop_offsets;
  h.model_hash = model_hash(model.weights(), bank);
  h.config = cfg;

  const auto start = std::chrono::steady_clock::now();
  Encoder enc(model, bank, settings);
  for (const Frame& f : frames) {
    const auto t0 = std::chrono::steady_clock::now();
    r.stream.chunks.push_back(enc.encode_frame(pad_to_multiple(f, cfg.pad_multiple())));
    r.frame_seconds.push_back(seconds_since(t0));
    r.latents.push_back(enc.latent());
    if (enc.reconstruction()) r.reconstructions.push_back(crop(*enc.reconstruction(), f.width, f.height));
  }
  r.bytes = write_stream(r.stream);
  r.seconds = seconds_since(start);
  return r;
}

namespace {

void check_header(const StreamHeader& h, const CodecModel& model, const RateModuleBank& bank) {
  if (!(h.config == model.config())) throw ConfigError("stream codec config does not match the weights");
  const std::uint32_t expected = model_hash(model.weights(), bank);
  if (h.model_hash != expected) {
    throw ConfigError("stream was encoded with a different model (hash " + std::to_string(h.model_hash) +
                      ", loaded weights and bank hash to " + std::to_string(expected) + ")");
  }
}

}  // namespace

DecodeResult decode_video(std::span<const std::uint8_t> bytes, const CodecModel& model,
                          const RateModuleBank& bank, const DecodeSettings& settings) {
  const auto start = std::chrono::steady_clock::now();
  const Bitstream stream = read_stream(bytes);
  const StreamHeader& h = stream.header;
  check_header(h, model, bank);

  DecodeResult r;
  r.header = h;
  const int m = model.config().pad_multiple();
  const int pw = round_up(static_cast<int>(h.width), m);
  const int ph = round_up(static_cast<int>(h.height), m);
  Decoder dec(model, bank, h.mode, settings.parallelism, settings.threads);
  if (settings.perturb_frame) dec.perturb_latent_at(*settings.perturb_frame);
  std::size_t offset = kStreamHeaderBytes;
  for (std::size_t i = 0; i < stream.chunks.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const Frame f = dec.decode_frame(stream.chunks[i], pw, ph);
      r.frames.push_back(crop(f, static_cast<int>(h.width), static_cast<int>(h.height)));
    } catch (const EntropyError& e) {
      throw StreamError(e.what(), offset, i);
    }
    offset += stream.chunks[i].byte_size();
    r.frame_seconds.push_back(seconds_since(t0));
    r.latents.push_back(dec.latent());
  }
  r.seconds = seconds_since(start);
  return r;
}

std::vector<DriftRow> drift_report(const std::vector<Frame>& frames, const CodecModel& model,
                                   const RateModuleBank& bank, const CodecSettings& settings,
                                   std::optional<std::size_t> perturb_frame) {
  const EncodeResult enc = encode_video(frames, model, bank, settings);
  const int m = model.config().pad_multiple();
  const int pw = round_up(static_cast<int>(enc.stream.header.width), m);
  const int ph = round_up(static_cast<int>(enc.stream.header.height), m);
  Decoder dec(model, bank, settings.mode, Parallelism::serial, settings.threads);
  if (perturb_frame) dec.perturb_latent_at(*perturb_frame);

  std::vector<DriftRow> rows;
  bool lost = false;
  for (std::size_t t = 0; t < enc.stream.chunks.size(); ++t) {
    DriftRow row{t, std::numeric_limits<double>::infinity()};
    if (!lost) {
      try {
        dec.decode_frame(enc.stream.chunks[t], pw, ph);
        const std::vector<double> a = enc.latents[t];
        const std::vector<double> b = dec.latent();
        double worst = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
        row.max_abs_diff = worst;
      } catch (const EntropyError&) {
        lost = true;
      }
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace nvc
