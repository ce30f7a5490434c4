#pragma once

// Shared direct-convolution loop for the real and int16 paths. Each output
// channel is owned by one worker and its taps are accumulated in a fixed
// (input channel, kernel row, kernel column) order.

#include <algorithm>
#include <span>

#include "nvc/parallel.hpp"
#include "nvc/tensor.hpp"

namespace nvc::detail {

// Calls finish(oc, acc_plane) once per output channel after accumulating every
// tap into `acc_plane`, which starts at `init(oc)`.
template <typename Acc, typename In, typename W, typename Init, typename Finish>
void conv_accumulate(const Tensor<In>& input, std::span<const W> weights, const ConvSpec& spec,
                     const Shape& out_shape, Init init, Finish finish) {
  const Shape& in_shape = input.shape();
  const int in_pg = spec.in_per_group();
  const int out_pg = spec.out_per_group();
  const int kh_n = spec.kernel_h;
  const int kw_n = spec.kernel_w;
  const int stride = spec.stride;
  const int pad = spec.padding;
  const int oh_n = out_shape.height;
  const int ow_n = out_shape.width;
  const std::size_t taps = static_cast<std::size_t>(in_pg) * kh_n * kw_n;

  parallel_for(static_cast<std::size_t>(spec.out_channels), taps * out_shape.plane(),
               [&](std::size_t oc_index) {
    const int oc = static_cast<int>(oc_index);
    const int group = oc / out_pg;
    std::vector<Acc> acc(out_shape.plane(), init(oc));
    const W* wbase = weights.data() + static_cast<std::size_t>(oc) * taps;
    for (int icg = 0; icg < in_pg; ++icg) {
      const int ic = group * in_pg + icg;
      const In* plane = input.channel(ic).data();
      for (int kh = 0; kh < kh_n; ++kh) {
        for (int kw = 0; kw < kw_n; ++kw) {
          const Acc wv = static_cast<Acc>(wbase[(icg * kh_n + kh) * kw_n + kw]);
          if (wv == Acc{}) continue;
          // Valid output column range for this tap: 0 <= ow*stride - pad + kw < in_w.
          const int lo = std::max(0, (pad - kw + stride - 1) / stride);
          const int hi = std::min(ow_n, (in_shape.width + pad - kw + stride - 1) / stride);
          for (int oh = 0; oh < oh_n; ++oh) {
            const int ih = oh * stride - pad + kh;
            if (ih < 0 || ih >= in_shape.height) continue;
            const In* row = plane + static_cast<std::size_t>(ih) * in_shape.width;
            Acc* out_row = acc.data() + static_cast<std::size_t>(oh) * ow_n;
            if (stride == 1) {
              const In* src = row - pad + kw;
              for (int ow = lo; ow < hi; ++ow) out_row[ow] += wv * static_cast<Acc>(src[ow]);
            } else {
              for (int ow = lo; ow < hi; ++ow)
                out_row[ow] += wv * static_cast<Acc>(row[ow * stride - pad + kw]);
            }
          }
        }
      }
    }
    finish(oc, std::span<const Acc>(acc));
  });
}

}  // namespace nvc::detail
