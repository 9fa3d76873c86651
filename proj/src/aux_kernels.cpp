#include "scnn/aux_kernels.hpp"

#include <algorithm>
#include <cmath>

#include "scnn/arch.hpp"
#include "scnn/errors.hpp"

namespace scnn {

AuxResult simulate_pool(const Tensor& ifm, const LayerDescriptor& layer) {
  if (layer.kind != LayerKind::kMaxPool)
    throw ValidationError("simulate_pool: layer '" + layer.name + "' is not maxpool");
  const int w = layer.pool_window, s = layer.pool_stride;
  if (w > ifm.height || w > ifm.width)
    throw ValidationError("simulate_pool: window " + std::to_string(w) + " larger than input " +
                          ifm.shape_str());
  const int oh = (ifm.height - w) / s + 1;
  const int ow = (ifm.width - w) / s + 1;

  AuxResult res{Tensor(ifm.channels, oh, ow), {}};
  for (int ch = 0; ch < ifm.channels; ++ch)
    for (int oy = 0; oy < oh; ++oy)
      for (int ox = 0; ox < ow; ++ox) {
        float m = ifm.at(ch, oy * s, ox * s);
        for (int wy = 0; wy < w; ++wy)
          for (int wx = 0; wx < w; ++wx) m = std::max(m, ifm.at(ch, oy * s + wy, ox * s + wx));
        res.out.at(ch, oy, ox) = m;
      }
  res.stats.cycles = res.out.size();
  res.stats.bytes_in = ifm.size() * kDataBytes;
  res.stats.bytes_out = res.out.size() * kDataBytes;
  return res;
}

AuxResult simulate_lrn(const Tensor& ifm, const LayerDescriptor& layer) {
  if (layer.kind != LayerKind::kLrn)
    throw ValidationError("simulate_lrn: layer '" + layer.name + "' is not lrn");
  const int n = layer.lrn_size;
  if (n < 1 || n % 2 == 0)
    throw ValidationError("simulate_lrn: local_size must be odd and >= 1");
  const int half = n / 2;
  const float alpha_over_n = static_cast<float>(layer.lrn_alpha / n);
  const float k = static_cast<float>(layer.lrn_k);
  const float beta = static_cast<float>(layer.lrn_beta);

  AuxResult res{Tensor(ifm.channels, ifm.height, ifm.width), {}};
  for (int ch = 0; ch < ifm.channels; ++ch) {
    const int lo = std::max(0, ch - half);
    const int hi = std::min(ifm.channels - 1, ch + half);
    for (int y = 0; y < ifm.height; ++y)
      for (int x = 0; x < ifm.width; ++x) {
        float sum_sq = 0.f;
        for (int c2 = lo; c2 <= hi; ++c2) {
          const float v = ifm.at(c2, y, x);
          sum_sq += v * v;
        }
        const float base = k + alpha_over_n * sum_sq;
        if (base <= 0.f)
          throw ValidationError("simulate_lrn: non-positive normalization base (k=" +
                                std::to_string(layer.lrn_k) + "); division guard");
        res.out.at(ch, y, x) = ifm.at(ch, y, x) / std::pow(base, beta);
      }
  }
  res.stats.cycles = res.out.size();
  res.stats.bytes_in = ifm.size() * kDataBytes;
  res.stats.bytes_out = res.out.size() * kDataBytes;
  return res;
}

AuxResult simulate_memwrite(const Tensor& a, const Tensor* b, bool apply_relu) {
  if (b && !a.same_shape(*b))
    throw ValidationError("simulate_memwrite: shape mismatch " + a.shape_str() + " vs " +
                          b->shape_str());
  AuxResult res{Tensor(a.channels, a.height, a.width), {}};
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    float v = b ? a.data[i] + b->data[i] : a.data[i];
    if (apply_relu) v = std::max(0.f, v);
    res.out.data[i] = v;
  }
  res.stats.cycles = res.out.size();
  res.stats.bytes_in = a.size() * kDataBytes * (b ? 2 : 1);
  res.stats.bytes_out = res.out.size() * kDataBytes;
  return res;
}

}  // namespace scnn
