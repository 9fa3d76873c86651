#include "scnn/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "scnn/errors.hpp"

namespace scnn {

DTensor conv_ref(const Tensor& ifm, const std::vector<Tensor>& filters,
                 const std::vector<float>& bias, const LayerDescriptor& layer) {
  if (!layer.is_conv()) throw ValidationError("conv_ref: layer '" + layer.name + "' is not conv");
  if (layer.stride < 1) throw ValidationError("conv_ref: stride must be >= 1");
  const int c = layer.kernel_size, s = layer.stride, p = layer.padding;
  const int g = layer.groups;
  const int icg = layer.group_in_channels();
  if (ifm.channels != layer.in_channels)
    throw ValidationError("conv_ref: ifm channels " + std::to_string(ifm.channels) +
                          " != layer in_channels " + std::to_string(layer.in_channels));
  if (static_cast<int>(filters.size()) != layer.out_channels)
    throw ValidationError("conv_ref: expected " + std::to_string(layer.out_channels) +
                          " filters, got " + std::to_string(filters.size()));
  for (const auto& f : filters)
    if (f.channels != icg || f.height != c || f.width != c)
      throw ValidationError("conv_ref: filter shape " + f.shape_str() + " != expected " +
                            std::to_string(icg) + "x" + std::to_string(c) + "x" + std::to_string(c));
  if (static_cast<int>(bias.size()) != layer.out_channels)
    throw ValidationError("conv_ref: bias size mismatch");

  Shape out_shape = conv_output_shape({ifm.channels, ifm.height, ifm.width}, layer);
  DTensor out(out_shape.channels, out_shape.height, out_shape.width);
  const int oc_per_group = layer.out_channels / g;

  for (int oc = 0; oc < layer.out_channels; ++oc) {
    const int ic0 = (oc / oc_per_group) * icg;  // first input channel of this group
    const Tensor& w = filters[oc];
    for (int oy = 0; oy < out_shape.height; ++oy) {
      for (int ox = 0; ox < out_shape.width; ++ox) {
        double acc = 0.0;
        for (int ic = 0; ic < icg; ++ic)
          for (int ky = 0; ky < c; ++ky)
            for (int kx = 0; kx < c; ++kx) {
              const int y = oy * s - p + ky;
              const int x = ox * s - p + kx;
              acc += static_cast<double>(w.at(ic, ky, kx)) *
                     static_cast<double>(ifm.at_padded(ic0 + ic, y, x));
            }
        out.at(oc, oy, ox) = acc + static_cast<double>(bias[oc]);
      }
    }
  }
  return out;
}

std::vector<double> fc_ref(const std::vector<float>& input, const Matrix& weights,
                           const std::vector<float>& bias) {
  if (static_cast<int>(input.size()) != weights.cols)
    throw ValidationError("fc_ref: input size " + std::to_string(input.size()) +
                          " != weight cols " + std::to_string(weights.cols));
  if (static_cast<int>(bias.size()) != weights.rows)
    throw ValidationError("fc_ref: bias size mismatch");
  std::vector<double> out(weights.rows);
  for (int j = 0; j < weights.rows; ++j) {
    double acc = 0.0;
    for (int i = 0; i < weights.cols; ++i)
      acc += static_cast<double>(weights.at(j, i)) * static_cast<double>(input[i]);
    out[j] = acc + static_cast<double>(bias[j]);
  }
  return out;
}

DTensor maxpool_ref(const Tensor& ifm, int window, int stride) {
  if (window < 1 || stride < 1) throw ValidationError("maxpool_ref: window/stride must be >= 1");
  if (window > ifm.height || window > ifm.width)
    throw ValidationError("maxpool_ref: window " + std::to_string(window) +
                          " larger than input " + ifm.shape_str());
  const int oh = (ifm.height - window) / stride + 1;
  const int ow = (ifm.width - window) / stride + 1;
  DTensor out(ifm.channels, oh, ow);
  for (int ch = 0; ch < ifm.channels; ++ch)
    for (int oy = 0; oy < oh; ++oy)
      for (int ox = 0; ox < ow; ++ox) {
        float m = ifm.at(ch, oy * stride, ox * stride);
        for (int wy = 0; wy < window; ++wy)
          for (int wx = 0; wx < window; ++wx)
            m = std::max(m, ifm.at(ch, oy * stride + wy, ox * stride + wx));
        out.at(ch, oy, ox) = static_cast<double>(m);
      }
  return out;
}

DTensor lrn_ref(const Tensor& ifm, int n, double alpha, double beta, double k) {
  if (n < 1 || n % 2 == 0) throw ValidationError("lrn_ref: local_size must be odd and >= 1");
  const int half = n / 2;
  DTensor out(ifm.channels, ifm.height, ifm.width);
  for (int ch = 0; ch < ifm.channels; ++ch) {
    const int lo = std::max(0, ch - half);
    const int hi = std::min(ifm.channels - 1, ch + half);
    for (int y = 0; y < ifm.height; ++y)
      for (int x = 0; x < ifm.width; ++x) {
        double sum_sq = 0.0;
        for (int c2 = lo; c2 <= hi; ++c2) {
          const double v = static_cast<double>(ifm.at(c2, y, x));
          sum_sq += v * v;
        }
        // alpha is normalized by the nominal window size n even at clamped
        // edges (Caffe/AlexNet convention).
        const double base = k + (alpha / n) * sum_sq;
        if (base <= 0.0)
          throw ValidationError("lrn_ref: non-positive normalization base (k=" +
                                std::to_string(k) + "); division guard");
        out.at(ch, y, x) = static_cast<double>(ifm.at(ch, y, x)) / std::pow(base, beta);
      }
  }
  return out;
}

DTensor eltwise_relu_ref(const Tensor& a, const Tensor& b, bool apply_relu) {
  if (!a.same_shape(b))
    throw ValidationError("eltwise_relu_ref: shape mismatch " + a.shape_str() + " vs " + b.shape_str());
  DTensor out(a.channels, a.height, a.width);
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    double v = static_cast<double>(a.data[i]) + static_cast<double>(b.data[i]);
    out.data[i] = apply_relu ? std::max(0.0, v) : v;
  }
  return out;
}

namespace {

DTensor relu_d(const DTensor& t) {
  DTensor out = t;
  for (auto& v : out.data) v = std::max(0.0, v);
  return out;
}

std::vector<float> flatten_f(const DTensor& t) {
  std::vector<float> out(t.data.size());
  for (std::size_t i = 0; i < t.data.size(); ++i) out[i] = static_cast<float>(t.data[i]);
  return out;
}

}  // namespace

std::map<std::string, DTensor> model_ref_forward(const ModelDescriptor& model,
                                                 const Tensor& input,
                                                 const WeightMap& weights) {
  require_valid(model);
  if (input.channels != model.input_shape.channels || input.height != model.input_shape.height ||
      input.width != model.input_shape.width)
    throw ValidationError("model_ref_forward: input shape " + input.shape_str() +
                          " != model input_shape " + model.input_shape.str());

  std::map<std::string, DTensor> outputs;
  outputs[kModelInputName] = convert_tensor<double>(input);

  for (const auto& l : model.layers) {
    auto fetch = [&](std::size_t i) -> const DTensor& { return outputs.at(l.inputs.at(i)); };
    auto fetch_weights = [&]() -> const LayerWeights& {
      auto it = weights.find(l.name);
      if (it == weights.end())
        throw ValidationError("model_ref_forward: missing weights for layer '" + l.name + "'");
      return it->second;
    };

    DTensor out;
    switch (l.kind) {
      case LayerKind::kConv: {
        const auto& lw = fetch_weights();
        out = conv_ref(convert_tensor<float>(fetch(0)), lw.filters, lw.bias, l);
        if (l.apply_relu) out = relu_d(out);
        break;
      }
      case LayerKind::kFc: {
        const auto& lw = fetch_weights();
        auto res = fc_ref(flatten_f(fetch(0)), lw.matrix, lw.bias);
        out = DTensor(static_cast<int>(res.size()), 1, 1);
        for (std::size_t i = 0; i < res.size(); ++i)
          out.data[i] = l.apply_relu ? std::max(0.0, res[i]) : res[i];
        break;
      }
      case LayerKind::kMaxPool:
        out = maxpool_ref(convert_tensor<float>(fetch(0)), l.pool_window, l.pool_stride);
        break;
      case LayerKind::kLrn:
        out = lrn_ref(convert_tensor<float>(fetch(0)), l.lrn_size, l.lrn_alpha, l.lrn_beta, l.lrn_k);
        break;
      case LayerKind::kEltwise:
        out = eltwise_relu_ref(convert_tensor<float>(fetch(0)), convert_tensor<float>(fetch(1)),
                               l.apply_relu);
        break;
      case LayerKind::kRelu:
        out = relu_d(fetch(0));
        break;
    }
    outputs[l.name] = std::move(out);
  }
  outputs.erase(kModelInputName);
  return outputs;
}

}  // namespace scnn
