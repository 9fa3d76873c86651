#include "scnn/model.hpp"

#include <unordered_set>

#include "scnn/errors.hpp"

namespace scnn {

const char* layer_kind_name(LayerKind kind) {
  switch (kind) {
    case LayerKind::kConv: return "conv";
    case LayerKind::kFc: return "fc";
    case LayerKind::kMaxPool: return "maxpool";
    case LayerKind::kLrn: return "lrn";
    case LayerKind::kEltwise: return "eltwise";
    case LayerKind::kRelu: return "relu";
  }
  return "?";
}

std::string Shape::str() const {
  return std::to_string(channels) + "x" + std::to_string(height) + "x" + std::to_string(width);
}

const LayerDescriptor* ModelDescriptor::find_layer(const std::string& layer_name) const {
  for (const auto& l : layers)
    if (l.name == layer_name) return &l;
  return nullptr;
}

Shape conv_output_shape(const Shape& in, const LayerDescriptor& layer) {
  const int c = layer.kernel_size, s = layer.stride, p = layer.padding;
  const int oh = (in.height + 2 * p - c) / s + 1;
  const int ow = (in.width + 2 * p - c) / s + 1;
  if (oh < 1 || ow < 1)
    throw ValidationError("layer '" + layer.name + "': kernel " + std::to_string(c) +
                          " does not fit input " + in.str());
  return {layer.out_channels, oh, ow};
}

Shape pool_output_shape(const Shape& in, const LayerDescriptor& layer) {
  const int w = layer.pool_window, s = layer.pool_stride;
  if (w > in.height || w > in.width)
    throw ValidationError("layer '" + layer.name + "': pool window " + std::to_string(w) +
                          " larger than input " + in.str());
  return {in.channels, (in.height - w) / s + 1, (in.width - w) / s + 1};
}

namespace {

// Per-layer structural checks that need no shape context.
void check_layer_params(const LayerDescriptor& l, std::vector<std::string>& out) {
  auto bad = [&](const std::string& msg) { out.push_back("layer '" + l.name + "': " + msg); };

  const std::size_t want_inputs = l.kind == LayerKind::kEltwise ? 2 : 1;
  if (l.inputs.size() != want_inputs)
    bad(std::string(layer_kind_name(l.kind)) + " expects " + std::to_string(want_inputs) +
        " input(s), got " + std::to_string(l.inputs.size()));

  switch (l.kind) {
    case LayerKind::kConv:
      if (l.out_channels < 1) bad("conv out_channels must be >= 1");
      if (l.in_channels < 1) bad("conv in_channels must be >= 1");
      if (l.kernel_size < 1) bad("conv kernel_size must be >= 1");
      if (l.stride < 1) bad("conv stride must be >= 1");
      if (l.padding < 0) bad("conv padding must be >= 0");
      if (l.groups < 1) bad("conv groups must be >= 1");
      else {
        if (l.in_channels % l.groups != 0) bad("conv in_channels must divide by groups");
        if (l.out_channels % l.groups != 0) bad("conv out_channels must divide by groups");
      }
      break;
    case LayerKind::kFc:
      if (l.out_channels < 1) bad("fc out_channels must be >= 1");
      if (l.in_channels < 1) bad("fc in_channels must be >= 1");
      break;
    case LayerKind::kMaxPool:
      if (l.pool_window < 1) bad("pool window must be >= 1");
      if (l.pool_stride < 1) bad("pool stride must be >= 1");
      break;
    case LayerKind::kLrn:
      if (l.lrn_size < 1 || l.lrn_size % 2 == 0) bad("lrn local_size must be odd and >= 1");
      if (l.lrn_k < 0) bad("lrn k must be non-negative");
      break;
    case LayerKind::kEltwise:
    case LayerKind::kRelu:
      break;
  }
}

}  // namespace

std::vector<std::string> validate_model(const ModelDescriptor& model) {
  std::vector<std::string> violations;
  if (model.input_shape.channels < 1 || model.input_shape.height < 1 || model.input_shape.width < 1)
    violations.push_back("model input_shape must be positive, got " + model.input_shape.str());
  if (model.layers.empty()) violations.push_back("model has no layers");

  std::unordered_set<std::string> seen;  // producers visible so far
  seen.insert(kModelInputName);
  for (const auto& l : model.layers) {
    if (l.name.empty()) violations.push_back("layer with empty name");
    if (l.name == kModelInputName)
      violations.push_back("layer name '" + l.name + "' is reserved");
    if (seen.count(l.name))
      violations.push_back("duplicate layer name '" + l.name + "'");
    check_layer_params(l, violations);
    for (const auto& in : l.inputs)
      if (!seen.count(in))
        violations.push_back("layer '" + l.name + "': input '" + in +
                             "' is not the model input or an earlier layer");
    seen.insert(l.name);
  }

  if (violations.empty()) {
    // Shape inference doubles as the semantic check (eltwise shape equality,
    // fc flattened size, kernel fit).
    try {
      infer_shapes(model);
    } catch (const ValidationError& e) {
      violations.push_back(e.what());
    }
  }
  return violations;
}

void require_valid(const ModelDescriptor& model) {
  auto v = validate_model(model);
  if (v.empty()) return;
  std::string msg = "invalid model '" + model.name + "':";
  for (const auto& s : v) msg += "\n  - " + s;
  throw ValidationError(msg);
}

std::unordered_map<std::string, Shape> infer_shapes(const ModelDescriptor& model) {
  std::unordered_map<std::string, Shape> shapes;
  shapes[kModelInputName] = model.input_shape;

  for (const auto& l : model.layers) {
    auto producer = [&](std::size_t i) -> const Shape& {
      auto it = shapes.find(l.inputs.at(i));
      if (it == shapes.end())
        throw ValidationError("layer '" + l.name + "': unresolved input '" + l.inputs.at(i) + "'");
      return it->second;
    };

    Shape out;
    switch (l.kind) {
      case LayerKind::kConv: {
        const Shape& in = producer(0);
        if (in.channels != l.in_channels)
          throw ValidationError("layer '" + l.name + "': declared in_channels " +
                                std::to_string(l.in_channels) + " but producer has " +
                                std::to_string(in.channels));
        out = conv_output_shape(in, l);
        break;
      }
      case LayerKind::kFc: {
        const Shape& in = producer(0);
        if (in.elements() != l.in_channels)
          throw ValidationError("layer '" + l.name + "': fc in_channels " +
                                std::to_string(l.in_channels) + " != flattened producer size " +
                                std::to_string(in.elements()));
        out = {l.out_channels, 1, 1};
        break;
      }
      case LayerKind::kMaxPool:
        out = pool_output_shape(producer(0), l);
        break;
      case LayerKind::kLrn:
      case LayerKind::kRelu:
        out = producer(0);
        break;
      case LayerKind::kEltwise: {
        const Shape& a = producer(0);
        const Shape& b = producer(1);
        if (!(a == b))
          throw ValidationError("layer '" + l.name + "': eltwise inputs differ in shape: " +
                                a.str() + " vs " + b.str());
        out = a;
        break;
      }
    }
    shapes[l.name] = out;
  }
  return shapes;
}

std::int64_t layer_flops(const LayerDescriptor& layer, const Shape& out_shape) {
  switch (layer.kind) {
    case LayerKind::kConv:
      return 2LL * out_shape.height * out_shape.width * layer.out_channels *
             layer.kernel_size * layer.kernel_size * layer.group_in_channels();
    case LayerKind::kFc:
      return 2LL * layer.out_channels * layer.in_channels;
    default:
      // pool/lrn/eltwise/relu do not contribute to the headline figure
      return 0;
  }
}

std::int64_t flop_count(const ModelDescriptor& model) {
  auto shapes = infer_shapes(model);
  std::int64_t total = 0;
  for (const auto& l : model.layers) total += layer_flops(l, shapes.at(l.name));
  return total;
}

}  // namespace scnn
