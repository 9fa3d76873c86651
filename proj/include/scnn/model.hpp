#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace scnn {

enum class LayerKind { kConv, kFc, kMaxPool, kLrn, kEltwise, kRelu };

const char* layer_kind_name(LayerKind kind);

struct Shape {
  int channels = 0;
  int height = 0;
  int width = 0;

  std::int64_t elements() const { return static_cast<std::int64_t>(channels) * height * width; }
  bool operator==(const Shape&) const = default;
  std::string str() const;
};

/// One layer of a CNN model. Kind-specific parameters are only meaningful for
/// the matching kind; validate_model enforces that they are present exactly
/// when required.
struct LayerDescriptor {
  std::string name;
  LayerKind kind = LayerKind::kRelu;
  // Producer layer names; "input" refers to the model input. Two entries for
  // eltwise, one otherwise.
  std::vector<std::string> inputs;

  // conv/fc
  int out_channels = 0;   // op_dim
  int in_channels = 0;    // ic_dim (flattened size for fc)
  int kernel_size = 0;    // c
  int stride = 1;         // s
  int padding = 0;        // p
  int groups = 1;         // split-conv groups; weights span in_channels/groups

  // pool
  int pool_window = 0;
  int pool_stride = 1;

  // lrn (AlexNet-standard defaults, overridable per layer)
  int lrn_size = 5;
  double lrn_alpha = 1e-4;
  double lrn_beta = 0.75;
  double lrn_k = 2.0;

  // Fused ReLU on the kernel output (conv/fc/eltwise).
  bool apply_relu = false;

  bool is_conv() const { return kind == LayerKind::kConv; }
  bool is_fc() const { return kind == LayerKind::kFc; }
  // Channels actually convolved per filter.
  int group_in_channels() const { return groups > 0 ? in_channels / groups : in_channels; }
};

/// A DAG of layers. `layers` is ordered; every `inputs` entry must resolve to
/// an earlier layer or the reserved name "input".
struct ModelDescriptor {
  std::string name;
  Shape input_shape;
  std::vector<LayerDescriptor> layers;

  const LayerDescriptor* find_layer(const std::string& name) const;
};

inline constexpr const char* kModelInputName = "input";

// Every structural violation (unknown producers, bad params, cycles by
// forward reference, shape mismatches). Empty == valid.
std::vector<std::string> validate_model(const ModelDescriptor& model);
void require_valid(const ModelDescriptor& model);

// Output shape of each layer, keyed by layer name. Throws ValidationError
// naming the first offending layer.
std::unordered_map<std::string, Shape> infer_shapes(const ModelDescriptor& model);

Shape conv_output_shape(const Shape& in, const LayerDescriptor& layer);
Shape pool_output_shape(const Shape& in, const LayerDescriptor& layer);

// Headline FLOP count: conv + fc only, 1 MAC = 2 FLOPs.
std::int64_t flop_count(const ModelDescriptor& model);
std::int64_t layer_flops(const LayerDescriptor& layer, const Shape& out_shape);

}  // namespace scnn
