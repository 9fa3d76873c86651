#pragma once

#include <map>
#include <string>
#include <vector>

#include "scnn/model.hpp"
#include "scnn/tensor.hpp"

namespace scnn {

/// Per-layer parameters as stored/loaded by the host runtime. Conv filters
/// are one Tensor per output channel (in_channels/groups x k x k each).
struct LayerWeights {
  std::vector<Tensor> filters;  // conv
  Matrix matrix;                // fc, out_channels x in_channels
  std::vector<float> bias;
};

using WeightMap = std::map<std::string, LayerWeights>;

// Plain reference implementations in double precision with a fixed
// ascending-index summation order (channel, then kernel row, then kernel
// column). These are the correctness oracles for the systolic engine;
// clarity over speed.

DTensor conv_ref(const Tensor& ifm, const std::vector<Tensor>& filters,
                 const std::vector<float>& bias, const LayerDescriptor& layer);

std::vector<double> fc_ref(const std::vector<float>& input, const Matrix& weights,
                           const std::vector<float>& bias);

DTensor maxpool_ref(const Tensor& ifm, int window, int stride);

DTensor lrn_ref(const Tensor& ifm, int n, double alpha, double beta, double k);

DTensor eltwise_relu_ref(const Tensor& a, const Tensor& b, bool apply_relu);

/// Runs the whole model in topological (descriptor) order, double precision,
/// applying fused ReLU flags. Returns every layer's output keyed by name.
std::map<std::string, DTensor> model_ref_forward(const ModelDescriptor& model,
                                                 const Tensor& input,
                                                 const WeightMap& weights);

}  // namespace scnn
