#include <doctest.h>

#include <algorithm>

#include "scnn/errors.hpp"
#include "scnn/model.hpp"

using namespace scnn;

namespace {

LayerDescriptor conv_layer(const std::string& name, const std::string& input, int oc, int ic,
                           int k, int s = 1, int p = 0, int groups = 1) {
  LayerDescriptor l;
  l.name = name;
  l.kind = LayerKind::kConv;
  l.inputs = {input};
  l.out_channels = oc;
  l.in_channels = ic;
  l.kernel_size = k;
  l.stride = s;
  l.padding = p;
  l.groups = groups;
  return l;
}

LayerDescriptor relu_layer(const std::string& name, const std::string& input) {
  LayerDescriptor l;
  l.name = name;
  l.kind = LayerKind::kRelu;
  l.inputs = {input};
  return l;
}

}  // namespace

TEST_CASE("conv shape law: AlexNet conv1") {
  ModelDescriptor m;
  m.name = "t";
  m.input_shape = {3, 227, 227};
  m.layers = {conv_layer("conv1", "input", 96, 3, 11, 4, 0)};
  auto shapes = infer_shapes(m);
  CHECK(shapes.at("conv1") == Shape{96, 55, 55});
}

TEST_CASE("shape-preserving layers and the full-window case") {
  ModelDescriptor m;
  m.name = "t";
  m.input_shape = {512, 7, 7};
  m.layers = {relu_layer("r", "input")};
  CHECK(infer_shapes(m).at("r") == Shape{512, 7, 7});

  ModelDescriptor m2;
  m2.name = "t2";
  m2.input_shape = {1, 5, 5};
  m2.layers = {conv_layer("c", "input", 1, 1, 5, 1, 0)};
  CHECK(infer_shapes(m2).at("c") == Shape{1, 1, 1});
}

TEST_CASE("shape errors name the offending layer") {
  ModelDescriptor m;
  m.name = "t";
  m.input_shape = {3, 4, 4};
  m.layers = {conv_layer("tiny", "input", 4, 3, 7)};  // kernel larger than input
  CHECK_THROWS_WITH_AS(infer_shapes(m), doctest::Contains("tiny"), ValidationError);

  // eltwise with mismatched branch shapes
  ModelDescriptor m3;
  m3.name = "t3";
  m3.input_shape = {2, 8, 8};
  m3.layers = {conv_layer("a", "input", 2, 2, 1),
               conv_layer("b", "input", 2, 2, 3)};
  LayerDescriptor add;
  add.name = "sum";
  add.kind = LayerKind::kEltwise;
  add.inputs = {"a", "b"};
  m3.layers.push_back(add);
  CHECK_THROWS_WITH_AS(infer_shapes(m3), doctest::Contains("sum"), ValidationError);
}

TEST_CASE("validate_model rejects unresolved and forward references") {
  ModelDescriptor m;
  m.name = "t";
  m.input_shape = {1, 4, 4};
  m.layers = {relu_layer("a", "zzz")};
  auto v = validate_model(m);
  REQUIRE(!v.empty());
  CHECK(v[0].find("zzz") != std::string::npos);

  // a layer may not consume a later layer (keeps the DAG acyclic)
  ModelDescriptor m2;
  m2.name = "t2";
  m2.input_shape = {1, 4, 4};
  m2.layers = {relu_layer("a", "b"), relu_layer("b", "input")};
  CHECK(!validate_model(m2).empty());

  ModelDescriptor ok;
  ok.name = "ok";
  ok.input_shape = {1, 4, 4};
  ok.layers = {relu_layer("a", "input"), relu_layer("b", "a")};
  CHECK(validate_model(ok).empty());
}

TEST_CASE("degenerate zero-channel conv is rejected by validation") {
  ModelDescriptor m;
  m.name = "t";
  m.input_shape = {1, 4, 4};
  auto c = conv_layer("z", "input", 4, 1, 3);
  c.in_channels = 0;
  m.layers = {c};
  auto v = validate_model(m);
  REQUIRE(!v.empty());
  CHECK(v[0].find("in_channels") != std::string::npos);
}

TEST_CASE("flop_count: single 1x1 conv is one multiply plus one add") {
  ModelDescriptor m;
  m.name = "t";
  m.input_shape = {1, 1, 1};
  m.layers = {conv_layer("c", "input", 1, 1, 1)};
  CHECK(flop_count(m) == 2);
}

TEST_CASE("flop_count is additive and invariant under topological reordering") {
  ModelDescriptor m;
  m.name = "t";
  m.input_shape = {2, 8, 8};
  m.layers = {conv_layer("a", "input", 4, 2, 3, 1, 1),
              conv_layer("b", "a", 8, 4, 3, 1, 1),
              conv_layer("c", "input", 8, 2, 1)};
  auto shapes = infer_shapes(m);
  std::int64_t sum = 0;
  for (const auto& l : m.layers) sum += layer_flops(l, shapes.at(l.name));
  CHECK(flop_count(m) == sum);

  // "c" only depends on the input, so it can move anywhere in the order.
  ModelDescriptor reordered = m;
  std::swap(reordered.layers[1], reordered.layers[2]);
  REQUIRE(validate_model(reordered).empty());
  CHECK(flop_count(reordered) == flop_count(m));
}

TEST_CASE("grouped conv counts in_channels/groups per filter") {
  ModelDescriptor m;
  m.name = "t";
  m.input_shape = {4, 6, 6};
  m.layers = {conv_layer("g", "input", 8, 4, 3, 1, 1, 2)};
  // 2 * 6*6 * 8 * 3*3 * (4/2)
  CHECK(flop_count(m) == 2LL * 36 * 8 * 9 * 2);
}

TEST_CASE("infer_shapes is idempotent") {
  ModelDescriptor m;
  m.name = "t";
  m.input_shape = {3, 13, 13};
  m.layers = {conv_layer("c1", "input", 8, 3, 3, 2, 1), relu_layer("r1", "c1")};
  auto first = infer_shapes(m);
  auto second = infer_shapes(m);
  CHECK(first.size() == second.size());
  for (const auto& [k, s] : first) CHECK(second.at(k) == s);
}
