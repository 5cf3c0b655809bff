// Copyright 2026 The TensorLens Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <algorithm>
#include <filesystem>

#include "tlens/adapter.hpp"
#include "tlens/image.hpp"
#include "tlens/linear_oracle.hpp"
#include "tlens/rng.hpp"
#include "tlens/toy_vlm.hpp"

using namespace tlens;

namespace {

std::vector<std::uint8_t> test_image_bytes(int w, int h, std::uint64_t seed = 9) {
  Image img;
  img.width = w;
  img.height = h;
  img.rgb.resize(static_cast<std::size_t>(w) * h * 3);
  Rng rng(seed);
  for (auto& b : img.rgb) b = static_cast<std::uint8_t>(rng.uniform_int(0, 255));
  return encode_png(img);
}

AdapterSpec toy_spec() {
  AdapterSpec spec;
  spec.model_path = "toy/test";
  return spec;
}

}  // namespace

TEST_CASE("toy adapter lists expected layer names in definition order") {
  ToyVlmAdapter adapter(toy_spec());
  const auto names = adapter.named_layers();
  auto has = [&](const std::string& n) {
    return std::find(names.begin(), names.end(), n) != names.end();
  };
  CHECK(has("blocks.0.norm"));
  CHECK(has("blocks.1.norm"));
  CHECK(has("head"));
  CHECK(has("shared.scale"));
  CHECK(names.front() == "embed");
  CHECK(names.back() == "head");
  // stable across calls
  CHECK(adapter.named_layers() == names);
}

TEST_CASE("toy preprocess: token count is patches plus prompt bytes") {
  ToyVlmAdapter adapter(toy_spec());
  const auto bytes = test_image_bytes(8, 8);
  const ModelInput input = adapter.preprocess(bytes, "img.png", "x");
  // 8x8 image with patch size 4 -> 4 patches; prompt "x" -> 1 token
  CHECK(input.patches.dims[0] == 4);
  CHECK(input.token_ids.size() == 1);
  CHECK(input.token_count() == 5);

  // bit-identical on repeat
  const ModelInput again = adapter.preprocess(bytes, "img.png", "x");
  CHECK(input == again);
}

TEST_CASE("toy preprocess rejects empty and undecodable images") {
  ToyVlmAdapter adapter(toy_spec());
  CHECK_THROWS(adapter.preprocess({}, "empty.png", "x"));
  CHECK_THROWS(adapter.preprocess({1, 2, 3, 4}, "junk.bin", "x"));
}

TEST_CASE("toy preprocess enforces the context budget") {
  ToyVlmAdapter adapter(toy_spec());
  const auto bytes = test_image_bytes(8, 8);
  const std::string huge(ToyVlmAdapter::kContextBudget + 1, 'a');
  CHECK_THROWS(adapter.preprocess(bytes, "img.png", huge));
}

TEST_CASE("toy forward is deterministic bit for bit") {
  ToyVlmAdapter a(toy_spec());
  ToyVlmAdapter b(toy_spec());
  const auto bytes = test_image_bytes(16, 16);
  const ModelInput input = a.preprocess(bytes, "img.png", "hello");
  const Tensor out1 = a.forward(input);
  const Tensor out2 = a.forward(input);
  const Tensor out3 = b.forward(input);
  CHECK(out1 == out2);
  CHECK(out1 == out3);
}

TEST_CASE("every named layer is interceptable") {
  ToyVlmAdapter adapter(toy_spec());
  const auto bytes = test_image_bytes(8, 8);
  const ModelInput input = adapter.preprocess(bytes, "img.png", "q");
  for (const std::string& name : adapter.named_layers()) {
    CAPTURE(name);
    int fired = 0;
    const auto handle = adapter.hooks().add(
        name, [&](const std::string&, const Tensor&) { ++fired; });
    adapter.forward(input);
    adapter.hooks().remove(handle);
    CHECK(fired >= 1);
  }
  CHECK(adapter.hooks().count() == 0);
}

TEST_CASE("shared scale layer fires once per block") {
  AdapterSpec spec = toy_spec();
  spec.options = {{"blocks", "3"}};
  ToyVlmAdapter adapter(spec);
  const auto bytes = test_image_bytes(8, 8);
  const ModelInput input = adapter.preprocess(bytes, "img.png", "q");
  int fired = 0;
  const auto handle = adapter.hooks().add(
      "shared.scale", [&](const std::string&, const Tensor&) { ++fired; });
  adapter.forward(input);
  adapter.hooks().remove(handle);
  CHECK(fired == 3);
}

TEST_CASE("select_probe_layers returns middle and last") {
  CHECK(select_probe_layers(32) == std::set<int>{16, 32});
  CHECK(select_probe_layers(33) == std::set<int>{17, 33});
  CHECK(select_probe_layers(1) == std::set<int>{1});
  CHECK(select_probe_layers(2) == std::set<int>{1, 2});
  CHECK_THROWS(select_probe_layers(0));
  CHECK_THROWS(select_probe_layers(-3));
}

TEST_CASE("probe layer names map to the block norms") {
  AdapterSpec spec = toy_spec();
  spec.options = {{"blocks", "4"}};
  ToyVlmAdapter adapter(spec);
  CHECK(adapter.layer_count() == 4);
  CHECK(adapter.probe_layer_name(2) == "blocks.1.norm");
  CHECK(adapter.probe_layer_name(4) == "blocks.3.norm");
  LinearOracleAdapter oracle(AdapterSpec{"oracle/x", {}, std::nullopt});
  CHECK(oracle.layer_count() == 1);
  CHECK(oracle.probe_layer_name(1) == "linear");
}

TEST_CASE("unknown model options are an error, not ignored") {
  AdapterSpec spec = toy_spec();
  spec.options = {{"torch_dtype", "auto"}, {"mystery_knob", "1"}};
  CHECK_THROWS_WITH_AS(ToyVlmAdapter{spec},
                       doctest::Contains("unknown model option"), std::runtime_error);
  spec.options = {{"torch_dtype", "float16"}};
  CHECK_THROWS(ToyVlmAdapter{spec});
  spec.options = {{"torch_dtype", "auto"}, {"blocks", "2"}};
  CHECK_NOTHROW(ToyVlmAdapter{spec});
}

TEST_CASE("adapter registry resolves builtin architectures") {
  const auto archs = registered_architectures();
  CHECK(std::find(archs.begin(), archs.end(), "toy-vlm") != archs.end());
  CHECK(std::find(archs.begin(), archs.end(), "linear-probe-oracle") != archs.end());
  auto adapter = create_adapter("toy-vlm", toy_spec());
  CHECK(adapter->identity().architecture == "toy-vlm");
  CHECK(adapter->identity().name == "toy/test");
  CHECK_THROWS_WITH_AS(create_adapter("blip9000", toy_spec()),
                       doctest::Contains("unknown architecture"), std::runtime_error);
}

TEST_CASE("oracle featurization and forward are deterministic") {
  LinearOracleAdapter adapter(AdapterSpec{"oracle/x", {}, std::nullopt});
  const auto bytes = test_image_bytes(12, 10);
  const ModelInput input = adapter.preprocess(bytes, "i.png", "prompt");
  CHECK(input.patches.numel() == LinearOracleAdapter::kInDim);
  const Tensor y1 = adapter.forward(input);
  const Tensor y2 = adapter.forward(input);
  CHECK(y1 == y2);
  CHECK(y1.numel() == adapter.out_dim());
}

TEST_CASE("weight cache in LENS_CACHE_DIR reproduces the same weights") {
  const auto cache = std::filesystem::temp_directory_path() / "tlens_cache_test";
  std::filesystem::remove_all(cache);

  AdapterSpec spec = toy_spec();
  ToyVlmAdapter no_cache(spec);
  spec.cache_dir = cache.string();
  ToyVlmAdapter writes_cache(spec);
  CHECK(std::filesystem::exists(cache));
  ToyVlmAdapter reads_cache(spec);

  const auto bytes = test_image_bytes(8, 8);
  const ModelInput input = no_cache.preprocess(bytes, "i.png", "z");
  const Tensor a = no_cache.forward(input);
  const Tensor b = writes_cache.forward(input);
  const Tensor c = reads_cache.forward(input);
  CHECK(a == b);
  CHECK(a == c);
}
