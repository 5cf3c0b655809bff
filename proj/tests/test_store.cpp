// Copyright 2026 The TensorLens Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>

#include <nlohmann/json.hpp>

#include "tlens/rng.hpp"
#include "tlens/store.hpp"

using namespace tlens;

namespace {

std::filesystem::path temp_db(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "tlens_store_tests";
  std::filesystem::create_directories(dir);
  const auto path = dir / name;
  std::filesystem::remove(path);
  return path;
}

Tensor random_tensor(Rng& rng, int max_rank = 4, std::int64_t max_elems = 4096) {
  const int rank = rng.uniform_int(1, max_rank);
  std::vector<std::int64_t> dims(rank, 1);
  std::int64_t numel = 1;
  for (int i = 0; i < rank; ++i) {
    const int dim = rng.uniform_int(1, 8);
    if (numel * dim > max_elems) break;
    dims[i] = dim;
    numel *= dim;
  }
  std::vector<float> data(static_cast<std::size_t>(Tensor::numel_of(dims)));
  for (float& v : data) v = static_cast<float>(rng.uniform(-100.0, 100.0));
  return Tensor(dims, std::move(data));
}

ActivationRecord record_for(const Tensor& t, const std::string& layer = "head",
                            const std::string& image = "img.png") {
  return make_record("toy/x", "toy-vlm", image, "p", std::nullopt, layer, t);
}

}  // namespace

TEST_CASE("codec: encode/decode examples and shapes") {
  const Tensor t({2, 2}, {1.0f, 2.0f, 3.0f, 4.0f});
  auto [dims, blob] = encode_tensor(t);
  CHECK(dims == std::vector<std::int64_t>{2, 2});
  CHECK(blob.size() == 16);
  CHECK(decode_tensor(dims, blob) == t);

  // empty tensor
  const Tensor empty({0}, {});
  auto [edims, eblob] = encode_tensor(empty);
  CHECK(eblob.empty());
  CHECK(decode_tensor(edims, eblob) == empty);
}

TEST_CASE("codec round-trip is bitwise lossless (property)") {
  Rng rng(101);
  for (int i = 0; i < 300; ++i) {
    const Tensor t = random_tensor(rng);
    auto [dims, blob] = encode_tensor(t);
    const Tensor back = decode_tensor(dims, blob);
    REQUIRE(back.dims == t.dims);
    REQUIRE(back.data.size() == t.data.size());
    // bitwise, not just value-equal
    CHECK(std::memcmp(back.data.data(), t.data.data(), 4 * t.data.size()) == 0);
  }
}

TEST_CASE("codec rejects non-finite values unless allowed") {
  const Tensor bad({2}, {1.0f, std::numeric_limits<float>::quiet_NaN()});
  CHECK_THROWS_AS(encode_tensor(bad), StoreError);
  CHECK_NOTHROW(encode_tensor(bad, /*allow_nonfinite=*/true));
  const Tensor inf({1}, {std::numeric_limits<float>::infinity()});
  CHECK_THROWS_AS(encode_tensor(inf), StoreError);
}

TEST_CASE("insert validates the dim/blob invariant") {
  ActivationStore store(temp_db("invariant.db"));
  const Tensor t({2, 3}, std::vector<float>(6, 1.0f));
  ActivationRecord ok = record_for(t);
  CHECK(ok.tensor.size() == 24);  // 2*3*4 bytes
  CHECK_NOTHROW(store.insert(ok));

  ActivationRecord bad = ok;
  bad.tensor.resize(20);
  CHECK_THROWS_AS(store.insert(bad), StoreError);
}

TEST_CASE("row ids increase monotonically and store is durable") {
  const auto path = temp_db("mono.db");
  {
    ActivationStore store(path);
    std::int64_t prev = 0;
    Rng rng(5);
    for (int i = 0; i < 150; ++i) {  // spans multiple 64-record transactions
      const std::int64_t id = store.insert(record_for(random_tensor(rng)));
      CHECK(id > prev);
      prev = id;
    }
    store.close();
  }
  ActivationStore reopened(path);
  CHECK(reopened.count() == 150);
}

TEST_CASE("query by layer returns exactly the matching partition") {
  ActivationStore store(temp_db("partition.db"));
  Rng rng(6);
  for (int i = 0; i < 3; ++i) {
    store.insert(record_for(random_tensor(rng), "head", "i" + std::to_string(i)));
    store.insert(record_for(random_tensor(rng), "blocks.0.norm", "i" + std::to_string(i)));
  }
  QueryFilter f;
  f.layer = "head";
  const auto rows = store.query(f);
  CHECK(rows.size() == 3);
  for (const auto& r : rows) CHECK(r.record.layer == "head");
  CHECK(store.query().size() == 6);  // no constraints -> all records
}

TEST_CASE("query equals brute-force filtering for random filters") {
  ActivationStore store(temp_db("brute.db"));
  Rng rng(7);
  const std::vector<std::string> names = {"m1", "m2"};
  const std::vector<std::string> archs = {"a1", "a2"};
  const std::vector<std::string> layers = {"l1", "l2", "l3"};
  const std::vector<std::string> prompts = {"p1", "p2"};
  std::vector<ActivationRecord> all;
  for (int i = 0; i < 120; ++i) {
    ActivationRecord r = record_for(random_tensor(rng));
    r.name = names[rng.uniform_int(0, 1)];
    r.architecture = archs[rng.uniform_int(0, 1)];
    r.layer = layers[rng.uniform_int(0, 2)];
    r.prompt = prompts[rng.uniform_int(0, 1)];
    r.image_path = "img" + std::to_string(rng.uniform_int(0, 9)) + ".png";
    if (rng.uniform() < 0.5) r.label = "lab" + std::to_string(rng.uniform_int(0, 2));
    store.insert(r);
    all.push_back(r);
  }
  store.flush();

  for (int trial = 0; trial < 200; ++trial) {
    QueryFilter f;
    if (rng.uniform() < 0.4) f.name = names[rng.uniform_int(0, 1)];
    if (rng.uniform() < 0.4) f.architecture = archs[rng.uniform_int(0, 1)];
    if (rng.uniform() < 0.4) f.layer = layers[rng.uniform_int(0, 2)];
    if (rng.uniform() < 0.3) f.prompt = prompts[rng.uniform_int(0, 1)];
    if (rng.uniform() < 0.3) f.image_path = "img" + std::to_string(rng.uniform_int(0, 9)) + ".png";
    if (rng.uniform() < 0.3) f.label = "lab" + std::to_string(rng.uniform_int(0, 2));

    auto matches = [&](const ActivationRecord& r) {
      if (f.name && r.name != *f.name) return false;
      if (f.architecture && r.architecture != *f.architecture) return false;
      if (f.layer && r.layer != *f.layer) return false;
      if (f.prompt && r.prompt != *f.prompt) return false;
      if (f.image_path && r.image_path != *f.image_path) return false;
      if (f.label && (!r.label || *r.label != *f.label)) return false;
      return true;
    };
    std::vector<std::size_t> expected;
    for (std::size_t i = 0; i < all.size(); ++i) {
      if (matches(all[i])) expected.push_back(i);
    }
    const auto got = store.query(f);
    REQUIRE(got.size() == expected.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      // stable insertion order lines the results up with the brute force scan
      CHECK(got[i].record.image_path == all[expected[i]].image_path);
      CHECK(got[i].record.layer == all[expected[i]].layer);
      CHECK(got[i].record.tensor == all[expected[i]].tensor);
    }
  }
}

TEST_CASE("unknown filter keys are rejected") {
  ActivationStore store(temp_db("keys.db"));
  CHECK_THROWS_WITH_AS(store.query({{"firing_index", "0"}}),
                       doctest::Contains("unknown filter key"), StoreError);
  CHECK_NOTHROW(store.query({{"layer", "head"}}));
}

TEST_CASE("insert/query round-trip decodes to the original tensor") {
  ActivationStore store(temp_db("roundtrip.db"));
  Rng rng(8);
  const Tensor t = random_tensor(rng);
  store.insert(record_for(t, "head", "rt.png"));
  QueryFilter f;
  f.image_path = "rt.png";
  const auto rows = store.query(f);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].decoded() == t);
}

TEST_CASE("schema columns are the eight provenance columns plus dtype") {
  ActivationStore store(temp_db("schema.db"));
  const std::vector<std::string> expected = {"name",   "architecture", "image_path",
                                             "prompt", "label",        "layer",
                                             "tensor_dim", "tensor",   "dtype"};
  CHECK(store.column_names() == expected);
}

TEST_CASE("NULL labels round-trip as absent") {
  ActivationStore store(temp_db("labels.db"));
  Rng rng(9);
  ActivationRecord with = record_for(random_tensor(rng), "head", "w.png");
  with.label = "yes";
  ActivationRecord without = record_for(random_tensor(rng), "head", "wo.png");
  store.insert(with);
  store.insert(without);
  const auto rows = store.query();
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].record.label.has_value());
  CHECK(!rows[1].record.label.has_value());
}

TEST_CASE("tensor_dim is stored as readable JSON text") {
  const auto path = temp_db("dims.db");
  ActivationStore store(path);
  store.insert(record_for(Tensor({1, 3, 2}, std::vector<float>(6, 0.5f))));
  store.flush();
  // independent read through a fresh connection: dims text parses as JSON
  const auto rows = store.query();
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].record.tensor_dim == std::vector<std::int64_t>{1, 3, 2});
  CHECK(dims_to_string(rows[0].record.tensor_dim) == "[1, 3, 2]");
}

TEST_CASE("export writes blobs and a manifest") {
  const auto path = temp_db("export.db");
  const auto out = std::filesystem::temp_directory_path() / "tlens_store_tests" / "export";
  std::filesystem::remove_all(out);
  {
    ActivationStore store(path);
    Rng rng(10);
    ActivationRecord r = record_for(random_tensor(rng), "head", "e.png");
    r.label = "blue";
    store.insert(r);
    store.close();
  }
  export_store(path, out);
  CHECK(std::filesystem::exists(out / "manifest.json"));
  std::ifstream in(out / "manifest.json");
  nlohmann::json manifest = nlohmann::json::parse(in);
  REQUIRE(manifest.is_array());
  REQUIRE(manifest.size() == 1);
  CHECK(manifest[0]["layer"] == "head");
  CHECK(manifest[0]["label"] == "blue");
  const std::string blob = manifest[0]["blob"];
  CHECK(std::filesystem::exists(out / blob));
  CHECK(std::filesystem::file_size(out / blob) ==
        manifest[0]["byte_length"].get<std::size_t>());
}
