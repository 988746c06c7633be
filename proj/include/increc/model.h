// Copyright 2026 The IncRec Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Parameters, forward passes and hand-written backward passes for the shared
// item tower and the three user towers (basic, incremental, align).
//
// Every tower is the same two-layer network
//
//   y = W2^T relu(W1^T x + b1) + b2
//
// User towers read concat(mean of behavior item embeddings, profile slot
// embeddings); the item tower reads concat(item id embedding, category
// embedding, brand embedding). The item id table is shared by both sides.

#ifndef INCREC_MODEL_H_
#define INCREC_MODEL_H_

#include <array>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "increc/common.h"
#include "increc/event_log.h"

namespace increc {

enum class Tower : uint8_t { kBasic = 0, kIncremental = 1, kAlign = 2 };
constexpr int kNumUserTowers = 3;

std::string_view TowerName(Tower tower);
std::optional<Tower> ParseTower(std::string_view name);

struct ModelConfig {
  int dim = 64;
  int hidden = 128;
  int feature_dim = 16;
  int num_items = 0;
  int num_categories = 1;
  int num_brands = 1;
  std::vector<int> profile_vocab;  // one entry per profile slot

  int user_input_dim() const {
    return dim + feature_dim * static_cast<int>(profile_vocab.size());
  }
  int item_input_dim() const { return dim + 2 * feature_dim; }

  // Throws InputError on zero or negative sizes.
  void Validate() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

ModelConfig MakeModelConfig(int dim, int hidden, int feature_dim,
                            const ItemCatalog& catalog,
                            const UserProfiles& profiles);

struct Mlp {
  Matrix w1;     // in x hidden
  RowVector b1;  // hidden
  Matrix w2;     // hidden x out
  RowVector b2;  // out
};

struct ModelParams {
  ModelConfig config;
  Matrix item_embedding;      // num_items x dim
  Matrix category_embedding;  // num_categories x feature_dim
  Matrix brand_embedding;     // num_brands x feature_dim
  std::vector<Matrix> profile_embedding;  // per slot: vocab x feature_dim
  Mlp item_tower;
  std::array<Mlp, kNumUserTowers> user_towers;

  const Mlp& user_tower(Tower t) const { return user_towers[static_cast<int>(t)]; }
  Mlp& user_tower(Tower t) { return user_towers[static_cast<int>(t)]; }
};

// Embeddings ~ U(-1/sqrt(width), 1/sqrt(width)); weights Glorot-uniform;
// biases zero.
ModelParams InitParams(const ModelConfig& config, uint64_t seed);

// A contiguous parameter (or gradient) block. `row_sparse` marks embedding
// tables whose gradients are tracked per touched row.
struct Block {
  std::string name;
  double* data = nullptr;
  size_t rows = 0;
  size_t cols = 0;
  bool row_sparse = false;

  size_t size() const { return rows * cols; }
  std::span<double> values() const { return {data, size()}; }
};

// Fixed order: item_embedding, category_embedding, brand_embedding,
// profile_embedding/<slot>..., item_tower/{w1,b1,w2,b2},
// user/{basic,incremental,align}/{w1,b1,w2,b2}. Checkpoints use this order.
std::vector<Block> ParamBlocks(ModelParams& params);

// Dense per-row gradient storage that remembers which rows were written.
class RowGrad {
 public:
  void Reset(int rows, int cols);
  // Marks the row as touched and returns a writable view.
  Eigen::Map<RowVector> Row(int row);
  bool touched(int row) const { return mark_[row] != 0; }
  const std::vector<int32_t>& touched_rows() const { return rows_; }
  Matrix& dense() { return dense_; }
  const Matrix& dense() const { return dense_; }
  void Clear();

 private:
  Matrix dense_;
  std::vector<uint8_t> mark_;
  std::vector<int32_t> rows_;
};

struct MlpGrad {
  Matrix w1;
  RowVector b1;
  Matrix w2;
  RowVector b2;
  bool touched = false;

  void Reset(const Mlp& shape_of);
  void Clear();
};

// Mirrors ModelParams. Untouched embedding rows and untouched towers carry
// no entries.
class GradientBuffer {
 public:
  GradientBuffer() = default;
  explicit GradientBuffer(const ModelParams& params);

  void Clear();
  void Add(const GradientBuffer& other);
  // True if every stored value is exactly zero.
  bool IsZero() const;
  bool AllFinite() const;

  // Same order and shapes as ParamBlocks().
  std::vector<Block> Blocks();
  // Whether row `row` of block `block` (as in Blocks()) has an entry.
  bool HasEntry(size_t block, size_t row) const;

  RowGrad item_embedding;
  RowGrad category_embedding;
  RowGrad brand_embedding;
  std::vector<RowGrad> profile_embedding;
  MlpGrad item_tower;
  std::array<MlpGrad, kNumUserTowers> user_towers;

  MlpGrad& user_tower(Tower t) { return user_towers[static_cast<int>(t)]; }
  const MlpGrad& user_tower(Tower t) const { return user_towers[static_cast<int>(t)]; }
  const ModelConfig& config() const { return config_; }

 private:
  ModelConfig config_;
};

// Single-instance forward passes written with plain loops. They serve as the
// reference for the batched tapes below.
Vector UserForward(const ModelParams& params, Tower tower,
                   const RequestContext& ctx);
Vector ItemForward(const ModelParams& params, ItemId item, int32_t category,
                   int32_t brand);
Vector ItemForward(const ModelParams& params, const ItemCatalog& catalog,
                   ItemId item);

// Batched item tower forward that records what backward needs.
class ItemTowerTape {
 public:
  void Forward(const ModelParams& params, const ItemCatalog& catalog,
               std::span<const ItemId> items);
  const Matrix& output() const { return output_; }
  std::span<const ItemId> items() const { return items_; }
  // Accumulates d(loss)/d(params) into `grads` given d(loss)/d(output).
  void Backward(const ModelParams& params, const Matrix& d_output,
                GradientBuffer* grads) const;

 private:
  ModelConfig config_;
  std::vector<ItemId> items_;
  std::vector<int32_t> category_;
  std::vector<int32_t> brand_;
  Matrix input_;
  Matrix hidden_;
  Matrix output_;
};

class UserTowerTape {
 public:
  void Forward(const ModelParams& params, Tower tower,
               std::span<const RequestContext* const> requests);
  const Matrix& output() const { return output_; }
  Tower tower() const { return tower_; }
  void Backward(const ModelParams& params, const Matrix& d_output,
                GradientBuffer* grads) const;

 private:
  ModelConfig config_;
  Tower tower_ = Tower::kBasic;
  std::vector<const RequestContext*> requests_;
  Matrix input_;
  Matrix hidden_;
  Matrix output_;
};

// Binary checkpoint: 8-byte magic "INCRECCK", u32 version, u32 dim, hidden,
// feature_dim, num_items, num_categories, num_brands, num_slots, then one
// u32 vocab size per slot, then every block of ParamBlocks() as raw
// little-endian float64 in order.
void SaveCheckpoint(const ModelParams& params, const std::filesystem::path& path);
// When `expected` is given the stored shapes must match it exactly.
ModelParams LoadCheckpoint(const std::filesystem::path& path,
                           const ModelConfig* expected = nullptr);

}  // namespace increc

#endif  // INCREC_MODEL_H_
