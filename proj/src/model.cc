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

#include "increc/model.h"

#include <cmath>
#include <fstream>

#include "increc/binary_io.h"

namespace increc {
namespace {

constexpr char kCheckpointMagic[8] = {'I', 'N', 'C', 'R', 'E', 'C', 'C', 'K'};
constexpr uint32_t kCheckpointVersion = 1;

Matrix UniformMatrix(int rows, int cols, double bound, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  return m;
}

Mlp ZeroMlp(int in, int hidden, int out) {
  return {Matrix::Zero(in, hidden), RowVector::Zero(hidden),
          Matrix::Zero(hidden, out), RowVector::Zero(out)};
}

Mlp GlorotMlp(int in, int hidden, int out, std::mt19937_64& rng) {
  Mlp mlp = ZeroMlp(in, hidden, out);
  mlp.w1 = UniformMatrix(in, hidden, std::sqrt(6.0 / (in + hidden)), rng);
  mlp.w2 = UniformMatrix(hidden, out, std::sqrt(6.0 / (hidden + out)), rng);
  return mlp;
}

ModelParams ZeroParams(const ModelConfig& c) {
  c.Validate();
  ModelParams p;
  p.config = c;
  p.item_embedding = Matrix::Zero(c.num_items, c.dim);
  p.category_embedding = Matrix::Zero(c.num_categories, c.feature_dim);
  p.brand_embedding = Matrix::Zero(c.num_brands, c.feature_dim);
  for (int vocab : c.profile_vocab) {
    p.profile_embedding.push_back(Matrix::Zero(vocab, c.feature_dim));
  }
  p.item_tower = ZeroMlp(c.item_input_dim(), c.hidden, c.dim);
  for (auto& tower : p.user_towers) {
    tower = ZeroMlp(c.user_input_dim(), c.hidden, c.dim);
  }
  return p;
}

void AppendMlpBlocks(std::vector<Block>& blocks, const std::string& prefix,
                     Matrix& w1, RowVector& b1, Matrix& w2, RowVector& b2) {
  blocks.push_back({prefix + "/w1", w1.data(), size_t(w1.rows()), size_t(w1.cols()), false});
  blocks.push_back({prefix + "/b1", b1.data(), 1, size_t(b1.size()), false});
  blocks.push_back({prefix + "/w2", w2.data(), size_t(w2.rows()), size_t(w2.cols()), false});
  blocks.push_back({prefix + "/b2", b2.data(), 1, size_t(b2.size()), false});
}

Block TableBlock(const std::string& name, Matrix& m) {
  return {name, m.data(), size_t(m.rows()), size_t(m.cols()), true};
}

void CheckId(int64_t id, int64_t limit, const char* what) {
  if (id < 0 || id >= limit) {
    throw InputError(std::string(what) + " id " + std::to_string(id) +
                     " outside vocabulary of size " + std::to_string(limit));
  }
}

Vector MlpForwardNaive(const Mlp& mlp, const std::vector<double>& x) {
  const Eigen::Index hidden = mlp.w1.cols();
  const Eigen::Index out = mlp.w2.cols();
  std::vector<double> h(hidden);
  for (Eigen::Index j = 0; j < hidden; ++j) {
    double acc = mlp.b1[j];
    for (size_t i = 0; i < x.size(); ++i) acc += x[i] * mlp.w1(i, j);
    h[j] = acc > 0.0 ? acc : 0.0;
  }
  Vector y(out);
  for (Eigen::Index k = 0; k < out; ++k) {
    double acc = mlp.b2[k];
    for (Eigen::Index j = 0; j < hidden; ++j) acc += h[j] * mlp.w2(j, k);
    y[k] = acc;
  }
  return y;
}

// Shared dense part of both tapes.
void MlpForward(const Mlp& mlp, const Matrix& input, Matrix* hidden, Matrix* output) {
  hidden->noalias() = input * mlp.w1;
  hidden->rowwise() += mlp.b1;
  *hidden = hidden->cwiseMax(0.0);
  output->noalias() = *hidden * mlp.w2;
  output->rowwise() += mlp.b2;
}

Matrix MlpBackward(const Mlp& mlp, const Matrix& input, const Matrix& hidden,
                   const Matrix& d_output, MlpGrad* grad) {
  Matrix d_hidden = d_output * mlp.w2.transpose();
  d_hidden = d_hidden.cwiseProduct((hidden.array() > 0.0).cast<double>().matrix());
  grad->w2.noalias() += hidden.transpose() * d_output;
  grad->b2 += d_output.colwise().sum();
  grad->w1.noalias() += input.transpose() * d_hidden;
  grad->b1 += d_hidden.colwise().sum();
  grad->touched = true;
  Matrix d_input = d_hidden * mlp.w1.transpose();
  return d_input;
}

}  // namespace

std::string_view TowerName(Tower tower) {
  switch (tower) {
    case Tower::kBasic:
      return "basic";
    case Tower::kIncremental:
      return "incremental";
    case Tower::kAlign:
      return "align";
  }
  return "?";
}

std::optional<Tower> ParseTower(std::string_view name) {
  if (name == "basic") return Tower::kBasic;
  if (name == "incremental") return Tower::kIncremental;
  if (name == "align") return Tower::kAlign;
  return std::nullopt;
}

void ModelConfig::Validate() const {
  if (dim <= 0 || hidden <= 0 || feature_dim <= 0) {
    throw InputError("model dimensions must be positive");
  }
  if (num_items <= 0 || num_categories <= 0 || num_brands <= 0) {
    throw InputError("vocabulary sizes must be positive");
  }
  for (int vocab : profile_vocab) {
    if (vocab <= 0) throw InputError("profile vocabulary sizes must be positive");
  }
}

ModelConfig MakeModelConfig(int dim, int hidden, int feature_dim,
                            const ItemCatalog& catalog,
                            const UserProfiles& profiles) {
  ModelConfig c;
  c.dim = dim;
  c.hidden = hidden;
  c.feature_dim = feature_dim;
  c.num_items = catalog.size();
  c.num_categories = catalog.num_categories;
  c.num_brands = catalog.num_brands;
  c.profile_vocab.assign(profiles.slot_vocab_sizes.begin(),
                         profiles.slot_vocab_sizes.end());
  return c;
}

ModelParams InitParams(const ModelConfig& config, uint64_t seed) {
  ModelParams p = ZeroParams(config);
  std::mt19937_64 rng(seed);
  const double id_bound = 1.0 / std::sqrt(static_cast<double>(config.dim));
  const double feat_bound = 1.0 / std::sqrt(static_cast<double>(config.feature_dim));
  p.item_embedding = UniformMatrix(config.num_items, config.dim, id_bound, rng);
  p.category_embedding =
      UniformMatrix(config.num_categories, config.feature_dim, feat_bound, rng);
  p.brand_embedding = UniformMatrix(config.num_brands, config.feature_dim, feat_bound, rng);
  for (size_t s = 0; s < config.profile_vocab.size(); ++s) {
    p.profile_embedding[s] =
        UniformMatrix(config.profile_vocab[s], config.feature_dim, feat_bound, rng);
  }
  p.item_tower = GlorotMlp(config.item_input_dim(), config.hidden, config.dim, rng);
  for (auto& tower : p.user_towers) {
    tower = GlorotMlp(config.user_input_dim(), config.hidden, config.dim, rng);
  }
  return p;
}

std::vector<Block> ParamBlocks(ModelParams& p) {
  std::vector<Block> blocks;
  blocks.push_back(TableBlock("item_embedding", p.item_embedding));
  blocks.push_back(TableBlock("category_embedding", p.category_embedding));
  blocks.push_back(TableBlock("brand_embedding", p.brand_embedding));
  for (size_t s = 0; s < p.profile_embedding.size(); ++s) {
    blocks.push_back(TableBlock("profile_embedding/" + std::to_string(s),
                                p.profile_embedding[s]));
  }
  AppendMlpBlocks(blocks, "item_tower", p.item_tower.w1, p.item_tower.b1,
                  p.item_tower.w2, p.item_tower.b2);
  for (int t = 0; t < kNumUserTowers; ++t) {
    Mlp& m = p.user_towers[t];
    AppendMlpBlocks(blocks, "user/" + std::string(TowerName(static_cast<Tower>(t))),
                    m.w1, m.b1, m.w2, m.b2);
  }
  return blocks;
}

void RowGrad::Reset(int rows, int cols) {
  dense_ = Matrix::Zero(rows, cols);
  mark_.assign(rows, 0);
  rows_.clear();
}

Eigen::Map<RowVector> RowGrad::Row(int row) {
  if (!mark_[row]) {
    mark_[row] = 1;
    rows_.push_back(row);
  }
  return Eigen::Map<RowVector>(dense_.data() + static_cast<Eigen::Index>(row) * dense_.cols(),
                               dense_.cols());
}

void RowGrad::Clear() {
  for (int32_t row : rows_) {
    dense_.row(row).setZero();
    mark_[row] = 0;
  }
  rows_.clear();
}

void MlpGrad::Reset(const Mlp& shape_of) {
  w1 = Matrix::Zero(shape_of.w1.rows(), shape_of.w1.cols());
  b1 = RowVector::Zero(shape_of.b1.size());
  w2 = Matrix::Zero(shape_of.w2.rows(), shape_of.w2.cols());
  b2 = RowVector::Zero(shape_of.b2.size());
  touched = false;
}

void MlpGrad::Clear() {
  if (!touched) return;
  w1.setZero();
  b1.setZero();
  w2.setZero();
  b2.setZero();
  touched = false;
}

GradientBuffer::GradientBuffer(const ModelParams& params) : config_(params.config) {
  item_embedding.Reset(params.item_embedding.rows(), params.item_embedding.cols());
  category_embedding.Reset(params.category_embedding.rows(),
                           params.category_embedding.cols());
  brand_embedding.Reset(params.brand_embedding.rows(), params.brand_embedding.cols());
  profile_embedding.resize(params.profile_embedding.size());
  for (size_t s = 0; s < profile_embedding.size(); ++s) {
    profile_embedding[s].Reset(params.profile_embedding[s].rows(),
                               params.profile_embedding[s].cols());
  }
  item_tower.Reset(params.item_tower);
  for (int t = 0; t < kNumUserTowers; ++t) user_towers[t].Reset(params.user_towers[t]);
}

void GradientBuffer::Clear() {
  item_embedding.Clear();
  category_embedding.Clear();
  brand_embedding.Clear();
  for (auto& g : profile_embedding) g.Clear();
  item_tower.Clear();
  for (auto& g : user_towers) g.Clear();
}

void GradientBuffer::Add(const GradientBuffer& other) {
  if (!(config_ == other.config_)) throw InvariantError("gradient buffer shape mismatch");
  auto add_rows = [](RowGrad& dst, const RowGrad& src) {
    for (int32_t row : src.touched_rows()) dst.Row(row) += src.dense().row(row);
  };
  auto add_mlp = [](MlpGrad& dst, const MlpGrad& src) {
    if (!src.touched) return;
    dst.w1 += src.w1;
    dst.b1 += src.b1;
    dst.w2 += src.w2;
    dst.b2 += src.b2;
    dst.touched = true;
  };
  add_rows(item_embedding, other.item_embedding);
  add_rows(category_embedding, other.category_embedding);
  add_rows(brand_embedding, other.brand_embedding);
  for (size_t s = 0; s < profile_embedding.size(); ++s) {
    add_rows(profile_embedding[s], other.profile_embedding[s]);
  }
  add_mlp(item_tower, other.item_tower);
  for (int t = 0; t < kNumUserTowers; ++t) add_mlp(user_towers[t], other.user_towers[t]);
}

std::vector<Block> GradientBuffer::Blocks() {
  std::vector<Block> blocks;
  blocks.push_back(TableBlock("item_embedding", item_embedding.dense()));
  blocks.push_back(TableBlock("category_embedding", category_embedding.dense()));
  blocks.push_back(TableBlock("brand_embedding", brand_embedding.dense()));
  for (size_t s = 0; s < profile_embedding.size(); ++s) {
    blocks.push_back(TableBlock("profile_embedding/" + std::to_string(s),
                                profile_embedding[s].dense()));
  }
  AppendMlpBlocks(blocks, "item_tower", item_tower.w1, item_tower.b1, item_tower.w2,
                  item_tower.b2);
  for (int t = 0; t < kNumUserTowers; ++t) {
    MlpGrad& m = user_towers[t];
    AppendMlpBlocks(blocks, "user/" + std::string(TowerName(static_cast<Tower>(t))),
                    m.w1, m.b1, m.w2, m.b2);
  }
  return blocks;
}

bool GradientBuffer::HasEntry(size_t block, size_t row) const {
  const size_t slots = profile_embedding.size();
  if (block == 0) return item_embedding.touched(row);
  if (block == 1) return category_embedding.touched(row);
  if (block == 2) return brand_embedding.touched(row);
  if (block < 3 + slots) return profile_embedding[block - 3].touched(row);
  size_t mlp = (block - 3 - slots) / 4;
  if (mlp == 0) return item_tower.touched;
  return user_towers.at(mlp - 1).touched;
}

bool GradientBuffer::IsZero() const {
  auto* self = const_cast<GradientBuffer*>(this);
  for (const Block& b : self->Blocks()) {
    for (double v : b.values()) {
      if (v != 0.0) return false;
    }
  }
  return true;
}

bool GradientBuffer::AllFinite() const {
  auto* self = const_cast<GradientBuffer*>(this);
  for (const Block& b : self->Blocks()) {
    for (double v : b.values()) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

Vector UserForward(const ModelParams& params, Tower tower, const RequestContext& ctx) {
  const ModelConfig& c = params.config;
  if (ctx.profile.size() != c.profile_vocab.size()) {
    throw InputError("profile length does not match model slot count");
  }
  std::vector<double> x(c.user_input_dim(), 0.0);
  if (!ctx.behaviors.empty()) {
    for (const Behavior& b : ctx.behaviors) {
      CheckId(b.item, c.num_items, "behavior item");
      for (int k = 0; k < c.dim; ++k) x[k] += params.item_embedding(b.item, k);
    }
    const double n = static_cast<double>(ctx.behaviors.size());
    for (int k = 0; k < c.dim; ++k) x[k] /= n;
  }
  for (size_t s = 0; s < ctx.profile.size(); ++s) {
    CheckId(ctx.profile[s], c.profile_vocab[s], "profile");
    for (int k = 0; k < c.feature_dim; ++k) {
      x[c.dim + s * c.feature_dim + k] = params.profile_embedding[s](ctx.profile[s], k);
    }
  }
  return MlpForwardNaive(params.user_tower(tower), x);
}

Vector ItemForward(const ModelParams& params, ItemId item, int32_t category,
                   int32_t brand) {
  const ModelConfig& c = params.config;
  CheckId(item, c.num_items, "item");
  CheckId(category, c.num_categories, "category");
  CheckId(brand, c.num_brands, "brand");
  std::vector<double> x(c.item_input_dim());
  for (int k = 0; k < c.dim; ++k) x[k] = params.item_embedding(item, k);
  for (int k = 0; k < c.feature_dim; ++k) {
    x[c.dim + k] = params.category_embedding(category, k);
    x[c.dim + c.feature_dim + k] = params.brand_embedding(brand, k);
  }
  return MlpForwardNaive(params.item_tower, x);
}

Vector ItemForward(const ModelParams& params, const ItemCatalog& catalog, ItemId item) {
  CheckId(item, catalog.size(), "item");
  return ItemForward(params, item, catalog.category[item], catalog.brand[item]);
}

void ItemTowerTape::Forward(const ModelParams& params, const ItemCatalog& catalog,
                            std::span<const ItemId> items) {
  const ModelConfig& c = params.config;
  config_ = c;
  items_.assign(items.begin(), items.end());
  category_.resize(items.size());
  brand_.resize(items.size());
  input_.resize(static_cast<Eigen::Index>(items.size()), c.item_input_dim());
  for (size_t r = 0; r < items.size(); ++r) {
    const ItemId item = items[r];
    CheckId(item, std::min<int64_t>(c.num_items, catalog.size()), "item");
    category_[r] = catalog.category[item];
    brand_[r] = catalog.brand[item];
    CheckId(category_[r], c.num_categories, "category");
    CheckId(brand_[r], c.num_brands, "brand");
    input_.row(r).segment(0, c.dim) = params.item_embedding.row(item);
    input_.row(r).segment(c.dim, c.feature_dim) = params.category_embedding.row(category_[r]);
    input_.row(r).segment(c.dim + c.feature_dim, c.feature_dim) =
        params.brand_embedding.row(brand_[r]);
  }
  MlpForward(params.item_tower, input_, &hidden_, &output_);
}

void ItemTowerTape::Backward(const ModelParams& params, const Matrix& d_output,
                             GradientBuffer* grads) const {
  const ModelConfig& c = params.config;
  if (!(c == config_) || d_output.rows() != output_.rows() ||
      d_output.cols() != output_.cols()) {
    throw InvariantError("item tape does not match parameters or upstream gradient");
  }
  if (items_.empty()) return;
  Matrix d_input = MlpBackward(params.item_tower, input_, hidden_, d_output, &grads->item_tower);
  for (size_t r = 0; r < items_.size(); ++r) {
    grads->item_embedding.Row(items_[r]) += d_input.row(r).segment(0, c.dim);
    grads->category_embedding.Row(category_[r]) += d_input.row(r).segment(c.dim, c.feature_dim);
    grads->brand_embedding.Row(brand_[r]) +=
        d_input.row(r).segment(c.dim + c.feature_dim, c.feature_dim);
  }
}

void UserTowerTape::Forward(const ModelParams& params, Tower tower,
                            std::span<const RequestContext* const> requests) {
  const ModelConfig& c = params.config;
  config_ = c;
  tower_ = tower;
  requests_.assign(requests.begin(), requests.end());
  input_ = Matrix::Zero(static_cast<Eigen::Index>(requests.size()), c.user_input_dim());
  for (size_t r = 0; r < requests.size(); ++r) {
    const RequestContext& ctx = *requests[r];
    if (ctx.profile.size() != c.profile_vocab.size()) {
      throw InputError("profile length does not match model slot count");
    }
    if (!ctx.behaviors.empty()) {
      auto pooled = input_.row(r).segment(0, c.dim);
      for (const Behavior& b : ctx.behaviors) {
        CheckId(b.item, c.num_items, "behavior item");
        pooled += params.item_embedding.row(b.item);
      }
      pooled /= static_cast<double>(ctx.behaviors.size());
    }
    for (size_t s = 0; s < ctx.profile.size(); ++s) {
      CheckId(ctx.profile[s], c.profile_vocab[s], "profile");
      input_.row(r).segment(c.dim + s * c.feature_dim, c.feature_dim) =
          params.profile_embedding[s].row(ctx.profile[s]);
    }
  }
  MlpForward(params.user_tower(tower), input_, &hidden_, &output_);
}

void UserTowerTape::Backward(const ModelParams& params, const Matrix& d_output,
                             GradientBuffer* grads) const {
  const ModelConfig& c = params.config;
  if (!(c == config_) || d_output.rows() != output_.rows() ||
      d_output.cols() != output_.cols()) {
    throw InvariantError("user tape does not match parameters or upstream gradient");
  }
  if (requests_.empty()) return;
  Matrix d_input = MlpBackward(params.user_tower(tower_), input_, hidden_, d_output,
                               &grads->user_tower(tower_));
  for (size_t r = 0; r < requests_.size(); ++r) {
    const RequestContext& ctx = *requests_[r];
    if (!ctx.behaviors.empty()) {
      RowVector share = d_input.row(r).segment(0, c.dim) /
                        static_cast<double>(ctx.behaviors.size());
      for (const Behavior& b : ctx.behaviors) grads->item_embedding.Row(b.item) += share;
    }
    for (size_t s = 0; s < ctx.profile.size(); ++s) {
      grads->profile_embedding[s].Row(ctx.profile[s]) +=
          d_input.row(r).segment(c.dim + s * c.feature_dim, c.feature_dim);
    }
  }
}

void SaveCheckpoint(const ModelParams& params, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write checkpoint " + path.string());
  BinaryWriter w(out);
  const ModelConfig& c = params.config;
  w.PutBytes(std::string_view(kCheckpointMagic, sizeof(kCheckpointMagic)));
  w.Put<uint32_t>(kCheckpointVersion);
  for (int v : {c.dim, c.hidden, c.feature_dim, c.num_items, c.num_categories,
                c.num_brands, static_cast<int>(c.profile_vocab.size())}) {
    w.Put<uint32_t>(static_cast<uint32_t>(v));
  }
  for (int v : c.profile_vocab) w.Put<uint32_t>(static_cast<uint32_t>(v));
  ModelParams& mutable_params = const_cast<ModelParams&>(params);
  for (const Block& b : ParamBlocks(mutable_params)) {
    w.PutArray<double>(std::span<const double>(b.data, b.size()));
  }
  if (!w.ok()) throw InputError("failed writing checkpoint " + path.string());
}

ModelParams LoadCheckpoint(const std::filesystem::path& path, const ModelConfig* expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open checkpoint " + path.string());
  BinaryReader r(in, "checkpoint " + path.string());
  if (r.GetBytes(sizeof(kCheckpointMagic)) !=
      std::string_view(kCheckpointMagic, sizeof(kCheckpointMagic))) {
    throw InputError("checkpoint " + path.string() + ": bad magic");
  }
  const uint32_t version = r.Get<uint32_t>();
  if (version != kCheckpointVersion) {
    throw InputError("checkpoint " + path.string() + ": unsupported version " +
                     std::to_string(version));
  }
  ModelConfig c;
  c.dim = static_cast<int>(r.Get<uint32_t>());
  c.hidden = static_cast<int>(r.Get<uint32_t>());
  c.feature_dim = static_cast<int>(r.Get<uint32_t>());
  c.num_items = static_cast<int>(r.Get<uint32_t>());
  c.num_categories = static_cast<int>(r.Get<uint32_t>());
  c.num_brands = static_cast<int>(r.Get<uint32_t>());
  const uint32_t slots = r.Get<uint32_t>();
  if (slots > 1024) throw InputError("checkpoint " + path.string() + ": corrupt header");
  for (uint32_t s = 0; s < slots; ++s) c.profile_vocab.push_back(static_cast<int>(r.Get<uint32_t>()));
  if (expected != nullptr && !(*expected == c)) {
    throw InputError("checkpoint " + path.string() +
                     ": stored shapes do not match the configured model (dim " +
                     std::to_string(c.dim) + " vs " + std::to_string(expected->dim) + ")");
  }
  ModelParams p = ZeroParams(c);
  for (const Block& b : ParamBlocks(p)) r.GetArray<double>(b.values());
  if (in.peek() != std::char_traits<char>::eof()) {
    throw InputError("checkpoint " + path.string() + ": trailing bytes");
  }
  return p;
}

}  // namespace increc
