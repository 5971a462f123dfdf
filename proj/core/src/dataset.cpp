// Copyright 2026 The FLOL Engine Authors
// SPDX-License-Identifier: Apache-2.0

#include "flol/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "flol/image_io.hpp"
#include "flol/ops.hpp"

namespace flol {

namespace fs = std::filesystem;

namespace {

std::map<std::string, fs::path> png_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DatasetError("not a directory: " + dir.string());
  std::map<std::string, fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    auto ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".png") out.emplace(entry.path().filename().string(), entry.path());
  }
  return out;
}

}  // namespace

DatasetLoad load_paired_dataset(const fs::path& low_dir, const fs::path& high_dir) {
  const auto low = png_files(low_dir);
  const auto high = png_files(high_dir);
  DatasetLoad result;
  for (const auto& [name, path] : low) {
    const auto it = high.find(name);
    if (it == high.end()) {
      result.warnings.push_back(name + ": no counterpart in " + high_dir.string());
      continue;
    }
    try {
      Tensor lo = read_png(path);
      Tensor hi = read_png(it->second);
      if (lo.shape() != hi.shape()) {
        result.warnings.push_back(name + ": size mismatch " + shape_str(lo.shape()) + " vs " +
                                  shape_str(hi.shape()));
        continue;
      }
      result.pairs.push_back(ImagePair{std::move(lo), std::move(hi), PairSource::kDirectory,
                                       fs::path(name).stem().string()});
    } catch (const ImageIoError& e) {
      result.warnings.push_back(name + ": " + e.what());
    }
  }
  for (const auto& [name, path] : high) {
    if (!low.contains(name)) {
      result.warnings.push_back(name + ": no counterpart in " + low_dir.string());
    }
  }
  if (result.pairs.empty()) {
    throw DatasetError("no usable image pairs in " + low_dir.string() + " and " +
                       high_dir.string());
  }
  return result;
}

DatasetSplit split_dataset(const std::vector<ImagePair>& pairs, double validation_fraction,
                           std::uint64_t seed) {
  if (pairs.empty()) throw DatasetError("split_dataset: empty dataset");
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
    throw ArgumentError("split_dataset: validation fraction must be in [0, 1)");
  }
  std::vector<std::size_t> order(pairs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  auto n_val = static_cast<std::size_t>(std::ceil(validation_fraction * static_cast<double>(pairs.size())));
  n_val = std::min(n_val, pairs.size() - 1);
  std::set<std::size_t> val(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
  DatasetSplit split;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    (val.contains(i) ? split.validation : split.train).push_back(pairs[i]);
  }
  return split;
}

Augmentation sample_augmentation(std::int64_t h, std::int64_t w, std::int64_t crop,
                                 std::mt19937_64& rng) {
  Augmentation a;
  a.top = std::uniform_int_distribution<std::int64_t>(0, std::max<std::int64_t>(h - crop, 0))(rng);
  a.left = std::uniform_int_distribution<std::int64_t>(0, std::max<std::int64_t>(w - crop, 0))(rng);
  const auto bits = rng();
  a.hflip = (bits & 1U) != 0;
  a.vflip = (bits & 2U) != 0;
  a.rot90 = static_cast<int>((bits >> 2) & 3U);
  return a;
}

Tensor apply_augmentation(const Tensor& image, const Augmentation& aug, std::int64_t crop) {
  if (image.rank() != 3) throw DimensionError("apply_augmentation: expected (C,H,W)");
  if (crop < 1) throw ArgumentError("apply_augmentation: crop must be >= 1");
  const auto c = image.dim(0);
  Tensor src = image.reshaped({1, c, image.dim(1), image.dim(2)});
  const auto ph = std::max<std::int64_t>(crop - src.dim(2), 0);
  const auto pw = std::max<std::int64_t>(crop - src.dim(3), 0);
  if (ph > 0 || pw > 0) src = reflect_pad(src, 0, ph, 0, pw);
  const auto h = src.dim(2);
  const auto w = src.dim(3);
  if (aug.top < 0 || aug.left < 0 || aug.top + crop > h || aug.left + crop > w) {
    throw ArgumentError("apply_augmentation: crop window outside the image");
  }
  const auto s = src.data();
  Tensor out(Shape{c, crop, crop});
  auto d = out.data();
  for (std::int64_t ch = 0; ch < c; ++ch) {
    for (std::int64_t y = 0; y < crop; ++y) {
      for (std::int64_t x = 0; x < crop; ++x) {
        // Destination (y, x) pulls from the source after undoing rotation then flips.
        std::int64_t sy = y;
        std::int64_t sx = x;
        for (int r = 0; r < aug.rot90; ++r) {
          const auto t = sy;
          sy = sx;
          sx = crop - 1 - t;
        }
        if (aug.vflip) sy = crop - 1 - sy;
        if (aug.hflip) sx = crop - 1 - sx;
        d[(ch * crop + y) * crop + x] = s[(ch * h + aug.top + sy) * w + aug.left + sx];
      }
    }
  }
  return out;
}

Batch make_batch(const std::vector<ImagePair>& pairs, const std::vector<std::size_t>& indices,
                 std::int64_t crop, std::mt19937_64& rng) {
  if (indices.empty()) throw ArgumentError("make_batch: no indices");
  const auto n = static_cast<std::int64_t>(indices.size());
  Batch b{Tensor(Shape{n, 3, crop, crop}), Tensor(Shape{n, 3, crop, crop})};
  const auto plane = 3 * crop * crop;
  for (std::int64_t i = 0; i < n; ++i) {
    const auto& pair = pairs.at(indices[static_cast<std::size_t>(i)]);
    const auto aug = sample_augmentation(pair.low.dim(1), pair.low.dim(2), crop, rng);
    const Tensor lo = apply_augmentation(pair.low, aug, crop);
    const Tensor hi = apply_augmentation(pair.high, aug, crop);
    std::copy(lo.data().begin(), lo.data().end(), b.low.data().begin() + i * plane);
    std::copy(hi.data().begin(), hi.data().end(), b.high.data().begin() + i * plane);
  }
  return b;
}

Tensor as_batch(const Tensor& image) {
  if (image.rank() != 3) throw DimensionError("as_batch: expected (C,H,W)");
  return image.reshaped({1, image.dim(0), image.dim(1), image.dim(2)});
}

}  // namespace flol
