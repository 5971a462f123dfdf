// Copyright 2026 The FLOL Engine Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "flol/degradation.hpp"
#include "flol/tensor.hpp"

namespace flol {

class DatasetError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct DatasetLoad {
  std::vector<ImagePair> pairs;        // sorted by filename
  std::vector<std::string> warnings;  // one line per skipped file
};

/// Pairs PNGs with identical filenames across the two directories. Unmatched,
/// unreadable or size-mismatched files are skipped with a warning; an empty
/// result throws DatasetError.
DatasetLoad load_paired_dataset(const std::filesystem::path& low_dir,
                                const std::filesystem::path& high_dir);

struct DatasetSplit {
  std::vector<ImagePair> train;
  std::vector<ImagePair> validation;
};

/// Seeded shuffle; ceil(fraction * n) validation pairs, at least one training pair kept.
DatasetSplit split_dataset(const std::vector<ImagePair>& pairs, double validation_fraction,
                           std::uint64_t seed);

/// Geometric transform shared by both images of a pair.
struct Augmentation {
  std::int64_t top = 0;
  std::int64_t left = 0;
  bool hflip = false;
  bool vflip = false;
  int rot90 = 0;  // counter-clockwise quarter turns, 0..3
};

Augmentation sample_augmentation(std::int64_t h, std::int64_t w, std::int64_t crop,
                                 std::mt19937_64& rng);

/// Crops (3,H,W) to crop x crop at the offset, then flips and rotates.
/// Images smaller than the crop are reflect-padded first.
Tensor apply_augmentation(const Tensor& image, const Augmentation& aug, std::int64_t crop);

struct Batch {
  Tensor low;   // (N, 3, crop, crop)
  Tensor high;
};

Batch make_batch(const std::vector<ImagePair>& pairs, const std::vector<std::size_t>& indices,
                 std::int64_t crop, std::mt19937_64& rng);

/// Adds a leading batch axis of 1 to a (3,H,W) image.
Tensor as_batch(const Tensor& image);

}  // namespace flol
