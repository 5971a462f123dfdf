// Copyright 2026 The FLOL Engine Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <set>

#include "flol/dataset.hpp"
#include "flol/degradation.hpp"
#include "flol/image_io.hpp"
#include "flol/loss.hpp"
#include "flol/metrics.hpp"
#include "flol/model.hpp"
#include "flol/ops.hpp"
#include "flol/optim.hpp"
#include "flol/train.hpp"
#include "test_util.hpp"

namespace flol {
namespace {

using test::max_abs_diff;
using test::uniform;

Tensor image(std::int64_t h, std::int64_t w, std::uint64_t seed) {
  return uniform({3, h, w}, seed, 0.0F, 1.0F);
}

bool bit_equal(const Tensor& a, const Tensor& b) {
  return a.shape() == b.shape() && std::equal(a.data().begin(), a.data().end(), b.data().begin());
}

// ---- degradation -----------------------------------------------------------

TEST(Degradation, IdentityParametersReturnCleanImage) {
  const Tensor clean = image(9, 7, 1);
  const DegradationParams p{1.0, 1.0, 0.0, 0.0, 3};
  const ImagePair pair = synthesize_low_light(clean, p);
  EXPECT_TRUE(bit_equal(pair.low, clean));
  EXPECT_TRUE(bit_equal(pair.high, clean));
  EXPECT_EQ(pair.source, PairSource::kSynthetic);
}

TEST(Degradation, GainAndGammaDarken) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Tensor clean = uniform({3, 8, 8}, seed, 0.01F, 0.99F);
    const ImagePair pair = synthesize_low_light(clean, {0.25, 2.0, 0.0, 0.0, seed});
    const auto mean = [](const Tensor& t) {
      return std::accumulate(t.data().begin(), t.data().end(), 0.0) / static_cast<double>(t.numel());
    };
    EXPECT_LT(mean(pair.low), mean(clean));
    for (std::size_t i = 0; i < clean.data().size(); ++i) {
      const double c = clean.data()[i];
      EXPECT_NEAR(pair.low.data()[i], 0.25 * c * c, 1e-7);
    }
  }
}

TEST(Degradation, SeededNoise) {
  const Tensor clean = image(16, 16, 2);
  const DegradationParams p{0.3, 1.5, 0.02, 0.02, 9};
  EXPECT_TRUE(bit_equal(synthesize_low_light(clean, p).low, synthesize_low_light(clean, p).low));
  DegradationParams q = p;
  q.seed = 10;
  EXPECT_FALSE(bit_equal(synthesize_low_light(clean, p).low, synthesize_low_light(clean, q).low));
  // Without noise the seed is irrelevant.
  DegradationParams a{0.3, 1.5, 0.0, 0.0, 1};
  DegradationParams b{0.3, 1.5, 0.0, 0.0, 2};
  EXPECT_TRUE(bit_equal(synthesize_low_light(clean, a).low, synthesize_low_light(clean, b).low));
}

TEST(Degradation, NoiseVarianceFollowsReadShotModel) {
  const Tensor clean = Tensor::full({3, 128, 128}, 0.5F);
  const DegradationParams p{0.8, 1.0, 0.03, 0.01, 4};
  const ImagePair pair = synthesize_low_light(clean, p);
  double sum = 0.0, sq = 0.0;
  for (float v : pair.low.data()) {
    sum += v;
    sq += static_cast<double>(v) * v;
  }
  const double n = static_cast<double>(pair.low.numel());
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  const double signal = 0.8 * 0.5;
  EXPECT_NEAR(mean, signal, 0.002);
  EXPECT_NEAR(var, 0.03 * 0.03 + 0.01 * signal, 0.05 * (0.03 * 0.03 + 0.01 * signal));
}

TEST(Degradation, ClipsAndValidates) {
  const ImagePair pair = synthesize_low_light(image(32, 32, 3), {1.0, 1.0, 0.5, 0.5, 1});
  for (float v : pair.low.data()) {
    ASSERT_GE(v, 0.0F);
    ASSERT_LE(v, 1.0F);
  }
  const Tensor clean = image(4, 4, 4);
  EXPECT_THROW(synthesize_low_light(clean, {0.0, 1.0, 0, 0, 0}), ArgumentError);
  EXPECT_THROW(synthesize_low_light(clean, {1.5, 1.0, 0, 0, 0}), ArgumentError);
  EXPECT_THROW(synthesize_low_light(clean, {0.5, 0.9, 0, 0, 0}), ArgumentError);
  EXPECT_THROW(synthesize_low_light(clean, {0.5, 1.0, -0.1, 0, 0}), ArgumentError);
  EXPECT_THROW(synthesize_low_light(clean, {0.5, 1.0, 0, -0.1, 0}), ArgumentError);
  EXPECT_THROW(synthesize_low_light(Tensor::full({3, 2, 2}, 1.5F), {}), ArgumentError);
}

TEST(Degradation, SyntheticSetIsSeeded) {
  SyntheticSetOptions o;
  o.count = 4;
  o.min_size = 40;
  o.max_size = 48;
  const auto a = synthetic_pairs(o);
  const auto b = synthetic_pairs(o);
  ASSERT_EQ(a.size(), 4U);
  std::set<std::string> ids;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_TRUE(bit_equal(a[i].low, b[i].low));
    EXPECT_TRUE(bit_equal(a[i].high, b[i].high));
    EXPECT_EQ(a[i].low.shape(), a[i].high.shape());
    EXPECT_GE(a[i].high.dim(1), 40);
    EXPECT_LE(a[i].high.dim(1), 48);
    ids.insert(a[i].id);
  }
  EXPECT_EQ(ids.size(), 4U);
}

// ---- dataset ---------------------------------------------------------------

class DatasetDirs : public ::testing::Test {
protected:
  test::TempDir root_{"dataset"};
  std::filesystem::path low_ = root_.path() / "low";
  std::filesystem::path high_ = root_.path() / "high";
  void SetUp() override {
    std::filesystem::create_directories(low_);
    std::filesystem::create_directories(high_);
  }
  void put(const std::filesystem::path& dir, const std::string& name, std::int64_t h, std::int64_t w,
           std::uint64_t seed) const {
    write_png(dir / name, image(h, w, seed));
  }
};

TEST_F(DatasetDirs, PairsByFilenameInOrder) {
  for (const char* name : {"c.png", "a.png", "b.png"}) {
    put(low_, name, 6, 5, 1);
    put(high_, name, 6, 5, 2);
  }
  const auto load = load_paired_dataset(low_, high_);
  ASSERT_EQ(load.pairs.size(), 3U);
  EXPECT_EQ(load.pairs[0].id, "a");
  EXPECT_EQ(load.pairs[1].id, "b");
  EXPECT_EQ(load.pairs[2].id, "c");
  EXPECT_TRUE(load.warnings.empty());
  EXPECT_EQ(load.pairs[0].source, PairSource::kDirectory);
  // 8-bit quantization is the only loss.
  EXPECT_LT(max_abs_diff(load.pairs[0].low, image(6, 5, 1)), 0.5 / 255 + 1e-6);
}

TEST_F(DatasetDirs, SkipsUnpairedMismatchedAndUnreadable) {
  put(low_, "ok.png", 6, 6, 1);
  put(high_, "ok.png", 6, 6, 2);
  put(low_, "lonely.png", 6, 6, 3);
  put(low_, "size.png", 6, 6, 4);
  put(high_, "size.png", 7, 6, 5);
  std::ofstream(low_ / "junk.png") << "not a png";
  put(high_, "junk.png", 6, 6, 6);
  const auto load = load_paired_dataset(low_, high_);
  ASSERT_EQ(load.pairs.size(), 1U);
  EXPECT_EQ(load.pairs[0].id, "ok");
  ASSERT_EQ(load.warnings.size(), 3U);
  const auto joined = load.warnings[0] + load.warnings[1] + load.warnings[2];
  EXPECT_NE(joined.find("lonely.png"), std::string::npos);
  EXPECT_NE(joined.find("size mismatch"), std::string::npos);
  EXPECT_NE(joined.find("junk.png"), std::string::npos);
}

TEST_F(DatasetDirs, EmptyIntersectionIsAnError) {
  put(low_, "a.png", 4, 4, 1);
  put(high_, "b.png", 4, 4, 2);
  EXPECT_THROW(load_paired_dataset(low_, high_), DatasetError);
  EXPECT_THROW(load_paired_dataset(root_.path() / "nope", high_), DatasetError);
}

TEST(Split, SeededDisjointCover) {
  std::vector<ImagePair> pairs;
  for (int i = 0; i < 64; ++i) pairs.push_back({Tensor({3, 1, 1}), Tensor({3, 1, 1}), PairSource::kSynthetic, std::to_string(i)});
  const auto a = split_dataset(pairs, 0.1, 5);
  const auto b = split_dataset(pairs, 0.1, 5);
  EXPECT_EQ(a.validation.size(), 7U);
  EXPECT_EQ(a.train.size(), 57U);
  std::set<std::string> seen;
  for (const auto* part : {&a.train, &a.validation})
    for (const auto& p : *part) EXPECT_TRUE(seen.insert(p.id).second);
  EXPECT_EQ(seen.size(), 64U);
  for (std::size_t i = 0; i < a.validation.size(); ++i) EXPECT_EQ(a.validation[i].id, b.validation[i].id);
  const auto c = split_dataset(pairs, 0.1, 6);
  bool differs = false;
  for (std::size_t i = 0; i < c.validation.size(); ++i) differs |= c.validation[i].id != a.validation[i].id;
  EXPECT_TRUE(differs);
}

TEST(Augmentation, QuarterTurnAndFlipConventions) {
  // [[a, b], [c, d]]
  const Tensor t({1, 2, 2}, {1, 2, 3, 4});
  const auto apply = [&](Augmentation a) { return apply_augmentation(t, a, 2); };
  Augmentation rot;
  rot.rot90 = 1;
  EXPECT_TRUE(bit_equal(apply(rot), Tensor({1, 2, 2}, {2, 4, 1, 3})));
  Augmentation h;
  h.hflip = true;
  EXPECT_TRUE(bit_equal(apply(h), Tensor({1, 2, 2}, {2, 1, 4, 3})));
  Augmentation v;
  v.vflip = true;
  EXPECT_TRUE(bit_equal(apply(v), Tensor({1, 2, 2}, {3, 4, 1, 2})));
}

TEST(Augmentation, CropsInsideAndPadsSmallImages) {
  const Tensor img = image(10, 12, 3);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 200; ++i) {
    const auto a = sample_augmentation(10, 12, 6, rng);
    EXPECT_GE(a.top, 0);
    EXPECT_LE(a.top, 4);
    EXPECT_LE(a.left, 6);
    const Tensor out = apply_augmentation(img, a, 6);
    EXPECT_EQ(out.shape(), (Shape{3, 6, 6}));
  }
  Augmentation plain;
  plain.top = 2;
  plain.left = 3;
  const Tensor crop = apply_augmentation(img, plain, 4);
  EXPECT_EQ(crop.data()[1 * 16], img.data()[(1 * 10 + 2) * 12 + 3]);
  EXPECT_EQ(apply_augmentation(image(3, 5, 4), Augmentation{}, 8).shape(), (Shape{3, 8, 8}));
  plain.top = 7;
  EXPECT_THROW(apply_augmentation(img, plain, 4), ArgumentError);
}

TEST(Augmentation, SameTransformForLowAndHigh) {
  // high = 1 - low commutes with any rearrangement, so it must survive batching.
  std::vector<ImagePair> pairs;
  for (std::uint64_t s = 0; s < 4; ++s) {
    const Tensor low = image(20, 17, s);
    pairs.push_back({low, add_scalar(scale(low, -1.0F), 1.0F), PairSource::kSynthetic, {}});
  }
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    const Batch b = make_batch(pairs, {0, 1, 2, 3, 1}, 8, rng);
    ASSERT_EQ(b.low.shape(), (Shape{5, 3, 8, 8}));
    EXPECT_LT(max_abs_diff(b.high, add_scalar(scale(b.low, -1.0F), 1.0F)), 1e-7);
  }
}

// ---- loss ------------------------------------------------------------------

// Sobel magnitude under reflect padding, evaluated directly in double.
double sobel_at(const Tensor& x, std::int64_t c, std::int64_t i, std::int64_t j, double eps) {
  const auto h = x.dim(2), w = x.dim(3);
  const auto px = [&](std::int64_t r, std::int64_t s) {
    r = r < 0 ? -r : (r >= h ? 2 * (h - 1) - r : r);
    s = s < 0 ? -s : (s >= w ? 2 * (w - 1) - s : s);
    return static_cast<double>(x.at(0, c, r, s));
  };
  const double gx = (px(i - 1, j + 1) + 2 * px(i, j + 1) + px(i + 1, j + 1)) -
                    (px(i - 1, j - 1) + 2 * px(i, j - 1) + px(i + 1, j - 1));
  const double gy = (px(i + 1, j - 1) + 2 * px(i + 1, j) + px(i + 1, j + 1)) -
                    (px(i - 1, j - 1) + 2 * px(i - 1, j) + px(i - 1, j + 1));
  return std::sqrt(gx * gx + gy * gy + eps);
}

TEST(Loss, PerfectReconstructionIsZero) {
  const Tensor gt = uniform({2, 3, 8, 8}, 1, 0.0F, 1.0F);
  const auto b = total_loss(gt, gt, gt, 0.1);
  EXPECT_EQ(b.total.item(), 0.0F);
}

TEST(Loss, UniformOffsetIsAnalytic) {
  const Tensor gt = uniform({1, 3, 8, 8}, 2, 0.0F, 0.8F);
  const auto b = total_loss(add_scalar(gt, 0.1F), gt, gt, 0.0);
  EXPECT_NEAR(b.total.item(), 0.1, 1e-6);
  EXPECT_NEAR(b.l1_final.item(), 0.1, 1e-6);
  EXPECT_EQ(b.l1_intermediate.item(), 0.0F);
  // A constant shift leaves every gradient magnitude unchanged.
  EXPECT_NEAR(b.perceptual.item(), 0.0, 1e-6);
}

TEST(Loss, MatchesDirectRecomputation) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Tensor x_hat = uniform({1, 3, 7, 9}, seed, 0.0F, 1.0F);
    const Tensor x_lol = uniform({1, 3, 7, 9}, seed + 100, 0.0F, 1.0F);
    const Tensor gt = uniform({1, 3, 7, 9}, seed + 200, 0.0F, 1.0F);
    double l1a = 0.0, l1b = 0.0, per = 0.0;
    for (std::size_t i = 0; i < gt.data().size(); ++i) {
      l1a += std::abs(static_cast<double>(x_hat.data()[i]) - gt.data()[i]);
      l1b += std::abs(static_cast<double>(x_lol.data()[i]) - gt.data()[i]);
    }
    for (std::int64_t c = 0; c < 3; ++c)
      for (std::int64_t i = 0; i < 7; ++i)
        for (std::int64_t j = 0; j < 9; ++j)
          per += std::abs(sobel_at(x_hat, c, i, j, 1e-6) - sobel_at(gt, c, i, j, 1e-6));
    const double n = static_cast<double>(gt.numel());
    const double expected = l1a / n + l1b / n + 0.1 * per / n;
    const auto b = total_loss(x_hat, x_lol, gt, 0.1);
    EXPECT_NEAR(b.l1_final.item(), l1a / n, 1e-6);
    EXPECT_NEAR(b.l1_intermediate.item(), l1b / n, 1e-6);
    EXPECT_NEAR(b.perceptual.item(), per / n, 1e-6);
    EXPECT_NEAR(b.total.item(), expected, 1e-6);
    EXPECT_GE(b.perceptual.item(), 0.0F);
  }
}

TEST(Loss, Validation) {
  const Tensor a({1, 3, 4, 4});
  EXPECT_THROW(total_loss(a, a, Tensor({1, 3, 4, 5}), 0.1), DimensionError);
  EXPECT_THROW(total_loss(a, a, a, -1.0), ArgumentError);
}

// ---- optimizer -------------------------------------------------------------

TEST(CosineLr, EndpointsAndMidpoint) {
  OptimizerConfig cfg;
  cfg.total_steps = 1000;
  EXPECT_DOUBLE_EQ(cosine_lr(0, cfg), 4e-4);
  EXPECT_DOUBLE_EQ(cosine_lr(1000, cfg), 1e-6);
  EXPECT_NEAR(cosine_lr(500, cfg), 2.005e-4, 1e-15);
  EXPECT_DOUBLE_EQ(cosine_lr(5000, cfg), 1e-6);
  for (std::int64_t t = 1; t <= 1000; ++t) EXPECT_LE(cosine_lr(t, cfg), cosine_lr(t - 1, cfg));
}

TEST(Adam, ThreeStepHandTrace) {
  // Computed by hand for lr 0.1, betas (0.9, 0.999), eps 1e-8, grads 0.5, -0.3, 0.2.
  OptimizerConfig cfg;
  AdamMoments m;
  double p = 1.0;
  p = adam_update(p, 0.5, m, 1, 0.1, cfg);
  EXPECT_NEAR(p, 0.900000002, 1e-10);
  p = adam_update(p, -0.3, m, 2, 0.1, cfg);
  EXPECT_NEAR(p, 0.8808501989417752, 1e-10);
  p = adam_update(p, 0.2, m, 3, 0.1, cfg);
  EXPECT_NEAR(p, 0.846107430790882, 1e-10);
  EXPECT_NEAR(m.m, 0.0335, 1e-12);
  EXPECT_NEAR(m.v, 0.00037941025, 1e-15);
}

TEST(Adam, StoreStepMatchesScalarRule) {
  OptimizerConfig cfg;
  WeightStore w;
  w.add("a", Tensor({2}, {1.0F, -2.0F}));
  w.set_requires_grad(true);
  Adam adam(w, cfg);
  AdamMoments m0, m1;
  double p0 = 1.0, p1 = -2.0;
  const float grads[3][2] = {{0.5F, 0.1F}, {-0.3F, 0.0F}, {0.2F, -4.0F}};
  for (int t = 0; t < 3; ++t) {
    Tensor a = w.get("a");
    a.ensure_grad();
    a.grad()[0] = grads[t][0];
    a.grad()[1] = grads[t][1];
    adam.step(w, 1e-2);
    p0 = adam_update(p0, grads[t][0], m0, t + 1, 1e-2, cfg);
    p1 = adam_update(p1, grads[t][1], m1, t + 1, 1e-2, cfg);
    EXPECT_NEAR(w.get("a").data()[0], p0, 1e-6);
    EXPECT_NEAR(w.get("a").data()[1], p1, 1e-6);
  }
  EXPECT_EQ(adam.steps_taken(), 3);
}

TEST(OptimizerConfig, Validation) {
  OptimizerConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.lr_min = 1e-3;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.beta1 = 1.0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

// ---- metrics ---------------------------------------------------------------

TEST(Psnr, AnalyticCases) {
  const Tensor a = uniform({3, 16, 16}, 1, 0.0F, 1.0F);
  EXPECT_EQ(psnr(a, a), 100.0);
  const Tensor zero = Tensor::full({3, 8, 8}, 0.0F);
  EXPECT_NEAR(psnr(zero, Tensor::full({3, 8, 8}, 0.1F)), 20.0, 1e-6);
  const Tensor base = uniform({3, 16, 16}, 2, 0.0F, 0.9F);
  EXPECT_NEAR(psnr(base, add_scalar(base, 0.1F)), 20.0, 1e-5);
}

TEST(Psnr, DirectFormulaAndSymmetry) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Tensor a = uniform({3, 9, 13}, s, 0.0F, 1.0F);
    const Tensor b = uniform({3, 9, 13}, s + 50, 0.0F, 1.0F);
    double mse = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i) {
      const double d = static_cast<double>(a.data()[i]) - b.data()[i];
      mse += d * d;
    }
    mse /= static_cast<double>(a.numel());
    EXPECT_NEAR(psnr(a, b), -10.0 * std::log10(mse), 1e-9);
    EXPECT_EQ(psnr(a, b), psnr(b, a));
  }
  EXPECT_THROW(psnr(Tensor({3, 4, 4}), Tensor({3, 4, 5})), DimensionError);
}

// SSIM at the single valid position of an 11x11 image, straight from the definition.
double ssim_one_window(const Tensor& a, const Tensor& b) {
  double wsum = 0.0, ma = 0.0, mb = 0.0;
  std::vector<double> w(121), ga(121), gb(121);
  for (int i = 0; i < 11; ++i)
    for (int j = 0; j < 11; ++j) {
      const auto k = static_cast<std::size_t>(i * 11 + j);
      w[k] = std::exp(-((i - 5) * (i - 5) + (j - 5) * (j - 5)) / (2 * 1.5 * 1.5));
      wsum += w[k];
      ga[k] = (a.at(0, 0, i, j) + static_cast<double>(a.at(0, 1, i, j)) + a.at(0, 2, i, j)) / 3.0;
      gb[k] = (b.at(0, 0, i, j) + static_cast<double>(b.at(0, 1, i, j)) + b.at(0, 2, i, j)) / 3.0;
    }
  for (auto& v : w) v /= wsum;
  for (std::size_t k = 0; k < 121; ++k) {
    ma += w[k] * ga[k];
    mb += w[k] * gb[k];
  }
  double va = 0.0, vb = 0.0, cov = 0.0;
  for (std::size_t k = 0; k < 121; ++k) {
    va += w[k] * (ga[k] - ma) * (ga[k] - ma);
    vb += w[k] * (gb[k] - mb) * (gb[k] - mb);
    cov += w[k] * (ga[k] - ma) * (gb[k] - mb);
  }
  const double c1 = 1e-4, c2 = 9e-4;
  return (2 * ma * mb + c1) * (2 * cov + c2) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
}

TEST(Ssim, AnalyticCases) {
  const Tensor a = uniform({3, 20, 24}, 3, 0.0F, 1.0F);
  EXPECT_NEAR(ssim(a, a), 1.0, 1e-12);
  const double c1 = 1e-4;
  EXPECT_NEAR(ssim(Tensor::full({3, 16, 16}, 0.0F), Tensor::full({3, 16, 16}, 1.0F)),
              c1 / (1.0 + c1), 1e-8);
}

TEST(Ssim, SingleWindowMatchesDefinition) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Tensor a = uniform({3, 11, 11}, s, 0.0F, 1.0F);
    const Tensor b = uniform({3, 11, 11}, s + 9, 0.0F, 1.0F);
    EXPECT_NEAR(ssim(a.reshaped({1, 3, 11, 11}), b.reshaped({1, 3, 11, 11})),
                ssim_one_window(a.reshaped({1, 3, 11, 11}), b.reshaped({1, 3, 11, 11})), 1e-9);
  }
}

TEST(Ssim, DecreasesWithNoiseAndIsSymmetric) {
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Tensor clean = uniform({3, 32, 32}, s, 0.2F, 0.8F);
    double previous = 1.0;
    for (double sigma : {0.01, 0.05, 0.1}) {
      std::mt19937_64 rng(s * 7 + 1);
      std::normal_distribution<float> noise(0.0F, static_cast<float>(sigma));
      Tensor noisy = clean.clone();
      for (auto& v : noisy.data()) v += noise(rng);
      const double score = ssim(clean, noisy);
      EXPECT_LT(score, previous) << "seed " << s << " sigma " << sigma;
      EXPECT_NEAR(score, ssim(noisy, clean), 1e-9);
      previous = score;
    }
  }
  EXPECT_THROW(ssim(Tensor({3, 10, 30}), Tensor({3, 10, 30})), DimensionError);
}

// ---- training loop ---------------------------------------------------------

TrainOptions tiny_options(std::int64_t steps) {
  TrainOptions o;
  o.model.nc = 8;
  o.optimizer.total_steps = steps;
  o.optimizer.batch = 2;
  o.optimizer.crop = 16;
  o.optimizer.validation_every = 4;
  o.optimizer.seed = 3;
  return o;
}

std::vector<ImagePair> tiny_dataset() {
  SyntheticSetOptions s;
  s.count = 6;
  s.min_size = 20;
  s.max_size = 24;
  s.seed = 1;
  return synthetic_pairs(s);
}

TEST(TrainLoop, BitIdenticalRerun) {
  const auto data = tiny_dataset();
  const auto a = train_loop(data, tiny_options(10));
  const auto b = train_loop(data, tiny_options(10));
  ASSERT_EQ(a.log.size(), 10U);
  for (std::size_t i = 0; i < a.log.size(); ++i) {
    EXPECT_EQ(format_train_record(a.log[i]), format_train_record(b.log[i]));
    EXPECT_EQ(a.log[i].total, b.log[i].total);
  }
  EXPECT_TRUE(a.final_weights.identical(b.final_weights));
  EXPECT_TRUE(a.best_weights.identical(b.best_weights));
  EXPECT_FALSE(a.final_weights.identical(init_weights(tiny_options(10).model, 3)));
}

TEST(TrainLoop, LogFollowsScheduleAndBreakdown) {
  const auto opts = tiny_options(8);
  const auto r = train_loop(tiny_dataset(), opts);
  for (const auto& rec : r.log) {
    EXPECT_DOUBLE_EQ(rec.lr, cosine_lr(rec.step, opts.optimizer));
    EXPECT_NEAR(rec.total, rec.l1_final + rec.l1_intermediate + 0.1 * rec.perceptual, 1e-6);
    EXPECT_GT(rec.grad_norm, 0.0);
    EXPECT_EQ(rec.validation_psnr.has_value(), (rec.step + 1) % 4 == 0 || rec.step + 1 == 8);
  }
  EXPECT_EQ(r.validation.size(), 1U);
  EXPECT_GE(r.best_step, 0);
}

TEST(TrainLoop, DivergenceNamesStep) {
  auto opts = tiny_options(3);
  WeightStore w = init_weights(opts.model, 0);
  Tensor head = w.get("den.head.weight");
  for (auto& v : head.data()) v = 3e37F;
  opts.initial_weights = w;
  try {
    train_loop(tiny_dataset(), opts);
    FAIL() << "diverging run completed";
  } catch (const TrainingDivergence& e) {
    EXPECT_EQ(e.step(), 0);
    EXPECT_FALSE(e.term().empty());
  }
}

TEST(TrainLoop, RejectsEmptyDataset) {
  EXPECT_THROW(train_loop({}, tiny_options(2)), DatasetError);
}

}  // namespace
}  // namespace flol
