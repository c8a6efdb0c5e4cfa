#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <numeric>

#include "exq/error.hpp"
#include "exq/heatmap.hpp"
#include "exq/landmarks.hpp"
#include "exq/rng.hpp"

using exq::Point;
using exq::Tensor;

namespace {

std::vector<Point> random_points(exq::Rng& rng, std::size_t n, double lo, double hi) {
  std::vector<Point> pts(n);
  for (auto& p : pts) p = {rng.uniform(lo, hi), rng.uniform(lo, hi)};
  return pts;
}

exq::LandmarkSequence sequence_of(const std::vector<std::vector<Point>>& frames, std::size_t w, std::size_t h) {
  exq::LandmarkSequence seq;
  seq.width = w;
  seq.height = h;
  for (std::size_t i = 0; i < frames.size(); ++i) seq.frames.push_back({i, frames[i]});
  return seq;
}

std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("exq_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST(SelectLandmarks, IdentityAndSingle) {
  exq::Rng rng(1);
  const auto all = random_points(rng, 106, 0, 50);
  std::vector<int> ident(106);
  std::iota(ident.begin(), ident.end(), 0);
  EXPECT_EQ(exq::select_landmarks(all, ident), all);
  const std::vector<int> one{0};
  EXPECT_EQ(exq::select_landmarks(all, one), std::vector<Point>{all[0]});
}

TEST(SelectLandmarks, RejectsBadIndices) {
  const std::vector<Point> all(106);
  const std::vector<int> out_of_range{3, 106};
  const std::vector<int> dup{3, 3};
  EXPECT_THROW(exq::select_landmarks(all, out_of_range), exq::ConfigError);
  EXPECT_THROW(exq::select_landmarks(all, dup), exq::ConfigError);
}

TEST(SelectLandmarks, DefaultSubsetDropsContour) {
  const auto subset = exq::default_subset73();
  ASSERT_EQ(subset.size(), 73u);
  for (int idx : subset) EXPECT_GE(idx, 33) << "contour index retained";
  std::vector<int> sorted = subset;
  std::sort(sorted.begin(), sorted.end());
  EXPECT_EQ(std::adjacent_find(sorted.begin(), sorted.end()), sorted.end());
}

TEST(Fixtures, ShippedFilesMatchBuiltInDefaults) {
  const std::filesystem::path dir = EXQ_DATA_DIR;
  EXPECT_EQ(exq::load_index_list(dir / "subset73.json"), exq::default_subset73());
  EXPECT_EQ(exq::load_index_list(dir / "mirror73.json"), exq::default_mirror73());
}

TEST(MirrorMap, DefaultIsSelfInverse) {
  const auto m = exq::default_mirror73();
  ASSERT_EQ(m.size(), 73u);
  EXPECT_NO_THROW(exq::validate_mirror_map(m));
  for (std::size_t i = 0; i < m.size(); ++i) EXPECT_EQ(m[static_cast<std::size_t>(m[i])], static_cast<int>(i));
  std::vector<int> broken = m;
  std::swap(broken[0], broken[1]);
  EXPECT_THROW(exq::validate_mirror_map(broken), exq::ConfigError);
}

TEST(Kernel, ValuesAndSum) {
  const exq::GaussianKernel k(1.0, 11);
  EXPECT_EQ(k.at(5, 5), 1.0);
  EXPECT_EQ(k.at(5, 6), std::exp(-0.5));
  double sum = 0.0;
  for (double v : k.weights().data()) sum += v;
  EXPECT_NEAR(sum, 2.0 * std::numbers::pi, 1e-3);
}

TEST(Kernel, CenterIsOneForAnyParameters) {
  for (double sigma : {0.3, 1.0, 2.5})
    for (std::size_t size : {1u, 3u, 7u, 11u}) {
      const exq::GaussianKernel k(sigma, size);
      EXPECT_EQ(k.at(size / 2, size / 2), 1.0);
    }
}

TEST(Kernel, Symmetric) {
  const exq::GaussianKernel k(1.7, 9);
  for (std::size_t i = 0; i < 9; ++i)
    for (std::size_t j = 0; j < 9; ++j) {
      EXPECT_EQ(k.at(i, j), k.at(j, i));
      EXPECT_EQ(k.at(i, j), k.at(8 - i, j));
      EXPECT_EQ(k.at(i, j), k.at(i, 8 - j));
    }
}

TEST(Kernel, RejectsBadParameters) {
  EXPECT_THROW(exq::GaussianKernel(1.0, 10), exq::ConfigError);
  EXPECT_THROW(exq::GaussianKernel(0.0, 11), exq::ConfigError);
  EXPECT_THROW(exq::GaussianKernel(-1.0, 11), exq::ConfigError);
}

TEST(Accumulate, EmptyIsZero) {
  const exq::GaussianKernel k(1.0, 11);
  EXPECT_EQ(exq::accumulate({}, k, 20, 30), Tensor({20, 30}));
}

TEST(Accumulate, SingleCenteredLandmarkEmbedsKernel) {
  const exq::GaussianKernel k(1.0, 11);
  const std::vector<Point> one{{15.0, 15.0}};
  const Tensor acc = exq::accumulate(one, k, 31, 31);
  for (std::size_t y = 0; y < 31; ++y)
    for (std::size_t x = 0; x < 31; ++x) {
      const bool inside = y >= 10 && y <= 20 && x >= 10 && x <= 20;
      EXPECT_EQ(acc.at(y, x), inside ? k.at(y - 10, x - 10) : 0.0);
    }
  EXPECT_EQ(*std::max_element(acc.data().begin(), acc.data().end()), 1.0);
}

TEST(Accumulate, CoincidentLandmarksDouble) {
  const exq::GaussianKernel k(1.3, 11);
  const std::vector<Point> one{{7.2, 9.6}}, two{{7.2, 9.6}, {7.2, 9.6}};
  const Tensor a = exq::accumulate(one, k, 20, 20), b = exq::accumulate(two, k, 20, 20);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(b[i], 2.0 * a[i]);
}

TEST(Accumulate, OffFrameSupportIsClipped) {
  const exq::GaussianKernel k(1.0, 11);
  const std::vector<Point> edge{{-2.0, 0.0}}, far{{-100.0, 50.0}};
  const Tensor acc = exq::accumulate(edge, k, 10, 10);
  EXPECT_EQ(acc.at(0, 0), k.at(5, 7));
  EXPECT_EQ(exq::accumulate(far, k, 10, 10), Tensor({10, 10}));
}

TEST(Accumulate, PermutationInvariantAndLinear) {
  exq::Rng rng(31);
  const exq::GaussianKernel k(1.0, 11);
  for (int trial = 0; trial < 50; ++trial) {
    auto pts = random_points(rng, 1 + rng.below(20), -3, 35);
    const Tensor base = exq::accumulate(pts, k, 32, 32);
    auto shuffled = pts;
    std::shuffle(shuffled.begin(), shuffled.end(), std::mt19937_64(rng.next()));
    const Tensor perm = exq::accumulate(shuffled, k, 32, 32);
    EXPECT_LT(exq::max_abs_diff(base, perm), 1e-12);

    auto doubled = pts;
    doubled.insert(doubled.end(), pts.begin(), pts.end());
    const Tensor twice = exq::accumulate(doubled, k, 32, 32);
    for (std::size_t i = 0; i < base.size(); ++i) EXPECT_NEAR(twice[i], 2.0 * base[i], 1e-12);
    for (double v : base.data()) EXPECT_GE(v, 0.0);
  }
}

TEST(SmoothNormalize, DegenerateAndRange) {
  EXPECT_EQ(exq::smooth_and_normalize(Tensor({8, 8})), Tensor({8, 8}));
  EXPECT_EQ(exq::smooth_and_normalize(Tensor({8, 8}, 3.5)), Tensor({8, 8}));
  exq::Rng rng(12);
  const exq::GaussianKernel k(1.0, 11);
  for (int trial = 0; trial < 50; ++trial) {
    const Tensor w = exq::smooth_and_normalize(exq::accumulate(random_points(rng, 1 + rng.below(30), 0, 24), k, 24, 24));
    const auto [mn, mx] = std::minmax_element(w.data().begin(), w.data().end());
    EXPECT_EQ(*mx, 1.0);
    EXPECT_EQ(*mn, 0.0);
  }
}

TEST(SmoothNormalize, BoxFilterReplicatesEdges) {
  Tensor g({3, 3});
  g.at(0, 0) = 9.0;
  const Tensor s = exq::box_smooth3(g);
  EXPECT_DOUBLE_EQ(s.at(0, 0), 4.0);
  EXPECT_DOUBLE_EQ(s.at(1, 1), 1.0);
  EXPECT_DOUBLE_EQ(s.at(2, 2), 0.0);
}

TEST(WeightRgb, Examples) {
  Tensor rgb({3, 1, 1}, std::vector<double>{10, 20, 30});
  EXPECT_EQ(exq::weight_rgb(Tensor({1, 1}, 1.0), rgb), rgb);
  EXPECT_EQ(exq::weight_rgb(Tensor({1, 1}, 0.0), rgb), Tensor({3, 1, 1}));
  EXPECT_EQ(exq::weight_rgb(Tensor({1, 1}, 0.5), rgb).values(), (std::vector<double>{5, 10, 15}));
  EXPECT_THROW(exq::weight_rgb(Tensor({2, 1}), rgb), exq::ShapeError);
}

TEST(FrameWeights, InteriorTranslationEquivariance) {
  exq::Rng rng(40);
  exq::HeatmapConfig cfg;
  const std::size_t h = 40, w = 40;
  const long shift_y = 5, shift_x = 3;
  for (int trial = 0; trial < 30; ++trial) {
    auto pts = random_points(rng, 1 + rng.below(10), 7, 26);
    auto moved = pts;
    for (auto& p : moved) p = {p.x + shift_x, p.y + shift_y};
    const Tensor a = exq::frame_weights(pts, cfg, h, w), b = exq::frame_weights(moved, cfg, h, w);
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x) {
        const long sy = static_cast<long>(y) - shift_y, sx = static_cast<long>(x) - shift_x;
        const double expect = (sy >= 0 && sx >= 0) ? a.at(static_cast<std::size_t>(sy), static_cast<std::size_t>(sx)) : 0.0;
        ASSERT_EQ(b.at(y, x), expect) << "trial " << trial << " at " << y << "," << x;
      }
  }
}

TEST(FrameWeights, PositionsOnlyMatchesUnitKernelWithoutSmoothing) {
  exq::Rng rng(41);
  exq::HeatmapConfig mask_cfg;
  mask_cfg.mode = exq::HeatmapMode::positions_only;
  exq::HeatmapConfig unit_cfg;
  unit_cfg.kernel_size = 1;
  unit_cfg.smoothing = false;
  for (int trial = 0; trial < 20; ++trial) {
    auto pts = random_points(rng, 1 + rng.below(6), 0, 15);
    for (auto& p : pts) p = {std::round(p.x) + 0.25, std::round(p.y) - 0.25};
    auto unique = pts;
    std::sort(unique.begin(), unique.end(), [](const Point& a, const Point& b) {
      return std::lround(a.y) != std::lround(b.y) ? std::lround(a.y) < std::lround(b.y) : std::lround(a.x) < std::lround(b.x);
    });
    unique.erase(std::unique(unique.begin(), unique.end(),
                             [](const Point& a, const Point& b) {
                               return std::lround(a.x) == std::lround(b.x) && std::lround(a.y) == std::lround(b.y);
                             }),
                 unique.end());
    const Tensor m = exq::frame_weights(unique, mask_cfg, 16, 16);
    for (double v : m.data()) EXPECT_TRUE(v == 0.0 || v == 1.0);
    if (!unique.empty()) {
      EXPECT_EQ(m, exq::frame_weights(unique, unit_cfg, 16, 16));
    }
  }
}

TEST(BuildVolume, ShapeAndLocality) {
  exq::HeatmapConfig cfg;
  cfg.out_height = 16;
  cfg.out_width = 16;
  const Tensor frames({1, 3, 32, 32}, 1.0);
  const auto vol = exq::build_volume(sequence_of({{{16.0, 16.0}}}, 32, 32), frames, cfg);
  ASSERT_EQ(vol.data.shape(), (exq::Shape{1, 3, 16, 16}));
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t y = 0; y < 16; ++y)
      for (std::size_t x = 0; x < 16; ++x) {
        const double v = vol.data[((c * 16) + y) * 16 + x];
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
        if (std::abs(static_cast<long>(y) - 8) > 4 || std::abs(static_cast<long>(x) - 8) > 4) {
          EXPECT_EQ(v, 0.0);
        }
      }
}

TEST(BuildVolume, PositionsOnlyHasOneNonzeroPixel) {
  exq::HeatmapConfig cfg;
  cfg.mode = exq::HeatmapMode::positions_only;
  cfg.out_height = 12;
  cfg.out_width = 12;
  const Tensor frames({1, 3, 12, 12}, 0.5);
  const auto vol = exq::build_volume(sequence_of({{{4.0, 7.0}}}, 12, 12), frames, cfg);
  for (std::size_t c = 0; c < 3; ++c) {
    std::size_t nonzero = 0;
    for (std::size_t i = 0; i < 144; ++i) nonzero += vol.data[c * 144 + i] != 0.0 ? 1 : 0;
    EXPECT_EQ(nonzero, 1u);
    EXPECT_EQ(vol.data[c * 144 + 7 * 12 + 4], 0.5);
  }
}

TEST(BuildVolume, TranslationMovesSupportByResizedOffset) {
  exq::HeatmapConfig cfg;
  cfg.out_height = 20;
  cfg.out_width = 20;
  exq::Rng rng(50);
  const std::size_t side = 40;
  Tensor frames({1, 3, side, side});
  for (double& v : frames.data()) v = rng.uniform(0.2, 1.0);
  const std::vector<Point> pts{{12.0, 11.0}, {15.0, 14.0}};
  const std::vector<Point> moved{{16.0, 15.0}, {19.0, 18.0}};
  Tensor shifted({1, 3, side, side});
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t y = 4; y < side; ++y)
      for (std::size_t x = 4; x < side; ++x)
        shifted[(c * side + y) * side + x] = frames[(c * side + y - 4) * side + x - 4];
  const Tensor a = exq::build_volume(sequence_of({pts}, side, side), frames, cfg).data;
  const Tensor b = exq::build_volume(sequence_of({moved}, side, side), shifted, cfg).data;
  for (std::size_t c = 0; c < 3; ++c)
    for (std::size_t y = 0; y < 20; ++y)
      for (std::size_t x = 0; x < 20; ++x) {
        const double va = a[(c * 20 + y) * 20 + x];
        const double vb = (y + 2 < 20 && x + 2 < 20) ? b[(c * 20 + y + 2) * 20 + x + 2] : 0.0;
        EXPECT_NEAR(va, vb, 1e-12) << c << "," << y << "," << x;
      }
}

TEST(BuildVolume, LengthMismatchIsRejected) {
  EXPECT_THROW(exq::build_volume(sequence_of({{}, {}}, 8, 8), Tensor({3, 3, 8, 8}), exq::HeatmapConfig{}),
               exq::ShapeError);
}

TEST(BuildVolume, FrameOrderIndependent) {
  exq::Rng rng(60);
  exq::HeatmapConfig cfg;
  cfg.out_height = 8;
  cfg.out_width = 8;
  std::vector<std::vector<Point>> lm;
  for (int f = 0; f < 4; ++f) lm.push_back(random_points(rng, 5, 0, 16));
  Tensor frames({4, 3, 16, 16});
  for (double& v : frames.data()) v = rng.uniform();
  const Tensor full = exq::build_volume(sequence_of(lm, 16, 16), frames, cfg).data;
  const std::size_t plane = 3 * 16 * 16;
  for (std::size_t f = 0; f < 4; ++f) {
    Tensor single({1, 3, 16, 16}, std::vector<double>(frames.data().begin() + static_cast<long>(f * plane),
                                                       frames.data().begin() + static_cast<long>((f + 1) * plane)));
    const Tensor one = exq::build_volume(sequence_of({lm[f]}, 16, 16), single, cfg).data;
    for (std::size_t i = 0; i < one.size(); ++i) EXPECT_EQ(one[i], full[f * one.size() + i]);
  }
}

TEST(LandmarkFile, RoundTrip) {
  exq::Rng rng(70);
  exq::LandmarkSequence seq;
  seq.width = 36;
  seq.height = 40;
  for (std::size_t f = 0; f < 5; ++f) seq.frames.push_back({f * 2, random_points(rng, 73, -2, 42)});
  const auto dir = temp_dir("landmarks");
  exq::save_landmarks(dir / "seq.jsonl", seq);
  EXPECT_EQ(exq::load_landmarks(dir / "seq.jsonl", 36, 40), seq);
}

TEST(LandmarkFile, RejectsMalformedInput) {
  EXPECT_THROW(exq::parse_landmarks("{\"frame_index\": 0, \"points\": [[1]]}\n", 8, 8), exq::FormatError);
  EXPECT_THROW(exq::parse_landmarks("not json\n", 8, 8), exq::FormatError);
  EXPECT_THROW(exq::parse_landmarks("{\"frame_index\": 3, \"points\": []}\n{\"frame_index\": 1, \"points\": []}\n", 8, 8),
               exq::FormatError);
}
