#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <numeric>
#include <set>

#include "exq/encoders.hpp"
#include "exq/error.hpp"
#include "exq/feature_io.hpp"
#include "exq/sampling.hpp"
#include "oracles.hpp"

using exq::Tensor;

namespace {

std::vector<std::size_t> range(std::size_t a, std::size_t b) {
  std::vector<std::size_t> v(b - a);
  std::iota(v.begin(), v.end(), a);
  return v;
}

std::vector<std::size_t> cat(std::initializer_list<std::vector<std::size_t>> parts) {
  std::vector<std::size_t> out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

}  // namespace

TEST(ClipIndices, NoWrap) { EXPECT_EQ(exq::clip_indices(100, 80, 10), range(10, 90)); }

TEST(ClipIndices, LoopsBackToStart) {
  EXPECT_EQ(exq::clip_indices(50, 80, 40), cat({range(40, 50), range(0, 50), range(0, 20)}));
}

TEST(ClipIndices, SingleFrameVideo) { EXPECT_EQ(exq::clip_indices(1, 37, 0), std::vector<std::size_t>(37, 0)); }

TEST(SampleClip, ModularRunFromRandomStart) {
  exq::Rng rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t len = 1 + rng.below(120), t = 1 + rng.below(100);
    const auto idx = exq::sample_clip(len, t, rng);
    ASSERT_EQ(idx.size(), t);
    for (std::size_t k = 0; k < t; ++k) {
      ASSERT_LT(idx[k], len);
      EXPECT_EQ(idx[k], (idx[0] + k) % len);
    }
  }
  EXPECT_THROW(exq::sample_clip(0, 4, rng), exq::ConfigError);
}

TEST(SampleClip, StartCoversEveryFrame) {
  exq::Rng rng(9);
  std::set<std::size_t> starts;
  for (int i = 0; i < 2000; ++i) starts.insert(exq::sample_clip(7, 3, rng)[0]);
  EXPECT_EQ(starts.size(), 7u);
}

TEST(SampleUniform, Examples) {
  EXPECT_EQ(exq::sample_uniform(80, 80), range(0, 80));
  std::vector<std::size_t> even;
  for (std::size_t k = 0; k < 80; ++k) even.push_back(2 * k);
  EXPECT_EQ(exq::sample_uniform(160, 80), even);
  std::vector<std::size_t> repeated;
  for (std::size_t s = 0; s < 10; ++s) repeated.insert(repeated.end(), 8, s);
  EXPECT_EQ(exq::sample_uniform(10, 80), repeated);
}

TEST(SampleUniform, DeterministicAndNonDecreasing) {
  for (std::size_t len : {1u, 7u, 33u, 80u, 301u}) {
    const auto a = exq::sample_uniform(len, 80);
    EXPECT_EQ(a, exq::sample_uniform(len, 80));
    EXPECT_TRUE(std::is_sorted(a.begin(), a.end()));
    EXPECT_EQ(a.front(), 0u);
    EXPECT_LT(a.back(), len);
  }
}

TEST(Partition, PaperSettings) {
  EXPECT_EQ(exq::partition(80).n, 5u);
  EXPECT_EQ(exq::partition(144).n, 9u);
  const auto one = exq::partition(16);
  ASSERT_EQ(one.n, 1u);
  EXPECT_EQ(one.spans.front(), (std::pair<std::size_t, std::size_t>{0, 16}));
}

TEST(Partition, SpansTileTheClip) {
  for (std::size_t n = 1; n <= 12; ++n) {
    const auto p = exq::partition(16 * n);
    ASSERT_EQ(p.spans.size(), n);
    for (std::size_t k = 0; k < n; ++k) EXPECT_EQ(p.spans[k], (std::pair<std::size_t, std::size_t>{16 * k, 16 * (k + 1)}));
  }
}

TEST(Partition, RejectsIndivisibleLengths) {
  EXPECT_THROW(exq::partition(0), exq::ConfigError);
  EXPECT_THROW(exq::partition(81), exq::ConfigError);
  EXPECT_THROW(exq::partition(8), exq::ConfigError);
}

TEST(ToyEncoder, ZeroInputGivesZeroFeature) {
  exq::Rng rng(1);
  exq::ToyEncoder enc(exq::Stream::rgb, {8, 8, 2, 16}, rng);
  exq::Tape t;
  const Tensor& f = t.value(enc.encode_subclip(t, Tensor({16, 3, 8, 8})));
  EXPECT_EQ(f, Tensor({16}));
}

TEST(ToyEncoder, OneFeatureRowPerSubclip) {
  exq::Rng rng(2);
  exq::ToyEncoder enc(exq::Stream::heatmap, {16, 16, 4, 32}, rng);
  exq::Tape t;
  EXPECT_EQ(t.value(enc.encode(t, Tensor({80, 3, 16, 16}, 0.5))).shape(), (exq::Shape{5, 32}));
  EXPECT_EQ(t.value(enc.encode_subclip(t, Tensor({16, 3, 16, 16}, 0.5))).shape(), (exq::Shape{32}));
}

TEST(ToyEncoder, RejectsWrongShapes) {
  exq::Rng rng(3);
  exq::ToyEncoder enc(exq::Stream::rgb, {8, 8, 2, 16}, rng);
  exq::Tape t;
  EXPECT_THROW(enc.encode(t, Tensor({16, 3, 8, 9})), exq::ShapeError);
  EXPECT_THROW(enc.encode(t, Tensor({16, 1, 8, 8})), exq::ShapeError);
  EXPECT_THROW(enc.encode(t, Tensor({20, 3, 8, 8})), exq::ConfigError);
  EXPECT_THROW(exq::ToyEncoder(exq::Stream::rgb, {8, 8, 3, 16}, rng), exq::ConfigError);
}

TEST(ToyEncoder, Deterministic) {
  exq::Rng r1(4), r2(4), data(5);
  exq::ToyEncoder a(exq::Stream::rgb, {8, 8, 2, 16}, r1), b(exq::Stream::rgb, {8, 8, 2, 16}, r2);
  const Tensor clip = oracle::random_tensor({32, 3, 8, 8}, data, 0, 1);
  exq::Tape t;
  const Tensor fa = t.value(a.encode(t, clip)), fa2 = t.value(a.encode(t, clip)), fb = t.value(b.encode(t, clip));
  EXPECT_EQ(fa, fa2);
  EXPECT_EQ(fa, fb);
}

TEST(ToyEncoder, StreamsOwnDistinctParameters) {
  exq::Rng rng(6);
  exq::ToyEncoder rgb(exq::Stream::rgb, {8, 8, 2, 16}, rng), heat(exq::Stream::heatmap, {8, 8, 2, 16}, rng);
  exq::ParamList a, b;
  rgb.append_params(a, "rgb.");
  heat.append_params(b, "heat.");
  ASSERT_EQ(a.size(), b.size());
  for (const auto& pa : a)
    for (const auto& pb : b) EXPECT_NE(pa.param, pb.param);
  EXPECT_NE(rgb.proj_w.value, heat.proj_w.value);
}

TEST(FeatureFile, BitExactRoundTrip) {
  exq::Rng rng(7);
  exq::FeatureSequence fs{oracle::random_tensor({5, 512}, rng, -1e3, 1e3), exq::Stream::rgb};
  fs.features[3] = 1e-310;
  fs.features[4] = -0.0;
  const auto path = std::filesystem::temp_directory_path() / "exq_test_features.exqf";
  exq::save_features(path, fs);
  const auto back = exq::load_features(path);
  EXPECT_EQ(back.stream, fs.stream);
  EXPECT_EQ(std::memcmp(back.features.data().data(), fs.features.data().data(), fs.features.size() * 8), 0);
  EXPECT_EQ(exq::encode_features(back), exq::encode_features(fs));
}

TEST(FeatureFile, PreservesStreamTagAndShape) {
  exq::Rng rng(8);
  const exq::FeatureSequence fs{oracle::random_tensor({9, 512}, rng), exq::Stream::heatmap};
  const auto back = exq::decode_features(exq::encode_features(fs));
  EXPECT_EQ(back.stream, exq::Stream::heatmap);
  EXPECT_EQ(back.features.shape(), (exq::Shape{9, 512}));
}

TEST(FeatureFile, TruncatedPayloadNamesLengths) {
  exq::Rng rng(9);
  std::string bytes = exq::encode_features({oracle::random_tensor({5, 4}, rng), exq::Stream::rgb});
  bytes.resize(bytes.size() - 8);
  try {
    exq::decode_features(bytes, "clip.exqf");
    FAIL() << "expected a format error";
  } catch (const exq::FormatError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("expected 160"), std::string::npos) << msg;
    EXPECT_NE(msg.find("found 152"), std::string::npos) << msg;
    EXPECT_NE(msg.find("at byte 28"), std::string::npos) << msg;
  }
}

TEST(FeatureFile, MalformedHeaders) {
  std::string bytes = exq::encode_features({Tensor({1, 2}), exq::Stream::rgb});
  std::string bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_THROW(exq::decode_features(bad_magic), exq::FormatError);
  std::string bad_tag = bytes;
  bad_tag[8] = 7;
  EXPECT_THROW(exq::decode_features(bad_tag), exq::FormatError);
  EXPECT_THROW(exq::decode_features(bytes.substr(0, 10)), exq::FormatError);
}
