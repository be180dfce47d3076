#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "sarange/dataset.hpp"
#include "sarange/error.hpp"
#include "sarange/objectives.hpp"
#include "sarange/report.hpp"

using namespace sarange;

TEST(Ackley, KnownValues) {
  EXPECT_NEAR(ackley(Point{0.0, 0.0}), 0.0, 1e-14);
  // mpmath, 30 digits: 3.62538493844036282660128982762
  EXPECT_NEAR(ackley(Point{1.0, 1.0}), 3.6253849384403628, 1e-13);
  EXPECT_DOUBLE_EQ(ackley(Point{0.3, -2.1}), ackley(Point{-2.1, 0.3}));
  EXPECT_THROW(ackley(Point{1.0}), Error);
}

TEST(DropWave, KnownValues) {
  EXPECT_DOUBLE_EQ(drop_wave(Point{0.0, 0.0}), -1.0);
  // mpmath: -0.935857067772289071082650008245
  EXPECT_NEAR(drop_wave(Point{0.5236, 0.0}), -0.93585706777228907, 1e-14);
  EXPECT_THROW(drop_wave(Point{1.0, 2.0, 3.0}), Error);
}

TEST(DropWave, BoundedInMinusOneZero) {
  Rng rng(3);
  const auto d = BoxDomain::cube(2, -20.0, 20.0);
  for (int i = 0; i < 100000; ++i) {
    const double v = drop_wave(sample_uniform(d, rng));
    ASSERT_GE(v, -1.0);
    ASSERT_LE(v, 0.0);
  }
}

TEST(MultiMinima, KnownValues) {
  EXPECT_EQ(multi_minima(Point{1.0, -1.0, 1.0}), 0.0);
  EXPECT_EQ(multi_minima(Point{0.0, 0.0, 0.0}), 3.0);
  EXPECT_EQ(multi_minima(Point{2.0, 0.0, 0.0}), 11.0);
  for (double x : {-1.0, 1.0})
    for (double y : {-1.0, 1.0})
      for (double z : {-1.0, 1.0}) EXPECT_EQ(multi_minima(Point{x, y, z}), 0.0);
  EXPECT_THROW(multi_minima(Point{1.0, 1.0}), Error);
}

TEST(Objectives, RandomSamplingNeverBeatsStatedMinima) {
  Rng rng(2024);
  struct Case {
    Objective f;
    double minimum;
  };
  const Case cases[] = {{ackley_objective(), 0.0},
                        {drop_wave_objective(), -1.0},
                        {multi_minima_objective(), 0.0}};
  for (const auto& c : cases) {
    const auto domain = builtin_domain(c.f.name());
    double lowest = INFINITY;
    for (int i = 0; i < 1'000'000; ++i) {
      lowest = std::min(lowest, c.f(sample_uniform(domain, rng)));
    }
    EXPECT_GE(lowest, c.minimum - 1e-12) << c.f.name();
  }
}

TEST(Objectives, NegationSwapsArgminAndArgmax) {
  const auto f = ackley_objective();
  const auto neg = f.negated();
  Rng rng(1);
  const auto d = builtin_domain("ackley");
  std::size_t argmax = 0;
  std::size_t argmin_neg = 0;
  double best_max = -INFINITY;
  double best_neg = INFINITY;
  for (std::size_t i = 0; i < 500; ++i) {
    const auto p = sample_uniform(d, rng);
    const double v = f(p);
    const double w = neg(p);
    EXPECT_EQ(w, -v);
    if (v > best_max) best_max = v, argmax = i;
    if (w < best_neg) best_neg = w, argmin_neg = i;
  }
  EXPECT_EQ(argmax, argmin_neg);
}

TEST(Objectives, BuiltinLookup) {
  EXPECT_EQ(builtin_objective("dropwave").dim(), 2u);
  EXPECT_EQ(builtin_objective("multimin").dim(), 3u);
  try {
    builtin_objective("foo");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::invalid_argument);
    EXPECT_NE(std::string(e.what()).find("ackley"), std::string::npos);
  }
}

TEST(Objectives, BatchMatchesSingle) {
  const auto f = ackley_objective();
  const std::vector<double> pts = {0.0, 0.0, 1.0, 1.0, -2.5, 3.0};
  std::vector<double> out(3);
  f.evaluate_batch(pts, out);
  EXPECT_EQ(out[1], ackley(Point{1.0, 1.0}));
  EXPECT_EQ(out[2], ackley(Point{-2.5, 3.0}));
}

TEST(Dataset, ZeroNoiseTargetsAreExact) {
  const auto f = ackley_objective();
  const auto data = sample_dataset(f, builtin_domain("ackley"), 200, 0.0, 9);
  for (std::size_t i = 0; i < data.size(); ++i) {
    EXPECT_EQ(data.targets[i], f(data.input(i)));
  }
}

TEST(Dataset, InputsLieInDomain) {
  const auto d = BoxDomain::cube(2, -4.0, 4.0);
  const auto data = sample_dataset(ackley_objective(), d, 1000, 0.1, 1);
  ASSERT_EQ(data.size(), 1000u);
  for (std::size_t i = 0; i < data.size(); ++i) ASSERT_TRUE(contains(d, data.input(i)));
}

TEST(Dataset, SeedDeterminesDataset) {
  const auto d = builtin_domain("multimin");
  const auto a = sample_dataset(multi_minima_objective(), d, 300, 0.1, 77);
  const auto b = sample_dataset(multi_minima_objective(), d, 300, 0.1, 77);
  const auto c = sample_dataset(multi_minima_objective(), d, 300, 0.1, 78);
  EXPECT_EQ(a.inputs, b.inputs);
  EXPECT_EQ(a.targets, b.targets);
  EXPECT_NE(a.inputs, c.inputs);
}

TEST(Dataset, NoiseHasRequestedScale) {
  const auto f = multi_minima_objective();
  const auto data = sample_dataset(f, builtin_domain("multimin"), 20000, 0.5, 4);
  double sum = 0.0;
  double sq = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double e = data.targets[i] - f(data.input(i));
    sum += e;
    sq += e * e;
  }
  const double n = static_cast<double>(data.size());
  EXPECT_NEAR(sum / n, 0.0, 0.02);
  EXPECT_NEAR(std::sqrt(sq / n), 0.5, 0.02);
}

TEST(Dataset, RejectsBadArguments) {
  const auto d = builtin_domain("ackley");
  EXPECT_THROW(sample_dataset(ackley_objective(), d, 0, 0.1, 1), Error);
  EXPECT_THROW(sample_dataset(ackley_objective(), d, 10, -1.0, 1), Error);
  EXPECT_THROW(sample_dataset(multi_minima_objective(), d, 10, 0.1, 1), Error);
}

TEST(Dataset, CsvRoundTripIsExact) {
  const auto data = sample_dataset(drop_wave_objective(), builtin_domain("dropwave"),
                                   50, 0.1, 12);
  const auto path = std::filesystem::temp_directory_path() / "sarange_ds_test.csv";
  write_dataset_csv(data, path);
  const auto back = read_dataset_csv(path);
  EXPECT_EQ(back.dim, 2u);
  EXPECT_EQ(back.inputs, data.inputs);
  EXPECT_EQ(back.targets, data.targets);
  EXPECT_EQ(dataset_csv(data).rfind("x1,x2,target\n", 0), 0u);
  std::filesystem::remove(path);
}

TEST(Dataset, CsvErrorsNameTheLine) {
  const auto path = std::filesystem::temp_directory_path() / "sarange_ds_bad.csv";
  write_text_file(path, "x1,x2,target\n1,2,3\n1,oops,3\n");
  try {
    read_dataset_csv(path);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::parse);
    EXPECT_NE(std::string(e.what()).find(":3:"), std::string::npos) << e.what();
  }
  write_text_file(path, "a,b\n1,2\n");
  EXPECT_THROW(read_dataset_csv(path), Error);
  std::filesystem::remove(path);
}
