#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "rodeo/dataset_io.hpp"
#include "test_support.hpp"

using namespace rodeo;
using fixture::lb;

namespace {

std::string error_of(const std::string& text, DatasetFormat fmt) {
  try {
    parse_dataset(text, fmt, "in");
  } catch (const DatasetError& e) {
    return e.what();
  }
  return "";
}

bool contains(const std::string& hay, const std::string& needle) { return hay.find(needle) != std::string::npos; }

}  // namespace

TEST(Canonical, OneBox) {
  const auto f = parse_dataset(R"({"schema_version":"1.0","classes":["cat","dog"],
    "images":[{"image_id":"a","image_size":[64,48],"boxes":[{"class":"dog","x":1,"y":2,"w":3,"h":4,"confidence":0.5}]},
              {"image_id":7,"boxes":[]}]})",
                               DatasetFormat::CanonicalJson);
  ASSERT_EQ(f.images.size(), 2u);
  EXPECT_EQ(f.images[0].image_size, (ImageSize{64, 48}));
  EXPECT_EQ(f.images[0].boxes, (std::vector<LabeledBox>{lb(1, 2, 3, 4, 1, 0.5)}));
  EXPECT_EQ(f.images[1].image_id, "7");
  EXPECT_FALSE(f.images[1].image_size);
}

TEST(Canonical, Errors) {
  const std::string head = R"({"schema_version":"1.0","classes":["cat","dog"],"images":[)";
  auto e = error_of(head + R"({"image_id":"a","boxes":[{"class":"cat","x":0,"y":0,"w":1,"h":1},
                                                     {"class":"cat","x":0,"y":0,"w":0,"h":1}]}]})",
                    DatasetFormat::CanonicalJson);
  EXPECT_TRUE(contains(e, "images[0].boxes[1].w")) << e;

  e = error_of(head + R"({"image_id":"a","boxes":[{"class":"bird","x":0,"y":0,"w":1,"h":1}]}]})",
               DatasetFormat::CanonicalJson);
  EXPECT_TRUE(contains(e, "bird")) << e;
  EXPECT_TRUE(contains(e, "cat, dog")) << e;

  e = error_of(head + R"({"image_id":"a"},{"image_id":"a"}]})", DatasetFormat::CanonicalJson);
  EXPECT_TRUE(contains(e, "'a'")) << e;

  e = error_of(head + R"({"image_id":"a","boxes":[{"class":"cat","x":0,"y":0,"w":1}]}]})",
               DatasetFormat::CanonicalJson);
  EXPECT_TRUE(contains(e, "boxes[0].h")) << e;

  EXPECT_TRUE(contains(error_of("{not json", DatasetFormat::CanonicalJson), "invalid JSON"));
  EXPECT_TRUE(contains(error_of(R"({"classes":[],"images":[]})", DatasetFormat::CanonicalJson), "schema_version"));
}

TEST(Coco, CornerConversion) {
  const auto f = parse_dataset(R"({"categories":[{"id":3,"name":"A"},{"id":9,"name":"B"}],
    "images":[{"id":1,"width":10,"height":10},{"id":2}],
    "annotations":[{"image_id":1,"category_id":9,"bbox":[0,0,2,2],"score":0.25}]})",
                               DatasetFormat::CocoCornerJson);
  EXPECT_EQ(f.classes, (std::vector<std::string>{"A", "B"}));
  ASSERT_EQ(f.images.size(), 2u);
  EXPECT_EQ(f.images[0].boxes, (std::vector<LabeledBox>{lb(1, 1, 2, 2, 1, 0.25)}));
  EXPECT_TRUE(f.images[1].boxes.empty());

  const auto e = error_of(R"({"categories":[{"id":3,"name":"A"}],
    "annotations":[{"image_id":1,"category_id":4,"bbox":[0,0,2,2]}]})",
                          DatasetFormat::CocoCornerJson);
  EXPECT_TRUE(contains(e, "annotations[0].category_id")) << e;
}

TEST(Csv, ParseAndErrors) {
  const auto f = parse_dataset(
      "# classes: A, B\n"
      "image_id,class,x,y,w,h,confidence,image_width,image_height\n"
      "i1,B,1,2,3,4,0.5,10,20\n"
      "i2,,,,,,,,\n"
      "i1,A,+1.5,2,3,4,,10,20\n",
      DatasetFormat::Csv);
  EXPECT_EQ(f.classes, (std::vector<std::string>{"A", "B"}));
  ASSERT_EQ(f.images.size(), 2u);
  EXPECT_EQ(f.images[0].boxes, (std::vector<LabeledBox>{lb(1, 2, 3, 4, 1, 0.5), lb(1.5, 2, 3, 4, 0)}));
  EXPECT_EQ(f.images[0].image_size, (ImageSize{10, 20}));
  EXPECT_TRUE(f.images[1].boxes.empty());

  // vocabulary inferred when undeclared
  EXPECT_EQ(parse_dataset("image_id,class,x,y,w,h\na,z,0,0,1,1\nb,m,0,0,1,1\n", DatasetFormat::Csv).classes,
            (std::vector<std::string>{"m", "z"}));

  auto e = error_of("image_id,class,x,y,w,h\na,z,0,0,abc,1\n", DatasetFormat::Csv);
  EXPECT_TRUE(contains(e, "line 2")) << e;
  EXPECT_TRUE(contains(e, "'w'")) << e;
  e = error_of("image_id,class,x,y,w\n", DatasetFormat::Csv);
  EXPECT_TRUE(contains(e, "'h'")) << e;
  e = error_of("image_id,class,x,y,w,h\na,z,0,0,1\n", DatasetFormat::Csv);
  EXPECT_TRUE(contains(e, "line 2")) << e;
  e = error_of("image_id,class,x,y,w,h\n\na,z,0,0,-1,1\n", DatasetFormat::Csv);
  EXPECT_TRUE(contains(e, "line 3")) << e;
}

TEST(Format, Names) {
  EXPECT_EQ(parse_format("json"), DatasetFormat::CanonicalJson);
  EXPECT_EQ(parse_format("coco-corner-json"), DatasetFormat::CocoCornerJson);
  EXPECT_EQ(parse_format("csv"), DatasetFormat::Csv);
  EXPECT_THROW(parse_format("xml"), std::invalid_argument);
}

TEST(RoundTrip, SaveLoadIsIdentity) {
  std::mt19937_64 rng(61);
  const auto dir = std::filesystem::temp_directory_path() / "rodeo_io_test";
  std::filesystem::create_directories(dir);
  for (int rep = 0; rep < 50; ++rep) {
    const auto d = fixture::random_dataset(rng, 5, 3);
    const std::vector<std::string> classes{"x", "y", "z"};
    const auto [t, p] = split_dataset(d, classes);
    const auto tp = (dir / "t.json").string(), pp = (dir / "p.json").string();
    save_dataset(tp, t);
    save_dataset(pp, p);
    const auto t2 = load_dataset(tp, DatasetFormat::CanonicalJson);
    const auto p2 = load_dataset(pp, DatasetFormat::CanonicalJson);
    EXPECT_EQ(t2, t);
    EXPECT_EQ(p2, p);
    EXPECT_EQ(pair_datasets(t2, p2), d);
  }
  std::filesystem::remove_all(dir);
}

TEST(Pairing, Rules) {
  DatasetFile t, p;
  t.classes = p.classes = {"A"};
  t.images = {{"a", std::nullopt, {lb(0, 0, 1, 1, 0)}}, {"b", std::nullopt, {lb(5, 5, 1, 1, 0)}}};
  p.images = {{"a", ImageSize{4, 4}, {lb(0, 0, 1, 1, 0, 0.5)}}};
  const auto d = pair_datasets(t, p);
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d[0].predictions.size(), 1u);
  EXPECT_EQ(d[0].image_size, (ImageSize{4, 4}));
  EXPECT_TRUE(d[1].predictions.empty());

  p.images.push_back({"ghost", std::nullopt, {}});
  try {
    pair_datasets(t, p);
    FAIL();
  } catch (const DatasetError& e) {
    EXPECT_TRUE(contains(e.what(), "ghost"));
  }
  p.images.pop_back();
  p.classes = {"B"};
  EXPECT_THROW(pair_datasets(t, p), DatasetError);
}

TEST(Files, GoldenDataMatchesFixture) {
  const auto t = load_dataset(std::string(RODEO_TEST_DATA) + "/golden_targets.json", DatasetFormat::CanonicalJson);
  const auto p =
      load_dataset(std::string(RODEO_TEST_DATA) + "/golden_predictions.json", DatasetFormat::CanonicalJson);
  EXPECT_EQ(t.classes, fixture::golden_classes());
  EXPECT_EQ(pair_datasets(t, p), fixture::golden_dataset());
  EXPECT_THROW(load_dataset("/nonexistent/file.json", DatasetFormat::CanonicalJson), DatasetError);
}
