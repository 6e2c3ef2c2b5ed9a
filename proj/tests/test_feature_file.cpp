#include <gtest/gtest.h>

#include "boxmon/feature_file.hpp"

using namespace boxmon;

namespace {

std::string error_of(std::string_view text, int declared = 0) {
  try {
    parse_feature_csv(text, declared);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MalformedFeatureFile);
    return e.what();
  }
  return "no error";
}

}  // namespace

TEST(FeatureFile, ParsesRows) {
  const auto f = parse_feature_csv("1,1,0.078,0.062\n2,1,0.289,0.281\n-1,0,1e-3,-2.5\n");
  ASSERT_EQ(f.records.size(), 3u);
  EXPECT_EQ(f.dim, 2u);
  EXPECT_EQ(f.class_count, 3);
  EXPECT_EQ(f.records[0].features, (Vector{0.078, 0.062}));
  EXPECT_EQ(f.records[1].true_label, 2);
  EXPECT_EQ(f.records[1].predicted_label, 1);
  EXPECT_EQ(f.records[2].true_label, kUnknownLabel);
  EXPECT_EQ(f.records[2].features, (Vector{0.001, -2.5}));
}

TEST(FeatureFile, LineEndings) {
  EXPECT_EQ(parse_feature_csv("0,0,1\n0,0,2").records.size(), 2u);
  EXPECT_EQ(parse_feature_csv("0,0,1\r\n0,0,2\r\n").records.size(), 2u);
  EXPECT_TRUE(parse_feature_csv("").records.empty());
}

TEST(FeatureFile, ArityMismatchNamesTheRow) {
  std::string text;
  for (int i = 0; i < 6; ++i) text += "0,0,0.1,0.2\n";
  text += "0,0,0.1\n";
  EXPECT_NE(error_of(text).find("row 7"), std::string::npos);
}

TEST(FeatureFile, RejectsBadFields) {
  EXPECT_NE(error_of("0,0,abc\n").find("row 1"), std::string::npos);
  EXPECT_NE(error_of("0,0,1\n0,0,nan\n").find("row 2"), std::string::npos);
  EXPECT_NE(error_of("0,0,inf\n").find("not finite"), std::string::npos);
  EXPECT_NE(error_of("x,0,1\n").find("true_label"), std::string::npos);
  EXPECT_NE(error_of("-2,0,1\n").find("true_label"), std::string::npos);
  EXPECT_NE(error_of("0,-1,1\n").find("predicted_label"), std::string::npos);
  EXPECT_NE(error_of("0,0\n").find("row 1"), std::string::npos);
  EXPECT_NE(error_of("0,0,1\n\n0,0,1\n").find("row 2"), std::string::npos);
  EXPECT_NE(error_of("0,0,1,\n").find("row 1"), std::string::npos);
}

TEST(FeatureFile, DeclaredClassCount) {
  EXPECT_EQ(parse_feature_csv("0,1,0.5\n", 10).class_count, 10);
  EXPECT_NE(error_of("0,3,0.5\n", 3).find("label 3"), std::string::npos);
  EXPECT_EQ(parse_feature_csv("-1,2,0.5\n", 3).class_count, 3);
}

TEST(FeatureFile, MissingFileIsAnIoError) {
  try {
    read_feature_file("/nonexistent/features.csv");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Io);
  }
}
