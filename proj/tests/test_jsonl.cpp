#include <gtest/gtest.h>

#include <sstream>
#include <string>
#include <vector>

#include "slateval/errors.hpp"
#include "slateval/jsonl.hpp"
#include "slateval/types.hpp"

namespace {

using namespace slateval;

constexpr const char* kRecord =
    R"({"context_id":"c0","candidates":["a","b","c"],)"
    R"("actions":["b","a"],"logging_propensities":[0.3333,0.5],)"
    R"("rewards":[1.0,0.0]})";

std::string error_of(const std::string& text) {
  std::istringstream in(text);
  try {
    load_jsonl(in, "logs");
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}

TEST(Jsonl, LoadsRecords) {
  std::istringstream in(std::string(kRecord) + "\n\n" + kRecord + "\n");
  const Dataset ds = load_jsonl(in, "logs");
  ASSERT_EQ(ds.size(), 2u);  // the blank line is skipped
  EXPECT_EQ(ds.slate_size(), 2);
  EXPECT_EQ(ds.context(0).id, "c0");
  EXPECT_EQ(ds.actions(0)[0], 1);
  EXPECT_DOUBLE_EQ(ds.logging_propensities(0)[1], 0.5);
}

TEST(Jsonl, SaveLoadRoundTrip) {
  LoggedImpression imp;
  imp.context_id = "ctx";
  imp.candidate_set = {"item1", "item2", "item3"};
  imp.actions = {"item3", "item1"};
  imp.logging_propensities = {1.0 / 3.0, 0.5};
  imp.rewards = {0.0, 1.0};
  const Dataset ds({imp, imp});

  std::ostringstream out;
  save_jsonl(ds, out);
  std::istringstream in(out.str());
  const Dataset back = load_jsonl(in, "mem");

  ASSERT_EQ(back.size(), ds.size());
  for (std::size_t n = 0; n < ds.size(); ++n) {
    const auto a = ds.impression(n);
    const auto b = back.impression(n);
    EXPECT_EQ(a.context_id, b.context_id);
    EXPECT_EQ(a.candidate_set, b.candidate_set);
    EXPECT_EQ(a.actions, b.actions);
    EXPECT_EQ(a.logging_propensities, b.logging_propensities);
    EXPECT_EQ(a.rewards, b.rewards);
  }

  // A second save emits identical bytes.
  std::ostringstream again;
  save_jsonl(back, again);
  EXPECT_EQ(out.str(), again.str());
}

TEST(Jsonl, ErrorsNameTheLine) {
  const std::string bad_json = std::string(kRecord) + "\n{not json\n";
  EXPECT_NE(error_of(bad_json).find("line 2"), std::string::npos)
      << error_of(bad_json);

  const std::string missing_field =
      R"({"context_id":"c0","candidates":["a","b"],"actions":["a"],)"
      R"("rewards":[1.0]})";
  EXPECT_NE(error_of(missing_field).find("line 1"), std::string::npos)
      << error_of(missing_field);

  const std::string bad_propensity =
      R"({"context_id":"c0","candidates":["a","b"],"actions":["a"],)"
      R"("logging_propensities":[1.5],"rewards":[1.0]})";
  EXPECT_NE(error_of(bad_propensity).find("line 1"), std::string::npos)
      << error_of(bad_propensity);
}

TEST(Jsonl, ErrorsOnInconsistentRecords) {
  // Slate size changes on line 2.
  const std::string mixed_k =
      std::string(kRecord) + "\n" +
      R"({"context_id":"c0","candidates":["a","b","c"],"actions":["b"],)"
      R"("logging_propensities":[0.3333],"rewards":[1.0]})" + "\n";
  EXPECT_NE(error_of(mixed_k).find("line 2"), std::string::npos)
      << error_of(mixed_k);

  // Same context id, different candidate pool.
  const std::string mixed_pool =
      std::string(kRecord) + "\n" +
      R"({"context_id":"c0","candidates":["a","b","z"],)"
      R"("actions":["b","a"],"logging_propensities":[0.3333,0.5],)"
      R"("rewards":[1.0,0.0]})" + "\n";
  EXPECT_NE(error_of(mixed_pool).find("line 2"), std::string::npos)
      << error_of(mixed_pool);
}

TEST(Jsonl, ErrorsOnEmptyInput) {
  EXPECT_NE(error_of("\n\n").find("no impressions"), std::string::npos);
}

TEST(Jsonl, MissingFileNamesPath) {
  try {
    load_jsonl("/nonexistent/logs.jsonl");
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("logs.jsonl"), std::string::npos);
  }
}

}  // namespace
