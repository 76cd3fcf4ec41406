#include <gtest/gtest.h>

#include <vector>

#include "slateval/errors.hpp"
#include "slateval/types.hpp"

namespace {

using namespace slateval;

LoggedImpression make_impression() {
  LoggedImpression imp;
  imp.context_id = "ctx";
  imp.candidate_set = {"a", "b", "c", "d"};
  imp.actions = {"b", "a"};
  imp.logging_propensities = {0.25, 1.0 / 3.0};
  imp.rewards = {1.0, 0.0};
  return imp;
}

TEST(ValidateImpression, AcceptsWellFormed) {
  EXPECT_NO_THROW(validate_impression(make_impression()));
}

TEST(ValidateImpression, RejectsLengthMismatch) {
  auto imp = make_impression();
  imp.rewards.push_back(0.0);
  EXPECT_THROW(validate_impression(imp), ValidationError);
}

TEST(ValidateImpression, RejectsEmptySlate) {
  auto imp = make_impression();
  imp.actions.clear();
  imp.logging_propensities.clear();
  imp.rewards.clear();
  EXPECT_THROW(validate_impression(imp), ValidationError);
}

TEST(ValidateImpression, RejectsUnknownAction) {
  auto imp = make_impression();
  imp.actions[1] = "zz";
  EXPECT_THROW(validate_impression(imp), ValidationError);
}

TEST(ValidateImpression, RejectsRepeatedAction) {
  auto imp = make_impression();
  imp.actions[1] = "b";
  EXPECT_THROW(validate_impression(imp), ValidationError);
}

TEST(ValidateImpression, RejectsDuplicateCandidates) {
  auto imp = make_impression();
  imp.candidate_set[3] = "a";
  EXPECT_THROW(validate_impression(imp), ValidationError);
}

TEST(ValidateImpression, RejectsBadPropensities) {
  auto imp = make_impression();
  imp.logging_propensities[0] = 0.0;
  EXPECT_THROW(validate_impression(imp), ValidationError);
  imp.logging_propensities[0] = 1.5;
  EXPECT_THROW(validate_impression(imp), ValidationError);
  imp.logging_propensities[0] = -0.1;
  EXPECT_THROW(validate_impression(imp), ValidationError);
  imp.logging_propensities[0] = kMinPropensity;  // smallest admissible
  EXPECT_NO_THROW(validate_impression(imp));
}

TEST(ValidateImpression, RejectsBadRewards) {
  auto imp = make_impression();
  imp.rewards[0] = -1.0;
  EXPECT_THROW(validate_impression(imp), ValidationError);
  imp.rewards[0] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(validate_impression(imp), ValidationError);
}

TEST(ValidateImpression, RejectsSlateLargerThanPool) {
  LoggedImpression imp;
  imp.context_id = "ctx";
  imp.candidate_set = {"a", "b"};
  imp.actions = {"a", "b", "a"};
  imp.logging_propensities = {0.5, 1.0, 1.0};
  imp.rewards = {0.0, 0.0, 0.0};
  EXPECT_THROW(validate_impression(imp), ValidationError);
}

TEST(Dataset, InternsContextsAndColumns) {
  auto first = make_impression();
  auto second = make_impression();
  second.context_id = "other";
  second.actions = {"d", "c"};
  second.logging_propensities = {0.25, 0.5};
  second.rewards = {0.0, 1.0};
  auto third = make_impression();  // same context as first

  const Dataset ds({first, second, third});
  ASSERT_EQ(ds.size(), 3u);
  EXPECT_EQ(ds.slate_size(), 2);
  EXPECT_EQ(ds.contexts().size(), 2u);
  EXPECT_EQ(ds.context(0).id, "ctx");
  EXPECT_EQ(ds.context(1).id, "other");
  EXPECT_EQ(ds.context_index(0), ds.context_index(2));

  // "b" is index 1, "a" index 0 in candidate order.
  EXPECT_EQ(ds.actions(0)[0], 1);
  EXPECT_EQ(ds.actions(0)[1], 0);
  EXPECT_EQ(ds.actions(1)[0], 3);
  EXPECT_DOUBLE_EQ(ds.logging_propensities(1)[1], 0.5);
  EXPECT_DOUBLE_EQ(ds.rewards(2)[0], 1.0);
  EXPECT_DOUBLE_EQ(ds.reward_sum(0), 1.0);
  ASSERT_EQ(ds.rewards_flat().size(), 6u);
}

TEST(Dataset, RoundTripsImpression) {
  auto imp = make_impression();
  const Dataset ds({imp});
  const LoggedImpression back = ds.impression(0);
  EXPECT_EQ(back.context_id, imp.context_id);
  EXPECT_EQ(back.candidate_set, imp.candidate_set);
  EXPECT_EQ(back.actions, imp.actions);
  EXPECT_EQ(back.logging_propensities, imp.logging_propensities);
  EXPECT_EQ(back.rewards, imp.rewards);
}

TEST(Dataset, RejectsInconsistentCandidateSets) {
  auto first = make_impression();
  auto second = make_impression();
  second.candidate_set = {"a", "b", "c", "e"};
  second.actions = {"b", "a"};
  EXPECT_THROW(Dataset({first, second}), ValidationError);
}

TEST(Dataset, RejectsMixedSlateSizes) {
  auto first = make_impression();
  auto second = make_impression();
  second.actions = {"b", "a", "c"};
  second.logging_propensities = {0.25, 1.0 / 3.0, 0.5};
  second.rewards = {0.0, 0.0, 0.0};
  EXPECT_THROW(Dataset({first, second}), ValidationError);
}

TEST(Dataset, RejectsEmpty) {
  EXPECT_THROW(Dataset(std::vector<LoggedImpression>{}), ValidationError);
}

TEST(Dataset, Prefix) {
  std::vector<LoggedImpression> imps;
  for (int i = 0; i < 5; ++i) {
    auto imp = make_impression();
    imp.rewards[0] = static_cast<double>(i);
    imps.push_back(imp);
  }
  const Dataset ds(imps);
  const Dataset head = ds.prefix(2);
  ASSERT_EQ(head.size(), 2u);
  EXPECT_DOUBLE_EQ(head.rewards(1)[0], 1.0);
  EXPECT_THROW(ds.prefix(0), ValidationError);
  EXPECT_THROW(ds.prefix(6), ValidationError);
}

TEST(Dataset, IndexedConstructorValidates) {
  std::vector<Context> ctxs{{"c0", {"x", "y", "z"}}};
  // Happy path.
  EXPECT_NO_THROW(Dataset(ctxs, 2, {0}, {2, 0}, {1.0 / 3.0, 0.5}, {1.0, 0.0}));
  // Out-of-range context index.
  EXPECT_THROW(Dataset(ctxs, 2, {1}, {2, 0}, {1.0 / 3.0, 0.5}, {1.0, 0.0}),
               ValidationError);
  // Repeated action within a slate.
  EXPECT_THROW(Dataset(ctxs, 2, {0}, {2, 2}, {1.0 / 3.0, 0.5}, {1.0, 0.0}),
               ValidationError);
  // Column length mismatch.
  EXPECT_THROW(Dataset(ctxs, 2, {0}, {2, 0, 1}, {1.0 / 3.0, 0.5}, {1.0, 0.0}),
               ValidationError);
}

}  // namespace
