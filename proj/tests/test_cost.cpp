#include "doctest.h"

#include "annotator/cost.hpp"
#include "annotator/errors.hpp"
#include "annotator/rng.hpp"

using namespace annotator;

TEST_CASE("money parses and prints exact decimals") {
  CHECK(Money::parse("0.05").micros() == 50'000);
  CHECK(Money::parse("0.012").micros() == 12'000);
  CHECK(Money::parse("76.80").micros() == 76'800'000);
  CHECK(Money::parse("288").micros() == 288'000'000);
  CHECK(Money::parse("0.05").str() == "0.05");
  CHECK(Money::parse("76.8").str() == "76.80");
  CHECK(Money::parse("288").str() == "288.00");
  CHECK(Money::parse("0.012").str() == "0.012");
  CHECK_THROWS_AS(Money::parse("0.1234567"), ConfigError);
  CHECK_THROWS_AS(Money::parse("abc"), ConfigError);
}

TEST_CASE("per-item costs match the reference figures") {
  const CostModel defaults;
  CHECK(per_item_cost(defaults, CostMode::HumanOnly) == Money::parse("0.05"));
  CHECK(per_item_cost(defaults, CostMode::Assisted) == Money::parse("0.012"));

  CostModel free_tokens = defaults;
  free_tokens.price_per_1k_tokens = Money::parse("0");
  CHECK(per_item_cost(free_tokens, CostMode::Assisted) == Money::parse("0.01"));

  CostModel zero_tokens = defaults;
  zero_tokens.tokens_per_item = 0;
  CHECK_THROWS_AS(per_item_cost(zero_tokens, CostMode::Assisted), ConfigError);

  CostModel doubled = defaults;
  doubled.price_per_1k_tokens = Money::parse("0.004");
  CHECK(per_item_cost(doubled, CostMode::Assisted) == Money::parse("0.014"));
}

TEST_CASE("budgets scale linearly and match the reference totals") {
  const CostModel defaults;
  CHECK(budget_for_items(defaults, 6'400, CostMode::Assisted) ==
        Money::parse("76.80"));
  CHECK(budget_for_items(defaults, 24'000, CostMode::Assisted) ==
        Money::parse("288.00"));
  CHECK(budget_for_items(defaults, 0, CostMode::Assisted) == Money::parse("0"));

  SplitMix64 rng(11);
  for (int round = 0; round < 50; ++round) {
    const auto a = static_cast<std::int64_t>(rng.next() % 100'000);
    const auto b = static_cast<std::int64_t>(rng.next() % 100'000);
    const auto mode = round % 2 ? CostMode::Assisted : CostMode::HumanOnly;
    CHECK(budget_for_items(defaults, a + b, mode) ==
          budget_for_items(defaults, a, mode) +
              budget_for_items(defaults, b, mode));
  }
}

TEST_CASE("coverage under budget floors exactly") {
  const CostModel defaults;
  CHECK(coverage_under_budget(defaults, Money::parse("984.00"),
                              CostMode::HumanOnly) == 19'680);
  CHECK(coverage_under_budget(defaults, Money::parse("76.80"),
                              CostMode::HumanOnly) == 1'536);
  CHECK(coverage_under_budget(defaults, Money::parse("288.00"),
                              CostMode::HumanOnly) == 5'760);

  CostModel free = defaults;
  free.human_cost_per_gold = Money::parse("0");
  CHECK_THROWS_AS(
      coverage_under_budget(free, Money::parse("1.00"), CostMode::HumanOnly),
      FreeAnnotationUndefinedError);
}

TEST_CASE("coverage is monotonic and consistent with budgets") {
  const CostModel defaults;
  SplitMix64 rng(17);
  std::int64_t previous = -1;
  for (std::int64_t budget_cents = 0; budget_cents < 2'000;
       budget_cents += static_cast<std::int64_t>(1 + rng.next() % 100)) {
    const auto coverage = coverage_under_budget(
        defaults, Money::from_micros(budget_cents * 10'000),
        CostMode::Assisted);
    CHECK(coverage >= previous);
    previous = coverage;
  }
  for (const std::int64_t n : {1, 7, 100, 6'400, 82'000}) {
    CHECK(coverage_under_budget(
              defaults, budget_for_items(defaults, n, CostMode::Assisted),
              CostMode::Assisted) == n);
    CHECK(coverage_under_budget(
              defaults, budget_for_items(defaults, n, CostMode::HumanOnly),
              CostMode::HumanOnly) == n);
  }
}

TEST_CASE("compare_report reproduces the budget comparison") {
  const CostModel defaults;
  const CostReport report = compare_report(defaults, 82'000);
  CHECK(report.reference_budget == Money::parse("984.00"));
  CHECK(report.rows[0].mode == CostMode::HumanOnly);
  CHECK(report.rows[0].coverage == 19'680);
  CHECK(report.rows[1].mode == CostMode::Assisted);
  CHECK(report.rows[1].coverage == 82'000);

  const CostReport single = compare_report(defaults, 1);
  CHECK(single.rows[0].total == single.rows[0].per_item);
  CHECK(single.rows[1].total == single.rows[1].per_item);

  // Exact coverages that casual reporting rounds to hundreds get flagged.
  const CostReport flickr_small = compare_report(defaults, 6'400);
  CHECK(flickr_small.rows[0].coverage == 1'536);
  REQUIRE(flickr_small.rows[0].coverage_approx.has_value());
  CHECK(*flickr_small.rows[0].coverage_approx == 1'500);

  const CostReport flickr_large = compare_report(defaults, 24'000);
  CHECK(flickr_large.rows[0].coverage == 5'760);
  REQUIRE(flickr_large.rows[0].coverage_approx.has_value());
  CHECK(*flickr_large.rows[0].coverage_approx == 5'800);

  const std::string table = render_cost_table(report);
  CHECK(table.find("19680") != std::string::npos);
  const std::string json_text = render_cost_json(report);
  CHECK(json_text.find("\"coverage_at_budget\": 19680") != std::string::npos);
}

TEST_CASE("split pricing replaces the blended token price") {
  CostModel model;
  SplitPricing split;
  split.prompt_per_1k = Money::parse("0.001");
  split.completion_per_1k = Money::parse("0.002");
  split.prompt_tokens_per_item = 500;
  split.completion_tokens_per_item = 500;
  model.split_pricing = split;
  // 0.01 + 0.0005 + 0.001
  CHECK(per_item_cost(model, CostMode::Assisted) == Money::parse("0.0115"));
  CHECK(per_item_cost(model, CostMode::HumanOnly) == Money::parse("0.05"));
}
