#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>

namespace annotator {

// Currency in integer micro-units. All arithmetic is exact decimal; binary
// floating point never touches money.
class Money {
 public:
  Money() = default;

  static Money from_micros(std::int64_t micros) { return Money(micros); }
  // Parses decimal strings like "0.012" or "76.80" (≤ 6 fraction digits).
  static Money parse(const std::string& text);

  std::int64_t micros() const { return micros_; }
  std::string str() const;

  Money operator+(Money other) const { return Money(micros_ + other.micros_); }
  Money operator-(Money other) const { return Money(micros_ - other.micros_); }
  Money operator*(std::int64_t n) const { return Money(micros_ * n); }
  // price-per-1000 × count / 1000, rounded half up to the micro-unit.
  Money per_thousand(std::int64_t count) const;

  auto operator<=>(const Money&) const = default;

 private:
  explicit Money(std::int64_t micros) : micros_(micros) {}
  std::int64_t micros_ = 0;
};

enum class CostMode { HumanOnly, Assisted };

std::string cost_mode_name(CostMode mode);

struct SplitPricing {
  Money prompt_per_1k;
  Money completion_per_1k;
  std::int64_t prompt_tokens_per_item = 500;
  std::int64_t completion_tokens_per_item = 500;
};

struct CostModel {
  Money human_cost_per_gold = Money::from_micros(10'000);     // 0.01
  int golds_per_item_human = 5;
  Money price_per_1k_tokens = Money::from_micros(2'000);      // 0.002
  std::int64_t tokens_per_item = 1000;
  int golds_per_item_assisted = 1;
  std::optional<SplitPricing> split_pricing;  // replaces the blended price
};

void validate_cost_model(const CostModel& model);

Money per_item_cost(const CostModel& model, CostMode mode);

Money budget_for_items(const CostModel& model, std::int64_t n_items,
                       CostMode mode);

// floor(budget / per-item cost); throws FreeAnnotationUndefinedError when
// the per-item cost is zero.
std::int64_t coverage_under_budget(const CostModel& model, Money budget,
                                   CostMode mode);

struct CostReportRow {
  CostMode mode = CostMode::HumanOnly;
  Money per_item;
  Money total;               // cost of annotating n_items in this mode
  std::int64_t coverage = 0; // items affordable under the reference budget
  // Nearest-hundred approximation, present only when it differs from the
  // exact coverage; flags figures that casual reporting tends to round.
  std::optional<std::int64_t> coverage_approx;
};

struct CostReport {
  std::int64_t n_items = 0;
  Money reference_budget;  // the assisted-mode total for n_items
  std::array<CostReportRow, 2> rows;  // HumanOnly, Assisted
};

CostReport compare_report(const CostModel& model, std::int64_t n_items);

std::string render_cost_table(const CostReport& report);
std::string render_cost_json(const CostReport& report);

}  // namespace annotator
