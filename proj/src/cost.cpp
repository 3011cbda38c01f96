#include "annotator/cost.hpp"

#include <cctype>
#include <sstream>

#include "json.hpp"

#include "annotator/errors.hpp"

namespace annotator {

namespace {

constexpr std::int64_t kMicrosPerUnit = 1'000'000;

std::int64_t round_to_hundred(std::int64_t n) {
  return (n + 50) / 100 * 100;
}

}  // namespace

Money Money::parse(const std::string& text) {
  if (text.empty()) throw ConfigError("empty currency value");
  std::size_t pos = 0;
  bool negative = false;
  if (text[pos] == '-') {
    negative = true;
    ++pos;
  }
  std::int64_t whole = 0;
  bool any_digit = false;
  for (; pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]));
       ++pos) {
    whole = whole * 10 + (text[pos] - '0');
    any_digit = true;
  }
  std::int64_t frac = 0;
  std::int64_t scale = kMicrosPerUnit;
  if (pos < text.size() && text[pos] == '.') {
    ++pos;
    for (; pos < text.size() &&
           std::isdigit(static_cast<unsigned char>(text[pos]));
         ++pos) {
      if (scale == 1) {
        throw ConfigError("currency \"" + text +
                          "\" has more than 6 fraction digits");
      }
      scale /= 10;
      frac += (text[pos] - '0') * scale;
      any_digit = true;
    }
  }
  if (!any_digit || pos != text.size()) {
    throw ConfigError("bad currency value \"" + text + "\"");
  }
  const std::int64_t micros = whole * kMicrosPerUnit + frac;
  return Money(negative ? -micros : micros);
}

std::string Money::str() const {
  std::int64_t value = micros_;
  std::string sign;
  if (value < 0) {
    sign = "-";
    value = -value;
  }
  const std::int64_t whole = value / kMicrosPerUnit;
  std::int64_t frac = value % kMicrosPerUnit;
  std::string digits = std::to_string(frac);
  digits.insert(digits.begin(), 6 - digits.size(), '0');
  while (digits.size() > 2 && digits.back() == '0') digits.pop_back();
  return sign + std::to_string(whole) + "." + digits;
}

Money Money::per_thousand(std::int64_t count) const {
  const __int128 product = static_cast<__int128>(micros_) * count;
  const __int128 rounded =
      product >= 0 ? (product + 500) / 1000 : (product - 500) / 1000;
  return Money(static_cast<std::int64_t>(rounded));
}

std::string cost_mode_name(CostMode mode) {
  return mode == CostMode::HumanOnly ? "human_only" : "assisted";
}

void validate_cost_model(const CostModel& model) {
  if (model.human_cost_per_gold.micros() < 0 ||
      model.price_per_1k_tokens.micros() < 0) {
    throw ConfigError("monetary fields must be non-negative");
  }
  if (model.golds_per_item_human < 1 || model.golds_per_item_assisted < 1) {
    throw ConfigError("gold counts must be at least 1");
  }
  if (model.tokens_per_item < 1) {
    throw ConfigError("tokens_per_item must be at least 1");
  }
  if (model.split_pricing) {
    const SplitPricing& split = *model.split_pricing;
    if (split.prompt_per_1k.micros() < 0 ||
        split.completion_per_1k.micros() < 0) {
      throw ConfigError("split prices must be non-negative");
    }
    if (split.prompt_tokens_per_item < 0 ||
        split.completion_tokens_per_item < 0 ||
        split.prompt_tokens_per_item + split.completion_tokens_per_item < 1) {
      throw ConfigError("split token counts must total at least 1");
    }
  }
}

Money per_item_cost(const CostModel& model, CostMode mode) {
  validate_cost_model(model);
  if (mode == CostMode::HumanOnly) {
    return model.human_cost_per_gold * model.golds_per_item_human;
  }
  const Money human_part =
      model.human_cost_per_gold * model.golds_per_item_assisted;
  if (model.split_pricing) {
    const SplitPricing& split = *model.split_pricing;
    return human_part +
           split.prompt_per_1k.per_thousand(split.prompt_tokens_per_item) +
           split.completion_per_1k.per_thousand(
               split.completion_tokens_per_item);
  }
  return human_part + model.price_per_1k_tokens.per_thousand(model.tokens_per_item);
}

Money budget_for_items(const CostModel& model, std::int64_t n_items,
                       CostMode mode) {
  if (n_items < 0) throw ConfigError("item count must be non-negative");
  return per_item_cost(model, mode) * n_items;
}

std::int64_t coverage_under_budget(const CostModel& model, Money budget,
                                   CostMode mode) {
  if (budget.micros() < 0) throw ConfigError("budget must be non-negative");
  const Money per_item = per_item_cost(model, mode);
  if (per_item.micros() == 0) throw FreeAnnotationUndefinedError();
  return budget.micros() / per_item.micros();
}

CostReport compare_report(const CostModel& model, std::int64_t n_items) {
  if (n_items < 1) throw ConfigError("item count must be at least 1");
  CostReport report;
  report.n_items = n_items;
  report.reference_budget = budget_for_items(model, n_items, CostMode::Assisted);
  const CostMode modes[] = {CostMode::HumanOnly, CostMode::Assisted};
  for (std::size_t i = 0; i < 2; ++i) {
    CostReportRow& row = report.rows[i];
    row.mode = modes[i];
    row.per_item = per_item_cost(model, modes[i]);
    row.total = budget_for_items(model, n_items, modes[i]);
    row.coverage =
        coverage_under_budget(model, report.reference_budget, modes[i]);
    const std::int64_t approx = round_to_hundred(row.coverage);
    if (approx != row.coverage) row.coverage_approx = approx;
  }
  return report;
}

std::string render_cost_table(const CostReport& report) {
  std::ostringstream out;
  out << "items: " << report.n_items
      << "  reference budget (assisted): " << report.reference_budget.str()
      << "\n";
  out << "mode        per_item   total       coverage_at_budget\n";
  for (const CostReportRow& row : report.rows) {
    std::string coverage = std::to_string(row.coverage);
    if (row.coverage_approx) {
      coverage += " (~" + std::to_string(*row.coverage_approx) + ")";
    }
    std::string mode = cost_mode_name(row.mode);
    mode.resize(12, ' ');
    std::string per_item = row.per_item.str();
    per_item.resize(11, ' ');
    std::string total = row.total.str();
    total.resize(12, ' ');
    out << mode << per_item << total << coverage << "\n";
  }
  return out.str();
}

std::string render_cost_json(const CostReport& report) {
  nlohmann::ordered_json out;
  out["n_items"] = report.n_items;
  out["reference_budget"] = report.reference_budget.str();
  out["reference_budget_micros"] = report.reference_budget.micros();
  out["rows"] = nlohmann::ordered_json::array();
  for (const CostReportRow& row : report.rows) {
    nlohmann::ordered_json row_json;
    row_json["mode"] = cost_mode_name(row.mode);
    row_json["per_item"] = row.per_item.str();
    row_json["per_item_micros"] = row.per_item.micros();
    row_json["total"] = row.total.str();
    row_json["total_micros"] = row.total.micros();
    row_json["coverage_at_budget"] = row.coverage;
    if (row.coverage_approx) {
      row_json["coverage_approx"] = *row.coverage_approx;
    }
    out["rows"].push_back(std::move(row_json));
  }
  return out.dump(2) + "\n";
}

}  // namespace annotator
