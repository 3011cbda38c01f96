#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "doctest.h"
#include "json.hpp"

#include "annotator/corpus.hpp"
#include "annotator/errors.hpp"
#include "annotator/io.hpp"
#include "annotator/rng.hpp"
#include "annotator/version.hpp"
#include "support/test_util.hpp"

using namespace annotator;

namespace {

std::filesystem::path temp_dir() { return test_util::temp_dir("corpus"); }

AnnotatedRecord make_caption_record(const std::string& id,
                                    const std::string& gold_text,
                                    int n_silver) {
  AnnotatedRecord record;
  record.item.id = id;
  record.item.content_ref = "images/" + id + ".jpg";
  record.item.gold = make_annotation(gold_text, {"en", "English"},
                                     gold_provenance());
  for (int i = 0; i < n_silver; ++i) {
    SilverCaption caption;
    caption.annotation =
        make_annotation("silver " + std::to_string(i) + " for " + id,
                        {"lv", "Latvian"},
                        silver_provenance("gpt-4-0314", "captioning"));
    if (i > 0) caption.english_intermediate = "english " + std::to_string(i);
    record.captions.push_back(std::move(caption));
  }
  record.attempts = 1;
  record.usage = TokenUsage{120, 80, true};
  return record;
}

AnnotatedRecord make_excluded_record(const std::string& id) {
  AnnotatedRecord record;
  record.item.id = id;
  record.item.content_ref = "images/" + id + ".jpg";
  record.item.gold = make_annotation("gold for " + id, {"en", "English"},
                                     gold_provenance());
  record.excluded = true;
  record.exclusion_reason = "parse: missing section \"Translation\"";
  record.attempts = 3;
  return record;
}

}  // namespace

TEST_CASE("splitmix64 matches the published sequence") {
  SplitMix64 rng(0);
  CHECK(rng.next() == 0xE220A8397B1DCDAFULL);
  CHECK(rng.next() == 0x6E789E6AA1B965F4ULL);
  CHECK(rng.next() == 0x06C45D188009454FULL);
  SplitMix64 rng42(42);
  CHECK(rng42.next() == 0xBDD732262FEB6E95ULL);
}

TEST_CASE("fisher-yates order is pinned") {
  CHECK(shuffled_indices(5, 42) == std::vector<std::size_t>{1, 2, 0, 4, 3});
  CHECK(shuffled_indices(10, 7) ==
        std::vector<std::size_t>{8, 1, 5, 9, 0, 4, 3, 2, 6, 7});
}

TEST_CASE("load_corpus reads captioning records") {
  const auto dir = temp_dir();
  const auto path = dir / "in.json";
  atomic_write_file(path, R"([
    {"id": "img_001", "content_ref": "coco/000000237944.jpg",
     "gold_caption": "A person under a dryer wearing a towel"},
    {"id": "img_002", "content_ref": "coco/000000215878.jpg",
     "gold_caption": "A white microwave oven a pot holder and some books"}
  ])");
  const auto items = load_corpus(path, Task::Captioning);
  REQUIRE(items.size() == 2);
  CHECK(items[0].id == "img_001");
  CHECK(items[0].gold_caption().text ==
        "A person under a dryer wearing a towel");
  CHECK(items[0].gold_caption().language.code == "en");
  CHECK(items[0].gold_caption().provenance.kind == ProvenanceKind::Gold);
  CHECK(items[1].content_ref == "coco/000000215878.jpg");
}

TEST_CASE("load_corpus rejects duplicate ids") {
  const auto dir = temp_dir();
  const auto path = dir / "dup.json";
  atomic_write_file(path, R"([
    {"id": "img_7", "gold_caption": "first"},
    {"id": "img_7", "gold_caption": "second"}
  ])");
  CHECK_THROWS_WITH_AS(load_corpus(path, Task::Captioning),
                       "duplicate id \"img_7\"", DuplicateIdError);
}

TEST_CASE("load_corpus surfaces missing gold and bad JSON") {
  const auto dir = temp_dir();
  const auto missing = dir / "missing.json";
  atomic_write_file(missing, R"([{"id": "img_1"}])");
  CHECK_THROWS_AS(load_corpus(missing, Task::Captioning), MissingGoldError);

  const auto broken = dir / "broken.json";
  atomic_write_file(broken, "[{\"id\": ");
  CHECK_THROWS_AS(load_corpus(broken, Task::Captioning), MalformedInputError);

  const auto not_array = dir / "object.json";
  atomic_write_file(not_array, "{}");
  CHECK_THROWS_AS(load_corpus(not_array, Task::Captioning),
                  MalformedInputError);
}

TEST_CASE("load_corpus reads style-transfer pairs") {
  const auto dir = temp_dir();
  const auto path = dir / "tst.json";
  atomic_write_file(path, R"([
    {"id": "tst_001",
     "informal": "Then kiss her;) works every time bro!!!!",
     "formal": "Then kiss her, brother; that works every time."}
  ])");
  const auto items = load_corpus(path, Task::StyleTransfer);
  REQUIRE(items.size() == 1);
  CHECK(items[0].task() == Task::StyleTransfer);
  CHECK(items[0].gold_pair().informal.text ==
        "Then kiss her;) works every time bro!!!!");
  CHECK(items[0].gold_pair().formal.language.code == "en");
}

TEST_CASE("annotation invariants are enforced at construction") {
  CHECK_THROWS_AS(make_annotation("", {"en", "English"}, gold_provenance()),
                  InvariantViolationError);
  CHECK_THROWS_AS(
      make_annotation(" padded ", {"en", "English"}, gold_provenance()),
      InvariantViolationError);
  CHECK_THROWS_AS(
      make_annotation("two\nlines", {"en", "English"}, gold_provenance()),
      InvariantViolationError);
  CHECK_THROWS_AS(
      make_annotation("ok", {"en", "English"},
                      AnnotationProvenance{ProvenanceKind::Silver,
                                           std::nullopt, std::nullopt}),
      InvariantViolationError);
  CHECK_THROWS_AS(make_language("EN", "English"), ConfigError);
  CHECK_THROWS_AS(make_language("en", ""), ConfigError);
}

TEST_CASE("split sizes follow floor arithmetic with remainder to test") {
  const SplitSpec eight_one_one = parse_split_spec("8:1:1", 1);
  auto parts = split_indices(8000, eight_one_one);
  CHECK(parts[0].size() == 6400);
  CHECK(parts[1].size() == 800);
  CHECK(parts[2].size() == 800);

  const SplitSpec latvian = parse_split_spec("0.70:0.24:0.06", 1);
  parts = split_indices(3850, latvian);
  CHECK(parts[0].size() == 2695);
  CHECK(parts[1].size() == 924);
  CHECK(parts[2].size() == 231);

  parts = split_indices(1, eight_one_one);
  CHECK(parts[0].empty());
  CHECK(parts[1].empty());
  CHECK(parts[2].size() == 1);
}

TEST_CASE("split partition is exhaustive, disjoint, and deterministic") {
  SplitMix64 rng(2024);
  for (int round = 0; round < 20; ++round) {
    const std::size_t n = 1 + rng.next() % 500;
    const SplitSpec spec{{Ratio{rng.next() % 10, 1}, Ratio{rng.next() % 10, 1},
                          Ratio{1 + rng.next() % 10, 1}},
                         rng.next()};
    const auto parts = split_indices(n, spec);
    std::set<std::size_t> seen;
    for (const auto& part : parts) {
      for (const std::size_t i : part) {
        CHECK(i < n);
        CHECK(seen.insert(i).second);  // disjoint
      }
    }
    CHECK(seen.size() == n);  // exhaustive
    CHECK(split_indices(n, spec) == parts);  // deterministic
  }
}

TEST_CASE("split_dataset drops excluded records and partitions the rest") {
  std::vector<AnnotatedRecord> records;
  for (int i = 0; i < 10; ++i) {
    records.push_back(make_caption_record("item_" + std::to_string(i),
                                          "gold " + std::to_string(i), 2));
  }
  records.push_back(make_excluded_record("item_bad"));

  const SplitSpec spec = parse_split_spec("8:1:1", 7);
  const SplitResult split = split_dataset(records, spec);
  CHECK(split.train.size() == 8);
  CHECK(split.validation.size() == 1);
  CHECK(split.test.size() == 1);

  std::multiset<std::string> ids;
  for (const auto* part : {&split.train, &split.validation, &split.test}) {
    for (const AnnotatedRecord& record : *part) {
      CHECK_FALSE(record.excluded);
      ids.insert(record.item.id);
    }
  }
  CHECK(ids.size() == 10);
  CHECK(ids.count("item_bad") == 0);

  CHECK_THROWS_AS(
      split_dataset({make_excluded_record("only_excluded")}, spec),
      EmptyCorpusError);
}

TEST_CASE("parse_split_spec accepts integers and decimals") {
  const SplitSpec spec = parse_split_spec("0.5:0.25:0.25", 3);
  CHECK(spec.ratios[0].num == 5);
  CHECK(spec.ratios[0].den == 10);
  CHECK_THROWS_AS(parse_split_spec("1:2", 0), ConfigError);
  CHECK_THROWS_AS(parse_split_spec("0:0:0", 0), ConfigError);
  CHECK_THROWS_AS(parse_split_spec("a:b:c", 0), ConfigError);
}

TEST_CASE("save_dataset writes sorted records and a sidecar exclusion log") {
  const auto dir = temp_dir();
  const auto dataset_path = dir / "out.json";
  const auto log_path = dir / "out.exclusions.jsonl";

  std::vector<AnnotatedRecord> records;
  records.push_back(make_caption_record("zeta", "last by name", 2));
  records.push_back(make_excluded_record("mid"));
  records.push_back(make_caption_record("alpha", "first by name", 2));

  DatasetMeta meta;
  meta.task = Task::Captioning;
  meta.target_language = {"lv", "Latvian"};
  meta.created_at = "2024-01-01T00:00:00Z";
  meta.tool_version = kToolVersion;
  save_dataset(records, dataset_path, log_path, meta);

  const auto doc = nlohmann::json::parse(read_file(dataset_path));
  REQUIRE(doc.is_array());
  REQUIRE(doc.size() == 2);
  CHECK(doc[0]["id"] == "alpha");
  CHECK(doc[1]["id"] == "zeta");
  CHECK(doc[0]["meta"]["task"] == "captioning");
  CHECK(doc[0]["meta"]["target_language"]["code"] == "lv");

  const auto log = read_file(log_path);
  const auto line = nlohmann::json::parse(log);
  CHECK(line["id"] == "mid");
  CHECK(line["attempts"] == 3);
  CHECK(line["last_error"] == "parse: missing section \"Translation\"");
}

TEST_CASE("save_dataset accepts an empty record list") {
  const auto dir = temp_dir();
  DatasetMeta meta;
  meta.task = Task::Captioning;
  meta.target_language = {"ko", "Korean"};
  meta.created_at = "2024-01-01T00:00:00Z";
  meta.tool_version = kToolVersion;
  save_dataset({}, dir / "empty.json", dir / "empty.log", meta);
  CHECK(nlohmann::json::parse(read_file(dir / "empty.json")).empty());
}

TEST_CASE("save_dataset names the record violating invariants") {
  AnnotatedRecord bad = make_caption_record("bad_one", "gold", 1);
  bad.exclusion_reason = "reason without excluded flag";
  const auto dir = temp_dir();
  DatasetMeta meta;
  meta.task = Task::Captioning;
  meta.target_language = {"ko", "Korean"};
  meta.created_at = "x";
  meta.tool_version = kToolVersion;
  try {
    save_dataset({bad}, dir / "x.json", dir / "x.log", meta);
    FAIL("expected InvariantViolationError");
  } catch (const InvariantViolationError& error) {
    CHECK(error.id == "bad_one");
  }
}

TEST_CASE("dataset round-trip reproduces equal records") {
  const auto dir = temp_dir();
  const auto dataset_path = dir / "round.json";

  std::vector<AnnotatedRecord> records;
  for (int i = 0; i < 5; ++i) {
    records.push_back(make_caption_record("cap_" + std::to_string(i),
                                          "gold text " + std::to_string(i),
                                          1 + i % 3));
  }
  DatasetMeta meta;
  meta.task = Task::Captioning;
  meta.target_language = {"lv", "Latvian"};
  meta.created_at = "2024-01-01T00:00:00Z";
  meta.tool_version = kToolVersion;
  save_dataset(records, dataset_path, dir / "round.log", meta);

  const LoadedDataset loaded = load_dataset(dataset_path);
  REQUIRE(loaded.records.size() == records.size());
  std::sort(records.begin(), records.end(),
            [](const auto& a, const auto& b) { return a.item.id < b.item.id; });
  for (std::size_t i = 0; i < records.size(); ++i) {
    CHECK(loaded.records[i] == records[i]);
  }
  CHECK(loaded.meta.target_language.code == "lv");
}

TEST_CASE("style-transfer dataset round-trip keeps pair structure") {
  const auto dir = temp_dir();
  AnnotatedRecord record;
  record.item.id = "tst_1";
  StylePair gold;
  gold.informal = make_annotation("hey buddy how r u", {"en", "English"},
                                  gold_provenance());
  gold.formal = make_annotation("Hello, friend. How are you?",
                                {"en", "English"}, gold_provenance());
  record.item.gold = gold;
  const auto silver = [&](const std::string& text) {
    return make_annotation(text, {"fr", "French"},
                           silver_provenance("gpt-4-0314", "tst-fr"));
  };
  record.style_pairs.push_back(
      StylePair{silver("salut mec ça va"), silver("Bonjour, ami.")});
  record.style_pairs.push_back(
      StylePair{silver("coucou!"), silver("Comment allez-vous ?")});
  record.attempts = 2;
  record.usage = TokenUsage{300, 150, true};

  DatasetMeta meta;
  meta.task = Task::StyleTransfer;
  meta.target_language = {"fr", "French"};
  meta.created_at = "2024-01-01T00:00:00Z";
  meta.tool_version = kToolVersion;
  save_dataset({record}, dir / "tst.json", dir / "tst.log", meta);

  const LoadedDataset loaded = load_dataset(dir / "tst.json");
  REQUIRE(loaded.records.size() == 1);
  CHECK(loaded.records[0] == record);
}
