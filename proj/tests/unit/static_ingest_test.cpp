#include <doctest.h>

#include <random>

#include "charonette/error.hpp"
#include "charonette/image_header.hpp"
#include "charonette/static_ingest.hpp"
#include "charonette/zip.hpp"
#include "fixtures.hpp"

using namespace charonette;
using charonette::testing::read_fixture;

namespace {

const std::string kExampleRaw =
    "[/EN#1/people A girl] in [/EN#2/bodyparts a ponytail] is tying [/EN#3/clothing her shoes] with "
    "[/EN#4/bodyparts a bent knee] while on [/EN#5/scene a grassy field].";

std::string boxes_xml(const std::string& objects, const std::string& file = "a.jpg") {
  return "<boxes><annotation><filename>" + file + "</filename>" + objects + "</annotation></boxes>";
}

std::string object_xml(const std::string& name, int xmin, int ymin, int xmax, int ymax) {
  return "<object><name>" + name + "</name><bndbox><xmin>" + std::to_string(xmin) + "</xmin><ymin>" +
         std::to_string(ymin) + "</ymin><xmax>" + std::to_string(xmax) + "</xmax><ymax>" + std::to_string(ymax) +
         "</ymax></bndbox></object>";
}

std::string bundle_zip(const std::string& sentences, const std::string& boxes, bool with_image = true) {
  std::vector<ZipEntry> entries;
  if (with_image) entries.push_back({"images/a.jpg", minimal_jpeg_header(100, 80)});
  if (!sentences.empty()) entries.push_back({"sentences.txt", sentences});
  if (!boxes.empty()) entries.push_back({"boxes.xml", boxes});
  return write_zip(entries);
}

ErrorCode open_error(const std::string& zip, std::string* message = nullptr) {
  try {
    open_bundle(zip);
  } catch (const Error& e) {
    if (message != nullptr) *message = e.what();
    return e.code();
  }
  FAIL("bundle opened");
  return ErrorCode::not_found;
}

ErrorCode caption_error(std::string_view raw) {
  try {
    parse_caption_chains(raw);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("caption parsed");
  return ErrorCode::not_found;
}

}  // namespace

TEST_CASE("zip writer and reader round trip") {
  std::vector<ZipEntry> entries = {{"a.txt", "hello"}, {"dir/b.bin", std::string(5000, '\x01')}, {"empty", ""}};
  CHECK(read_zip(write_zip(entries)) == entries);
  CHECK(write_zip(entries) == write_zip(entries));
  CHECK_THROWS_AS(read_zip("not a zip"), Error);
  std::string damaged = write_zip(entries);
  damaged[40] ^= 0x55;
  CHECK_THROWS_AS(read_zip(damaged), Error);
}

TEST_CASE("jpeg header dimensions") {
  const auto size = jpeg_dimensions(minimal_jpeg_header(640, 360));
  CHECK(size.width == 640);
  CHECK(size.height == 360);
  CHECK_THROWS_AS(jpeg_dimensions("GIF89a"), Error);
  const auto girl = jpeg_dimensions(read_fixture("static_bundle/images/girl.jpg"));
  CHECK(girl.width == 500);
  CHECK(girl.height == 375);
}

TEST_CASE("fixture bundle opens with its images, captions and boxes") {
  const CorpusBundle bundle = open_bundle(read_fixture("static_bundle.zip"), "fixture");
  REQUIRE(bundle.images.size() == 2);
  CHECK(bundle.images[0].file_name == "drink.jpg");
  CHECK(bundle.images[1].file_name == "girl.jpg");
  CHECK(bundle.images[1].width == 500);
  CHECK(bundle.sentences_raw.size() == 2);
  REQUIRE(bundle.boxes_raw.size() == 4);
  // Inclusive 120..309 becomes half-open 120..310.
  const auto& girl_box = bundle.boxes_raw[2];
  CHECK(girl_box.image_ref == "girl.jpg");
  CHECK(girl_box.entity_id == 1);
  CHECK(girl_box.box == Box{120, 40, 310, 360});
  CHECK(girl_box.class_label == "person");
}

TEST_CASE("missing bundle parts") {
  const std::string sentences = "a.jpg#0\tA dog .\n";
  const std::string boxes = boxes_xml("");
  std::string message;
  CHECK(open_error(bundle_zip("", boxes), &message) == ErrorCode::missing_bundle_part);
  CHECK(message == "sentences file not found");
  CHECK(open_error(bundle_zip(sentences, ""), &message) == ErrorCode::missing_bundle_part);
  CHECK(message == "boxes file not found");
  CHECK(open_error(bundle_zip(sentences, boxes, false)) == ErrorCode::missing_bundle_part);
}

TEST_CASE("malformed boxes") {
  const std::string sentences = "a.jpg#0\tA dog .\n";
  CHECK(open_error(bundle_zip(sentences, boxes_xml(object_xml("1", 50, 10, 40, 20)))) == ErrorCode::malformed_box);
  CHECK(open_error(bundle_zip(sentences, boxes_xml(object_xml("1", 10, 10, 10, 20)))) != ErrorCode::not_found);
  CHECK(open_error(bundle_zip(sentences, boxes_xml(object_xml("1", 10, 10, 100, 20)))) == ErrorCode::malformed_box);
  CHECK(open_error(bundle_zip(sentences, boxes_xml(object_xml("x", 10, 10, 20, 20)))) == ErrorCode::malformed_box);
  CHECK(open_error(bundle_zip(sentences, boxes_xml("", "b.jpg"))) == ErrorCode::malformed_box);
  CHECK(open_error(bundle_zip(sentences, "<boxes><annotation>")) == ErrorCode::parse_error);
}

TEST_CASE("unreadable image") {
  const std::string zip = write_zip(std::vector<ZipEntry>{
      {"images/a.jpg", "not a jpeg"}, {"sentences.txt", "a.jpg#0\tx\n"}, {"boxes.xml", boxes_xml("")}});
  CHECK(open_error(zip) == ErrorCode::unreadable_image);
}

TEST_CASE("caption markup is stripped into entity spans") {
  const ParsedCaption parsed = parse_caption_chains(kExampleRaw);
  CHECK(parsed.sentence == "A girl in a ponytail is tying her shoes with a bent knee while on a grassy field.");
  REQUIRE(parsed.mentions.size() == 5);
  const std::vector<std::string> phrases = {"A girl", "a ponytail", "her shoes", "a bent knee", "a grassy field"};
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(parsed.mentions[i].entity_id == static_cast<std::int64_t>(i + 1));
    CHECK(parsed.mentions[i].phrase == phrases[i]);
    CHECK(utf8_substr(parsed.sentence, parsed.mentions[i].span) == phrases[i]);
  }
  CHECK(parsed.mentions[0].span == Span{0, 6});
  CHECK(parsed.mentions[0].entity_type == "people");
  CHECK(parsed.mentions[4].entity_type == "scene");
}

TEST_CASE("caption without markup is unchanged") {
  const ParsedCaption parsed = parse_caption_chains("Uma menina amarrando os sapatos.");
  CHECK(parsed.sentence == "Uma menina amarrando os sapatos.");
  CHECK(parsed.mentions.empty());
}

TEST_CASE("spans count scalar values, not bytes") {
  const ParsedCaption parsed = parse_caption_chains("Ação de [/EN#9/people uma criança] aqui");
  REQUIRE(parsed.mentions.size() == 1);
  CHECK(parsed.mentions[0].span == Span{8, 19});
  CHECK(utf8_substr(parsed.sentence, parsed.mentions[0].span) == "uma criança");
}

TEST_CASE("markup errors") {
  // Hand derivation: the inner "[/EN#" opens before the outer chain's "]".
  CHECK(caption_error("[/EN#1/people A [/EN#2/people girl] here]") == ErrorCode::nested_markup);
  CHECK(caption_error("[/EN#1/people A girl") == ErrorCode::unbalanced_markup);
  CHECK(caption_error("[/EN#x/people A girl]") == ErrorCode::invalid_entity_id);
  CHECK(caption_error("[/EN#1/people]") != ErrorCode::not_found);
}

TEST_CASE("random markup round trips its phrases") {
  std::mt19937 rng(11);
  const std::vector<std::string> words = {"a", "girl", "ponytail", "né", "copo", "bebe", "field"};
  for (int round = 0; round < 200; ++round) {
    std::string raw;
    std::vector<std::string> phrases;
    const int pieces = 1 + static_cast<int>(rng() % 6);
    for (int p = 0; p < pieces; ++p) {
      std::string phrase = words[rng() % words.size()];
      if (rng() % 2 == 0) phrase += " " + words[rng() % words.size()];
      if (rng() % 2 == 0) {
        raw += "[/EN#" + std::to_string(p) + "/other " + phrase + "] ";
        phrases.push_back(phrase);
      } else {
        raw += phrase + " ";
      }
    }
    const ParsedCaption parsed = parse_caption_chains(raw);
    REQUIRE(parsed.mentions.size() == phrases.size());
    for (std::size_t i = 0; i < phrases.size(); ++i) {
      CHECK(utf8_substr(parsed.sentence, parsed.mentions[i].span) == phrases[i]);
      CHECK(parsed.mentions[i].phrase == phrases[i]);
    }
  }
}

TEST_CASE("linking the fixture bundle") {
  const CorpusBundle bundle = open_bundle(read_fixture("static_bundle.zip"), "fixture");
  const LinkResult result = link_entities(bundle);
  REQUIRE(result.documents.size() == 2);
  CHECK(result.orphan_boxes.empty());

  // Documents follow caption order.
  const CorpusDocument& drink = result.documents[1];
  CHECK(drink.image_ref == "drink.jpg");
  REQUIRE(drink.chains.size() == 2);
  const EntityChain& seven = drink.chains[0];
  CHECK(seven.entity_id == 7);
  CHECK(seven.boxes.size() == 1);
  CHECK(seven.phrase_spans.size() == 1);
  CHECK(seven.linkage() == ChainLinkage::linked);

  const CorpusDocument& girl = result.documents[0];
  REQUIRE(girl.chains.size() == 5);
  CHECK(girl.chains[0].linkage() == ChainLinkage::linked);
  CHECK(girl.chains[1].linkage() == ChainLinkage::phrase_only);
  CHECK(girl.image_width == 500);
}

TEST_CASE("two boxes sharing an entity id form one chain") {
  const std::string zip = bundle_zip("a.jpg#0\t[/EN#4/people Two men] talk .\n",
                                     boxes_xml(object_xml("4", 0, 0, 9, 9) + object_xml("4", 20, 20, 29, 29) +
                                               object_xml("5", 30, 30, 39, 39)));
  const LinkResult result = link_entities(open_bundle(zip));
  REQUIRE(result.documents.size() == 1);
  const auto& chains = result.documents[0].chains;
  REQUIRE(chains.size() == 2);
  CHECK(chains[0].entity_id == 4);
  CHECK(chains[0].boxes.size() == 2);
  CHECK(chains[0].linkage() == ChainLinkage::linked);
  CHECK(chains[1].entity_id == 5);
  CHECK(chains[1].linkage() == ChainLinkage::box_only);
}

TEST_CASE("several names on one box expand to one box per entity") {
  const std::string zip = bundle_zip(
      "a.jpg#0\t[/EN#1/people A man] and [/EN#2/people a woman] .\n",
      boxes_xml("<object><name>1</name><name>2</name><bndbox><xmin>0</xmin><ymin>0</ymin><xmax>9</xmax>"
                "<ymax>9</ymax></bndbox></object>"));
  const CorpusBundle bundle = open_bundle(zip);
  CHECK(bundle.boxes_raw.size() == 2);
}

TEST_CASE("linking never drops a box or a span") {
  const std::string zip =
      write_zip(std::vector<ZipEntry>{{"images/a.jpg", minimal_jpeg_header(100, 80)},
                                      {"images/b.jpg", minimal_jpeg_header(100, 80)},
                                      {"sentences.txt", "a.jpg#0\t[/EN#1/x one] [/EN#2/y two]\n"
                                                        "a.jpg#1\t[/EN#1/x uno]\n"},
                                      {"boxes.xml", "<boxes><annotation><filename>a.jpg</filename>" +
                                                        object_xml("1", 0, 0, 9, 9) + object_xml("3", 0, 0, 9, 9) +
                                                        "</annotation><annotation><filename>b.jpg</filename>" +
                                                        object_xml("1", 0, 0, 9, 9) + "</annotation></boxes>"}});
  const CorpusBundle bundle = open_bundle(zip);
  const LinkResult result = link_entities(bundle);
  CHECK(result.documents.size() == 2);
  CHECK(result.orphan_boxes.size() == 1);
  // Both captions sit on a.jpg, so each document carries every a.jpg box.
  std::size_t spans = 0;
  for (const auto& doc : result.documents) {
    std::size_t boxes = 0;
    for (const auto& chain : doc.chains) {
      boxes += chain.boxes.size();
      spans += chain.phrase_spans.size();
    }
    CHECK(boxes + result.orphan_boxes.size() == bundle.boxes_raw.size());
  }
  CHECK(spans == 3);
}

TEST_CASE("write_bundle then open_bundle is the identity") {
  const CorpusBundle original = open_bundle(read_fixture("static_bundle.zip"), "fixture");
  const CorpusBundle again = open_bundle(write_bundle(original), "fixture");
  CHECK(again == original);

  CorpusBundle synthetic;
  synthetic.name = "s";
  synthetic.images = {{"x.jpg", 64, 48, minimal_jpeg_header(64, 48)}};
  synthetic.sentences_raw = {{"x.jpg", 0, "[/EN#3/animals A cat] sits ."}};
  synthetic.boxes_raw = {{Box{1, 2, 30, 40}, "x.jpg", 3, "cat"}};
  CHECK(open_bundle(write_bundle(synthetic), "s") == synthetic);
}
