#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "test_support.hpp"
#include "vsd/inventory.hpp"

using namespace vsd;
using vsd::test::error_code_of;

TEST_CASE("touch fixture loads six ranked senses")
{
    const SenseInventory inv = load_inventory(test::fixture("touch_inventory.json"));
    const auto senses = inv.senses("touch", false);
    REQUIRE(senses.size() == 6);
    CHECK(senses[0].rank == 1);
    CHECK(senses[0].definition.starts_with("make physical contact with"));
    for (std::size_t i = 0; i < senses.size(); ++i)
        CHECK(senses[i].rank == static_cast<int>(i) + 1);
    CHECK(inv.verb_class("touch") == VerbClass::Motion);
    CHECK(inv.verb_class("play") == VerbClass::NonMotion);
}

TEST_CASE("depictable filter keeps ranks 1 and 3 of touch")
{
    const SenseInventory inv = load_inventory(test::fixture("touch_inventory.json"));
    const auto senses = inv.senses("touch", true);
    REQUIRE(senses.size() == 2);
    CHECK(senses[0].rank == 1);
    CHECK(senses[1].rank == 3);
}

TEST_CASE("singleton inventory")
{
    const auto inv = parse_inventory(
        R"({"verbs": {"run": {"class": "motion", "senses": [{"id": "run.01", "definition": "move fast", "examples": [], "depictable": true}]}}})");
    CHECK(inv.size() == 1);
    CHECK(inv.senses("run", false).size() == 1);
}

TEST_CASE("load errors")
{
    SUBCASE("duplicate sense id")
    {
        CHECK(error_code_of([] {
                  parse_inventory(R"({"verbs": {"run": {"class": "motion", "senses": [
                {"id": "run.01", "definition": "a", "examples": [], "depictable": true},
                {"id": "run.01", "definition": "b", "examples": [], "depictable": true}]}}})");
              }) == ErrorCode::DuplicateId);
    }
    SUBCASE("empty definition")
    {
        CHECK(error_code_of([] {
                  parse_inventory(R"({"verbs": {"run": {"class": "motion", "senses": [
                {"id": "run.01", "definition": "", "examples": [], "depictable": true}]}}})");
              }) == ErrorCode::EmptyDefinition);
    }
    SUBCASE("syntax error names the line")
    {
        try {
            parse_inventory("{\n\"verbs\": {\n,}}");
            FAIL("expected a parse error");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::Parse);
            CHECK(std::string(e.what()).find("line 3") != std::string::npos);
        }
    }
    SUBCASE("field error names the field")
    {
        try {
            parse_inventory(R"({"verbs": {"run": {"class": "motion", "senses": [{"id": "run.01", "definition": "x", "examples": [], "depictable": "yes"}]}}})");
            FAIL("expected a parse error");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::Parse);
            CHECK(std::string(e.what()).find("verbs.run.senses[0].depictable") != std::string::npos);
        }
    }
    SUBCASE("bad class")
    {
        CHECK(error_code_of([] {
                  parse_inventory(R"({"verbs": {"run": {"class": "fast", "senses": [{"id": "a", "definition": "x", "examples": [], "depictable": true}]}}})");
              }) == ErrorCode::Validation);
    }
    SUBCASE("verb without senses")
    {
        CHECK(error_code_of([] { parse_inventory(R"({"verbs": {"run": {"class": "motion", "senses": []}}})"); }) ==
              ErrorCode::Validation);
    }
    SUBCASE("missing file")
    {
        CHECK(error_code_of([] { load_inventory("/nonexistent/inventory.json"); }) == ErrorCode::Io);
    }
}

TEST_CASE("unknown verb")
{
    const SenseInventory inv = load_inventory(test::fixture("touch_inventory.json"));
    CHECK(error_code_of([&] { inv.senses("zzz", false); }) == ErrorCode::UnknownVerb);
    CHECK(error_code_of([&] { inv.sense("touch", "touch.99"); }) == ErrorCode::UnknownSense);
}

TEST_CASE("senses output is a rank-increasing subsequence")
{
    const SenseInventory inv = load_inventory(test::fixture("touch_inventory.json"));
    for (const auto& verb : inv.verbs())
        for (bool dep : {false, true}) {
            const auto s = inv.senses(verb, dep);
            for (std::size_t i = 1; i < s.size(); ++i)
                CHECK(s[i - 1].rank < s[i].rank);
        }
}

TEST_CASE("save then load round-trips the fixture")
{
    test::TempDir dir;
    const SenseInventory inv = load_inventory(test::fixture("touch_inventory.json"));
    save_inventory(inv, dir / "inv.json");
    CHECK(load_inventory(dir / "inv.json") == inv);
}
