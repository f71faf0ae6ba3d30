#pragma once

#include <json.hpp>

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace vsd {

enum class VerbClass { Motion, NonMotion };

std::string_view to_string(VerbClass c);
VerbClass parse_verb_class(std::string_view s);

struct SenseEntry {
    std::string sense_id;
    int rank = 1;  // 1 = first-listed sense
    std::string definition;
    std::vector<std::string> examples;
    bool depictable = true;

    bool operator==(const SenseEntry&) const = default;
};

struct VerbEntry {
    VerbClass verb_class = VerbClass::Motion;
    std::vector<SenseEntry> senses;  // sorted by rank

    bool operator==(const VerbEntry&) const = default;
};

// The sense dictionary: verb lemma -> ordered senses plus its motion class.
// Immutable once built, so concurrent reads are safe.
class SenseInventory {
public:
    SenseInventory() = default;

    // Adds a verb; sense ranks are assigned from the order of `senses`.
    // Validates ids and definitions, throws on violation.
    void add_verb(const std::string& lemma, VerbClass cls, std::vector<SenseEntry> senses);

    bool contains(std::string_view verb) const;
    const VerbEntry& verb(std::string_view verb) const;
    VerbClass verb_class(std::string_view verb) const;

    // Candidate senses of `verb` in rank order, optionally restricted to the
    // depictable ones. Throws UnknownVerb.
    std::vector<SenseEntry> senses(std::string_view verb, bool depictable_only) const;

    // Looks up one sense by id. Throws UnknownVerb / UnknownSense.
    const SenseEntry& sense(std::string_view verb, std::string_view sense_id) const;

    std::vector<std::string> verbs() const;
    std::size_t size() const { return verbs_.size(); }

    bool operator==(const SenseInventory&) const = default;

private:
    std::map<std::string, VerbEntry, std::less<>> verbs_;
};

SenseInventory inventory_from_json(const nlohmann::json& doc);
nlohmann::json inventory_to_json(const SenseInventory& inv);

SenseInventory parse_inventory(std::string_view text);
SenseInventory load_inventory(const std::filesystem::path& path);
void save_inventory(const SenseInventory& inv, const std::filesystem::path& path);

}  // namespace vsd
