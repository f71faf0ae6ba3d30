#include "vsd/inventory.hpp"

#include "vsd/error.hpp"
#include "vsd/io.hpp"

#include <algorithm>
#include <set>

namespace vsd {

using nlohmann::json;

std::string_view to_string(VerbClass c)
{
    return c == VerbClass::Motion ? "motion" : "nonmotion";
}

VerbClass parse_verb_class(std::string_view s)
{
    if (s == "motion")
        return VerbClass::Motion;
    if (s == "nonmotion")
        return VerbClass::NonMotion;
    throw Error(ErrorCode::Validation, "verb class must be \"motion\" or \"nonmotion\", got \"" +
                                           std::string(s) + "\"");
}

void SenseInventory::add_verb(const std::string& lemma, VerbClass cls, std::vector<SenseEntry> senses)
{
    if (lemma.empty())
        throw Error(ErrorCode::Validation, "empty verb lemma");
    if (verbs_.contains(lemma))
        throw Error(ErrorCode::DuplicateId, "verb \"" + lemma + "\" listed twice");
    if (senses.empty())
        throw Error(ErrorCode::Validation, "verb \"" + lemma + "\" has no senses");

    std::set<std::string, std::less<>> seen;
    for (std::size_t i = 0; i < senses.size(); ++i) {
        SenseEntry& s = senses[i];
        s.rank = static_cast<int>(i) + 1;
        if (s.sense_id.empty())
            throw Error(ErrorCode::Validation, "verbs." + lemma + ".senses[" + std::to_string(i) + "].id is empty");
        if (!seen.insert(s.sense_id).second)
            throw Error(ErrorCode::DuplicateId, "verbs." + lemma + ": sense id \"" + s.sense_id + "\" repeated");
        if (s.definition.empty())
            throw Error(ErrorCode::EmptyDefinition, "verbs." + lemma + ".senses[" + std::to_string(i) + "] (" +
                                                        s.sense_id + ")");
    }
    verbs_.emplace(lemma, VerbEntry{cls, std::move(senses)});
}

bool SenseInventory::contains(std::string_view verb) const
{
    return verbs_.find(verb) != verbs_.end();
}

const VerbEntry& SenseInventory::verb(std::string_view verb) const
{
    auto it = verbs_.find(verb);
    if (it == verbs_.end())
        throw Error(ErrorCode::UnknownVerb, std::string(verb));
    return it->second;
}

VerbClass SenseInventory::verb_class(std::string_view v) const
{
    return verb(v).verb_class;
}

std::vector<SenseEntry> SenseInventory::senses(std::string_view v, bool depictable_only) const
{
    const VerbEntry& entry = verb(v);
    std::vector<SenseEntry> out;
    out.reserve(entry.senses.size());
    for (const SenseEntry& s : entry.senses)
        if (!depictable_only || s.depictable)
            out.push_back(s);
    return out;
}

const SenseEntry& SenseInventory::sense(std::string_view v, std::string_view sense_id) const
{
    const VerbEntry& entry = verb(v);
    auto it = std::find_if(entry.senses.begin(), entry.senses.end(),
                           [&](const SenseEntry& s) { return s.sense_id == sense_id; });
    if (it == entry.senses.end())
        throw Error(ErrorCode::UnknownSense, std::string(v) + "/" + std::string(sense_id));
    return *it;
}

std::vector<std::string> SenseInventory::verbs() const
{
    std::vector<std::string> out;
    out.reserve(verbs_.size());
    for (const auto& [lemma, _] : verbs_)
        out.push_back(lemma);
    return out;
}

namespace {

const json& field(const json& obj, const char* key, const std::string& where)
{
    if (!obj.is_object())
        throw Error(ErrorCode::Parse, where + ": expected an object");
    auto it = obj.find(key);
    if (it == obj.end())
        throw Error(ErrorCode::Parse, where + "." + key + ": missing");
    return *it;
}

std::string string_field(const json& obj, const char* key, const std::string& where)
{
    const json& v = field(obj, key, where);
    if (!v.is_string())
        throw Error(ErrorCode::Parse, where + "." + key + ": expected a string");
    return v.get<std::string>();
}

}  // namespace

SenseInventory inventory_from_json(const json& doc)
{
    const json& verbs = field(doc, "verbs", "<root>");
    if (!verbs.is_object())
        throw Error(ErrorCode::Parse, "verbs: expected an object");

    SenseInventory inv;
    for (const auto& [lemma, body] : verbs.items()) {
        const std::string where = "verbs." + lemma;
        const VerbClass cls = parse_verb_class(string_field(body, "class", where));
        const json& senses = field(body, "senses", where);
        if (!senses.is_array())
            throw Error(ErrorCode::Parse, where + ".senses: expected an array");

        std::vector<SenseEntry> entries;
        for (std::size_t i = 0; i < senses.size(); ++i) {
            const std::string sw = where + ".senses[" + std::to_string(i) + "]";
            const json& s = senses[i];
            SenseEntry e;
            e.sense_id = string_field(s, "id", sw);
            e.definition = string_field(s, "definition", sw);
            const json& ex = field(s, "examples", sw);
            if (!ex.is_array())
                throw Error(ErrorCode::Parse, sw + ".examples: expected an array of strings");
            for (const json& x : ex) {
                if (!x.is_string())
                    throw Error(ErrorCode::Parse, sw + ".examples: expected an array of strings");
                e.examples.push_back(x.get<std::string>());
            }
            const json& dep = field(s, "depictable", sw);
            if (!dep.is_boolean())
                throw Error(ErrorCode::Parse, sw + ".depictable: expected a boolean");
            e.depictable = dep.get<bool>();
            entries.push_back(std::move(e));
        }
        inv.add_verb(lemma, cls, std::move(entries));
    }
    return inv;
}

json inventory_to_json(const SenseInventory& inv)
{
    json verbs = json::object();
    for (const std::string& lemma : inv.verbs()) {
        const VerbEntry& entry = inv.verb(lemma);
        json senses = json::array();
        for (const SenseEntry& s : entry.senses)
            senses.push_back({{"id", s.sense_id},
                              {"definition", s.definition},
                              {"examples", s.examples},
                              {"depictable", s.depictable}});
        verbs[lemma] = {{"class", to_string(entry.verb_class)}, {"senses", std::move(senses)}};
    }
    return {{"verbs", std::move(verbs)}};
}

SenseInventory parse_inventory(std::string_view text)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        // Translate the byte offset into a line number for the message.
        const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
        const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
        throw Error(ErrorCode::Parse, "line " + std::to_string(line) + ": " + e.what());
    }
    return inventory_from_json(doc);
}

SenseInventory load_inventory(const std::filesystem::path& path)
{
    try {
        return parse_inventory(read_file(path));
    } catch (const Error& e) {
        if (e.code() == ErrorCode::Io)
            throw;
        throw Error(e.code(), path.string() + ": " + e.detail());
    }
}

void save_inventory(const SenseInventory& inv, const std::filesystem::path& path)
{
    write_file(path, inventory_to_json(inv).dump(2) + "\n");
}

}  // namespace vsd
