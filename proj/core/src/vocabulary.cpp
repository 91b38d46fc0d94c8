#include "wctx/vocabulary.hpp"

#include "wctx/error.hpp"

#include <algorithm>
#include <set>

namespace wctx {

CapabilityVocabulary::CapabilityVocabulary(std::vector<Capability> capabilities)
    : capabilities_(std::move(capabilities))
{
    std::set<std::string> seen;
    for (const auto& cap : capabilities_) {
        if (cap.name.empty()) throw VocabularyError("capability with empty name");
        if (!seen.insert(cap.name).second)
            throw VocabularyError("duplicate capability '" + cap.name + "'");
    }
}

const Capability* CapabilityVocabulary::find(std::string_view name) const
{
    auto it = std::find_if(capabilities_.begin(), capabilities_.end(),
                           [&](const Capability& c) { return c.name == name; });
    return it == capabilities_.end() ? nullptr : &*it;
}

std::optional<CommandRef> CapabilityVocabulary::try_resolve(std::string_view text) const
{
    const auto dot = text.find('.');
    if (dot == std::string_view::npos || dot == 0 || dot + 1 >= text.size()) return std::nullopt;
    const std::string_view head = text.substr(0, dot);
    std::string_view tail = text.substr(dot + 1);

    const bool is_command = tail.size() > 2 && tail.substr(tail.size() - 2) == "()";
    if (is_command) {
        const std::string_view cmd = tail.substr(0, tail.size() - 2);
        for (const auto& cap : capabilities_) {
            const bool head_ok = cap.name == head ||
                std::any_of(cap.attributes.begin(), cap.attributes.end(),
                            [&](const CapabilityAttribute& a) { return a.name == head; });
            if (!head_ok) continue;
            if (std::find(cap.commands.begin(), cap.commands.end(), cmd) != cap.commands.end())
                return CommandRef{cap.name, std::string(cmd), "", true, std::string(text)};
        }
        return std::nullopt;
    }

    for (const auto& cap : capabilities_) {
        for (const auto& attr : cap.attributes) {
            if (attr.name != head) continue;
            const bool value_ok = tail == "value" ||
                std::find(attr.values.begin(), attr.values.end(), tail) != attr.values.end();
            if (value_ok) return CommandRef{cap.name, attr.name, std::string(tail), false, std::string(text)};
        }
    }
    return std::nullopt;
}

CommandRef CapabilityVocabulary::resolve(std::string_view text) const
{
    auto ref = try_resolve(text);
    if (!ref) throw VocabularyError("unknown capability attribute or command '" + std::string(text) + "'");
    return *ref;
}

ChannelTerm CapabilityVocabulary::resolve_term(std::string_view text) const
{
    // "switch.on(heater)" carries a qualifier inside the call parentheses.
    const auto open = text.find('(');
    if (open != std::string_view::npos && text.back() == ')' && open + 1 < text.size() - 1) {
        const std::string qualifier(text.substr(open + 1, text.size() - open - 2));
        const std::string bare = std::string(text.substr(0, open)) + "()";
        return ChannelTerm{resolve(bare), qualifier};
    }
    return ChannelTerm{resolve(text), ""};
}

bool qualifier_matches(std::string_view qualifier, std::string_view device)
{
    if (qualifier.empty()) return true;
    if (device == qualifier) return true;
    return device.size() > qualifier.size() && device.substr(0, qualifier.size()) == qualifier &&
           device[qualifier.size()] == '_';
}

} // namespace wctx
