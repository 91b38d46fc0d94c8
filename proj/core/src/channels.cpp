#include "wctx/channels.hpp"

#include "wctx/error.hpp"

#include <algorithm>
#include <set>

namespace wctx {

std::string_view to_string(ChannelType t)
{
    switch (t) {
    case ChannelType::Capability: return "capability";
    case ChannelType::Physical: return "physical";
    case ChannelType::System: return "system";
    }
    return "physical";
}

std::optional<ChannelType> channel_type_from_string(std::string_view s)
{
    if (s == "capability") return ChannelType::Capability;
    if (s == "physical") return ChannelType::Physical;
    if (s == "system") return ChannelType::System;
    return std::nullopt;
}

const Channel* ChannelMap::find(std::string_view name) const
{
    auto it = std::find_if(channels.begin(), channels.end(), [&](const Channel& c) { return c.name == name; });
    return it == channels.end() ? nullptr : &*it;
}

void validate_channel_map(const ChannelMap& map, const CapabilityVocabulary& vocabulary)
{
    std::set<std::string> names;
    for (const auto& c : map.channels) {
        if (c.name.empty()) throw ValidationError("channel with empty name");
        if (!names.insert(c.name).second) throw ValidationError("duplicate channel '" + c.name + "'");
        for (const auto& w : c.writers) {
            const auto term = vocabulary.resolve_term(w);
            if (!term.command.is_command)
                throw ValidationError("channel '" + c.name + "': writer '" + w + "' is not a command");
        }
        for (const auto& r : c.readers) {
            const auto term = vocabulary.resolve_term(r);
            if (term.command.is_command)
                throw ValidationError("channel '" + c.name + "': reader '" + r + "' is not an attribute");
        }
    }
}

} // namespace wctx
