#pragma once

#include "wctx/vocabulary.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace wctx {

enum class ChannelType : std::uint8_t { Capability, Physical, System };

std::string_view to_string(ChannelType t);
std::optional<ChannelType> channel_type_from_string(std::string_view s);

struct Channel {
    std::string name;
    ChannelType type = ChannelType::Physical;
    std::vector<std::string> writers;  // commands that influence the channel, optional "(qualifier)"
    std::vector<std::string> readers;  // attributes that sense it

    bool operator==(const Channel&) const = default;
};

struct ChannelMap {
    std::vector<Channel> channels;

    const Channel* find(std::string_view name) const;
    bool operator==(const ChannelMap&) const = default;
};

// Unique names, every writer/reader resolvable. Throws ValidationError / VocabularyError.
void validate_channel_map(const ChannelMap& map, const CapabilityVocabulary& vocabulary);

} // namespace wctx
