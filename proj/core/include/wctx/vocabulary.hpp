#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace wctx {

struct CapabilityAttribute {
    std::string name;
    std::vector<std::string> values;  // empty for numeric attributes
};

struct Capability {
    std::string name;
    std::vector<CapabilityAttribute> attributes;
    std::vector<std::string> commands;
};

// A resolved event string such as "switch.on()", "motion.active" or "temperature.value".
struct CommandRef {
    std::string capability;
    std::string member;  // attribute or command name
    std::string value;   // attribute value, "value" for a reading, empty for commands
    bool is_command = false;
    std::string text;    // canonical spelling

    bool operator==(const CommandRef&) const = default;
};

// A channel writer/reader term: a command string with an optional device qualifier,
// e.g. "switch.on(heater)" -> {switch.on(), "heater"}.
struct ChannelTerm {
    CommandRef command;
    std::string qualifier;
};

class CapabilityVocabulary {
public:
    CapabilityVocabulary() = default;
    explicit CapabilityVocabulary(std::vector<Capability> capabilities);

    const std::vector<Capability>& capabilities() const noexcept { return capabilities_; }
    const Capability* find(std::string_view name) const;

    // Throws VocabularyError when the string does not name a known attribute or command.
    CommandRef resolve(std::string_view text) const;
    std::optional<CommandRef> try_resolve(std::string_view text) const;
    ChannelTerm resolve_term(std::string_view text) const;

    bool operator==(const CapabilityVocabulary&) const = default;

private:
    std::vector<Capability> capabilities_;
};

// True when a device id satisfies a channel qualifier: "heater" matches "heater" and "heater_2".
bool qualifier_matches(std::string_view qualifier, std::string_view device);

} // namespace wctx
