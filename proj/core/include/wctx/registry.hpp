#pragma once

#include "wctx/types.hpp"
#include "wctx/vocabulary.hpp"

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace wctx {

struct RegistryEntry {
    EventId id;
    std::string device;
    std::string capability;
    std::string command;  // canonical command/attribute string, e.g. "switch.on()"

    std::string label() const { return device + "/" + command; }
    bool operator==(const RegistryEntry&) const = default;
};

// Splits "device/command" labels. Returns nullopt when there is no '/'.
std::optional<std::pair<std::string, std::string>> split_label(std::string_view label);

// Bijection EventId <-> (device, command). Ids are dense from 1. Single writer.
class EventRegistry {
public:
    explicit EventRegistry(std::shared_ptr<const CapabilityVocabulary> vocabulary = nullptr);

    // Idempotent. Throws VocabularyError when a vocabulary is attached and
    // the command does not resolve against it.
    EventId register_event(const std::string& device, const std::string& command);

    std::optional<EventId> find(const std::string& device, const std::string& command) const;
    std::optional<EventId> find_label(std::string_view label) const;
    const RegistryEntry& entry(EventId id) const;  // throws std::out_of_range
    bool contains(EventId id) const noexcept;

    std::size_t size() const noexcept { return entries_.size(); }
    const std::vector<RegistryEntry>& entries() const noexcept { return entries_; }
    const CapabilityVocabulary* vocabulary() const noexcept { return vocabulary_.get(); }

private:
    std::shared_ptr<const CapabilityVocabulary> vocabulary_;
    std::vector<RegistryEntry> entries_;  // entries_[i].id == i + 1
    std::map<std::pair<std::string, std::string>, EventId> index_;
};

// Free-function form used by the pipeline.
inline EventId register_event(EventRegistry& registry, const std::string& device, const std::string& command)
{
    return registry.register_event(device, command);
}

} // namespace wctx
