#include "wctx/registry.hpp"

#include "wctx/error.hpp"

#include <stdexcept>

namespace wctx {

std::optional<std::pair<std::string, std::string>> split_label(std::string_view label)
{
    const auto slash = label.find('/');
    if (slash == std::string_view::npos || slash == 0 || slash + 1 >= label.size()) return std::nullopt;
    return std::make_pair(std::string(label.substr(0, slash)), std::string(label.substr(slash + 1)));
}

EventRegistry::EventRegistry(std::shared_ptr<const CapabilityVocabulary> vocabulary)
    : vocabulary_(std::move(vocabulary))
{
}

EventId EventRegistry::register_event(const std::string& device, const std::string& command)
{
    if (device.empty()) throw PreconditionError("register_event: empty device id");
    if (auto it = index_.find({device, command}); it != index_.end()) return it->second;

    std::string capability;
    if (vocabulary_) capability = vocabulary_->resolve(command).capability;

    const EventId id(static_cast<std::uint32_t>(entries_.size() + 1));
    entries_.push_back(RegistryEntry{id, device, capability, command});
    index_.emplace(std::make_pair(device, command), id);
    return id;
}

std::optional<EventId> EventRegistry::find(const std::string& device, const std::string& command) const
{
    if (auto it = index_.find({device, command}); it != index_.end()) return it->second;
    return std::nullopt;
}

std::optional<EventId> EventRegistry::find_label(std::string_view label) const
{
    auto parts = split_label(label);
    if (!parts) return std::nullopt;
    return find(parts->first, parts->second);
}

const RegistryEntry& EventRegistry::entry(EventId id) const
{
    if (!contains(id)) throw std::out_of_range("event id " + std::to_string(id.value) + " not registered");
    return entries_[id.value - 1];
}

bool EventRegistry::contains(EventId id) const noexcept
{
    return id.value >= 1 && id.value <= entries_.size();
}

} // namespace wctx
