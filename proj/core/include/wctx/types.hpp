#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace wctx {

enum class Direction : std::uint8_t { DeviceToHub = 0, HubToDevice = 1 };

// Only Data packets carry event payloads; the rest are filtered before identification.
enum class PacketKind : std::uint8_t { Data, Beacon, Ack, LinkMaint };

std::string_view to_string(PacketKind kind);
std::optional<PacketKind> packet_kind_from_string(std::string_view s);

struct PacketRecord {
    double ts = 0.0;            // seconds since trace start
    std::uint32_t size = 1;     // bytes, >= 1
    Direction direction = Direction::DeviceToHub;
    std::uint32_t layer = 0;
    PacketKind kind = PacketKind::Data;
    std::string src;
    std::string dst;

    bool operator==(const PacketRecord&) const = default;
};

// Global event id. 0 is never assigned; the registry hands out 1, 2, ...
struct EventId {
    std::uint32_t value = 0;

    constexpr EventId() = default;
    constexpr explicit EventId(std::uint32_t v) : value(v) {}

    constexpr bool valid() const noexcept { return value != 0; }
    constexpr auto operator<=>(const EventId&) const = default;
};

struct DetectedEvent {
    EventId event;
    double ts = 0.0;
    double confidence = 0.0;
    std::size_t first_packet = 0;  // inclusive indices into the filtered stream
    std::size_t last_packet = 0;

    bool operator==(const DetectedEvent&) const = default;
};

using EventStream = std::vector<DetectedEvent>;

enum class Comparator : std::uint8_t { Less, Greater, Equal };

std::string_view to_string(Comparator op);
std::optional<Comparator> comparator_from_string(std::string_view s);

// Threshold test evaluated inside an app, e.g. "illuminance < threshold".
struct ConditionNode {
    std::string attribute;
    Comparator op = Comparator::Less;
    double threshold = 0.0;

    bool operator==(const ConditionNode&) const = default;
};

} // namespace wctx

template <>
struct std::hash<wctx::EventId> {
    std::size_t operator()(const wctx::EventId& id) const noexcept
    {
        return std::hash<std::uint32_t>{}(id.value);
    }
};
