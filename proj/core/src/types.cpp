#include "wctx/types.hpp"

namespace wctx {

std::string_view to_string(PacketKind kind)
{
    switch (kind) {
    case PacketKind::Data: return "data";
    case PacketKind::Beacon: return "beacon";
    case PacketKind::Ack: return "ack";
    case PacketKind::LinkMaint: return "link";
    }
    return "data";
}

std::optional<PacketKind> packet_kind_from_string(std::string_view s)
{
    if (s == "data") return PacketKind::Data;
    if (s == "beacon") return PacketKind::Beacon;
    if (s == "ack") return PacketKind::Ack;
    if (s == "link") return PacketKind::LinkMaint;
    return std::nullopt;
}

std::string_view to_string(Comparator op)
{
    switch (op) {
    case Comparator::Less: return "<";
    case Comparator::Greater: return ">";
    case Comparator::Equal: return "=";
    }
    return "<";
}

std::optional<Comparator> comparator_from_string(std::string_view s)
{
    if (s == "<") return Comparator::Less;
    if (s == ">") return Comparator::Greater;
    if (s == "=") return Comparator::Equal;
    return std::nullopt;
}

} // namespace wctx
