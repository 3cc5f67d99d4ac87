#include "lelect/message.hpp"

namespace lelect {

namespace {
constexpr std::array<std::string_view, kMessageTypeCount> kTags = {
    "REQUEST", "APPROVED", "DECLINED", "DECIDE", "DECIDE_REPLY", "LEADER", "SYNC_REQUEST", "SYNC_REPLY", "WINNER",
};
}

std::string_view messageTag(MessageType type) { return kTags[index(type)]; }

std::optional<MessageType> parseMessageTag(std::string_view tag) {
    for (std::size_t i = 0; i < kTags.size(); ++i) {
        if (kTags[i] == tag) return static_cast<MessageType>(i);
    }
    return std::nullopt;
}

Message Message::leader(const Position& p) {
    Position announced = p;
    announced.phase = 0;
    return {MessageType::Leader, announced, {}, false};
}

}  // namespace lelect
