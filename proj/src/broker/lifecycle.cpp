#include "dw/broker/lifecycle.hpp"

namespace dw::broker {

const char* to_string(WillState s)
{
    switch (s) {
    case WillState::Deployed: return "Deployed";
    case WillState::VotingOpen: return "VotingOpen";
    case WillState::Frozen: return "Frozen";
    case WillState::Activated: return "Activated";
    case WillState::Executed: return "Executed";
    case WillState::Cancelled: return "Cancelled";
    }
    return "?";
}

WillStateMachine::WillStateMachine(std::set<std::string> heirs, unsigned vote_threshold, TimestampMs freeze_ms,
                                   bool override_allowed)
    : heirs_(std::move(heirs)), threshold_(vote_threshold), freeze_ms_(freeze_ms), override_allowed_(override_allowed)
{
}

void WillStateMachine::require(WillState s, const char* op) const
{
    if (state_ != s) {
        throw IllegalState(std::string(op) + " not allowed in state " + to_string(state_));
    }
}

void WillStateMachine::require_heir(const std::string& heir) const
{
    if (!heirs_.count(heir)) throw NotAnHeir("'" + heir + "' is not an heir of this will");
}

unsigned WillStateMachine::update(std::set<std::string> heirs, unsigned vote_threshold, TimestampMs freeze_ms,
                                  bool override_allowed)
{
    require(WillState::Deployed, "update");
    heirs_ = std::move(heirs);
    threshold_ = vote_threshold;
    freeze_ms_ = freeze_ms;
    override_allowed_ = override_allowed;
    return ++version_;
}

void WillStateMachine::remove()
{
    require(WillState::Deployed, "delete");
    state_ = WillState::Cancelled;
}

bool WillStateMachine::request_trigger(const std::string& heir)
{
    if (state_ != WillState::Deployed && state_ != WillState::VotingOpen) require(WillState::Deployed, "trigger request");
    require_heir(heir);
    if (state_ == WillState::VotingOpen) return false;
    state_ = WillState::VotingOpen;
    return true;
}

WillStateMachine::VoteResult WillStateMachine::vote(const std::string& heir, TimestampMs now)
{
    if (state_ != WillState::Deployed && state_ != WillState::VotingOpen) require(WillState::VotingOpen, "vote");
    require_heir(heir);
    VoteResult r;
    if (state_ == WillState::Deployed) {
        state_ = WillState::VotingOpen;
        r.opened = true;
    }
    if (!votes_.insert(heir).second) {
        r.duplicate = true;
        return r;
    }
    if (votes_.size() >= threshold_) {
        state_ = WillState::Frozen;
        deadline_ = now + freeze_ms_;
        r.froze = true;
    }
    return r;
}

void WillStateMachine::veto(TimestampMs now)
{
    require(WillState::Frozen, "veto");
    if (now >= *deadline_) throw FreezeExpired("freeze period is over");
    state_ = WillState::Cancelled;
}

void WillStateMachine::override_activate()
{
    require(WillState::VotingOpen, "authority override");
    if (!override_allowed_) throw IllegalState("this will does not allow authority override");
    state_ = WillState::Activated;
    activation_ = Activation::Override;
}

bool WillStateMachine::tick(TimestampMs now)
{
    if (state_ != WillState::Frozen || now < *deadline_) return false;
    state_ = WillState::Activated;
    activation_ = Activation::FreezeExpiry;
    return true;
}

void WillStateMachine::mark_executed()
{
    require(WillState::Activated, "execute");
    state_ = WillState::Executed;
}

} // namespace dw::broker
