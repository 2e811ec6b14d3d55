#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dw/common/bytes.hpp"
#include "dw/common/clock.hpp"

namespace dw::broker {

class BrokerError : public Error {
public:
    using Error::Error;
};

class IllegalState : public BrokerError {
public:
    using BrokerError::BrokerError;
};

class NotAnHeir : public BrokerError {
public:
    using BrokerError::BrokerError;
};

class FreezeExpired : public BrokerError {
public:
    using BrokerError::BrokerError;
};

enum class WillState { Deployed, VotingOpen, Frozen, Activated, Executed, Cancelled };

const char* to_string(WillState s);

/// How a will reached Activated.
enum class Activation { None, FreezeExpiry, Override };

/// Pure will lifecycle. No I/O, no ledger; the broker maps each call onto
/// ledger entries.
///
///   Deployed   -> VotingOpen  request_trigger, or the first vote
///   VotingOpen -> Frozen      vote that reaches the threshold
///   Frozen     -> Cancelled   veto before the deadline
///   Frozen     -> Activated   tick at or after the deadline
///   VotingOpen -> Activated   authority override
///   Activated  -> Executed    mark_executed
///   Deployed   -> Cancelled   remove
class WillStateMachine {
public:
    WillStateMachine(std::set<std::string> heirs, unsigned vote_threshold, TimestampMs freeze_ms,
                     bool override_allowed);

    WillState state() const { return state_; }
    const std::set<std::string>& votes() const { return votes_; }
    std::optional<TimestampMs> freeze_deadline() const { return deadline_; }
    unsigned version() const { return version_; }
    Activation activation() const { return activation_; }
    unsigned vote_threshold() const { return threshold_; }

    /// Deployed only. Replaces the parameters and bumps the version.
    unsigned update(std::set<std::string> heirs, unsigned vote_threshold, TimestampMs freeze_ms, bool override_allowed);
    void remove();

    /// Returns false when voting was already open.
    bool request_trigger(const std::string& heir);

    struct VoteResult {
        bool opened = false;    // this vote opened voting
        bool duplicate = false; // heir had already voted; nothing changed
        bool froze = false;     // threshold reached, freeze started
    };
    VoteResult vote(const std::string& heir, TimestampMs now);

    void veto(TimestampMs now);
    void override_activate();
    /// Frozen -> Activated once now >= deadline. Returns true on change.
    bool tick(TimestampMs now);
    void mark_executed();

    friend bool operator==(const WillStateMachine&, const WillStateMachine&) = default;

private:
    void require(WillState s, const char* op) const;
    void require_heir(const std::string& heir) const;

    std::set<std::string> heirs_;
    unsigned threshold_;
    TimestampMs freeze_ms_;
    bool override_allowed_;
    WillState state_ = WillState::Deployed;
    std::set<std::string> votes_;
    std::optional<TimestampMs> deadline_;
    unsigned version_ = 1;
    Activation activation_ = Activation::None;
};

} // namespace dw::broker
