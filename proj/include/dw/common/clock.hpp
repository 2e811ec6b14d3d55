#pragma once

#include <cstdint>

namespace dw {

/// Milliseconds since the Unix epoch, UTC.
using TimestampMs = std::int64_t;

class Clock {
public:
    virtual ~Clock() = default;
    virtual TimestampMs now_ms() const = 0;
};

/// Manually driven clock; nothing in the library reads wall time.
class SimulatedClock final : public Clock {
public:
    explicit SimulatedClock(TimestampMs start = 0) : now_(start) {}

    TimestampMs now_ms() const override { return now_; }
    void advance_ms(TimestampMs delta) { now_ += delta; }
    /// Moves forward to `t`; never moves backwards.
    void advance_to(TimestampMs t)
    {
        if (t > now_) now_ = t;
    }

private:
    TimestampMs now_;
};

} // namespace dw
