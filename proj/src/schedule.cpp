#include "gridsentry/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gridsentry/common.hpp"

namespace gridsentry {

void EventSchedule::validate() const {
    if (!(duration > 0.0) || !std::isfinite(duration)) {
        throw ValidationError("schedule duration must be a positive finite number");
    }
    for (const auto& ev : events) {
        if (ev.class_id < 1) {
            throw ValidationError("event class id must be >= 1, got " +
                                  std::to_string(ev.class_id));
        }
        if (!std::isfinite(ev.start) || !std::isfinite(ev.end) || !(ev.start < ev.end)) {
            throw ValidationError("event interval must satisfy start < end");
        }
        if (ev.start < 0.0 || ev.end > duration) {
            throw ValidationError("event [" + std::to_string(ev.start) + ", " +
                                  std::to_string(ev.end) + "] falls outside [0, " +
                                  std::to_string(duration) + "]");
        }
    }
    auto sorted = events;
    std::sort(sorted.begin(), sorted.end(),
              [](const ScheduledEvent& a, const ScheduledEvent& b) { return a.start < b.start; });
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        // Closed intervals: sharing an endpoint would label a sample twice.
        if (sorted[i].start <= sorted[i - 1].end) {
            throw ValidationError("event intervals overlap near t=" +
                                  std::to_string(sorted[i].start));
        }
    }
}

}  // namespace gridsentry
