#pragma once

#include <vector>

namespace gridsentry {

// One scripted anomaly: samples whose time falls inside [start, end] (both
// ends included) carry class_id; everything else is normal operation (0).
struct ScheduledEvent {
    int class_id = 0;
    double start = 0.0;
    double end = 0.0;
};

struct EventSchedule {
    std::vector<ScheduledEvent> events;
    double duration = 0.0;  // seconds

    // Throws ValidationError unless every interval lies inside [0, duration],
    // has start < end, and the closed intervals are pairwise disjoint.
    void validate() const;
};

}  // namespace gridsentry
