#pragma once

// Deterministic discrete-event simulator for two machines driven by an
// online policy. The engine owns per-machine EDF queues and job execution;
// the policy reacts to arrivals, queue-empty events and its own timers with
// a small decision vocabulary (turn on/off, assign, start idle, set timer).
//
// Event order at equal times is fixed: completions, deadline checks,
// arrivals (by canonical job order), timers (by scheduling order). Arrivals
// at the same time are handed to the policy one at a time, each against the
// updated state.

#include "powerdown/core.hpp"

#include <cassert>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <variant>
#include <vector>

namespace powerdown {

struct DeadlineMissError : std::runtime_error {
    std::string job;
    Rat time;
    DeadlineMissError(std::string j, Rat t)
        : std::runtime_error("deadline miss: job " + j + " at t=" + rat_to_string(t)),
          job(std::move(j)),
          time(std::move(t)) {}
};

struct ProtocolViolationError : std::runtime_error {
    explicit ProtocolViolationError(const std::string& what) : std::runtime_error(what) {}
};

// --- policy decisions -------------------------------------------------------

struct TurnOn {
    int machine;
};
struct Assign {
    int job_index;  // canonical index into Instance::jobs
    int machine;
};
struct StartIdle {
    int machine;
};
struct TurnOff {
    int machine;
};
struct ScheduleTimer {
    Rat time;
    int tag;
};

using Decision = std::variant<TurnOn, Assign, StartIdle, TurnOff, ScheduleTimer>;
using Decisions = std::vector<Decision>;

struct QueueEntry {
    const Job* job;
    int job_index;
    Rat remaining;
};

class EngineView {
  public:
    virtual ~EngineView() = default;
    virtual Rat now() const = 0;
    virtual bool machine_on(int m) const = 0;
    virtual bool machine_idle(int m) const = 0;  // on with empty queue
    virtual std::vector<QueueEntry> queue(int m) const = 0;
    virtual const Job& job(int index) const = 0;
};

class Policy {
  public:
    virtual ~Policy() = default;
    virtual std::string name() const = 0;
    virtual Decisions on_arrival(const EngineView& view, int job_index) = 0;
    virtual Decisions on_queue_empty(const EngineView& view, int machine) = 0;
    virtual Decisions on_timer(const EngineView& view, int tag) = 0;
};

using PolicyFactory = std::function<std::unique_ptr<Policy>()>;

struct SimConfig {
    // Hard stop for policies that never power down; simulation is clipped
    // there with segments closed. Unset means the run must quiesce.
    std::optional<Rat> horizon;
};

namespace detail {

class Engine final : public EngineView {
  public:
    Engine(const Instance& instance, Policy& policy, SimConfig config)
        : instance_(instance), policy_(policy), config_(std::move(config)) {
        instance_.validate();
        remaining_.reserve(instance_.jobs.size());
        for (const Job& j : instance_.jobs) remaining_.push_back(j.work);
        if (!instance_.jobs.empty()) time_ = instance_.jobs.front().arrival;
    }

    Trace run() {
        while (true) {
            auto next = next_event_time();
            if (!next) {
                if (machine_active())
                    finish_or_fail();
                break;
            }
            if (config_.horizon && *next > *config_.horizon) {
                advance_to(*config_.horizon);
                break;
            }
            advance_to(*next);
            process_events_at(*next);
        }
        close_segments();
        return trace_;
    }

    // EngineView
    Rat now() const override { return time_; }
    bool machine_on(int m) const override { return machines_[m].on; }
    bool machine_idle(int m) const override {
        return machines_[m].on && machines_[m].queue.empty();
    }
    std::vector<QueueEntry> queue(int m) const override {
        std::vector<QueueEntry> out;
        for (int ji : machines_[m].queue)
            out.push_back(QueueEntry{&instance_.jobs[ji], ji, remaining_[ji]});
        return out;
    }
    const Job& job(int index) const override { return instance_.jobs[index]; }

  private:
    struct Machine {
        bool on = false;
        std::vector<int> queue;  // job indices, EDF order (deadline, index)
        // open trace segment
        Rat seg_start;
        SegmentState seg_state = SegmentState::kOff;
        int seg_job = -1;
    };

    struct Timer {
        Rat time;
        long seq;
        int tag;
    };

    const Instance instance_;
    Policy& policy_;
    SimConfig config_;

    Rat time_ = 0;
    std::vector<Rat> remaining_;
    std::vector<int> executed_on_;  // machine a job was first assigned to, -1 before
    std::size_t next_arrival_ = 0;
    std::vector<Timer> timers_;
    long timer_seq_ = 0;
    Machine machines_[2];
    Trace trace_;
    bool started_ = false;

    bool machine_active() const { return machines_[0].on || machines_[1].on; }

    int running_job(const Machine& m) const {
        return (m.on && !m.queue.empty()) ? m.queue.front() : -1;
    }

    std::optional<Rat> next_event_time() const {
        std::optional<Rat> best;
        auto consider = [&](const Rat& t) {
            if (!best || t < *best) best = t;
        };
        if (next_arrival_ < instance_.jobs.size())
            consider(instance_.jobs[next_arrival_].arrival);
        for (const Machine& m : machines_) {
            int ji = running_job(m);
            if (ji >= 0) consider(time_ + remaining_[ji]);
        }
        for (const Timer& t : timers_) consider(t.time);
        // deadline checks only matter for jobs that have arrived and are unfinished
        for (std::size_t i = 0; i < next_arrival_; ++i)
            if (remaining_[i] > 0) consider(instance_.jobs[i].deadline);
        return best;
    }

    void ensure_started() {
        if (started_) return;
        started_ = true;
        for (Machine& m : machines_) {
            m.seg_start = time_;
            m.seg_state = SegmentState::kOff;
        }
    }

    void set_state(Machine& m, SegmentState state, int job_index) {
        ensure_started();
        if (m.seg_state == state && m.seg_job == job_index) return;
        int idx = int(&m - machines_);
        if (time_ > m.seg_start)
            trace_.machines[idx].push_back(Segment{
                m.seg_start, time_, m.seg_state,
                m.seg_job >= 0 ? instance_.jobs[m.seg_job].id : std::string{}});
        m.seg_start = time_;
        m.seg_state = state;
        m.seg_job = job_index;
    }

    void refresh_state(Machine& m) {
        if (!m.on)
            set_state(m, SegmentState::kOff, -1);
        else if (m.queue.empty())
            set_state(m, SegmentState::kIdle, -1);
        else
            set_state(m, SegmentState::kBusy, m.queue.front());
    }

    void advance_to(const Rat& t) {
        ensure_started();
        assert(t >= time_);
        Rat dt = t - time_;
        if (dt == 0) return;
        for (Machine& m : machines_) {
            int ji = running_job(m);
            if (ji >= 0) {
                remaining_[ji] -= dt;
                assert(remaining_[ji] >= 0);
            }
        }
        time_ = t;
    }

    void process_events_at(const Rat& t) {
        // 1. completions
        for (Machine& m : machines_) {
            while (true) {
                int ji = running_job(m);
                if (ji < 0 || remaining_[ji] > 0) break;
                m.queue.erase(m.queue.begin());
                refresh_state(m);
                if (m.queue.empty())
                    apply(policy_.on_queue_empty(*this, int(&m - machines_)));
            }
        }
        // 2. deadline checks
        for (std::size_t i = 0; i < next_arrival_; ++i)
            if (remaining_[i] > 0 && instance_.jobs[i].deadline <= t)
                throw DeadlineMissError(instance_.jobs[i].id, instance_.jobs[i].deadline);
        // 3. arrivals, one at a time in canonical order
        while (next_arrival_ < instance_.jobs.size() &&
               instance_.jobs[next_arrival_].arrival == t) {
            int ji = int(next_arrival_++);
            apply(policy_.on_arrival(*this, ji));
        }
        // 4. timers in scheduling order
        std::vector<Timer> due;
        for (auto it = timers_.begin(); it != timers_.end();) {
            if (it->time == t) {
                due.push_back(*it);
                it = timers_.erase(it);
            } else {
                ++it;
            }
        }
        std::sort(due.begin(), due.end(),
                  [](const Timer& a, const Timer& b) { return a.seq < b.seq; });
        for (const Timer& timer : due) apply(policy_.on_timer(*this, timer.tag));
    }

    void apply(const Decisions& decisions) {
        for (const Decision& d : decisions) std::visit([&](const auto& v) { apply_one(v); }, d);
    }

    void apply_one(const TurnOn& d) {
        Machine& m = machines_[d.machine];
        if (m.on) throw ProtocolViolationError("TurnOn on a machine that is already on");
        m.on = true;
        trace_.turn_ons.push_back(TurnOnEvent{d.machine, time_});
        refresh_state(m);
    }

    void apply_one(const Assign& d) {
        Machine& m = machines_[d.machine];
        if (!m.on) throw ProtocolViolationError("Assign to a machine that is off");
        if (d.job_index < 0 || d.job_index >= int(instance_.jobs.size()) ||
            std::size_t(d.job_index) >= next_arrival_)
            throw ProtocolViolationError("Assign of a job that has not arrived");
        if (remaining_[d.job_index] == 0)
            throw ProtocolViolationError("Assign of a finished job");
        if (executed_on_.empty()) executed_on_.assign(instance_.jobs.size(), -1);
        for (const Machine& other : machines_)
            for (int ji : other.queue)
                if (ji == d.job_index)
                    throw ProtocolViolationError("Assign of a job that is already queued");
        if (executed_on_[d.job_index] >= 0 && executed_on_[d.job_index] != d.machine)
            throw ProtocolViolationError("job migration is not allowed");
        auto& q = m.queue;
        auto pos = std::find_if(q.begin(), q.end(), [&](int other) {
            const Job& a = instance_.jobs[d.job_index];
            const Job& b = instance_.jobs[other];
            if (a.deadline != b.deadline) return a.deadline < b.deadline;
            return d.job_index < other;
        });
        q.insert(pos, d.job_index);
        executed_on_[d.job_index] = d.machine;  // pinned at assignment; no migration
        refresh_state(m);
    }

    void apply_one(const StartIdle& d) {
        Machine& m = machines_[d.machine];
        if (!m.on || !m.queue.empty())
            throw ProtocolViolationError("StartIdle requires an on, empty machine");
        refresh_state(m);
    }

    void apply_one(const TurnOff& d) {
        Machine& m = machines_[d.machine];
        if (!m.on) throw ProtocolViolationError("TurnOff on a machine that is off");
        if (!m.queue.empty())
            throw ProtocolViolationError("TurnOff with pending work in the queue");
        m.on = false;
        refresh_state(m);
    }

    void apply_one(const ScheduleTimer& d) {
        if (d.time < time_) throw ProtocolViolationError("timer scheduled in the past");
        timers_.push_back(Timer{d.time, timer_seq_++, d.tag});
    }

    void finish_or_fail() {
        // no events left but a machine is still on
        if (!config_.horizon)
            throw ProtocolViolationError("simulation did not quiesce (machine left on)");
        advance_to(*config_.horizon);
    }

    void close_segments() {
        if (!started_) return;
        for (Machine& m : machines_) {
            int idx = int(&m - machines_);
            if (time_ > m.seg_start)
                trace_.machines[idx].push_back(Segment{
                    m.seg_start, time_, m.seg_state,
                    m.seg_job >= 0 ? instance_.jobs[m.seg_job].id : std::string{}});
        }
    }
};

}  // namespace detail

inline Trace simulate(const Instance& instance, Policy& policy, SimConfig config = {}) {
    detail::Engine engine(instance, policy, std::move(config));
    return engine.run();
}

// --- trace validation -------------------------------------------------------

struct TraceReport {
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
};

inline TraceReport validate_trace(const Instance& instance, const Trace& trace) {
    TraceReport report;
    auto flag = [&](const std::string& msg) { report.violations.push_back(msg); };

    try {
        validate_trace_structure(trace);
    } catch (const std::exception& e) {
        flag(e.what());
        return report;
    }

    std::map<std::string, const Job*> by_id;
    for (const Job& j : instance.jobs) by_id[j.id] = &j;

    std::map<std::string, Rat> done;
    std::map<std::string, int> machine_of;
    for (int m = 0; m < Trace::kMachines; ++m) {
        for (const Segment& s : trace.machines[m]) {
            if (s.state != SegmentState::kBusy) continue;
            auto it = by_id.find(s.job);
            if (it == by_id.end()) {
                flag("busy segment references unknown job " + s.job);
                continue;
            }
            const Job& j = *it->second;
            if (s.start < j.arrival)
                flag("job " + s.job + " executed before its arrival");
            if (s.end > j.deadline)
                flag("job " + s.job + " executed past its deadline (incomplete work)");
            auto [mit, inserted] = machine_of.emplace(s.job, m);
            if (!inserted && mit->second != m) flag("migration: job " + s.job + " ran on both machines");
            done[s.job] += s.end - s.start;
        }
    }
    for (const Job& j : instance.jobs) {
        Rat w = done.count(j.id) ? done[j.id] : Rat(0);
        if (w != j.work)
            flag("incomplete work: job " + j.id + " executed " + rat_to_string(w) + " of " +
                 rat_to_string(j.work));
    }

    // turn-on events must match OFF -> (IDLE|BUSY) transitions exactly
    std::vector<std::pair<int, Rat>> transitions;
    for (int m = 0; m < Trace::kMachines; ++m) {
        const auto& segs = trace.machines[m];
        for (std::size_t i = 0; i < segs.size(); ++i) {
            bool was_off = i == 0 ? true : segs[i - 1].state == SegmentState::kOff;
            if (segs[i].state != SegmentState::kOff && was_off)
                transitions.emplace_back(m, segs[i].start);
        }
    }
    std::vector<std::pair<int, Rat>> events;
    for (const auto& e : trace.turn_ons) events.emplace_back(e.machine, e.time);
    auto cmp = [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first < b.first : a.second < b.second;
    };
    std::sort(transitions.begin(), transitions.end(), cmp);
    std::sort(events.begin(), events.end(), cmp);
    if (transitions != events) flag("turn-on events do not match OFF->ON transitions");

    return report;
}

}  // namespace powerdown
