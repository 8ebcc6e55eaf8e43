#pragma once

// Domain types for the dual-machine power-down model plus the single-machine
// schedulability test that gates all inputs: a job set fits one machine iff
// for every interval (l, r), the total work of jobs contained in it is at
// most r - l.

#include "powerdown/rational.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace powerdown {

// Default size for "tiny" jobs in generated scenarios. Zero-work jobs are
// rejected at validation; limits from the model are realized with a small
// positive epsilon instead.
inline const Rat kDefaultTiny = make_rat(1, 1000000);

struct Job {
    std::string id;
    Rat arrival;
    Rat deadline;
    Rat work;  // execution time, > 0
};

struct EnergyModel {
    // Normalized: turn-on cost and busy power are fixed at 1.
    static constexpr int kTurnOnCost = 1;
    static constexpr int kBusyPower = 1;
    Rat psi_sigma = 1;  // idle power, in (0, 1]

    Rat break_even() const { return Rat(1) / psi_sigma; }

    void validate() const {
        if (psi_sigma <= 0 || psi_sigma > 1)
            throw std::invalid_argument("psi_sigma must be in (0, 1]");
    }
};

struct Instance {
    EnergyModel model;
    std::vector<Job> jobs;  // kept sorted by (arrival, id)

    Instance() = default;
    Instance(EnergyModel m, std::vector<Job> js) : model(std::move(m)), jobs(std::move(js)) {
        normalize();
        validate();
    }

    void normalize() {
        std::stable_sort(jobs.begin(), jobs.end(), [](const Job& a, const Job& b) {
            if (a.arrival != b.arrival) return a.arrival < b.arrival;
            return a.id < b.id;
        });
    }

    void validate() const {
        model.validate();
        std::set<std::string> ids;
        for (const Job& j : jobs) {
            if (j.id.empty()) throw std::invalid_argument("job with empty id");
            if (!ids.insert(j.id).second)
                throw std::invalid_argument("duplicate job id: " + j.id);
            if (j.work <= 0)
                throw std::invalid_argument("job " + j.id + " has non-positive work");
            if (j.arrival + j.work > j.deadline)
                throw std::invalid_argument("job " + j.id + " cannot meet its own deadline");
        }
    }

    Rat latest_deadline() const {
        Rat d = 0;
        for (const Job& j : jobs) d = rat_max(d, j.deadline);
        return d;
    }
};

struct FeasibilityWitness {
    Rat lo;    // interval start (an arrival point)
    Rat hi;    // interval end (a deadline point)
    Rat load;  // total work of jobs inside; exceeds hi - lo
};

struct FeasibilityResult {
    bool feasible = true;
    std::optional<FeasibilityWitness> witness;
};

// Checking intervals with endpoints restricted to arrival/deadline points is
// sufficient: the contained-work sum is a step function of both endpoints.
inline FeasibilityResult check_feasibility(const Instance& instance) {
    instance.validate();
    const auto& jobs = instance.jobs;
    std::vector<Rat> deadlines;
    deadlines.reserve(jobs.size());
    for (const Job& j : jobs) deadlines.push_back(j.deadline);
    std::sort(deadlines.begin(), deadlines.end());
    deadlines.erase(std::unique(deadlines.begin(), deadlines.end()), deadlines.end());

    std::vector<Rat> arrivals;
    for (const Job& j : jobs) arrivals.push_back(j.arrival);
    std::sort(arrivals.begin(), arrivals.end());
    arrivals.erase(std::unique(arrivals.begin(), arrivals.end()), arrivals.end());

    for (const Rat& lo : arrivals) {
        // accumulate work of jobs with arrival >= lo, deadline <= hi
        std::vector<std::pair<Rat, Rat>> due;  // (deadline, work)
        for (const Job& j : jobs)
            if (j.arrival >= lo) due.emplace_back(j.deadline, j.work);
        std::sort(due.begin(), due.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        Rat load = 0;
        std::size_t k = 0;
        for (const Rat& hi : deadlines) {
            if (hi <= lo) continue;
            while (k < due.size() && due[k].first <= hi) load += due[k++].second;
            if (load > hi - lo)
                return {false, FeasibilityWitness{lo, hi, load}};
        }
    }
    return {true, std::nullopt};
}

struct PendingWork {
    Rat deadline;
    Rat remaining;
};

// Total remaining work among pending jobs whose deadline is at most t_dagger.
inline Rat remaining_work(const std::vector<PendingWork>& pending, const Rat& t,
                          const Rat& t_dagger) {
    if (t_dagger <= t) throw std::invalid_argument("t_dagger must exceed t");
    Rat sum = 0;
    for (const auto& p : pending)
        if (p.deadline <= t_dagger) sum += p.remaining;
    return sum;
}

// ---------------------------------------------------------------------------
// Traces

enum class SegmentState { kOff, kIdle, kBusy };

struct Segment {
    Rat start;
    Rat end;
    SegmentState state = SegmentState::kOff;
    std::string job;  // set iff state == kBusy
};

struct TurnOnEvent {
    int machine = 0;
    Rat time;
};

struct Trace {
    static constexpr int kMachines = 2;
    std::vector<std::vector<Segment>> machines{std::vector<Segment>{}, std::vector<Segment>{}};
    std::vector<TurnOnEvent> turn_ons;

    Rat busy_time() const {
        Rat sum = 0;
        for (const auto& m : machines)
            for (const auto& s : m)
                if (s.state == SegmentState::kBusy) sum += s.end - s.start;
        return sum;
    }

    Rat idle_time() const {
        Rat sum = 0;
        for (const auto& m : machines)
            for (const auto& s : m)
                if (s.state == SegmentState::kIdle) sum += s.end - s.start;
        return sum;
    }

    Rat end_time() const {
        Rat t = 0;
        for (const auto& m : machines)
            if (!m.empty()) t = rat_max(t, m.back().end);
        return t;
    }

    // Total work performed on job `id` across both machines.
    Rat work_on(const std::string& id) const {
        Rat sum = 0;
        for (const auto& m : machines)
            for (const auto& s : m)
                if (s.state == SegmentState::kBusy && s.job == id) sum += s.end - s.start;
        return sum;
    }
};

inline void validate_trace_structure(const Trace& trace) {
    for (const auto& m : trace.machines) {
        for (std::size_t i = 0; i < m.size(); ++i) {
            if (m[i].start >= m[i].end)
                throw std::invalid_argument("trace segment with non-positive length");
            if (i > 0 && m[i - 1].end != m[i].start)
                throw std::invalid_argument("trace segments not contiguous");
            if (m[i].state == SegmentState::kBusy && m[i].job.empty())
                throw std::invalid_argument("busy segment without a job");
        }
    }
}

inline Rat energy_of_trace(const Trace& trace, const EnergyModel& model) {
    validate_trace_structure(trace);
    Rat e = Rat(trace.turn_ons.size()) * EnergyModel::kTurnOnCost;
    e += trace.busy_time() * EnergyModel::kBusyPower;
    e += trace.idle_time() * model.psi_sigma;
    return e;
}

// ---------------------------------------------------------------------------
// Work-conserving EDF on one machine. Returns the first deadline miss if any;
// used as the independent check of the interval condition (they must agree).

struct EdfMiss {
    std::string job;
    Rat time;
};

inline std::optional<EdfMiss> edf_single_machine_miss(const Instance& instance) {
    struct Item {
        const Job* job;
        Rat remaining;
    };
    const auto& jobs = instance.jobs;  // sorted by (arrival, id)
    std::size_t next = 0;
    std::vector<Item> active;
    Rat t = jobs.empty() ? Rat(0) : jobs.front().arrival;

    auto edf_pick = [&]() {
        std::size_t best = active.size();
        for (std::size_t i = 0; i < active.size(); ++i) {
            if (active[i].remaining == 0) continue;
            if (best == active.size() || active[i].job->deadline < active[best].job->deadline ||
                (active[i].job->deadline == active[best].job->deadline &&
                 active[i].job->id < active[best].job->id))
                best = i;
        }
        return best;
    };

    while (true) {
        while (next < jobs.size() && jobs[next].arrival <= t)
            active.push_back(Item{&jobs[next++], jobs[next - 1].work});
        std::size_t pick = edf_pick();
        if (pick == active.size()) {
            if (next == jobs.size()) return std::nullopt;
            t = jobs[next].arrival;
            continue;
        }
        Rat step = active[pick].remaining;
        if (next < jobs.size()) step = rat_min(step, jobs[next].arrival - t);
        active[pick].remaining -= step;
        t += step;
        if (active[pick].remaining == 0 && t > active[pick].job->deadline)
            return EdfMiss{active[pick].job->id, active[pick].job->deadline};
        // a due job with remaining work is a miss even if we never finish it
        for (const auto& it : active)
            if (it.remaining > 0 && it.job->deadline <= t)
                return EdfMiss{it.job->id, it.job->deadline};
    }
}

}  // namespace powerdown
