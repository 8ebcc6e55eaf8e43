#pragma once

// Online policy A: jobs are delayed while both machines are off, but the
// primary machine wakes a margin `u` before the batch's latest feasible
// start. An arrival the primary cannot absorb (urgent) turns the secondary
// on immediately and the logical names swap. The primary's idle window is
// twice the break-even time instead of the customary break-even time.

#include "powerdown/core.hpp"
#include "powerdown/engine.hpp"

#include <optional>
#include <vector>

namespace powerdown {

enum class IdleMode {
    kCumulative,  // the 2/psi_sigma budget spans all idle episodes of one stay
    kPerEpisode,  // each idle episode gets the full window
};

struct AlgoAConfig {
    Rat margin = make_rat(1, 2);              // u
    std::optional<Rat> idle_budget_override;  // default 2/psi_sigma
    IdleMode idle_mode = IdleMode::kCumulative;

    Rat idle_budget(const EnergyModel& model) const {
        if (idle_budget_override) return *idle_budget_override;
        return Rat(2) / model.psi_sigma;
    }
};

// Latest feasible start of a pending batch: min over deadlines t* of
// (t* - W(t*)) with W(t*) the pending work due by t*. The wake-up condition
// "exists t_dagger <= t + u with W(t_dagger, t*) >= t* - t_dagger" is
// equivalent to t >= that minimum minus u, so no candidate search over
// t_dagger is needed.
inline std::optional<Rat> latest_feasible_start(const std::vector<PendingWork>& pending) {
    std::optional<Rat> best;
    for (const auto& p : pending) {
        Rat t_star = p.deadline;
        Rat w = 0;
        for (const auto& q : pending)
            if (q.deadline <= t_star) w += q.remaining;
        Rat candidate = t_star - w;
        if (!best || candidate < *best) best = candidate;
    }
    return best;
}

inline std::optional<Rat> due_trigger_time(const std::vector<PendingWork>& pending,
                                           const Rat& margin) {
    auto t = latest_feasible_start(pending);
    if (!t) return std::nullopt;
    return *t - margin;
}

// true iff inserting `candidate` keeps every deadline met when the queue is
// run EDF from time t: for all t*, W(t, t*) <= t* - t. Equality is fine.
inline bool edf_can_accept(const std::vector<PendingWork>& queue, const PendingWork& candidate,
                           const Rat& t) {
    std::vector<PendingWork> all = queue;
    all.push_back(candidate);
    for (const auto& p : all) {
        Rat w = 0;
        for (const auto& q : all)
            if (q.deadline <= p.deadline) w += q.remaining;
        if (w > p.deadline - t) return false;
    }
    return true;
}

class AlgorithmA final : public Policy {
  public:
    struct SwapRecord {
        Rat time;
        int new_primary;
    };
    struct UrgentRecord {
        Rat time;
        int job_index;
        int machine;  // machine the urgent job was placed on
    };
    struct IdleExpiryRecord {
        Rat time;
        int machine;
        Rat idle_in_stay;
    };

    AlgorithmA(const EnergyModel& model, AlgoAConfig config = {})
        : model_(model), config_(std::move(config)), budget_(config_.idle_budget(model)) {}

    std::string name() const override { return "a"; }

    Decisions on_arrival(const EngineView& view, int ji) override {
        const Job& j = view.job(ji);
        if (!view.machine_on(0) && !view.machine_on(1)) {
            pending_.push_back(ji);
            Rat fire = *due_trigger_time(pending_works(view), config_.margin);
            if (fire <= view.now()) return wake_all(view);
            return {ScheduleTimer{fire, kTagDue}};
        }

        const int mp = primary_, ms = 1 - primary_;
        if (view.machine_on(ms)) {
            // secondary on (alone or with the primary)
            if (edf_can_accept(queue_works(view, ms), PendingWork{j.deadline, j.work},
                               view.now()))
                return assign(view, ji, ms);
            Decisions out;
            if (!view.machine_on(mp)) {
                out.push_back(TurnOn{mp});
                note_turn_on(mp);
            }
            if (!edf_can_accept(queue_works(view, mp), PendingWork{j.deadline, j.work},
                                view.now()))
                throw ProtocolViolationError(
                    "primary not available for overflow job " + j.id +
                    " (input violates single-machine schedulability)");
            auto rest = assign(view, ji, mp);
            out.insert(out.end(), rest.begin(), rest.end());
            return out;
        }

        // only the primary is on
        if (edf_can_accept(queue_works(view, mp), PendingWork{j.deadline, j.work}, view.now()))
            return assign(view, ji, mp);
        urgent_log_.push_back(UrgentRecord{view.now(), ji, ms});
        note_turn_on(ms);
        primary_ = ms;
        swap_log_.push_back(SwapRecord{view.now(), primary_});
        Decisions out{TurnOn{ms}};
        auto rest = assign(view, ji, ms);
        out.insert(out.end(), rest.begin(), rest.end());
        return out;
    }

    Decisions on_queue_empty(const EngineView& view, int m) override {
        if (m != primary_) return {TurnOff{m}};  // the secondary never idles
        Rat left = budget_left(m);
        if (left <= 0) {
            idle_expiry_log_.push_back(IdleExpiryRecord{view.now(), m, consumed_[m]});
            return {TurnOff{m}};
        }
        idle_since_[m] = view.now();
        return {StartIdle{m}, ScheduleTimer{view.now() + left, kTagIdleBase + m}};
    }

    Decisions on_timer(const EngineView& view, int tag) override {
        if (tag == kTagDue) {
            if (view.machine_on(0) || view.machine_on(1) || pending_.empty()) return {};
            Rat fire = *due_trigger_time(pending_works(view), config_.margin);
            if (fire <= view.now()) return wake_all(view);
            return {};
        }
        int m = tag - kTagIdleBase;
        if (!view.machine_idle(m) || !idle_since_[m]) return {};  // stale
        Rat total = consumed_[m] + (view.now() - *idle_since_[m]);
        if (total < budget_) return {};  // stale timer from an interrupted episode
        consumed_[m] = total;
        idle_since_[m].reset();
        idle_expiry_log_.push_back(IdleExpiryRecord{view.now(), m, total});
        return {TurnOff{m}};
    }

    int primary() const { return primary_; }
    const std::vector<SwapRecord>& swap_log() const { return swap_log_; }
    const std::vector<UrgentRecord>& urgent_log() const { return urgent_log_; }
    const std::vector<IdleExpiryRecord>& idle_expiry_log() const { return idle_expiry_log_; }

  private:
    static constexpr int kTagDue = 0;
    static constexpr int kTagIdleBase = 1;  // +machine

    EnergyModel model_;
    AlgoAConfig config_;
    Rat budget_;
    int primary_ = 0;
    std::vector<int> pending_;
    std::optional<Rat> idle_since_[2];
    Rat consumed_[2] = {0, 0};
    std::vector<SwapRecord> swap_log_;
    std::vector<UrgentRecord> urgent_log_;
    std::vector<IdleExpiryRecord> idle_expiry_log_;

    Rat budget_left(int m) const {
        if (config_.idle_mode == IdleMode::kPerEpisode) return budget_;
        return budget_ - consumed_[m];
    }

    std::vector<PendingWork> pending_works(const EngineView& view) const {
        std::vector<PendingWork> out;
        for (int ji : pending_) out.push_back(PendingWork{view.job(ji).deadline, view.job(ji).work});
        return out;
    }

    static std::vector<PendingWork> queue_works(const EngineView& view, int m) {
        std::vector<PendingWork> out;
        for (const QueueEntry& e : view.queue(m))
            out.push_back(PendingWork{e.job->deadline, e.remaining});
        return out;
    }

    void note_turn_on(int m) {
        consumed_[m] = 0;
        idle_since_[m].reset();
    }

    Decisions assign(const EngineView& view, int ji, int m) {
        Decisions out;
        if (view.machine_idle(m) && idle_since_[m]) {
            if (config_.idle_mode == IdleMode::kCumulative)
                consumed_[m] += view.now() - *idle_since_[m];
            idle_since_[m].reset();
        }
        out.push_back(Assign{ji, m});
        return out;
    }

    Decisions wake_all(const EngineView& view) {
        Decisions out;
        note_turn_on(primary_);
        out.push_back(TurnOn{primary_});
        for (int ji : pending_) out.push_back(Assign{ji, primary_});
        pending_.clear();
        return out;
    }
};

}  // namespace powerdown
