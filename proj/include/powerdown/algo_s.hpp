#pragma once

// Baseline policy S: a pending job j carries an energy-efficient anchor
// h_j = max(a_j, d_j - lambda*B) and the primary machine wakes at the
// earliest pending anchor. An urgent arrival turns the second machine on,
// the logical names swap, and every job arriving while both are on goes to
// the new machine. Turn-off: with both machines on, the old machine (new
// secondary) powers off as soon as it is idle; a lone machine idles until
// the time since the current primary's turn-on reaches the break-even time.

#include "powerdown/algo_a.hpp"
#include "powerdown/core.hpp"
#include "powerdown/engine.hpp"

#include <optional>
#include <vector>

namespace powerdown {

struct AlgoSConfig {
    Rat lambda = 1;  // anchor multiplier
};

inline Rat anchor(const Job& j, const EnergyModel& model, const Rat& lambda) {
    return rat_max(j.arrival, j.deadline - lambda * model.break_even());
}

class AlgorithmS final : public Policy {
  public:
    AlgorithmS(const EnergyModel& model, AlgoSConfig config = {})
        : model_(model), config_(std::move(config)) {
        if (config_.lambda <= 0) throw std::invalid_argument("lambda must be positive");
    }

    std::string name() const override { return "s"; }

    Decisions on_arrival(const EngineView& view, int ji) override {
        const Job& j = view.job(ji);
        if (!view.machine_on(0) && !view.machine_on(1)) {
            Decisions out;
            bool woke = false;
            std::vector<PendingWork> batch;
            // A wake-up due now is performed before the new arrival is
            // considered, so a job released exactly at the wake-up moment is
            // tested against the already-on machine.
            if (!pending_.empty() && wake_time(view) <= view.now()) {
                out = wake_all(view);
                woke = true;
                batch = last_batch_;
            }
            if (!woke) {
                pending_.push_back(ji);
                Rat w = wake_time(view);
                if (w <= view.now()) {
                    auto rest = wake_all(view);
                    out.insert(out.end(), rest.begin(), rest.end());
                    return out;
                }
                return {ScheduleTimer{w, kTagWake}};
            }
            // machine just woke with `batch`; treat j as arriving while on
            if (edf_can_accept(batch, PendingWork{j.deadline, j.work}, view.now())) {
                out.push_back(Assign{ji, primary_});
                return out;
            }
            int other = 1 - primary_;
            out.push_back(TurnOn{other});
            out.push_back(Assign{ji, other});
            turn_on_time_[other] = view.now();
            primary_ = other;
            return out;
        }

        bool on0 = view.machine_on(0), on1 = view.machine_on(1);
        if (on0 && on1) return {Assign{ji, primary_}};  // arrivals after the swap point

        int m = on0 ? 0 : 1;
        if (edf_can_accept(queue_works(view, m), PendingWork{j.deadline, j.work}, view.now()))
            return {Assign{ji, m}};
        int other = 1 - m;
        turn_on_time_[other] = view.now();
        primary_ = other;
        return {TurnOn{other}, Assign{ji, other}};
    }

    Decisions on_queue_empty(const EngineView& view, int m) override {
        bool both_on = view.machine_on(0) && view.machine_on(1);
        if (both_on && m != primary_) return {TurnOff{m}};
        Rat target = off_target();
        if (view.now() >= target) return {TurnOff{m}};
        return {StartIdle{m}, ScheduleTimer{target, kTagOffBase + m}};
    }

    Decisions on_timer(const EngineView& view, int tag) override {
        if (tag == kTagWake) {
            if (view.machine_on(0) || view.machine_on(1) || pending_.empty()) return {};
            if (wake_time(view) <= view.now()) return wake_all(view);
            return {};
        }
        int m = tag - kTagOffBase;
        if (!view.machine_idle(m)) return {};
        if (view.now() >= off_target()) return {TurnOff{m}};
        return {};
    }

  private:
    static constexpr int kTagWake = 0;
    static constexpr int kTagOffBase = 1;

    EnergyModel model_;
    AlgoSConfig config_;
    int primary_ = 0;
    std::vector<int> pending_;
    std::optional<Rat> turn_on_time_[2];
    std::vector<PendingWork> last_batch_;

    Rat off_target() const {
        if (!turn_on_time_[primary_]) return 0;
        return *turn_on_time_[primary_] + model_.break_even();
    }

    // Earliest pending anchor, capped by the batch's latest feasible start so
    // that accumulating load can never be anchored past schedulability.
    Rat wake_time(const EngineView& view) const {
        Rat best = 0;
        bool first = true;
        for (int ji : pending_) {
            Rat h = anchor(view.job(ji), model_, config_.lambda);
            if (first || h < best) best = h;
            first = false;
        }
        std::vector<PendingWork> works;
        for (int ji : pending_)
            works.push_back(PendingWork{view.job(ji).deadline, view.job(ji).work});
        if (auto t = latest_feasible_start(works)) best = rat_min(best, *t);
        return best;
    }

    static std::vector<PendingWork> queue_works(const EngineView& view, int m) {
        std::vector<PendingWork> out;
        for (const QueueEntry& e : view.queue(m))
            out.push_back(PendingWork{e.job->deadline, e.remaining});
        return out;
    }

    Decisions wake_all(const EngineView& view) {
        Decisions out;
        out.push_back(TurnOn{primary_});
        turn_on_time_[primary_] = view.now();
        last_batch_.clear();
        for (int ji : pending_) {
            out.push_back(Assign{ji, primary_});
            last_batch_.push_back(PendingWork{view.job(ji).deadline, view.job(ji).work});
        }
        pending_.clear();
        return out;
    }
};

}  // namespace powerdown
