#pragma once

// Offline minimum-energy oracle for a single machine: memoized search over
// grid time, state = (machine on/off, remaining-work vector). When the
// machine processes at all it processes the earliest-deadline released job
// (an exchange argument keeps this exact; optimal_energy_bruteforce skips
// the rule and is used to cross-validate).
//
// Two accelerations keep the state frontier small without changing the
// value: (1) dominance pruning - a state with at least as much work done on
// every deadline prefix and a work-adjusted cost no larger can mimic any
// plan of the state it dominates; (2) whole stretches between event points
// are jumped in closed form when every surviving state either has no
// released work or is forced to stay busy for the entire stretch.

#include "powerdown/core.hpp"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

namespace powerdown {

struct OptSchedule {
    Trace trace;  // single machine (index 0)
    Rat energy;
};

struct InfeasibleInstanceError : std::runtime_error {
    explicit InfeasibleInstanceError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail_oracle {

using std::int64_t;

struct GridInstance {
    int n = 0;
    std::vector<int64_t> arrival, deadline, work;  // in cells
    std::vector<int> edf_order;                    // job indices by (deadline, index)
    int64_t start = 0, end = 0;                    // first arrival, last deadline
    Rat grid;
    // integer cost units: cost_int * unit == energy, unit = g / (q * gn)
    Rat unit;
    int64_t turnon_u = 0, busy_u = 0, idle_u = 0;
};

inline GridInstance make_grid_instance(const Instance& instance, const Rat& grid_step) {
    if (grid_step <= 0) throw std::invalid_argument("grid_step must be positive");
    GridInstance g;
    g.n = int(instance.jobs.size());
    g.grid = grid_step;
    for (const Job& j : instance.jobs) {
        g.arrival.push_back(exact_div(j.arrival, grid_step));
        g.deadline.push_back(exact_div(j.deadline, grid_step));
        g.work.push_back(exact_div(j.work, grid_step));
        if (g.work.back() <= 0)
            throw std::invalid_argument("job work below grid resolution");
    }
    for (int i = 0; i < g.n; ++i) g.edf_order.push_back(i);
    std::sort(g.edf_order.begin(), g.edf_order.end(), [&](int a, int b) {
        if (g.deadline[a] != g.deadline[b]) return g.deadline[a] < g.deadline[b];
        return a < b;
    });
    if (g.n > 0) {
        g.start = *std::min_element(g.arrival.begin(), g.arrival.end());
        g.end = *std::max_element(g.deadline.begin(), g.deadline.end());
    }

    using boost::multiprecision::denominator;
    using boost::multiprecision::numerator;
    const Rat psi = instance.model.psi_sigma;
    const BigInt p = numerator(psi), q = denominator(psi);
    const BigInt gn = numerator(grid_step), gd = denominator(grid_step);
    g.unit = grid_step / Rat(q * gn);
    g.turnon_u = BigInt(q * gd).convert_to<int64_t>();
    g.busy_u = BigInt(q * gn).convert_to<int64_t>();
    g.idle_u = BigInt(p * gn).convert_to<int64_t>();
    return g;
}

// One DP state at a cell boundary.
struct State {
    bool on = false;
    std::vector<int64_t> rem;
    int64_t cost = 0;
    int64_t done = 0;  // total cells worked
    // reconstruction
    int parent = -1;
    int8_t action = 0;      // 'F' off, 'I' idle, 'B' busy, plus runs
    int64_t run_len = 0;    // cells covered by this action
};

// actions
constexpr int8_t kActNone = 0;
constexpr int8_t kActOff = 1;
constexpr int8_t kActIdle = 2;
constexpr int8_t kActBusy = 3;

struct Layer {
    int64_t cell_start = 0;  // boundary position this layer's states live at
    std::vector<State> states;
};

class OracleDp {
  public:
    OracleDp(const Instance& instance, const Rat& grid_step, bool keep_layers)
        : gi_(make_grid_instance(instance, grid_step)), keep_layers_(keep_layers) {}

    // minimal total cost in integer units; layers retained if requested
    std::optional<int64_t> solve() {
        if (gi_.n == 0) return 0;
        events_ = collect_events();
        State init;
        init.on = false;
        init.rem = gi_.work;
        frontier_ = {init};
        push_layer(events_.front());
        for (std::size_t s = 0; s + 1 < events_.size(); ++s) {
            run_stretch(events_[s], events_[s + 1]);
            enforce_deadlines(events_[s + 1]);
            if (frontier_.empty()) return std::nullopt;
        }
        int64_t best = std::numeric_limits<int64_t>::max();
        for (const State& st : frontier_) best = std::min(best, st.cost);
        return best;
    }

    const GridInstance& grid() const { return gi_; }
    const std::vector<Layer>& layers() const { return layers_; }
    const std::vector<State>& frontier() const { return frontier_; }

  private:
    GridInstance gi_;
    bool keep_layers_;
    std::vector<int64_t> events_;
    std::vector<State> frontier_;
    std::vector<Layer> layers_;

    std::vector<int64_t> collect_events() const {
        std::vector<int64_t> ev;
        for (int i = 0; i < gi_.n; ++i) {
            ev.push_back(gi_.arrival[i]);
            ev.push_back(gi_.deadline[i]);
        }
        std::sort(ev.begin(), ev.end());
        ev.erase(std::unique(ev.begin(), ev.end()), ev.end());
        return ev;
    }

    void push_layer(int64_t cell) {
        if (!keep_layers_) return;
        Layer layer;
        layer.cell_start = cell;
        layer.states = frontier_;
        layers_.push_back(std::move(layer));
    }

    std::vector<int> released_at(int64_t t) const {
        std::vector<int> out;  // EDF order
        for (int j : gi_.edf_order)
            if (gi_.arrival[j] <= t) out.push_back(j);
        return out;
    }

    int64_t released_remaining(const State& st, const std::vector<int>& released) const {
        int64_t sum = 0;
        for (int j : released) sum += st.rem[j];
        return sum;
    }

    // Work that must happen inside [from, to) for any future deadline to stay
    // satisfiable, assuming full capacity afterwards. A valid lower bound, so
    // forcing and pruning on it are exact.
    int64_t forced_work(const State& st, int64_t from, int64_t to) const {
        int64_t force = 0;
        int64_t needed = 0;
        for (int j : gi_.edf_order) {  // by deadline
            if (gi_.deadline[j] <= from) continue;
            needed += gi_.arrival[j] <= from ? st.rem[j] : gi_.work[j];
            int64_t capacity = gi_.deadline[j] - to;
            force = std::max(force, needed - std::max<int64_t>(capacity, 0));
        }
        return force;
    }

    static void consume_edf(State& st, const std::vector<int>& released, int64_t amount) {
        for (int j : released) {
            if (amount == 0) break;
            int64_t take = std::min(st.rem[j], amount);
            st.rem[j] -= take;
            amount -= take;
        }
        if (amount != 0) throw std::logic_error("consume_edf exceeded released work");
    }

    void emit(std::vector<State>& out, State st) { out.push_back(std::move(st)); }

    // dedup + dominance
    void prune(std::vector<State>& states) const {
        // exact dedup on (on, rem)
        std::sort(states.begin(), states.end(), [](const State& a, const State& b) {
            if (a.on != b.on) return a.on < b.on;
            if (a.rem != b.rem) return a.rem < b.rem;
            return a.cost < b.cost;
        });
        states.erase(std::unique(states.begin(), states.end(),
                                 [](const State& a, const State& b) {
                                     return a.on == b.on && a.rem == b.rem;
                                 }),
                     states.end());

        const int64_t phi_rate = gi_.busy_u - gi_.idle_u;  // >= 0
        std::vector<bool> dead(states.size(), false);
        auto prefix_dominates = [&](const State& a, const State& b) {
            int64_t pa = 0, pb = 0;
            for (int j : gi_.edf_order) {
                pa += a.rem[j];
                pb += b.rem[j];
                if (pa > pb) return false;
            }
            return true;
        };
        for (std::size_t i = 0; i < states.size(); ++i) {
            if (dead[i]) continue;
            for (std::size_t k = 0; k < states.size(); ++k) {
                if (i == k || dead[k]) continue;
                const State& a = states[i];
                const State& b = states[k];
                if (a.on != b.on) continue;
                if (a.done < b.done) continue;
                if (a.cost - (a.done - b.done) * phi_rate > b.cost) continue;
                if (a.done == b.done && a.cost == b.cost && i > k) continue;  // keep one
                if (!prefix_dominates(a, b)) continue;
                dead[k] = true;
            }
        }
        std::vector<State> kept;
        for (std::size_t i = 0; i < states.size(); ++i)
            if (!dead[i]) kept.push_back(std::move(states[i]));
        states.swap(kept);
    }

    void enforce_deadlines(int64_t t) {
        std::vector<State> kept;
        for (State& st : frontier_) {
            bool ok = true;
            for (int j = 0; j < gi_.n; ++j)
                if (gi_.deadline[j] <= t && st.rem[j] > 0) {
                    ok = false;
                    break;
                }
            if (ok) kept.push_back(std::move(st));
        }
        frontier_.swap(kept);
        sync_last_layer();
    }

    void sync_last_layer() {
        if (keep_layers_ && !layers_.empty()) layers_.back().states = frontier_;
    }

    void run_stretch(int64_t from, int64_t to) {
        const std::vector<int> released = released_at(from);
        int64_t pos = from;
        while (pos < to) {
            int64_t len = to - pos;
            // drop states that cannot satisfy some future deadline even at
            // full capacity; forced_work is a valid lower bound
            {
                std::vector<State> alive;
                for (State& st : frontier_) {
                    int64_t avail = released_remaining(st, released);
                    if (forced_work(st, pos, to) <= std::min(len, avail))
                        alive.push_back(std::move(st));
                }
                if (alive.size() != frontier_.size()) {
                    frontier_.swap(alive);
                    sync_last_layer();
                }
            }
            if (frontier_.empty()) return;

            bool none_left = true;
            bool all_forced = true;
            for (const State& st : frontier_) {
                int64_t avail = released_remaining(st, released);
                if (avail > 0) none_left = false;
                if (forced_work(st, pos, to) < len) all_forced = false;
            }
            if (none_left) {
                bulk_gap(pos, len);
                pos = to;
            } else if (all_forced) {
                bulk_busy(released, pos, len);
                pos = to;
            } else {
                step_cell(released, pos);
                pos += 1;
            }
            if (frontier_.empty()) return;
        }
    }

    void record(State& st, int parent, int8_t action, int64_t run) const {
        st.parent = parent;
        st.action = action;
        st.run_len = run;
    }

    void bulk_gap(int64_t pos, int64_t len) {
        std::vector<State> next;
        for (std::size_t i = 0; i < frontier_.size(); ++i) {
            const State& st = frontier_[i];
            if (st.on) {
                State idle = st;
                idle.cost += len * gi_.idle_u;
                record(idle, int(i), kActIdle, len);
                emit(next, std::move(idle));
            }
            State off = st;
            off.on = false;
            off.cost += 0;
            record(off, int(i), kActOff, len);
            emit(next, std::move(off));
        }
        advance_frontier(pos + len, std::move(next));
    }

    void bulk_busy(const std::vector<int>& released, int64_t pos, int64_t len) {
        std::vector<State> next;
        for (std::size_t i = 0; i < frontier_.size(); ++i) {
            State busy = frontier_[i];
            if (!busy.on) {
                busy.cost += gi_.turnon_u;
                busy.on = true;
            }
            busy.cost += len * gi_.busy_u;
            busy.done += len;
            consume_edf(busy, released, len);
            record(busy, int(i), kActBusy, len);
            emit(next, std::move(busy));
        }
        advance_frontier(pos + len, std::move(next));
    }

    void step_cell(const std::vector<int>& released, int64_t pos) {
        std::vector<State> next;
        for (std::size_t i = 0; i < frontier_.size(); ++i) {
            const State& st = frontier_[i];
            int64_t avail = released_remaining(st, released);
            // off through the cell
            {
                State off = st;
                off.on = false;
                record(off, int(i), kActOff, 1);
                emit(next, std::move(off));
            }
            // idle through the cell (only useful if already on)
            if (st.on) {
                State idle = st;
                idle.cost += gi_.idle_u;
                record(idle, int(i), kActIdle, 1);
                emit(next, std::move(idle));
            }
            // busy on the EDF-first released job
            if (avail > 0) {
                State busy = st;
                if (!busy.on) {
                    busy.cost += gi_.turnon_u;
                    busy.on = true;
                }
                busy.cost += gi_.busy_u;
                busy.done += 1;
                consume_edf(busy, released, 1);
                record(busy, int(i), kActBusy, 1);
                emit(next, std::move(busy));
            }
        }
        advance_frontier(pos + 1, std::move(next));
    }

    void advance_frontier(int64_t cell, std::vector<State> next) {
        prune(next);
        frontier_ = std::move(next);
        if (keep_layers_) {
            if (layers_.size() >= 2'000'000)
                throw std::runtime_error("schedule reconstruction over guard size");
            Layer layer;
            layer.cell_start = cell;
            layer.states = frontier_;
            layers_.push_back(std::move(layer));
        }
    }
};

}  // namespace detail_oracle

inline Rat optimal_energy_value(const Instance& instance, const Rat& grid_step) {
    instance.validate();
    if (instance.jobs.empty()) return 0;
    auto feas = check_feasibility(instance);
    if (!feas.feasible)
        throw InfeasibleInstanceError("instance fails the interval condition");
    detail_oracle::OracleDp dp(instance, grid_step, false);
    auto best = dp.solve();
    if (!best) throw InfeasibleInstanceError("no feasible schedule found on the grid");
    return Rat(*best) * dp.grid().unit;
}

// Full schedule reconstruction. Guarded: layer storage is linear in the
// number of non-jumped cells.
inline OptSchedule optimal_energy(const Instance& instance, const Rat& grid_step) {
    instance.validate();
    OptSchedule out;
    if (instance.jobs.empty()) {
        out.energy = 0;
        return out;
    }
    auto feas = check_feasibility(instance);
    if (!feas.feasible)
        throw InfeasibleInstanceError("instance fails the interval condition");

    detail_oracle::OracleDp dp(instance, grid_step, true);
    auto best = dp.solve();
    if (!best) throw InfeasibleInstanceError("no feasible schedule found on the grid");
    out.energy = Rat(*best) * dp.grid().unit;

    const auto& layers = dp.layers();
    // walk back from the cheapest final state
    int layer_idx = int(layers.size()) - 1;
    int state_idx = -1;
    for (std::size_t i = 0; i < layers.back().states.size(); ++i)
        if (state_idx < 0 ||
            layers.back().states[i].cost < layers.back().states[state_idx].cost)
            state_idx = int(i);

    struct Step {
        int64_t start_cell;
        int64_t len;
        int8_t action;
        std::vector<std::int64_t> rem_before;  // for EDF replay on busy runs
        bool turned_on;
    };
    std::vector<Step> steps;
    while (layer_idx > 0) {
        const auto& st = layers[layer_idx].states[state_idx];
        const auto& parent = layers[layer_idx - 1].states[st.parent];
        Step step;
        step.len = st.run_len;
        step.start_cell = layers[layer_idx].cell_start - st.run_len;
        step.action = st.action;
        step.rem_before = parent.rem;
        step.turned_on = !parent.on && st.on;
        steps.push_back(std::move(step));
        state_idx = st.parent;
        --layer_idx;
    }
    std::reverse(steps.begin(), steps.end());

    const auto& gi = dp.grid();
    const Rat g = gi.grid;
    Trace& trace = out.trace;
    auto add_segment = [&](const Rat& s, const Rat& e, SegmentState state, std::string job) {
        if (s == e) return;
        auto& segs = trace.machines[0];
        if (!segs.empty() && segs.back().end == s && segs.back().state == state &&
            segs.back().job == job) {
            segs.back().end = e;
            return;
        }
        segs.push_back(Segment{s, e, state, std::move(job)});
    };

    Rat cursor = Rat(layers.front().cell_start) * g;
    for (const Step& step : steps) {
        Rat s = Rat(step.start_cell) * g;
        Rat e = Rat(step.start_cell + step.len) * g;
        if (cursor < s) add_segment(cursor, s, SegmentState::kOff, "");
        if (step.turned_on) trace.turn_ons.push_back(TurnOnEvent{0, s});
        if (step.action == detail_oracle::kActOff) {
            add_segment(s, e, SegmentState::kOff, "");
        } else if (step.action == detail_oracle::kActIdle) {
            add_segment(s, e, SegmentState::kIdle, "");
        } else {
            // replay EDF consumption to split the run into per-job pieces
            auto rem = step.rem_before;
            Rat at = s;
            int64_t left = step.len;
            for (int j : gi.edf_order) {
                if (left == 0) break;
                if (gi.arrival[j] > step.start_cell) continue;
                int64_t take = std::min(rem[j], left);
                if (take == 0) continue;
                Rat until = at + Rat(take) * g;
                add_segment(at, until, SegmentState::kBusy, instance.jobs[j].id);
                at = until;
                left -= take;
            }
            if (left != 0) throw std::logic_error("busy run replay mismatch");
        }
        cursor = e;
    }
    return out;
}

// Full branching over which released job to process each cell; no dominance
// rule at all. Exponential, so guarded to tiny inputs; exists to validate
// the pruned search.
inline Rat optimal_energy_bruteforce(const Instance& instance, const Rat& grid_step) {
    instance.validate();
    if (instance.jobs.empty()) return 0;
    if (instance.jobs.size() > 5)
        throw std::invalid_argument("bruteforce oracle limited to 5 jobs");
    auto gi = detail_oracle::make_grid_instance(instance, grid_step);
    if (gi.end - gi.start > 40)
        throw std::invalid_argument("bruteforce oracle limited to 40 grid cells");
    auto feas = check_feasibility(instance);
    if (!feas.feasible)
        throw InfeasibleInstanceError("instance fails the interval condition");

    struct Key {
        std::int64_t cell;
        bool on;
        std::vector<std::int64_t> rem;
        bool operator<(const Key& o) const {
            if (cell != o.cell) return cell < o.cell;
            if (on != o.on) return on < o.on;
            return rem < o.rem;
        }
    };
    std::map<Key, std::int64_t> memo;
    const std::int64_t kInf = std::numeric_limits<std::int64_t>::max() / 4;

    std::function<std::int64_t(std::int64_t, bool, std::vector<std::int64_t>&)> go =
        [&](std::int64_t cell, bool on, std::vector<std::int64_t>& rem) -> std::int64_t {
        for (int j = 0; j < gi.n; ++j)
            if (gi.deadline[j] <= cell && rem[j] > 0) return kInf;
        if (cell >= gi.end) return 0;
        Key key{cell, on, rem};
        auto it = memo.find(key);
        if (it != memo.end()) return it->second;

        std::int64_t best = kInf;
        // off through this cell
        best = std::min(best, go(cell + 1, false, rem));
        // idle through this cell (turning on just to idle is allowed here;
        // full branching is the point)
        {
            std::int64_t v = go(cell + 1, true, rem);
            if (v < kInf)
                best = std::min(best, (on ? 0 : gi.turnon_u) + gi.idle_u + v);
        }
        // process any released unfinished job
        for (int j = 0; j < gi.n; ++j) {
            if (gi.arrival[j] > cell || rem[j] == 0) continue;
            rem[j] -= 1;
            std::int64_t v = go(cell + 1, true, rem);
            rem[j] += 1;
            if (v >= kInf) continue;
            std::int64_t c = gi.busy_u + v + (on ? 0 : gi.turnon_u);
            best = std::min(best, c);
        }
        memo[key] = best;
        return best;
    };

    std::vector<std::int64_t> rem = gi.work;
    std::int64_t best = go(gi.start, false, rem);
    if (best >= kInf) throw InfeasibleInstanceError("no feasible schedule on the grid");
    return Rat(best) * gi.unit;
}

// ---------------------------------------------------------------------------
// Heuristic single-machine schedules (upper bounds on the optimum).

// Work-conserving EDF: on while work is pending, off as soon as none is.
inline Trace edf_immediate_schedule(const Instance& instance) {
    Trace trace;
    struct Item {
        const Job* job;
        int index;
        Rat remaining;
    };
    const auto& jobs = instance.jobs;
    std::size_t next = 0;
    std::vector<Item> active;
    if (jobs.empty()) return trace;
    Rat t = jobs.front().arrival;
    Rat span_start = t;
    bool on = false;

    auto pick = [&]() -> Item* {
        Item* best = nullptr;
        for (auto& it : active) {
            if (it.remaining == 0) continue;
            if (!best || it.job->deadline < best->job->deadline ||
                (it.job->deadline == best->job->deadline && it.index < best->index))
                best = &it;
        }
        return best;
    };

    while (true) {
        while (next < jobs.size() && jobs[next].arrival <= t) {
            active.push_back(Item{&jobs[next], int(next), jobs[next].work});
            ++next;
        }
        Item* cur = pick();
        if (!cur) {
            on = false;
            if (next == jobs.size()) break;
            t = jobs[next].arrival;
            continue;
        }
        if (!on) {
            on = true;
            span_start = t;
            trace.turn_ons.push_back(TurnOnEvent{0, t});
        }
        Rat step = cur->remaining;
        if (next < jobs.size()) step = rat_min(step, jobs[next].arrival - t);
        trace.machines[0].push_back(Segment{t, t + step, SegmentState::kBusy, cur->job->id});
        cur->remaining -= step;
        t += step;
    }
    return trace;
}

// Latest feasible placement: mirror the windows, run work-conserving EDF on
// the mirror, and reflect the busy pieces back. Off between busy blocks.
inline Trace edf_latest_schedule(const Instance& instance) {
    if (instance.jobs.empty()) return Trace{};
    Rat pivot = instance.latest_deadline();
    std::vector<Job> mirrored;
    for (const Job& j : instance.jobs)
        mirrored.push_back(Job{j.id, pivot - j.deadline, pivot - j.arrival, j.work});
    Instance mirror_inst(instance.model, std::move(mirrored));
    Trace mirror = edf_immediate_schedule(mirror_inst);

    std::vector<Segment> segs;
    for (const Segment& s : mirror.machines[0])
        segs.push_back(Segment{pivot - s.end, pivot - s.start, s.state, s.job});
    std::sort(segs.begin(), segs.end(),
              [](const Segment& a, const Segment& b) { return a.start < b.start; });

    Trace out;
    for (const Segment& s : segs) {
        auto& m = out.machines[0];
        bool new_block = m.empty() || m.back().end != s.start;
        if (new_block) out.turn_ons.push_back(TurnOnEvent{0, s.start});
        m.push_back(s);
    }
    return out;
}

}  // namespace powerdown
