#pragma once

// Phase decomposition of a two-machine trace and per-phase competitive
// accounting against a fixed reference (offline-optimal) schedule.
//
// A phase runs from the earliest arrival among the jobs the online run
// executes in one both-off-to-both-off span to the moment the system is
// fully off again. Reference work outside every phase is grouped into
// special phases. A span is split further wherever a machine powers off
// while the other stays on and some machine powers on again later in the
// same span; the tail intervals are marked virtual.
//
// Work inside a phase is classified per job by who executed it there:
//   alpha - executed by both, lambda - online only, delta - reference only
// with executions split exactly at phase borders, so that
// sum(delta - lambda) telescopes to zero over a complete run.

#include "powerdown/core.hpp"
#include "powerdown/engine.hpp"
#include "powerdown/oracle.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace powerdown {

enum class PhaseKind { kSingle, kDual, kSpecial };

struct Phase {
    Rat t0;  // phase start (earliest arrival of jobs executed in the span)
    Rat t1;  // first turn-on of the span (== t0 for special phases)
    Rat te;  // phase end
    PhaseKind kind = PhaseKind::kSingle;
    bool is_virtual = false;  // tail interval produced by a split
};

struct PhaseAccount {
    Rat alg_cost;        // A(i)
    Rat opt_free;        // O_f(i): no turn-on charged for the reference's first activation
    Rat opt_on;          // O_n(i): reference held on until the phase end
    Rat opt_real;        // actual reference cost inside the phase
    Rat alpha;
    Rat lambda;
    Rat delta;
    bool opt_on_at_end = false;
    // claim fields: the 1.5 bound on reference work plus idle, meaningful
    // only when the reference stays on contiguously through the phase
    bool claim_applicable = false;
    Rat claim_lhs;
};

struct Lemma3Result {
    bool ineq2 = false;  // r*O_f - A >= delta - lambda - r
    bool ineq3 = false;  // r*O_n - A >= delta - lambda
};

namespace detail_analysis {

struct Interval {
    Rat start, end;
};

inline std::vector<Interval> on_spans(const Trace& trace) {
    std::vector<Interval> raw;
    for (const auto& machine : trace.machines)
        for (const Segment& s : machine)
            if (s.state != SegmentState::kOff) raw.push_back(Interval{s.start, s.end});
    std::sort(raw.begin(), raw.end(),
              [](const Interval& a, const Interval& b) { return a.start < b.start; });
    std::vector<Interval> merged;
    for (const Interval& iv : raw) {
        if (!merged.empty() && iv.start <= merged.back().end)
            merged.back().end = rat_max(merged.back().end, iv.end);
        else
            merged.push_back(iv);
    }
    return merged;
}

inline bool on_at(const Trace& trace, const Rat& t) {
    for (const auto& machine : trace.machines)
        for (const Segment& s : machine)
            if (s.state != SegmentState::kOff && s.start <= t && t < s.end) return true;
    return false;
}

struct ClippedCosts {
    Rat busy;
    Rat idle;
    int turn_ons = 0;
    std::map<std::string, Rat> busy_per_job;
    std::vector<Interval> active;  // non-off pieces clipped to the window
};

inline ClippedCosts clip_costs(const Trace& trace, const Rat& lo, const Rat& hi) {
    ClippedCosts out;
    for (const auto& machine : trace.machines) {
        for (const Segment& s : machine) {
            Rat a = rat_max(s.start, lo), b = rat_min(s.end, hi);
            if (a >= b) continue;
            if (s.state == SegmentState::kBusy) {
                out.busy += b - a;
                out.busy_per_job[s.job] += b - a;
                out.active.push_back(Interval{a, b});
            } else if (s.state == SegmentState::kIdle) {
                out.idle += b - a;
                out.active.push_back(Interval{a, b});
            }
        }
    }
    for (const TurnOnEvent& e : trace.turn_ons)
        if (lo <= e.time && e.time < hi) out.turn_ons += 1;
    std::sort(out.active.begin(), out.active.end(),
              [](const Interval& a, const Interval& b) { return a.start < b.start; });
    std::vector<Interval> merged;
    for (const Interval& iv : out.active) {
        if (!merged.empty() && iv.start <= merged.back().end)
            merged.back().end = rat_max(merged.back().end, iv.end);
        else
            merged.push_back(iv);
    }
    out.active = std::move(merged);
    return out;
}

}  // namespace detail_analysis

// Phases of the online trace plus special phases for reference-only
// activity, ordered by time and tiling every active moment of either trace.
inline std::vector<Phase> extract_phases(const Trace& alg_trace, const Trace& opt_trace,
                                         const Instance& instance) {
    using detail_analysis::Interval;
    std::vector<Phase> phases;

    std::map<std::string, const Job*> by_id;
    for (const Job& j : instance.jobs) by_id[j.id] = &j;

    const auto spans = detail_analysis::on_spans(alg_trace);
    for (const Interval& span : spans) {
        // earliest arrival among jobs the online run executes in the span
        std::optional<Rat> t0;
        for (const auto& machine : alg_trace.machines)
            for (const Segment& s : machine) {
                if (s.state != SegmentState::kBusy) continue;
                if (s.end <= span.start || s.start >= span.end) continue;
                const Rat& a = by_id.at(s.job)->arrival;
                if (!t0 || a < *t0) t0 = a;
            }
        Rat start = t0 ? rat_min(*t0, span.start) : span.start;

        // split points: a machine goes off inside the span while the other
        // stays on, and some machine powers on again later in the span
        std::vector<Rat> splits;
        for (int m = 0; m < Trace::kMachines; ++m) {
            const auto& segs = alg_trace.machines[m];
            for (std::size_t i = 0; i + 1 < segs.size(); ++i) {
                if (segs[i].state == SegmentState::kOff ||
                    segs[i + 1].state != SegmentState::kOff)
                    continue;
                Rat tau = segs[i].end;
                if (tau <= span.start || tau >= span.end) continue;
                bool later_on = false;
                for (const TurnOnEvent& e : alg_trace.turn_ons)
                    if (e.time > tau && e.time < span.end) later_on = true;
                if (later_on) splits.push_back(tau);
            }
        }
        std::sort(splits.begin(), splits.end());
        splits.erase(std::unique(splits.begin(), splits.end()), splits.end());

        std::vector<Rat> bounds{start};
        for (const Rat& s : splits) bounds.push_back(s);
        bounds.push_back(span.end);
        for (std::size_t k = 0; k + 1 < bounds.size(); ++k) {
            Phase ph;
            ph.t0 = bounds[k];
            ph.t1 = k == 0 ? span.start : bounds[k];
            ph.te = bounds[k + 1];
            ph.is_virtual = k > 0;
            bool on0 = false, on1 = false;
            for (int m = 0; m < Trace::kMachines; ++m)
                for (const Segment& s : alg_trace.machines[m])
                    if (s.state != SegmentState::kOff && s.start < ph.te && s.end > ph.t1)
                        (m == 0 ? on0 : on1) = true;
            ph.kind = (on0 && on1) ? PhaseKind::kDual : PhaseKind::kSingle;
            phases.push_back(ph);
        }
    }

    // special phases: reference activity outside all online phases
    std::vector<Interval> opt_active = detail_analysis::on_spans(opt_trace);
    std::vector<Interval> gaps;
    for (const Interval& act : opt_active) {
        Rat lo = act.start, hi = act.end;
        // subtract phase intervals
        std::vector<Interval> pieces{Interval{lo, hi}};
        for (const Phase& ph : phases) {
            std::vector<Interval> next;
            for (const Interval& piece : pieces) {
                if (ph.te <= piece.start || ph.t0 >= piece.end) {
                    next.push_back(piece);
                    continue;
                }
                if (piece.start < ph.t0) next.push_back(Interval{piece.start, ph.t0});
                if (ph.te < piece.end) next.push_back(Interval{ph.te, piece.end});
            }
            pieces = std::move(next);
        }
        for (const Interval& piece : pieces) gaps.push_back(piece);
    }
    std::sort(gaps.begin(), gaps.end(),
              [](const Interval& a, const Interval& b) { return a.start < b.start; });
    std::vector<Interval> merged;
    for (const Interval& g : gaps) {
        if (!merged.empty() && g.start <= merged.back().end)
            merged.back().end = rat_max(merged.back().end, g.end);
        else
            merged.push_back(g);
    }
    for (const Interval& g : merged) {
        Phase ph;
        ph.t0 = g.start;
        ph.t1 = g.start;
        ph.te = g.end;
        ph.kind = PhaseKind::kSpecial;
        phases.push_back(ph);
    }

    std::sort(phases.begin(), phases.end(),
              [](const Phase& a, const Phase& b) { return a.t0 < b.t0; });
    return phases;
}

inline PhaseAccount phase_accounts(const Phase& phase, const Trace& alg_trace,
                                   const Trace& opt_trace, const Instance& instance) {
    using detail_analysis::clip_costs;
    const Rat psi = instance.model.psi_sigma;
    PhaseAccount acc;

    auto alg = clip_costs(alg_trace, phase.t0, phase.te);
    auto opt = clip_costs(opt_trace, phase.t0, phase.te);

    acc.alg_cost = Rat(alg.turn_ons) + alg.busy + alg.idle * psi;
    acc.opt_real = Rat(opt.turn_ons) + opt.busy + opt.idle * psi;

    bool opt_on_at_start = detail_analysis::on_at(opt_trace, phase.t0);
    int charged = opt.turn_ons;
    if (!opt_on_at_start && charged > 0) charged -= 1;  // first activation is free
    acc.opt_free = Rat(charged) + opt.busy + opt.idle * psi;

    // classification per job
    std::map<std::string, Rat> alg_w = alg.busy_per_job;
    std::map<std::string, Rat> opt_w = opt.busy_per_job;
    for (const Job& j : instance.jobs) {
        Rat a = alg_w.count(j.id) ? alg_w[j.id] : Rat(0);
        Rat o = opt_w.count(j.id) ? opt_w[j.id] : Rat(0);
        acc.alpha += rat_min(a, o);
        if (a > o) acc.lambda += a - o;
        if (o > a) acc.delta += o - a;
    }

    acc.opt_on_at_end = detail_analysis::on_at(opt_trace, phase.te);
    if (acc.opt_on_at_end) {
        acc.opt_on = acc.opt_free;
    } else if (opt.active.empty()) {
        acc.opt_on = acc.opt_free + 1;  // must power on by the end of the phase
    } else {
        Rat extension = phase.te - opt.active.back().end;
        acc.opt_on = acc.opt_free + psi * extension;
        // claim bound: applies when the clipped reference activity forms a
        // single on-block (no power cycle inside the phase)
        if (phase.kind == PhaseKind::kSingle && opt.active.size() == 1 && opt.busy > 0) {
            acc.claim_applicable = true;
            acc.claim_lhs = acc.alpha + acc.delta + psi * (opt.idle + extension);
        }
    }
    if (acc.opt_on_at_end && phase.kind == PhaseKind::kSingle && opt.active.size() == 1 &&
        opt.busy > 0) {
        acc.claim_applicable = true;
        acc.claim_lhs = acc.alpha + acc.delta + psi * opt.idle;
    }
    return acc;
}

inline Lemma3Result check_lemma3(const PhaseAccount& acc, const Rat& r = 3) {
    Lemma3Result res;
    res.ineq2 = r * acc.opt_free - acc.alg_cost >= acc.delta - acc.lambda - r;
    res.ineq3 = r * acc.opt_on - acc.alg_cost >= acc.delta - acc.lambda;
    return res;
}

struct Claim1Result {
    bool applicable = false;
    bool holds = true;  // vacuously true when not applicable
    Rat lhs;
};

inline Claim1Result check_claim1(const PhaseAccount& acc) {
    Claim1Result res;
    res.applicable = acc.claim_applicable;
    if (res.applicable) {
        res.lhs = acc.claim_lhs;
        res.holds = res.lhs >= make_rat(3, 2);
    }
    return res;
}

struct PhaseReport {
    Phase phase;
    PhaseAccount account;
    Lemma3Result lemma3;
    Claim1Result claim1;
};

struct CompetitiveReport {
    Rat alg_energy;
    Rat opt_energy;
    std::optional<Rat> ratio;  // unset for empty instances
    std::vector<PhaseReport> phases;
    Rat sum_delta_minus_lambda;
    std::vector<Rat> lemma4_margins;  // per prefix, must be >= 0
    bool lemma3_all = true;
    bool lemma4_all = true;
    bool claim1_all = true;

    bool all_hold() const { return lemma3_all && lemma4_all && claim1_all; }
};

// gcd of all time quantities; the natural oracle grid for an instance
inline Rat natural_grid(const Instance& instance) {
    Rat g = 0;
    for (const Job& j : instance.jobs) {
        g = rat_gcd(g, j.arrival);
        g = rat_gcd(g, j.deadline);
        g = rat_gcd(g, j.work);
    }
    return g == 0 ? Rat(1) : g;
}

inline CompetitiveReport analyze_traces(const Instance& instance, const Trace& alg_trace,
                                        const Trace& opt_trace, const Rat& opt_energy,
                                        const Rat& r = 3) {
    CompetitiveReport report;
    report.alg_energy = energy_of_trace(alg_trace, instance.model);
    report.opt_energy = opt_energy;
    if (report.opt_energy > 0) report.ratio = report.alg_energy / report.opt_energy;

    auto phases = extract_phases(alg_trace, opt_trace, instance);
    Rat lemma4_sum = 0;
    report.sum_delta_minus_lambda = 0;
    for (const Phase& ph : phases) {
        PhaseReport pr;
        pr.phase = ph;
        pr.account = phase_accounts(ph, alg_trace, opt_trace, instance);
        pr.lemma3 = check_lemma3(pr.account, r);
        pr.claim1 = check_claim1(pr.account);
        if (!pr.lemma3.ineq2 || !pr.lemma3.ineq3) report.lemma3_all = false;
        if (!pr.claim1.holds) report.claim1_all = false;

        report.sum_delta_minus_lambda += pr.account.delta - pr.account.lambda;
        lemma4_sum += r * pr.account.opt_real - pr.account.alg_cost;
        Rat bound = report.sum_delta_minus_lambda + (pr.account.opt_on_at_end ? r : Rat(0));
        report.lemma4_margins.push_back(lemma4_sum - bound);
        if (lemma4_sum < bound) report.lemma4_all = false;

        report.phases.push_back(std::move(pr));
    }
    return report;
}

template <typename PolicyT>
CompetitiveReport competitive_report(const Instance& instance, PolicyT& policy,
                                     std::optional<Rat> grid_step = std::nullopt,
                                     const Rat& r = 3) {
    Trace alg_trace = simulate(instance, policy);
    Rat grid = grid_step ? *grid_step : natural_grid(instance);
    OptSchedule opt = optimal_energy(instance, grid);
    return analyze_traces(instance, alg_trace, opt.trace, opt.energy, r);
}

}  // namespace powerdown
