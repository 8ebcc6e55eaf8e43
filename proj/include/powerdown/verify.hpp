#pragma once

// Seeded property suite over random feasible instances: policy correctness,
// the factor-3 energy bound, the per-phase inequalities and their prefix
// sums, the claim bound on single phases, the accounting identity, oracle
// bounds against heuristic schedules, and the interval-condition/EDF
// equivalence on raw drafts.

#include "powerdown/adversary.hpp"
#include "powerdown/algo_a.hpp"
#include "powerdown/algo_s.hpp"
#include "powerdown/analysis.hpp"
#include "powerdown/core.hpp"
#include "powerdown/engine.hpp"
#include "powerdown/json_io.hpp"
#include "powerdown/oracle.hpp"

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace powerdown {

struct VerifyOptions {
    int n = 1000;
    std::uint64_t base_seed = 20240101;
    Rat margin = make_rat(1, 2);
    std::optional<Rat> idle_budget_override;  // for mutation experiments
    int max_jobs = 8;
    std::int64_t max_horizon = 40;
    bool check_lemmas = true;
    bool quick = false;  // skip the slower cross-checks
};

struct VerifyFailure {
    std::uint64_t seed = 0;
    std::string property;
    Instance instance;
};

struct VerifyOutcome {
    int instances = 0;
    int phases = 0;
    int single_phases = 0;
    int claim1_applicable = 0;
    std::vector<VerifyFailure> failures;
    bool ok() const { return failures.empty(); }
};

namespace detail_verify {

// raw draft that may violate the interval condition (jobs are individually
// schedulable, the set may not be)
inline Instance raw_draft(std::uint64_t seed, int n_jobs, std::int64_t horizon) {
    std::mt19937_64 rng(seed);
    auto draw = [&](std::int64_t lo, std::int64_t hi) {
        return lo + std::int64_t(rng() % std::uint64_t(hi - lo + 1));
    };
    EnergyModel model;
    model.psi_sigma = 1;
    std::vector<Job> jobs;
    for (int i = 0; i < n_jobs; ++i) {
        std::int64_t a = draw(0, horizon - 1);
        std::int64_t d = draw(a + 1, horizon);
        std::int64_t c = draw(1, d - a);
        jobs.push_back(Job{"r" + std::to_string(i), Rat(a), Rat(d), Rat(c)});
    }
    return Instance(model, std::move(jobs));
}

// remaining work of the jobs that machine m still has queued at time t,
// reconstructed from the trace
inline std::vector<PendingWork> queue_from_trace(const Instance& instance, const Trace& trace,
                                                 int m, const Rat& t) {
    std::vector<PendingWork> out;
    for (const Job& j : instance.jobs) {
        if (j.arrival > t) continue;
        Rat done_before = 0;
        Rat done_total = 0;
        bool on_machine = false;
        for (const Segment& s : trace.machines[m]) {
            if (s.state != SegmentState::kBusy || s.job != j.id) continue;
            on_machine = true;
            done_total += s.end - s.start;
            Rat hi = rat_min(s.end, t);
            if (s.start < hi) done_before += hi - s.start;
        }
        if (!on_machine) continue;
        Rat rem = j.work - done_before;
        if (done_total == j.work && rem > 0) out.push_back(PendingWork{j.deadline, rem});
    }
    return out;
}

}  // namespace detail_verify

inline VerifyOutcome run_verification(const VerifyOptions& opts) {
    VerifyOutcome out;
    const std::vector<Rat> psis{Rat(1), make_rat(1, 2), make_rat(1, 4)};

    for (int i = 0; i < opts.n; ++i) {
        std::uint64_t seed = opts.base_seed + std::uint64_t(i);
        std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
        int n_jobs = 1 + int(rng() % std::uint64_t(opts.max_jobs));
        std::int64_t horizon = 10 + std::int64_t(rng() % std::uint64_t(opts.max_horizon - 9));
        Rat psi = psis[i % psis.size()];

        auto fail = [&](const std::string& prop, const Instance& inst) {
            out.failures.push_back(VerifyFailure{seed, prop, inst});
        };

        // interval condition vs EDF on a raw draft
        {
            Instance draft = detail_verify::raw_draft(seed * 31 + 7, n_jobs, horizon);
            bool cond = check_feasibility(draft).feasible;
            bool edf_ok = !edf_single_machine_miss(draft).has_value();
            if (cond != edf_ok) fail("feasibility-edf-equivalence", draft);
        }

        Instance inst = gen_random_feasible(seed, n_jobs, horizon, psi, Rat(1));
        out.instances += 1;
        if (!check_feasibility(inst).feasible) {
            fail("generator-feasibility", inst);
            continue;
        }

        // suffix closure
        for (const Job& j : inst.jobs) {
            std::vector<Job> suffix;
            for (const Job& k : inst.jobs)
                if (k.arrival >= j.arrival) suffix.push_back(k);
            if (!check_feasibility(Instance(inst.model, suffix)).feasible) {
                fail("suffix-closure", inst);
                break;
            }
        }

        AlgoAConfig cfg;
        cfg.margin = opts.margin;
        cfg.idle_budget_override = opts.idle_budget_override;
        AlgorithmA policy_a(inst.model, cfg);
        Trace alg_trace;
        try {
            alg_trace = simulate(inst, policy_a);
        } catch (const DeadlineMissError&) {
            fail("policy-a-deadline-miss", inst);
            continue;
        }
        auto trep = validate_trace(inst, alg_trace);
        if (!trep.ok()) {
            fail("policy-a-trace-invalid", inst);
            continue;
        }

        {
            AlgorithmS policy_s(inst.model);
            try {
                Trace s_trace = simulate(inst, policy_s);
                if (!validate_trace(inst, s_trace).ok()) fail("policy-s-trace-invalid", inst);
            } catch (const DeadlineMissError&) {
                fail("policy-s-deadline-miss", inst);
            }
        }

        OptSchedule opt = optimal_energy(inst, Rat(1));
        Rat alg_energy = energy_of_trace(alg_trace, inst.model);
        if (alg_energy > 3 * opt.energy) fail("competitive-ratio-3", inst);

        // heuristic upper bounds on the optimum
        if (!opts.quick) {
            Trace imm = edf_immediate_schedule(inst);
            Trace lazy = edf_latest_schedule(inst);
            if (!validate_trace(inst, imm).ok() || !validate_trace(inst, lazy).ok())
                fail("heuristic-schedule-invalid", inst);
            if (opt.energy > energy_of_trace(imm, inst.model) ||
                opt.energy > energy_of_trace(lazy, inst.model))
                fail("oracle-above-heuristic", inst);
        }

        if (opts.check_lemmas) {
            auto report = analyze_traces(inst, alg_trace, opt.trace, opt.energy);
            out.phases += int(report.phases.size());
            for (const auto& pr : report.phases) {
                if (pr.phase.kind == PhaseKind::kSingle) out.single_phases += 1;
                if (pr.claim1.applicable) out.claim1_applicable += 1;
            }
            if (!report.lemma3_all) fail("lemma3", inst);
            if (!report.lemma4_all) fail("lemma4-prefix", inst);
            if (!report.claim1_all) fail("claim1", inst);
            if (report.sum_delta_minus_lambda != 0) fail("delta-lambda-zero", inst);
        }

        // online-policy internals: at most one idle machine and it is the
        // logical primary; urgent turn-ons were genuinely unavoidable;
        // completed idle stays consumed the full window
        {
            for (const auto& rec : policy_a.urgent_log()) {
                int other = 1 - rec.machine;  // the machine that was primary before
                auto queue = detail_verify::queue_from_trace(inst, alg_trace, other, rec.time);
                const Job& j = inst.jobs[rec.job_index];
                if (edf_can_accept(queue, PendingWork{j.deadline, j.work}, rec.time))
                    fail("urgent-was-avoidable", inst);
            }
            Rat budget = cfg.idle_budget_override ? *cfg.idle_budget_override
                                                  : Rat(2) / inst.model.psi_sigma;
            for (const auto& rec : policy_a.idle_expiry_log())
                if (rec.idle_in_stay != budget) fail("idle-window-exact", inst);

            // idle segments: at any idle moment of machine m, m must have
            // been the logical primary; reconstruct primary timeline from
            // the swap log
            for (int m = 0; m < Trace::kMachines; ++m) {
                for (const Segment& s : alg_trace.machines[m]) {
                    if (s.state != SegmentState::kIdle) continue;
                    int primary = 0;
                    for (const auto& swap : policy_a.swap_log())
                        if (swap.time <= s.start) primary = swap.new_primary;
                    if (primary != m) {
                        fail("idle-machine-not-primary", inst);
                        break;
                    }
                }
            }
        }
    }
    return out;
}

// Cross-validates the pruned oracle against full branching on tiny inputs.
inline VerifyOutcome run_oracle_crosscheck(int n, std::uint64_t base_seed) {
    VerifyOutcome out;
    for (int i = 0; i < n; ++i) {
        std::uint64_t seed = base_seed + std::uint64_t(i);
        std::mt19937_64 rng(seed ^ 0xabcdef12345ull);
        int n_jobs = 1 + int(rng() % 5);
        std::int64_t horizon = 6 + std::int64_t(rng() % 35);
        Rat psi = i % 2 == 0 ? Rat(1) : make_rat(1, 2);
        Instance inst = gen_random_feasible(seed, n_jobs, horizon, psi, Rat(1));
        if (inst.jobs.size() > 5) inst.jobs.resize(5);
        Instance trimmed(inst.model, inst.jobs);
        out.instances += 1;
        Rat fast = optimal_energy_value(trimmed, Rat(1));
        Rat brute = optimal_energy_bruteforce(trimmed, Rat(1));
        if (fast != brute)
            out.failures.push_back(VerifyFailure{seed, "oracle-crosscheck", trimmed});
    }
    return out;
}

}  // namespace powerdown
