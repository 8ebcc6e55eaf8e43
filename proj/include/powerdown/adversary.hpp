#pragma once

// Adaptive lower-bound adversary and instance generators.
//
// The adversary plays a staged request game against a deterministic policy
// with idle power fixed at 1. Each stage is observed by dry-running the
// policy on the requests issued so far (determinism makes the dry run equal
// to the real run), and the next request is sized to punish the observed
// delay or idle choice. The branch is picked by the first delay offset x1:
// x1 <= beta plays case A, otherwise case B. The reported ratio uses the
// offline oracle, which can only improve on the scripted reference play, so
// it remains a valid lower-bound witness.

#include "powerdown/algo_a.hpp"
#include "powerdown/core.hpp"
#include "powerdown/engine.hpp"
#include "powerdown/oracle.hpp"
#include "powerdown/analysis.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace powerdown {

struct AdversaryParams {
    Rat beta = make_rat(4745, 10000);
    Rat alpha = make_rat(21068, 10000);
    Rat eps = make_rat(1, 10000);  // tiny-job size
};

struct BoundFormulas {
    Rat f1, f2, f3;
    Rat g1, g2, g3;
    Rat c_a, c_b;
};

inline BoundFormulas bound_formulas(const Rat& beta, const Rat& alpha) {
    if (alpha <= 2)
        throw std::invalid_argument("alpha must exceed 2 (the w1 coefficient argument needs it)");
    if (beta <= 0) throw std::invalid_argument("beta must be positive");
    BoundFormulas b;
    b.f1 = alpha + (alpha - 1) * beta - 2;
    b.f2 = alpha - 3 + (alpha - 1) * beta;
    b.f3 = 2 * alpha - 4 + (alpha - 1) * (beta + b.f2);
    b.g1 = alpha - 1 - beta;
    b.g2 = alpha - 2 - beta;
    b.g3 = (alpha - 1) * b.g2 + 2 * alpha - 3 - beta;
    const Rat a2 = alpha * alpha;
    b.c_a = (5 + beta + b.f2 + b.f3 + (a2 - alpha) * b.f1) /
            (2 + beta + b.f2 + b.f3 + (a2 - alpha - 1) * b.f1);
    b.c_b = ((a2 - alpha) * b.g1 + 4 + beta + b.g2 + b.g3) /
            ((a2 - alpha - 1) * b.g1 + 2 + b.g2 + b.g3);
    return b;
}

struct AdversaryObservation {
    std::string name;  // x1, y1, w1, x2, y2, w2
    Rat value;
};

struct AdversaryTranscript {
    char case_taken = '-';  // 'A' or 'B'
    std::vector<AdversaryObservation> observations;
    Instance jobs;           // the emitted instance
    Rat alg_energy;
    Rat opt_energy;
    std::optional<Rat> ratio;
    bool deadline_miss = false;  // vacuous win
    bool truncated = false;      // policy never powered down; clipped at horizon
    bool stopped_early = false;  // intermediate ratio already exceeded alpha
    bool w1_le_1 = true;         // flagged instead of re-deriving the reference play
    int stages = 0;
};

namespace detail_adversary {

struct DryRun {
    Trace trace;
    bool miss = false;
    std::string miss_job;
};

inline DryRun dry_run(const PolicyFactory& factory, const Instance& instance,
                      const Rat& horizon) {
    DryRun out;
    auto policy = factory();
    try {
        out.trace = simulate(instance, *policy, SimConfig{horizon});
    } catch (const DeadlineMissError& e) {
        out.miss = true;
        out.miss_job = e.job;
    }
    return out;
}

inline std::optional<Rat> first_busy_start(const Trace& trace, const std::string& job) {
    std::optional<Rat> best;
    for (const auto& machine : trace.machines)
        for (const Segment& s : machine)
            if (s.state == SegmentState::kBusy && s.job == job)
                if (!best || s.start < *best) best = s.start;
    return best;
}

// time after which both machines stay off for good; nullopt if a machine is
// still on at the end of the (possibly clipped) trace
inline std::optional<Rat> system_off_time(const Trace& trace) {
    Rat last = 0;
    bool any = false;
    bool open_end = false;
    for (const auto& machine : trace.machines) {
        if (machine.empty()) continue;
        for (const Segment& s : machine)
            if (s.state != SegmentState::kOff) {
                last = rat_max(last, s.end);
                any = true;
            }
        if (machine.back().state != SegmentState::kOff) open_end = true;
    }
    if (!any) return Rat(0);
    if (open_end) return std::nullopt;
    return last;
}

}  // namespace detail_adversary

// Plays the staged game; psi_sigma is fixed at 1 for the whole game.
inline AdversaryTranscript adversary_play(const PolicyFactory& factory,
                                          const AdversaryParams& params = {}) {
    using detail_adversary::dry_run;
    using detail_adversary::first_busy_start;
    using detail_adversary::system_off_time;

    const Rat eps = params.eps;
    const Rat gamma = eps / 2;  // offset separating a request from an off event
    EnergyModel model;
    model.psi_sigma = 1;
    const Rat d1_span = 10 * (params.alpha + 2 / model.psi_sigma);
    const BoundFormulas bounds = bound_formulas(params.beta, params.alpha);

    AdversaryTranscript tr;
    std::vector<Job> jobs;
    int seq = 0;
    auto add_job = [&](const Rat& a, const Rat& d, const Rat& c) {
        std::string id = "adv" + std::to_string(seq++);
        jobs.push_back(Job{id, a, d, c});
        return id;
    };
    auto instance_now = [&]() { return Instance(model, jobs); };
    auto horizon_for = [&]() {
        Rat latest = 0;
        for (const Job& j : jobs) latest = rat_max(latest, j.deadline);
        return latest + 4 * d1_span;
    };

    auto finalize = [&](bool truncated) {
        tr.jobs = instance_now();
        auto run = dry_run(factory, tr.jobs, horizon_for());
        if (run.miss) {
            tr.deadline_miss = true;
            return tr;
        }
        tr.truncated = truncated;
        tr.alg_energy = energy_of_trace(run.trace, model);
        tr.opt_energy = optimal_energy_value(tr.jobs, natural_grid(tr.jobs));
        if (tr.opt_energy > 0) tr.ratio = tr.alg_energy / tr.opt_energy;
        return tr;
    };

    // ratio if the game stopped after the requests issued so far
    auto ratio_now = [&]() -> std::optional<Rat> {
        auto run = dry_run(factory, instance_now(), horizon_for());
        if (run.miss) return std::nullopt;  // vacuous win, handled by caller
        Rat alg = energy_of_trace(run.trace, model);
        Rat opt = optimal_energy_value(instance_now(), natural_grid(instance_now()));
        if (opt == 0) return std::nullopt;
        return alg / opt;
    };

    // ---- stage 1: a tiny request, observe the delay offset x1 and the
    // idle tail y1 ----
    std::string j1 = add_job(0, d1_span, eps);
    Rat d1 = d1_span;
    Rat s1, x1, t_off1;
    for (int retry = 0;; ++retry) {
        auto run = dry_run(factory, instance_now(), horizon_for());
        if (run.miss) {
            tr.deadline_miss = true;
            tr.jobs = instance_now();
            return tr;
        }
        auto start = first_busy_start(run.trace, j1);
        if (!start) return finalize(true);  // never ran it: clipped, unbounded ratio
        s1 = *start;
        x1 = d1 - s1;
        auto off = system_off_time(run.trace);
        if (!off) return finalize(true);  // never powers down
        t_off1 = *off;
        if (t_off1 >= d1 || retry >= 10) break;
        // powered down before the deadline: re-issue a tiny request there;
        // the policy has already paid the extra turn-on, which only helps
        j1 = add_job(t_off1 + gamma, d1, eps);
        if (auto r = ratio_now(); r && *r > params.alpha) {
            tr.stages = 1;
            tr.stopped_early = true;
            return finalize(false);
        }
    }
    tr.observations.push_back({"x1", x1});
    tr.stages = 1;

    if (x1 <= params.beta) {
        // ---------------- case A ----------------
        tr.case_taken = 'A';
        // j2 arrives mid-execution of j1 and fills the rest of the window
        // exactly, so no single machine can hold both
        add_job(s1 + eps / 2, d1, x1 - eps / 2);
        tr.stages = 2;
        auto run2 = dry_run(factory, instance_now(), horizon_for());
        if (run2.miss) {
            tr.deadline_miss = true;
            tr.jobs = instance_now();
            return tr;
        }
        auto off2 = system_off_time(run2.trace);
        if (!off2) return finalize(true);
        Rat w1 = *off2 - d1;
        tr.observations.push_back({"w1", w1});
        tr.w1_le_1 = w1 <= 1;
        if (auto r = ratio_now(); r && *r > params.alpha) {
            tr.stopped_early = true;
            return finalize(false);
        }
        if (!tr.w1_le_1) return finalize(false);  // flagged; reference play not guessed

        // stage 3: tiny request after the idle expires
        Rat a3 = *off2 + gamma;
        Rat d3 = a3 + d1_span;
        std::string j3 = add_job(a3, d3, eps);
        tr.stages = 3;
        auto run3 = dry_run(factory, instance_now(), horizon_for());
        if (run3.miss) {
            tr.deadline_miss = true;
            tr.jobs = instance_now();
            return tr;
        }
        auto s3 = first_busy_start(run3.trace, j3);
        if (!s3) return finalize(true);
        Rat x2 = d3 - *s3;
        tr.observations.push_back({"x2", x2});
        if (auto r = ratio_now(); r && *r > params.alpha) {
            tr.stopped_early = true;
            return finalize(false);
        }

        // stage 4: mirror of j2 against j3
        add_job(*s3 + eps / 2, d3, x2 - eps / 2);
        tr.stages = 4;
        auto run4 = dry_run(factory, instance_now(), horizon_for());
        if (run4.miss) {
            tr.deadline_miss = true;
            tr.jobs = instance_now();
            return tr;
        }
        auto off4 = system_off_time(run4.trace);
        if (!off4) return finalize(true);
        Rat w2 = *off4 - d3;
        tr.observations.push_back({"w2", w2});
        if (auto r = ratio_now(); r && *r > params.alpha) {
            tr.stopped_early = true;
            return finalize(false);
        }

        // stage 5: final tiny request; only the turn-on is charged
        add_job(*off4 + gamma, *off4 + gamma + d1_span, eps);
        tr.stages = 5;
        return finalize(false);
    }

    // ---------------- case B ----------------
    tr.case_taken = 'B';
    Rat y1 = t_off1 - d1;
    tr.observations.push_back({"y1", y1});
    if (auto r = ratio_now(); r && *r > params.alpha) {
        tr.stopped_early = true;
        return finalize(false);
    }

    // stage 2: tiny request right after the idle expires
    Rat a2 = t_off1 + gamma;
    Rat d2 = a2 + d1_span;
    std::string j2 = add_job(a2, d2, eps);
    tr.stages = 2;
    auto run2 = dry_run(factory, instance_now(), horizon_for());
    if (run2.miss) {
        tr.deadline_miss = true;
        tr.jobs = instance_now();
        return tr;
    }
    auto s2 = first_busy_start(run2.trace, j2);
    if (!s2) return finalize(true);
    Rat x2 = d2 - *s2;
    tr.observations.push_back({"x2", x2});
    if (auto r = ratio_now(); r && *r > params.alpha) {
        tr.stopped_early = true;
        return finalize(false);
    }

    // stage 3: fill the remaining window of j2 exactly
    add_job(*s2 + eps / 2, d2, x2 - eps / 2);
    tr.stages = 3;
    auto run3 = dry_run(factory, instance_now(), horizon_for());
    if (run3.miss) {
        tr.deadline_miss = true;
        tr.jobs = instance_now();
        return tr;
    }
    auto off3 = system_off_time(run3.trace);
    if (!off3) return finalize(true);
    Rat y2 = *off3 - d2;
    tr.observations.push_back({"y2", y2});
    if (auto r = ratio_now(); r && *r > params.alpha) {
        tr.stopped_early = true;
        return finalize(false);
    }

    // stage 4: final tiny request
    add_job(*off3 + gamma, *off3 + gamma + d1_span, eps);
    tr.stages = 4;
    (void)bounds;
    return finalize(false);
}

// ---------------------------------------------------------------------------
// Generators

// Tight family for the anchor-based baseline: per pair, a break-even sized
// job whose anchor is its latest feasible start, plus a tiny job released
// exactly at the wake-up moment with the same deadline. Consecutive pairs
// are separated by eps_prime. Parameters are given in pre-normalization
// units (turn-on cost k) and scaled by 1/k into the unit model.
inline Instance gen_tight_s(std::int64_t k, const Rat& eps, const Rat& eps_prime,
                            int rounds) {
    if (k < 10) throw std::invalid_argument("k must be at least 10");
    if (rounds < 1) throw std::invalid_argument("rounds must be positive");
    if (eps <= 0 || eps >= Rat(k) / 4 || eps_prime <= 0)
        throw std::invalid_argument("eps parameters out of range");
    const int pairs = 2 * rounds;
    const Rat en = eps / k;        // normalized tiny size
    const Rat epn = eps_prime / k;  // normalized gap

    EnergyModel model;
    model.psi_sigma = 1;
    std::vector<Job> jobs;
    Rat a = 0;
    int width = int(std::to_string(pairs).size());
    for (int p = 0; p < pairs; ++p) {
        Rat d = a + 1 + en;
        Rat h = d - 1;  // anchor == latest feasible start for a unit job
        std::string tag = std::to_string(p);
        while (int(tag.size()) < width) tag = "0" + tag;
        jobs.push_back(Job{"p" + tag + "a", a, d, 1});
        jobs.push_back(Job{"p" + tag + "b", h, d, en});
        a = d + epn;
    }
    return Instance(model, std::move(jobs));
}

// Deterministic random feasible instance: draw jobs on the grid, then repair
// by shrinking (and finally dropping) work inside violated intervals until
// the interval condition holds.
inline Instance gen_random_feasible(std::uint64_t seed, int n_jobs, std::int64_t horizon,
                                    const Rat& psi_sigma, const Rat& grid_step) {
    if (n_jobs < 1) throw std::invalid_argument("n_jobs must be positive");
    if (horizon < 2) throw std::invalid_argument("horizon too small");
    std::mt19937_64 rng(seed);
    auto draw = [&](std::int64_t lo, std::int64_t hi) {  // inclusive, portable
        return lo + std::int64_t(rng() % std::uint64_t(hi - lo + 1));
    };

    struct Draft {
        std::int64_t a, d, c;
    };
    std::vector<Draft> drafts;
    for (int i = 0; i < n_jobs; ++i) {
        std::int64_t a = draw(0, horizon - 1);
        std::int64_t d = draw(a + 1, horizon);
        std::int64_t c = draw(1, d - a);
        drafts.push_back(Draft{a, d, c});
    }

    // repair: shrink the largest job inside a violated interval
    while (true) {
        bool violated = false;
        for (std::size_t i = 0; i < drafts.size() && !violated; ++i) {
            for (std::size_t k2 = 0; k2 < drafts.size() && !violated; ++k2) {
                std::int64_t lo = drafts[i].a, hi = drafts[k2].d;
                if (lo >= hi) continue;
                std::int64_t load = 0;
                for (const Draft& d : drafts)
                    if (d.a >= lo && d.d <= hi) load += d.c;
                if (load <= hi - lo) continue;
                violated = true;
                std::int64_t excess = load - (hi - lo);
                // shrink the largest contained job
                std::size_t big = drafts.size();
                for (std::size_t t = 0; t < drafts.size(); ++t)
                    if (drafts[t].a >= lo && drafts[t].d <= hi &&
                        (big == drafts.size() || drafts[t].c > drafts[big].c))
                        big = t;
                if (drafts[big].c > excess)
                    drafts[big].c -= excess;
                else
                    drafts.erase(drafts.begin() + big);
            }
        }
        if (!violated) break;
        if (drafts.empty()) break;
    }
    if (drafts.empty())  // keep at least one schedulable job
        drafts.push_back(Draft{0, 2, 1});

    EnergyModel model;
    model.psi_sigma = psi_sigma;
    std::vector<Job> jobs;
    int width = int(std::to_string(drafts.size()).size());
    for (std::size_t i = 0; i < drafts.size(); ++i) {
        std::string tag = std::to_string(i);
        while (int(tag.size()) < width) tag = "0" + tag;
        jobs.push_back(Job{"j" + tag, Rat(drafts[i].a) * grid_step,
                           Rat(drafts[i].d) * grid_step, Rat(drafts[i].c) * grid_step});
    }
    return Instance(model, std::move(jobs));
}

}  // namespace powerdown
