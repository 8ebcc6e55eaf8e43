#include <doctest.h>

#include "powerdown/adversary.hpp"
#include "powerdown/algo_s.hpp"
#include "powerdown/core.hpp"
#include "powerdown/engine.hpp"

using namespace powerdown;

namespace {

Instance make_instance(const Rat& psi, std::vector<Job> jobs) {
    EnergyModel model;
    model.psi_sigma = psi;
    return Instance(model, std::move(jobs));
}

}  // namespace

TEST_CASE("anchor") {
    EnergyModel model;
    SUBCASE("break-even window before the deadline") {
        model.psi_sigma = make_rat(1, 5);  // B = 5
        CHECK(anchor(Job{"j", 0, 10, 5}, model, 1) == 5);
    }
    SUBCASE("clamped at the arrival") {
        model.psi_sigma = make_rat(1, 5);
        CHECK(anchor(Job{"j", 0, 3, 1}, model, 1) == 0);
    }
    SUBCASE("unit break-even") {
        model.psi_sigma = 1;
        CHECK(anchor(Job{"j", 0, 10, 1}, model, 1) == 9);
    }
}

TEST_CASE("single job wakes at its anchor and pays no idle") {
    auto inst = make_instance(1, {Job{"j", 0, 10, 1}});
    AlgorithmS policy(inst.model);
    Trace trace = simulate(inst, policy);
    REQUIRE(trace.turn_ons.size() == 1);
    CHECK(trace.turn_ons[0].time == 9);
    CHECK(trace.idle_time() == 0);
    CHECK(energy_of_trace(trace, inst.model) == 2);
}

TEST_CASE("anchor wake-up is capped by the batch's latest feasible start") {
    // two unit jobs in a shared window: waiting for the anchor would miss
    auto inst = make_instance(1, {Job{"a", 0, 2, 1}, Job{"b", 0, 2, 1}});
    AlgorithmS policy(inst.model);
    Trace trace = simulate(inst, policy);
    CHECK(validate_trace(inst, trace).ok());
    REQUIRE(trace.turn_ons.size() == 1);
    CHECK(trace.turn_ons[0].time == 0);
}

TEST_CASE("tight family walkthrough") {
    // two pairs; per pair the wake-up lands exactly on the tiny job's
    // release, the tiny job is urgent, machines power off together at the
    // pair deadline
    Instance inst = gen_tight_s(100, make_rat(1, 10), make_rat(1, 10), 1);
    REQUIRE(inst.jobs.size() == 4);
    CHECK(check_feasibility(inst).feasible);

    AlgorithmS policy(inst.model);
    Trace trace = simulate(inst, policy);
    CHECK(validate_trace(inst, trace).ok());

    REQUIRE(trace.turn_ons.size() == 4);  // two machines per pair
    const Rat en = make_rat(1, 1000);
    // pair 0: arrival 0, deadline 1+en, wake at en
    CHECK(trace.turn_ons[0].time == en);
    CHECK(trace.turn_ons[1].time == en);
    // pair 1 starts after the eps_prime gap
    CHECK(trace.turn_ons[2].time == Rat(1) + 2 * en + en);

    // both machines off exactly at each pair deadline: the epsilon terms
    // cancel and each pair costs 2 turn-ons + 2 in on-time
    CHECK(energy_of_trace(trace, inst.model) == 8);

    // the tiny jobs run on the newly woken machine
    int m_urgent = trace.turn_ons[1].machine;
    bool tiny_there = false;
    for (const auto& s : trace.machines[m_urgent])
        if (s.state == SegmentState::kBusy && s.job.back() == 'b') tiny_there = true;
    CHECK(tiny_there);
}

TEST_CASE("never misses on feasible instances") {
    for (std::uint64_t seed = 900; seed < 960; ++seed) {
        Instance inst =
            gen_random_feasible(seed, 6, 30, seed % 2 ? Rat(1) : make_rat(1, 4), 1);
        AlgorithmS policy(inst.model);
        Trace trace;
        REQUIRE_NOTHROW(trace = simulate(inst, policy));
        CHECK(validate_trace(inst, trace).ok());
    }
}
