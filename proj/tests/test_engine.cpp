#include <doctest.h>

#include "powerdown/algo_a.hpp"
#include "powerdown/core.hpp"
#include "powerdown/engine.hpp"
#include "powerdown/simple_policies.hpp"

#include <algorithm>

using namespace powerdown;

namespace {

Instance make_instance(const Rat& psi, std::vector<Job> jobs) {
    EnergyModel model;
    model.psi_sigma = psi;
    return Instance(model, std::move(jobs));
}

bool traces_equal(const Trace& a, const Trace& b) {
    if (a.turn_ons.size() != b.turn_ons.size()) return false;
    for (std::size_t i = 0; i < a.turn_ons.size(); ++i)
        if (a.turn_ons[i].machine != b.turn_ons[i].machine ||
            a.turn_ons[i].time != b.turn_ons[i].time)
            return false;
    for (int m = 0; m < Trace::kMachines; ++m) {
        if (a.machines[m].size() != b.machines[m].size()) return false;
        for (std::size_t i = 0; i < a.machines[m].size(); ++i) {
            const Segment &x = a.machines[m][i], &y = b.machines[m][i];
            if (x.start != y.start || x.end != y.end || x.state != y.state || x.job != y.job)
                return false;
        }
    }
    return true;
}

}  // namespace

TEST_CASE("single delayed job runs with margin and doubled idle window") {
    auto inst = make_instance(1, {Job{"j", 0, 10, 1}});
    AlgorithmA policy(inst.model);
    Trace trace = simulate(inst, policy);

    REQUIRE(trace.turn_ons.size() == 1);
    CHECK(trace.turn_ons[0].time == make_rat(17, 2));
    const auto& segs = trace.machines[trace.turn_ons[0].machine];
    REQUIRE(segs.size() >= 2);
    // busy [8.5, 9.5], idle [9.5, 11.5]
    bool found_busy = false, found_idle = false;
    for (const auto& s : segs) {
        if (s.state == SegmentState::kBusy) {
            CHECK(s.start == make_rat(17, 2));
            CHECK(s.end == make_rat(19, 2));
            found_busy = true;
        }
        if (s.state == SegmentState::kIdle) {
            CHECK(s.start == make_rat(19, 2));
            CHECK(s.end == make_rat(23, 2));
            found_idle = true;
        }
    }
    CHECK(found_busy);
    CHECK(found_idle);
    CHECK(energy_of_trace(trace, inst.model) == 4);
    CHECK(validate_trace(inst, trace).ok());
}

TEST_CASE("empty instance yields an empty trace") {
    auto inst = make_instance(1, {});
    AlgorithmA policy(inst.model);
    Trace trace = simulate(inst, policy);
    CHECK(trace.turn_ons.empty());
    CHECK(energy_of_trace(trace, inst.model) == 0);
}

TEST_CASE("urgent arrival wakes the second machine") {
    // tiny delayed job, then an arrival that exactly fills the rest of the
    // window while the first is still running
    const Rat eps = make_rat(1, 1000000);
    auto inst = make_instance(
        1, {Job{"j1", 0, 10, eps},
            Job{"j2", make_rat(19, 2) - eps / 2, 10, make_rat(1, 2) + eps / 2}});
    AlgorithmA policy(inst.model);
    Trace trace = simulate(inst, policy);

    REQUIRE(trace.turn_ons.size() == 2);
    CHECK(energy_of_trace(trace, inst.model) == make_rat(9, 2) + 3 * eps / 2);
    CHECK(validate_trace(inst, trace).ok());

    // the old machine never idles once it became the secondary
    int second = trace.turn_ons[1].machine;
    int first = 1 - second;
    for (const auto& s : trace.machines[first]) CHECK(s.state != SegmentState::kIdle);
    CHECK(policy.swap_log().size() == 1);
    CHECK(policy.urgent_log().size() == 1);
}

TEST_CASE("deterministic replay and input order independence") {
    std::vector<Job> jobs{Job{"a", 0, 12, 2}, Job{"b", 1, 9, 3}, Job{"c", 3, 20, 1}};
    auto inst = make_instance(make_rat(1, 2), jobs);
    AlgorithmA p1(inst.model), p2(inst.model);
    Trace t1 = simulate(inst, p1);
    Trace t2 = simulate(inst, p2);
    CHECK(traces_equal(t1, t2));

    std::vector<Job> shuffled{jobs[2], jobs[0], jobs[1]};
    auto inst2 = make_instance(make_rat(1, 2), shuffled);
    AlgorithmA p3(inst2.model);
    Trace t3 = simulate(inst2, p3);
    CHECK(traces_equal(t1, t3));
}

TEST_CASE("deadline miss surfaces as a typed error") {
    // three tight unit-window jobs cannot fit two machines
    auto inst = make_instance(1, {Job{"a", 0, 1, make_rat(9, 10)},
                                  Job{"b", 0, 1, make_rat(9, 10)},
                                  Job{"c", 0, 1, make_rat(9, 10)}});
    AlgorithmA policy(inst.model);
    CHECK_THROWS_AS(simulate(inst, policy), DeadlineMissError);
}

TEST_CASE("policies that never power down need a horizon") {
    auto inst = make_instance(1, {Job{"a", 0, 5, 1}});
    AlwaysOnPolicy policy;
    CHECK_THROWS_AS(simulate(inst, policy), ProtocolViolationError);

    AlwaysOnPolicy policy2;
    Trace trace = simulate(inst, policy2, SimConfig{Rat(20)});
    CHECK(trace.end_time() == 20);
    // busy [0,1], idle [1,20]
    CHECK(energy_of_trace(trace, inst.model) == Rat(1) + 1 + 19);
}

TEST_CASE("trace validator flags violations") {
    auto inst = make_instance(1, {Job{"a", 0, 10, 2}});

    SUBCASE("migration") {
        Trace t;
        t.machines[0] = {Segment{0, 1, SegmentState::kBusy, "a"}};
        t.machines[1] = {Segment{1, 2, SegmentState::kBusy, "a"}};
        t.turn_ons = {TurnOnEvent{0, 0}, TurnOnEvent{1, 1}};
        auto report = validate_trace(inst, t);
        bool found = false;
        for (const auto& v : report.violations)
            if (v.find("migration") != std::string::npos) found = true;
        CHECK(found);
    }
    SUBCASE("incomplete work") {
        Trace t;
        t.machines[0] = {Segment{0, make_rat(17, 10), SegmentState::kBusy, "a"}};
        t.turn_ons = {TurnOnEvent{0, 0}};
        auto report = validate_trace(inst, t);
        bool found = false;
        for (const auto& v : report.violations)
            if (v.find("incomplete work") != std::string::npos) found = true;
        CHECK(found);
    }
    SUBCASE("clean trace passes") {
        AlgorithmA policy(inst.model);
        Trace t = simulate(inst, policy);
        CHECK(validate_trace(inst, t).ok());
    }
}
