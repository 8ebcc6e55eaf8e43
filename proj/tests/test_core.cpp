#include <doctest.h>

#include "powerdown/core.hpp"
#include "powerdown/adversary.hpp"

#include <random>

using namespace powerdown;

namespace {

Instance make_instance(const Rat& psi, std::vector<Job> jobs) {
    EnergyModel model;
    model.psi_sigma = psi;
    return Instance(model, std::move(jobs));
}

}  // namespace

TEST_CASE("rational parsing") {
    CHECK(parse_rat("3/4") == make_rat(3, 4));
    CHECK(parse_rat("1.25") == make_rat(5, 4));
    CHECK(parse_rat("-0.5") == make_rat(-1, 2));
    CHECK(parse_rat("7") == Rat(7));
    CHECK(rat_to_string(make_rat(3, 4)) == "3/4");
    CHECK(rat_to_string(Rat(5)) == "5");
    CHECK_THROWS(parse_rat("1/0"));
    CHECK_THROWS(parse_rat("abc"));
    CHECK(rat_gcd(make_rat(1, 4), make_rat(1, 6)) == make_rat(1, 12));
    CHECK(is_multiple_of(make_rat(3, 2), make_rat(1, 2)));
    CHECK(!is_multiple_of(make_rat(1, 3), make_rat(1, 2)));
}

TEST_CASE("instance validation") {
    CHECK_THROWS(make_instance(1, {Job{"a", 0, 10, 0}}));         // zero work
    CHECK_THROWS(make_instance(1, {Job{"a", 5, 10, 6}}));         // cannot fit its window
    CHECK_THROWS(make_instance(1, {Job{"a", 0, 10, 1}, Job{"a", 0, 10, 1}}));  // dup id
    CHECK_THROWS(make_instance(2, {Job{"a", 0, 10, 1}}));         // psi out of range
    CHECK_THROWS(make_instance(0, {Job{"a", 0, 10, 1}}));
}

TEST_CASE("feasibility check") {
    SUBCASE("two jobs fit") {
        auto inst = make_instance(1, {Job{"a", 0, 10, 3}, Job{"b", 2, 10, 4}});
        auto res = check_feasibility(inst);
        CHECK(res.feasible);
    }
    SUBCASE("overload reports a witness") {
        auto inst =
            make_instance(1, {Job{"a", 0, 2, make_rat(3, 2)}, Job{"b", 0, 2, 1}});
        auto res = check_feasibility(inst);
        REQUIRE(!res.feasible);
        REQUIRE(res.witness);
        CHECK(res.witness->lo == 0);
        CHECK(res.witness->hi == 2);
        CHECK(res.witness->load == make_rat(5, 2));
    }
    SUBCASE("empty instance is feasible") {
        auto inst = make_instance(1, {});
        CHECK(check_feasibility(inst).feasible);
    }
}

TEST_CASE("remaining work") {
    std::vector<PendingWork> pending{{Rat(10), Rat(3)}, {Rat(10), Rat(4)}};
    CHECK(remaining_work(pending, 2, 10) == 7);
    std::vector<PendingWork> mixed{{Rat(10), Rat(3)}, {Rat(20), Rat(5)}};
    CHECK(remaining_work(mixed, 0, 10) == 3);
    CHECK(remaining_work({}, 0, 10) == 0);
    CHECK_THROWS(remaining_work(pending, 10, 10));
}

TEST_CASE("energy of a trace") {
    EnergyModel model;
    model.psi_sigma = 1;

    SUBCASE("turn-on, busy, idle") {
        Trace t;
        t.machines[0] = {
            Segment{make_rat(17, 2), make_rat(19, 2), SegmentState::kBusy, "j"},
            Segment{make_rat(19, 2), make_rat(23, 2), SegmentState::kIdle, {}},
        };
        t.turn_ons = {TurnOnEvent{0, make_rat(17, 2)}};
        CHECK(energy_of_trace(t, model) == 4);
    }
    SUBCASE("empty trace") { CHECK(energy_of_trace(Trace{}, model) == 0); }
    SUBCASE("two turn-ons") {
        Trace t;
        t.machines[0] = {Segment{0, make_rat(1, 2), SegmentState::kBusy, "x"},
                         Segment{make_rat(1, 2), make_rat(5, 2), SegmentState::kIdle, {}}};
        t.machines[1] = {Segment{1, make_rat(3, 2), SegmentState::kOff, {}}};
        t.turn_ons = {TurnOnEvent{0, 0}, TurnOnEvent{1, 7}};
        CHECK(energy_of_trace(t, model) == make_rat(9, 2));
    }
    SUBCASE("energy is additive over a time split") {
        Trace t;
        t.machines[0] = {Segment{0, 2, SegmentState::kBusy, "x"},
                         Segment{2, 5, SegmentState::kIdle, {}}};
        t.turn_ons = {TurnOnEvent{0, 0}};
        model.psi_sigma = make_rat(1, 2);
        // split at tau = 3
        Trace lo, hi;
        lo.machines[0] = {Segment{0, 2, SegmentState::kBusy, "x"},
                          Segment{2, 3, SegmentState::kIdle, {}}};
        lo.turn_ons = {TurnOnEvent{0, 0}};
        hi.machines[0] = {Segment{3, 5, SegmentState::kIdle, {}}};
        CHECK(energy_of_trace(t, model) ==
              energy_of_trace(lo, model) + energy_of_trace(hi, model));
    }
}

TEST_CASE("interval condition matches single-machine EDF") {
    int checked = 0, infeasible_seen = 0;
    for (std::uint64_t seed = 1; seed <= 400; ++seed) {
        std::mt19937_64 rng(seed);
        int n = 1 + int(rng() % 6);
        std::vector<Job> jobs;
        for (int i = 0; i < n; ++i) {
            std::int64_t a = std::int64_t(rng() % 20);
            std::int64_t d = a + 1 + std::int64_t(rng() % 10);
            std::int64_t c = 1 + std::int64_t(rng() % (d - a));
            jobs.push_back(Job{"j" + std::to_string(i), Rat(a), Rat(d), Rat(c)});
        }
        EnergyModel model;
        auto inst = Instance(model, jobs);
        bool cond = check_feasibility(inst).feasible;
        bool edf = !edf_single_machine_miss(inst).has_value();
        CHECK(cond == edf);
        ++checked;
        if (!cond) ++infeasible_seen;
    }
    CHECK(checked == 400);
    CHECK(infeasible_seen > 20);  // the draft generator must cover both outcomes
}

TEST_CASE("feasible suffixes stay feasible") {
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        Instance inst = gen_random_feasible(seed, 6, 30, 1, 1);
        REQUIRE(check_feasibility(inst).feasible);
        for (const Job& j : inst.jobs) {
            std::vector<Job> suffix;
            for (const Job& k : inst.jobs)
                if (k.arrival >= j.arrival) suffix.push_back(k);
            CHECK(check_feasibility(Instance(inst.model, suffix)).feasible);
        }
    }
}
