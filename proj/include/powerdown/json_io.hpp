#pragma once

// JSON (de)serialization for instances, traces, reports and adversary
// transcripts. Rationals travel as strings, either "p/q" or exact decimals.

#include "powerdown/adversary.hpp"
#include "powerdown/analysis.hpp"
#include "powerdown/core.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <string>

namespace powerdown {

using nlohmann::json;

inline json instance_to_json(const Instance& instance) {
    json out;
    out["psi_sigma"] = rat_to_string(instance.model.psi_sigma);
    out["jobs"] = json::array();
    for (const Job& j : instance.jobs)
        out["jobs"].push_back({{"id", j.id},
                               {"a", rat_to_string(j.arrival)},
                               {"d", rat_to_string(j.deadline)},
                               {"c", rat_to_string(j.work)}});
    return out;
}

inline Instance instance_from_json(const json& in) {
    EnergyModel model;
    model.psi_sigma = parse_rat(in.at("psi_sigma").get<std::string>());
    std::vector<Job> jobs;
    for (const auto& j : in.at("jobs"))
        jobs.push_back(Job{j.at("id").get<std::string>(),
                           parse_rat(j.at("a").get<std::string>()),
                           parse_rat(j.at("d").get<std::string>()),
                           parse_rat(j.at("c").get<std::string>())});
    return Instance(model, std::move(jobs));
}

inline Instance load_instance(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open instance file: " + path);
    json j;
    in >> j;
    return instance_from_json(j);
}

inline void save_json(const json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << j.dump(2) << "\n";
}

inline json trace_to_json(const Trace& trace, const EnergyModel& model) {
    json out;
    out["machines"] = json::array();
    for (const auto& machine : trace.machines) {
        json segs = json::array();
        for (const Segment& s : machine) {
            json seg{{"start", rat_to_string(s.start)},
                     {"end", rat_to_string(s.end)},
                     {"state", s.state == SegmentState::kOff    ? "off"
                               : s.state == SegmentState::kIdle ? "idle"
                                                                : "busy"}};
            if (s.state == SegmentState::kBusy) seg["job"] = s.job;
            segs.push_back(seg);
        }
        out["machines"].push_back(segs);
    }
    out["turn_ons"] = json::array();
    for (const TurnOnEvent& e : trace.turn_ons)
        out["turn_ons"].push_back({{"machine", e.machine}, {"t", rat_to_string(e.time)}});
    out["energy"] = rat_to_string(energy_of_trace(trace, model));
    return out;
}

inline Trace trace_from_json(const json& in) {
    Trace trace;
    int m = 0;
    for (const auto& machine : in.at("machines")) {
        for (const auto& seg : machine) {
            Segment s;
            s.start = parse_rat(seg.at("start").get<std::string>());
            s.end = parse_rat(seg.at("end").get<std::string>());
            std::string state = seg.at("state").get<std::string>();
            s.state = state == "off"    ? SegmentState::kOff
                      : state == "idle" ? SegmentState::kIdle
                                        : SegmentState::kBusy;
            if (seg.contains("job")) s.job = seg.at("job").get<std::string>();
            trace.machines.at(m).push_back(s);
        }
        ++m;
    }
    for (const auto& e : in.at("turn_ons"))
        trace.turn_ons.push_back(
            TurnOnEvent{e.at("machine").get<int>(), parse_rat(e.at("t").get<std::string>())});
    return trace;
}

inline json transcript_to_json(const AdversaryTranscript& tr) {
    json out;
    out["case"] = std::string(1, tr.case_taken);
    out["stages"] = tr.stages;
    out["observations"] = json::array();
    for (const auto& obs : tr.observations)
        out["observations"].push_back(
            {{"name", obs.name},
             {"value", rat_to_string(obs.value)},
             {"approx", to_double(obs.value)}});
    out["jobs"] = instance_to_json(tr.jobs);
    out["alg_energy"] = rat_to_string(tr.alg_energy);
    out["opt_energy"] = rat_to_string(tr.opt_energy);
    if (tr.ratio) {
        out["ratio"] = rat_to_string(*tr.ratio);
        out["ratio_approx"] = to_double(*tr.ratio);
    }
    out["deadline_miss"] = tr.deadline_miss;
    out["truncated"] = tr.truncated;
    out["stopped_early"] = tr.stopped_early;
    out["w1_le_1"] = tr.w1_le_1;
    return out;
}

inline json report_to_json(const CompetitiveReport& report) {
    json out;
    out["alg_energy"] = rat_to_string(report.alg_energy);
    out["opt_energy"] = rat_to_string(report.opt_energy);
    if (report.ratio) {
        out["ratio"] = rat_to_string(*report.ratio);
        out["ratio_approx"] = to_double(*report.ratio);
    }
    out["sum_delta_minus_lambda"] = rat_to_string(report.sum_delta_minus_lambda);
    out["lemma3_all"] = report.lemma3_all;
    out["lemma4_all"] = report.lemma4_all;
    out["claim1_all"] = report.claim1_all;
    out["phases"] = json::array();
    for (const auto& pr : report.phases) {
        json ph;
        ph["t0"] = rat_to_string(pr.phase.t0);
        ph["t1"] = rat_to_string(pr.phase.t1);
        ph["te"] = rat_to_string(pr.phase.te);
        ph["kind"] = pr.phase.kind == PhaseKind::kSingle  ? "single"
                     : pr.phase.kind == PhaseKind::kDual ? "dual"
                                                         : "special";
        ph["virtual"] = pr.phase.is_virtual;
        ph["A"] = rat_to_string(pr.account.alg_cost);
        ph["O_f"] = rat_to_string(pr.account.opt_free);
        ph["O_n"] = rat_to_string(pr.account.opt_on);
        ph["O_real"] = rat_to_string(pr.account.opt_real);
        ph["alpha"] = rat_to_string(pr.account.alpha);
        ph["lambda"] = rat_to_string(pr.account.lambda);
        ph["delta"] = rat_to_string(pr.account.delta);
        ph["lemma3_ineq2"] = pr.lemma3.ineq2;
        ph["lemma3_ineq3"] = pr.lemma3.ineq3;
        ph["claim1_applicable"] = pr.claim1.applicable;
        ph["claim1_holds"] = pr.claim1.holds;
        out["phases"].push_back(ph);
    }
    return out;
}

// flat row: instance id, energies, ratio, worst lemma margin
inline std::string report_to_csv_row(const std::string& instance_id,
                                     const CompetitiveReport& report) {
    std::ostringstream os;
    Rat worst;
    bool first = true;
    for (const Rat& m : report.lemma4_margins)
        if (first || m < worst) {
            worst = m;
            first = false;
        }
    os << instance_id << "," << rat_to_string(report.alg_energy) << ","
       << rat_to_string(report.opt_energy) << ","
       << (report.ratio ? std::to_string(to_double(*report.ratio)) : "") << ","
       << (first ? "" : std::to_string(to_double(worst)));
    return os.str();
}

}  // namespace powerdown
