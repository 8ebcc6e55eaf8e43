// Command-line front end: simulate a policy on an instance, compare policies
// against the offline oracle, run the adaptive adversary, verify the
// property suite over seeded random instances, and generate instances.
//
// Exit codes: 0 ok, 1 usage or I/O error, 2 property or deadline failure.

#include "powerdown/adversary.hpp"
#include "powerdown/algo_a.hpp"
#include "powerdown/algo_s.hpp"
#include "powerdown/analysis.hpp"
#include "powerdown/json_io.hpp"
#include "powerdown/oracle.hpp"
#include "powerdown/simple_policies.hpp"
#include "powerdown/verify.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

namespace {

using namespace powerdown;

struct PolicyOptions {
    std::string policy = "a";
    std::string u = "1/2";
    std::string lambda = "1";
    std::string idle_mode = "cumulative";
};

PolicyFactory make_factory(const PolicyOptions& opts, const EnergyModel& model) {
    if (opts.policy == "a") {
        AlgoAConfig cfg;
        cfg.margin = parse_rat(opts.u);
        cfg.idle_mode =
            opts.idle_mode == "per_episode" ? IdleMode::kPerEpisode : IdleMode::kCumulative;
        return [model, cfg] { return std::make_unique<AlgorithmA>(model, cfg); };
    }
    if (opts.policy == "s") {
        AlgoSConfig cfg;
        cfg.lambda = parse_rat(opts.lambda);
        return [model, cfg] { return std::make_unique<AlgorithmS>(model, cfg); };
    }
    if (opts.policy == "always_on")
        return [] { return std::make_unique<AlwaysOnPolicy>(); };
    throw CLI::ValidationError("--policy", "unknown policy: " + opts.policy);
}

std::uint64_t default_seed() {
    if (const char* env = std::getenv("POWERDOWN_SEED")) return std::strtoull(env, nullptr, 10);
    return 20240101;
}

int cmd_simulate(const std::string& path, const PolicyOptions& popts,
                 const std::optional<std::string>& psi_override,
                 const std::optional<std::string>& horizon,
                 const std::optional<std::string>& out_path) {
    Instance inst = load_instance(path);
    if (psi_override) {
        inst.model.psi_sigma = parse_rat(*psi_override);
        inst.validate();
    }
    SimConfig config;
    if (horizon)
        config.horizon = parse_rat(*horizon);
    else if (popts.policy == "always_on")
        config.horizon = inst.latest_deadline();
    auto policy = make_factory(popts, inst.model)();
    Trace trace;
    try {
        trace = simulate(inst, *policy, config);
    } catch (const DeadlineMissError& e) {
        std::cerr << "deadline miss: job " << e.job << " at t=" << rat_to_string(e.time)
                  << "\n";
        return 2;
    }
    Rat energy = energy_of_trace(trace, inst.model);
    if (out_path) save_json(trace_to_json(trace, inst.model), *out_path);
    std::cout << "energy " << rat_to_string(energy) << " (" << to_double(energy) << ")\n";
    return 0;
}

int cmd_compare(const std::vector<std::string>& paths, const std::vector<std::string>& policies,
                const PolicyOptions& base, const std::optional<std::string>& csv_path,
                const std::optional<std::string>& report_dir) {
    std::ostringstream csv;
    csv << "instance,policy,alg_energy,opt_energy,ratio,status\n";
    std::map<std::string, double> max_ratio;
    for (const std::string& path : paths) {
        std::string id = std::filesystem::path(path).stem().string();
        Instance inst = load_instance(path);
        if (!check_feasibility(inst).feasible) {
            for (const std::string& p : policies)
                csv << id << "," << p << ",,,,skipped\n";
            continue;
        }
        Rat opt = optimal_energy_value(inst, natural_grid(inst));
        for (const std::string& pname : policies) {
            PolicyOptions popts = base;
            popts.policy = pname;
            auto policy = make_factory(popts, inst.model)();
            try {
                Trace trace = simulate(inst, *policy,
                                       SimConfig{pname == "always_on"
                                                     ? std::optional<Rat>(inst.latest_deadline())
                                                     : std::nullopt});
                Rat alg = energy_of_trace(trace, inst.model);
                Rat ratio = opt > 0 ? alg / opt : Rat(0);
                csv << id << "," << pname << "," << rat_to_string(alg) << ","
                    << rat_to_string(opt) << "," << to_double(ratio) << ",ok\n";
                auto [it, inserted] = max_ratio.emplace(pname, to_double(ratio));
                if (!inserted) it->second = std::max(it->second, to_double(ratio));
                if (report_dir) {
                    OptSchedule sched = optimal_energy(inst, natural_grid(inst));
                    auto report = analyze_traces(inst, trace, sched.trace, sched.energy);
                    save_json(report_to_json(report),
                              (std::filesystem::path(*report_dir) /
                               (id + "_" + pname + "_report.json"))
                                  .string());
                }
            } catch (const DeadlineMissError&) {
                csv << id << "," << pname << ",,,,deadline_miss\n";
            }
        }
    }
    for (const auto& [pname, r] : max_ratio)
        csv << "(max)," << pname << ",,," << r << ",ok\n";
    if (csv_path) {
        std::ofstream out(*csv_path);
        out << csv.str();
    } else {
        std::cout << csv.str();
    }
    return 0;
}

int cmd_adversary(const PolicyOptions& popts, const std::string& beta, const std::string& alpha,
                  const std::string& eps, bool show_bounds,
                  const std::optional<std::string>& out_path) {
    AdversaryParams params;
    params.beta = parse_rat(beta);
    params.alpha = parse_rat(alpha);
    params.eps = parse_rat(eps);
    BoundFormulas bounds = bound_formulas(params.beta, params.alpha);
    if (show_bounds) {
        std::cout << "C_A=" << to_double(bounds.c_a) << " C_B=" << to_double(bounds.c_b)
                  << " f1=" << to_double(bounds.f1) << " f2=" << to_double(bounds.f2)
                  << " f3=" << to_double(bounds.f3) << " g1=" << to_double(bounds.g1)
                  << " g2=" << to_double(bounds.g2) << " g3=" << to_double(bounds.g3) << "\n";
        return 0;
    }
    EnergyModel model;
    model.psi_sigma = 1;
    auto factory = make_factory(popts, model);
    AdversaryTranscript tr = adversary_play(factory, params);
    if (out_path) save_json(transcript_to_json(tr), *out_path);
    std::cout << "case " << tr.case_taken << " stages " << tr.stages;
    if (tr.deadline_miss)
        std::cout << " deadline_miss";
    else if (tr.ratio)
        std::cout << " ratio " << to_double(*tr.ratio);
    std::cout << "\n";
    return 0;
}

int cmd_verify(int n, std::uint64_t seed, const std::string& out_dir, bool quick) {
    if (n == 0) {
        std::cout << "warning: n=0, vacuous pass\n";
        return 0;
    }
    VerifyOptions opts;
    opts.n = n;
    opts.base_seed = seed;
    opts.quick = quick;
    VerifyOutcome outcome = run_verification(opts);
    VerifyOutcome cross = run_oracle_crosscheck(quick ? 50 : 200, seed + 777);

    std::cout << "instances " << outcome.instances << ", phases " << outcome.phases
              << " (single " << outcome.single_phases << ", claim-applicable "
              << outcome.claim1_applicable << ")\n";
    std::cout << "oracle cross-check instances " << cross.instances << "\n";
    auto dump = [&](const VerifyOutcome& o) {
        for (std::size_t i = 0; i < o.failures.size(); ++i) {
            const auto& f = o.failures[i];
            std::cout << "FAIL " << f.property << " seed=" << f.seed << "\n";
            std::filesystem::create_directories(out_dir);
            save_json(instance_to_json(f.instance),
                      (std::filesystem::path(out_dir) /
                       (f.property + "_" + std::to_string(f.seed) + ".json"))
                          .string());
        }
    };
    dump(outcome);
    dump(cross);
    if (!outcome.ok() || !cross.ok()) {
        std::cout << "verification FAILED\n";
        return 2;
    }
    std::cout << "all properties hold\n";
    return 0;
}

int cmd_gen(const std::string& kind, const std::string& out_path, std::int64_t k,
            const std::string& eps, const std::string& eps_prime, int rounds,
            std::uint64_t seed, int n_jobs, std::int64_t horizon, const std::string& psi,
            const std::string& grid) {
    Instance inst = kind == "tight-s"
                        ? gen_tight_s(k, parse_rat(eps), parse_rat(eps_prime), rounds)
                        : gen_random_feasible(seed, n_jobs, horizon, parse_rat(psi),
                                              parse_rat(grid));
    save_json(instance_to_json(inst), out_path);
    std::cout << "wrote " << out_path << " (" << inst.jobs.size() << " jobs)\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dual-machine power-down scheduling lab"};
    app.require_subcommand(1);

    PolicyOptions popts;
    std::optional<std::string> psi_override, horizon, out_path, csv_path, report_dir;

    auto add_policy_flags = [&](CLI::App* cmd) {
        cmd->add_option("--policy", popts.policy, "policy: a, s, always_on");
        cmd->add_option("--u", popts.u, "margin for policy a (rational)");
        cmd->add_option("--lambda", popts.lambda, "anchor multiplier for policy s");
        cmd->add_option("--idle-mode", popts.idle_mode, "cumulative | per_episode");
    };

    // simulate
    std::string instance_path;
    auto* sim = app.add_subcommand("simulate", "run a policy on an instance file");
    sim->add_option("instance", instance_path, "instance JSON")->required();
    add_policy_flags(sim);
    sim->add_option("--psi-sigma", psi_override, "override the instance idle power");
    sim->add_option("--horizon", horizon, "clip the run at this time");
    sim->add_option("-o,--out", out_path, "write the trace JSON here");

    // compare
    std::vector<std::string> cmp_paths;
    std::string policies_csv = "a,s";
    auto* cmp = app.add_subcommand("compare", "policies vs the offline oracle, CSV output");
    cmp->add_option("instances", cmp_paths, "instance JSON files")->required();
    cmp->add_option("--policies", policies_csv, "comma-separated policy list");
    cmp->add_option("--u", popts.u, "margin for policy a");
    cmp->add_option("--lambda", popts.lambda, "anchor multiplier for policy s");
    cmp->add_option("--csv", csv_path, "write CSV here instead of stdout");
    cmp->add_option("--report-dir", report_dir, "write per-run phase reports here");

    // adversary
    std::string beta = "4745/10000", alpha = "21068/10000", eps = "1/10000";
    bool show_bounds = false;
    auto* adv = app.add_subcommand("adversary", "play the adaptive lower-bound game");
    add_policy_flags(adv);
    adv->add_option("--beta", beta, "case threshold");
    adv->add_option("--alpha", alpha, "target ratio (> 2)");
    adv->add_option("--eps", eps, "tiny-job size");
    adv->add_flag("--show-bounds", show_bounds, "print the bound constants and exit");
    adv->add_option("-o,--out", out_path, "write the transcript JSON here");

    // verify
    int verify_n = 1000;
    std::uint64_t seed = default_seed();
    std::string fail_dir = "verify_failures";
    bool quick = false;
    auto* ver = app.add_subcommand("verify", "run the seeded property suite");
    ver->add_option("--n", verify_n, "number of fuzzed instances");
    ver->add_option("--seed", seed, "base seed (env POWERDOWN_SEED overrides default)");
    ver->add_option("--out", fail_dir, "directory for failure reproducers");
    ver->add_flag("--quick", quick, "skip slower cross-checks");

    // gen
    std::string gen_kind = "random", gen_out = "instance.json";
    std::int64_t gen_k = 1000;
    std::string gen_eps = "1/1000", gen_eps_prime = "1/1000";
    int gen_rounds = 1, gen_jobs = 6;
    std::int64_t gen_horizon = 40;
    std::string gen_psi = "1", gen_grid = "1";
    auto* gen = app.add_subcommand("gen", "generate an instance file");
    gen->add_option("--kind", gen_kind, "tight-s | random");
    gen->add_option("-o,--out", gen_out, "output path")->required();
    gen->add_option("--k", gen_k, "turn-on cost before normalization (tight-s)");
    gen->add_option("--eps", gen_eps, "tiny size before normalization (tight-s)");
    gen->add_option("--eps-prime", gen_eps_prime, "round gap before normalization (tight-s)");
    gen->add_option("--rounds", gen_rounds, "tight-s rounds (2 pairs each)");
    gen->add_option("--seed", seed, "random seed");
    gen->add_option("--jobs", gen_jobs, "random job count");
    gen->add_option("--horizon", gen_horizon, "random horizon in grid units");
    gen->add_option("--psi-sigma", gen_psi, "idle power");
    gen->add_option("--grid", gen_grid, "grid step");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) return cmd_simulate(instance_path, popts, psi_override, horizon, out_path);
        if (cmp->parsed()) {
            std::vector<std::string> policies;
            std::stringstream ss(policies_csv);
            std::string item;
            while (std::getline(ss, item, ',')) policies.push_back(item);
            return cmd_compare(cmp_paths, policies, popts, csv_path, report_dir);
        }
        if (adv->parsed()) return cmd_adversary(popts, beta, alpha, eps, show_bounds, out_path);
        if (ver->parsed()) return cmd_verify(verify_n, seed, fail_dir, quick);
        if (gen->parsed())
            return cmd_gen(gen_kind, gen_out, gen_k, gen_eps, gen_eps_prime, gen_rounds, seed,
                           gen_jobs, gen_horizon, gen_psi, gen_grid);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
