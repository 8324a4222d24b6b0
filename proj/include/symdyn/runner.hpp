#pragma once

#include "symdyn/analysis.hpp"
#include "symdyn/construct.hpp"
#include "symdyn/io.hpp"
#include "symdyn/level_set.hpp"
#include "symdyn/poly_construct.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace symdyn {

// Exit codes: 0 success, 2 config/domain, 3 precision, 4 budget, 5 invariant.
struct RunOutcome {
    int exit_code = 0;
    Json manifest;
};

namespace detail {

inline std::string rat_json(const Rat& r) { return rat_str(r); }

inline Json curve_json(const std::vector<std::pair<Int, Rat>>& pts) {
    Json arr = Json::array();
    for (const auto& [n, v] : pts)
        arr.push_back({{"n", n.str()}, {"value", rat_json(v)}, {"approx", rat_double(v)}});
    return arr;
}

// Verdict inputs for a family pair, with the declared stage bounds.
inline VerdictInputs family_verdict_inputs(const ScrambleFamily& fam, const std::string& xi,
                                           const std::string& eta,
                                           std::vector<Rat> t_grid,
                                           std::optional<AlphaFunction> alpha) {
    const TraceSchedule& s = *fam.schedule;
    std::size_t diff = 0;
    while (diff < xi.size() && diff < eta.size() && xi[diff] == eta[diff]) ++diff;
    if (diff >= static_cast<std::size_t>(s.stages))
        throw DomainError("family pair coincides through every stage");
    int s_diff = static_cast<int>(diff) + 1;

    Rat t0 = s.zeta - 5 * s.params(1).eps_k;
    if (t_grid.empty())
        t_grid = {t0, s.model.diameter_bound() / 2, s.model.diameter_bound()};

    VerdictInputs in{fam.member(xi), fam.member(eta), s.model.metric(), t0,
                     std::move(t_grid), {},            {},               s.horizon_end,
                     std::move(alpha)};
    for (int k = 1; k <= s.stages; ++k) {
        const auto& cp = s.checkpoints[static_cast<std::size_t>(k - 1)];
        const auto& sp = s.params(k);
        for (std::size_t idx : cp.separation) {
            const Slot& sl = s.slots[idx];
            if (sl.chain_index != s_diff) continue;
            in.separation.push_back(CheckpointClaim{sl.b, k, 2 * sp.delta_k, sp.eps_k});
        }
        in.closeness.push_back(CheckpointClaim{cp.closeness_n, k, sp.delta_k, sp.eps_k});
    }
    return in;
}

inline Json report_json(const ChaosReport& rep) {
    Json j;
    j["pair"] = rep.pair_id;
    j["t0"] = rat_json(rep.t0);
    Json grid = Json::array();
    for (const Rat& t : rep.t_grid) grid.push_back(rat_json(t));
    j["tGrid"] = grid;
    Json curves = Json::array();
    for (const auto& [t, pts] : rep.curves)
        curves.push_back({{"t", rat_json(t)}, {"points", curve_json(pts)}});
    j["curves"] = curves;
    j["separationLiminfEstimate"] = rat_json(rep.separation_liminf_estimate);
    j["closenessLimsupEstimate"] = rat_json(rep.closeness_limsup_estimate);
    switch (rep.verdict) {
        case ChaosReport::Verdict::Witnessed: j["verdict"] = "witnessed-at-horizon"; break;
        case ChaosReport::Verdict::RefutedAtHorizon: j["verdict"] = "refuted-at-horizon"; break;
        default: j["verdict"] = "inconclusive"; break;
    }
    j["alphaWitnessed"] = rep.alpha_witnessed;
    j["alphaImpliesPlainChecked"] = rep.alpha_implies_plain_checked;
    Json wt = Json::array();
    for (const Int& w : rep.witness_times) wt.push_back(w.str());
    j["witnessTimes"] = wt;
    return j;
}

inline Json schedule_json(const TraceSchedule& s) {
    Json j;
    j["stages"] = s.stages;
    j["zeta"] = rat_json(s.zeta);
    j["eps"] = rat_json(s.eps);
    j["delta1"] = rat_json(s.delta1);
    j["horizonEnd"] = s.horizon_end.str();
    j["targetWord"] = s.target_word.str(s.model.alphabet());
    Json stages = Json::array();
    for (int k = 1; k <= s.stages; ++k) {
        const auto& sp = s.params(k);
        const auto& cp = s.checkpoints[static_cast<std::size_t>(k - 1)];
        Json sk;
        sk["k"] = k;
        sk["eps_k"] = rat_json(sp.eps_k);
        sk["delta_k"] = rat_json(sp.delta_k);
        sk["eta_k"] = rat_json(sp.eta_k);
        sk["K_k"] = sp.K_k;
        sk["denseWords"] = sp.t_k;
        sk["closenessCheckpoint"] = cp.closeness_n.str();
        if (cp.alpha_d) sk["alphaCheckpointD"] = cp.alpha_d->str();
        Json seps = Json::array();
        for (std::size_t idx : cp.separation) {
            const Slot& sl = s.slots[idx];
            seps.push_back({{"chain", sl.chain_index},
                            {"a", sl.a.str()},
                            {"b", sl.b.str()}});
        }
        sk["separationSlots"] = seps;
        stages.push_back(sk);
    }
    j["stageData"] = stages;
    j["slotCount"] = s.slots.size();
    return j;
}

struct OutputCollector {
    std::string dir;
    Json entries = Json::array();

    explicit OutputCollector(std::string d) : dir(std::move(d)) {
        std::filesystem::create_directories(dir);
    }
    void add(const std::string& name, const std::string& content) {
        std::string path = dir + "/" + name;
        write_file(path, content);
        char hex[32];
        std::snprintf(hex, sizeof hex, "%016llx",
                      static_cast<unsigned long long>(fnv1a64(content)));
        entries.push_back({{"path", name}, {"fnv1a64", std::string(hex)}});
    }
    void add_json(const std::string& name, const Json& j) { add(name, j.dump(2) + "\n"); }
};

inline std::string curves_csv(const ChaosReport& rep) {
    std::ostringstream csv;
    csv << "t,n,value,approx\n";
    for (const auto& [t, pts] : rep.curves)
        for (const auto& [n, v] : pts)
            csv << rat_double(t) << "," << n.str() << "," << rat_str(v) << ","
                << rat_double(v) << "\n";
    return csv.str();
}

}  // namespace detail

// Runs one command from a parsed config; deterministic given the config.
inline RunOutcome run_config(const Json& cfg, const std::string& out_dir) {
    RunOutcome outcome;
    Json invariant_checks = Json::array();
    detail::OutputCollector out(out_dir);
    std::string command = cfg.at("command").get<std::string>();

    auto finish = [&]() {
        Json manifest;
        manifest["version"] = "symdyn 0.1.0";
        manifest["command"] = command;
        manifest["config"] = cfg;
        manifest["invariantChecks"] = invariant_checks;
        manifest["outputs"] = out.entries;
        out.add_json("manifest.json", manifest);
        outcome.manifest = manifest;
        return outcome;
    };
    auto check = [&](const std::string& name, bool pass) {
        invariant_checks.push_back({{"name", name}, {"pass", pass}});
        if (!pass) throw InvariantError("invariant check failed: " + name);
    };

    if (command == "check") {
        ShiftModel model = model_from_json(cfg.at("model"));
        Json j;
        if (model.kind() == ShiftModel::Kind::SFT) {
            const auto& ts = model.transition_system();
            j["transitive"] = ts.transitive();
            auto pi = ts.primitivity_index(256);
            if (pi)
                j["primitivityIndex"] = *pi;
            else
                j["primitivityIndex"] = "not-primitive";
            if (ts.transitive()) j["period"] = ts.period();
        }
        j["mixing"] = model.mixing();
        if (model.mixing()) {
            j["bridgingConstant"] = model.bridging_constant();
            j["specConstantAtEighth"] = model.spec_constant(Rat(1, 8));
        }
        out.add_json("check.json", j);
        return finish();
    }

    if (command == "decompose") {
        ShiftModel model = model_from_json(cfg.at("model"));
        const auto& ts = model.transition_system();
        auto d = ts.cyclic_classes();
        Json j;
        j["period"] = d.period;
        Json classes = Json::array();
        for (const auto& cls : d.classes) classes.push_back(cls);
        j["classes"] = classes;
        bool rotate_ok = true;
        std::vector<int> class_of(ts.alphabet().size, -1);
        for (int c = 0; c < d.period; ++c)
            for (int s : d.classes[static_cast<std::size_t>(c)]) class_of[s] = c;
        for (int i = 0; i < ts.alphabet().size; ++i)
            for (int k = 0; k < ts.alphabet().size; ++k)
                if (ts.edge(i, k) && class_of[i] >= 0 && class_of[k] >= 0 &&
                    class_of[k] != (class_of[i] + 1) % d.period)
                    rotate_ok = false;
        check("cyclic-classes-rotation", rotate_ok);
        out.add_json("classes.json", j);
        return finish();
    }

    if (command == "construct-dc1" || command == "construct-level-set") {
        ShiftModel model = model_from_json(cfg.at("model"));
        const Alphabet& a = model.alphabet();
        int stages = cfg.value("stages", 5);
        std::uint64_t rng_seed = cfg.value("rngSeed", 0ULL);
        std::optional<AlphaFunction> alpha;
        if (cfg.contains("alpha") && !cfg.at("alpha").is_null())
            alpha = alpha_from_json(cfg.at("alpha"));

        std::shared_ptr<const TraceSchedule> sched;
        std::vector<std::string> prefixes;
        if (cfg.contains("prefixes"))
            for (const auto& p : cfg.at("prefixes")) prefixes.push_back(p.get<std::string>());
        if (prefixes.empty()) {
            std::string base(static_cast<std::size_t>(stages), '1');
            prefixes.push_back(base);
            base[0] = '2';
            prefixes.push_back(base);
        }

        std::optional<LevelSetResult> ls;
        if (command == "construct-level-set") {
            Observable phi;
            const auto& pj = cfg.at("phi");
            if (pj.contains("cylinder"))
                phi = Observable::cylinder(Word::parse(pj.at("cylinder").get<std::string>(), a));
            else
                for (const auto& term : pj.at("terms"))
                    phi.add(parse_rat(term.at(0).get<std::string>()),
                            Word::parse(term.at(1).get<std::string>(), a));
            Rat va = parse_rat(cfg.at("a").get<std::string>());
            Rat vb = parse_rat(cfg.at("b").get<std::string>());
            std::optional<Rat> eps;
            if (cfg.contains("eps")) eps = parse_rat(cfg.at("eps").get<std::string>());
            ls = level_set_family(model, phi, va, vb, stages, prefixes,
                                  cfg.value("poolMaxLen", 6), eps,
                                  cfg.contains("delta1")
                                      ? parse_rat(cfg.at("delta1").get<std::string>())
                                      : Rat(1, 2),
                                  std::nullopt, rng_seed);
            sched = ls->family.schedule;
        } else {
            Word w1 = Word::parse(cfg.contains("seed") ? cfg.at("seed").value("w1", "01") : "01", a);
            Word w2 = Word::parse(cfg.contains("seed") ? cfg.at("seed").value("w2", "01") : "01", a);
            Rat theta = cfg.contains("seed") ? parse_rat(cfg.at("seed").value("theta", "1"))
                                             : Rat(1);
            DistalSeed seed = make_distal_seed(model, w1, w2, theta);
            KSegment K{w1, w2, theta, theta};
            if (cfg.contains("K")) {
                const auto& kj = cfg.at("K");
                K.base_u = Word::parse(kj.value("u", w1.str(a)), a);
                K.base_v = Word::parse(kj.value("v", w2.str(a)), a);
                K.theta_from = parse_rat(kj.value("from", rat_str(theta)));
                K.theta_to = parse_rat(kj.value("to", rat_str(theta)));
            }
            Rat eps = cfg.contains("eps") ? parse_rat(cfg.at("eps").get<std::string>())
                                          : Rat(1, 8);
            Rat delta1 = cfg.contains("delta1") ? parse_rat(cfg.at("delta1").get<std::string>())
                                                : Rat(1, 2);
            Word target = Word::parse(cfg.value("target", "0"), a);
            BuildInputs in{model, seed, K, theta, alpha, target, eps, delta1, stages, rng_seed};
            sched = std::make_shared<TraceSchedule>(build_schedule(in));
        }

        // re-verify before emitting anything
        sched->verify();
        check("schedule-inequalities", true);

        std::optional<Int> horizon;
        if (cfg.contains("horizon") && cfg.at("horizon").is_string() &&
            cfg.at("horizon").get<std::string>() != "auto")
            horizon = Int(cfg.at("horizon").get<std::string>());
        ScrambleFamily fam = ls ? std::move(ls->family)
                                : construct_family(sched, prefixes, horizon);

        for (const auto& [xi, x] : fam.members) out.add("member_" + xi + ".rle", stream_to_rle(x));
        out.add_json("checkpoints.json", detail::schedule_json(*sched));

        std::vector<Rat> t_grid;
        if (cfg.contains("tGrid"))
            for (const auto& t : cfg.at("tGrid")) t_grid.push_back(parse_rat(t.get<std::string>()));
        auto vin = detail::family_verdict_inputs(fam, prefixes[0], prefixes[1], t_grid, alpha);
        auto rep = dc1_verdict(vin);
        rep.pair_id = prefixes[0] + "/" + prefixes[1];
        check("dc1-witnessed", rep.verdict == ChaosReport::Verdict::Witnessed);
        Json rj = detail::report_json(rep);

        if (ls) {
            // Birkhoff estimates on the stage-m empirical checkpoints
            std::vector<Int> grid;
            const auto& cp = sched->checkpoints.back();
            for (std::size_t idx : cp.empirical) grid.push_back(sched->slots[idx].b);
            auto bk = birkhoff_oscillation(fam.member(prefixes[0]), ls->phi, grid,
                                           std::make_pair(ls->a, ls->b));
            Json bj;
            bj["liminfEstimate"] = rat_str(bk.liminf_estimate);
            bj["limsupEstimate"] = rat_str(bk.limsup_estimate);
            bj["target"] = {rat_str(ls->a), rat_str(ls->b)};
            bj["verdict"] =
                bk.verdict == BirkhoffResult::Verdict::Irregular ? "irregular" : "regular";
            bj["averages"] = detail::curve_json(bk.averages);
            rj["birkhoff"] = bj;
        }
        out.add_json("report.json", rj);
        if (cfg.value("format", "json") == "csv") out.add("curves.csv", detail::curves_csv(rep));
        return finish();
    }

    if (command == "construct-polynomial") {
        AlphaFunction alpha = cfg.contains("alpha") && !cfg.at("alpha").is_null()
                                  ? alpha_from_json(cfg.at("alpha"))
                                  : AlphaFunction::sqrt();
        std::vector<std::string> prefixes;
        if (cfg.contains("prefixes"))
            for (const auto& p : cfg.at("prefixes")) prefixes.push_back(p.get<std::string>());
        Int horizon = cfg.contains("horizon") && cfg.at("horizon").is_string() &&
                              cfg.at("horizon").get<std::string>() != "auto"
                          ? Int(cfg.at("horizon").get<std::string>())
                          : pow_int(10, 200);
        if (prefixes.empty()) prefixes = {"111111111", "211111111"};
        auto pc = polynomial_construction(alpha, prefixes, horizon);
        pc.verify();
        check("polynomial-schedule-inequalities", true);
        for (const auto& [xi, x] : pc.members) out.add("member_" + xi + ".rle", stream_to_rle(x));
        Json j;
        j["realizedStages"] = pc.realized();
        Json stages = Json::array();
        for (int k = 1; k <= pc.realized(); ++k) {
            const auto& st = pc.stages[static_cast<std::size_t>(k - 1)];
            Json sk{{"k", k}, {"a", st.a.str()}, {"b", st.b.str()}, {"c", st.c.str()}};
            Json ds = Json::array();
            for (const auto& d : st.d) ds.push_back(d.str());
            sk["d"] = ds;
            if (pc.members.size() >= 2) {
                Rat frac = poly_checkpoint_fraction(pc, prefixes[0], prefixes[1], k);
                sk["closenessFractionLower"] = rat_str(frac);
                sk["passes"] = frac >= 1 - pow_rat(Rat(1, 2), k);
            }
            stages.push_back(sk);
        }
        j["stages"] = stages;
        if (pc.members.size() >= 2)
            for (const auto& sk : j["stages"])
                check("poly-closeness-k" + std::to_string(sk["k"].get<int>()),
                      sk.value("passes", true));
        out.add_json("report.json", j);
        return finish();
    }

    if (command == "analyze-pair") {
        SymbolStream x = stream_from_rle(read_file(cfg.at("pair").at(0).get<std::string>()));
        SymbolStream y = stream_from_rle(read_file(cfg.at("pair").at(1).get<std::string>()));
        ShiftMetric metric = cfg.value("metric", "geometric") == "polynomial"
                                 ? ShiftMetric::polynomial()
                                 : ShiftMetric::geometric(x.alphabet().size);
        Int horizon = Int(cfg.at("horizon").get<std::string>());
        Rat t0 = parse_rat(cfg.value("t0", "1/4"));
        std::vector<Rat> t_grid{t0, Rat(1, x.alphabet().size)};
        if (cfg.contains("tGrid")) {
            t_grid.clear();
            for (const auto& t : cfg.at("tGrid")) t_grid.push_back(parse_rat(t.get<std::string>()));
        }
        VerdictInputs in{x, y, metric, t0, t_grid, {}, {}, horizon, std::nullopt};
        // geometric checkpoint grid
        Int n = 64;
        while (n < horizon) {
            in.separation.push_back(CheckpointClaim{n, 0, Rat(1), Rat(0)});
            n *= 4;
        }
        auto rep = dc1_verdict(in);
        rep.pair_id = "pair";
        Json rj = detail::report_json(rep);
        out.add_json("report.json", rj);
        if (cfg.value("format", "json") == "csv") out.add("curves.csv", detail::curves_csv(rep));
        return finish();
    }

    if (command == "beta-expand") {
        ShiftModel model = model_from_json(cfg.at("model"));
        const BetaModel& bm = model.beta_model();
        Rat x = parse_rat(cfg.at("x").get<std::string>());
        long depth = cfg.value("depth", 40L);
        Word digits = bm.expand(x, depth);
        RatIv rec = bm.reconstruct(digits);
        Json j;
        j["digits"] = digits.str(model.alphabet());
        j["reconstructionLo"] = rat_str(rec.lo);
        j["reconstructionHi"] = rat_str(rec.hi);
        Rat err_bound = pow_rat(bm.beta_approx(64).lo, -depth);
        bool ok = x - rec.lo <= err_bound && rec.lo <= x + err_bound;
        check("beta-reconstruction-bound", ok);
        out.add_json("expansion.json", j);
        return finish();
    }

    if (command == "report") {
        Json rj = Json::parse(read_file(cfg.at("run").get<std::string>() + "/report.json"));
        std::ostringstream csv;
        csv << "t,n,value,approx\n";
        if (rj.contains("curves"))
            for (const auto& c : rj.at("curves"))
                for (const auto& p : c.at("points"))
                    csv << c.at("t").get<std::string>() << "," << p.at("n").get<std::string>()
                        << "," << p.at("value").get<std::string>() << ","
                        << p.at("approx").dump() << "\n";
        out.add("curves.csv", csv.str());
        return finish();
    }

    throw DomainError("unknown command: " + command);
}

// Exception-to-exit-code boundary used by the CLI.
inline int run_config_main(const Json& cfg, const std::string& out_dir, std::string& error) {
    try {
        auto outcome = run_config(cfg, out_dir);
        return outcome.exit_code;
    } catch (const PrecisionError& e) {
        error = e.what();
        return 3;
    } catch (const BudgetError& e) {
        error = e.what();
        return 4;
    } catch (const InvariantError& e) {
        error = e.what();
        return 5;
    } catch (const DomainError& e) {
        error = e.what();
        return 2;
    } catch (const CapabilityError& e) {
        error = e.what();
        return 2;
    } catch (const Json::exception& e) {
        error = e.what();
        return 2;
    }
}

}  // namespace symdyn
