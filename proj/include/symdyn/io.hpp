#pragma once

#include "symdyn/alpha.hpp"
#include "symdyn/measure.hpp"
#include "symdyn/model.hpp"
#include "symdyn/stream.hpp"

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>

namespace symdyn {

using Json = nlohmann::json;

// ---------------------------------------------------------------------------
// Run-length stream files
// ---------------------------------------------------------------------------
//
// Text format, one run per line; positions and lengths are decimal integers
// of arbitrary size, patterns are serialized words.  Block-structured
// constructions stay small on disk at any horizon.

inline std::string stream_to_rle(const SymbolStream& x) {
    const RunSeq* rs = x.runs();
    if (!rs) throw CapabilityError("stream_to_rle: stream is not run-backed");
    const Alphabet& a = x.alphabet();
    std::ostringstream out;
    out << "symstream v1\n";
    out << "side " << (x.side() == Side::TwoSided ? "two" : "one") << "\n";
    out << "alphabet " << a.size << "\n";
    if (rs->head)
        out << "head " << rs->head->start << " " << rs->head->phase << " "
            << rs->head->pat->str(a) << "\n";
    for (const Run& r : rs->runs)
        out << "run " << r.start << " " << r.len << " " << r.phase << " " << r.pat->str(a)
            << "\n";
    if (rs->tail)
        out << "tail " << rs->tail->start << " " << rs->tail->phase << " "
            << rs->tail->pat->str(a) << "\n";
    out << "end\n";
    return out.str();
}

inline SymbolStream stream_from_rle(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "symstream v1")
        throw DomainError("stream_from_rle: bad header");
    Side side = Side::OneSided;
    Alphabet a(2);
    RunSeq seq;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag == "end") break;
        if (tag == "side") {
            std::string s;
            ls >> s;
            side = s == "two" ? Side::TwoSided : Side::OneSided;
        } else if (tag == "alphabet") {
            int n;
            ls >> n;
            a = Alphabet(n);
        } else if (tag == "run" || tag == "tail" || tag == "head") {
            std::string start_s, len_s, phase_s, pat_s;
            if (tag == "run")
                ls >> start_s >> len_s >> phase_s >> pat_s;
            else
                ls >> start_s >> phase_s >> pat_s;
            Run r;
            r.start = Int(start_s);
            r.len = tag == "run" ? Int(len_s) : Int(0);
            r.phase = std::stol(phase_s);
            r.pat = std::make_shared<const Word>(Word::parse(pat_s, a));
            if (tag == "run")
                seq.runs.push_back(std::move(r));
            else if (tag == "tail")
                seq.tail = std::move(r);
            else
                seq.head = std::move(r);
        } else {
            throw DomainError("stream_from_rle: unknown tag " + tag);
        }
    }
    return SymbolStream::from_runs(a, side, std::move(seq));
}

// ---------------------------------------------------------------------------
// Config parsing
// ---------------------------------------------------------------------------

inline ShiftModel model_from_json(const Json& j) {
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "full") return ShiftModel::full_shift(j.at("n").get<int>());
    if (kind == "sft") {
        auto rows = j.at("matrix");
        std::vector<std::vector<int>> m;
        for (const auto& row : rows) m.push_back(row.get<std::vector<int>>());
        return ShiftModel::sft(TransitionSystem(Alphabet(static_cast<int>(m.size())), m));
    }
    if (kind == "sofic") {
        std::vector<SoficModel::Edge> edges;
        int nv = 0, nl = 0;
        for (const auto& e : j.at("edges")) {
            int from = e.at(0).get<int>();
            int to = e.at(1).get<int>();
            std::string lab = e.at(2).get<std::string>();
            nv = std::max({nv, from + 1, to + 1});
            Sym l = static_cast<Sym>(std::stoi(lab));
            nl = std::max(nl, static_cast<int>(l) + 1);
            edges.push_back({from, to, l});
        }
        if (j.contains("vertices")) nv = j.at("vertices").get<int>();
        int n = j.contains("n") ? j.at("n").get<int>() : nl;
        return ShiftModel::sofic(SoficModel(Alphabet(n), nv, std::move(edges)));
    }
    if (kind == "beta") {
        unsigned prec = j.contains("precision") ? j.at("precision").get<unsigned>() : 128;
        const auto& b = j.at("beta");
        if (b.is_string()) {
            std::string s = b.get<std::string>();
            if (s == "golden")
                return ShiftModel::beta(BetaModel(BetaValue(QuadReal::golden_ratio()), prec));
            return ShiftModel::beta(BetaModel(BetaValue(parse_rat(s)), prec));
        }
        if (b.is_object() && b.contains("quadratic")) {
            const auto& q = b.at("quadratic");
            QuadReal v(Int(q.at("a").get<std::string>()), Int(q.at("b").get<std::string>()),
                       Int(q.at("q").get<std::string>()), Int(q.at("D").get<std::string>()));
            return ShiftModel::beta(BetaModel(BetaValue(std::move(v)), prec));
        }
        if (b.is_object() && b.contains("periodic-expansion")) {
            Word per = Word::parse(b.at("periodic-expansion").get<std::string>(), Alphabet(10));
            return ShiftModel::beta(BetaModel::from_periodic_expansion(per, prec));
        }
        throw DomainError("model config: unsupported beta description");
    }
    throw DomainError("model config: unknown kind " + kind);
}

inline FiniteMeasure measure_from_json(const Json& j, const Alphabet& a) {
    if (j.contains("periodic"))
        return FiniteMeasure::periodic_orbit(a, Word::parse(j.at("periodic").get<std::string>(), a));
    if (j.contains("convex")) {
        std::vector<std::pair<Rat, FiniteMeasure>> parts;
        for (const auto& p : j.at("convex"))
            parts.push_back({parse_rat(p.at(0).get<std::string>()),
                             measure_from_json(p.at(1), a)});
        return FiniteMeasure::convex(std::move(parts));
    }
    throw DomainError("measure config: expected periodic or convex");
}

inline AlphaFunction alpha_from_json(const Json& j) {
    if (j.is_string()) {
        std::string s = j.get<std::string>();
        if (s == "sqrt") return AlphaFunction::sqrt();
        if (s == "log") return AlphaFunction::log();
        throw DomainError("alpha config: unknown name " + s);
    }
    if (j.is_object() && j.contains("table")) {
        std::vector<Rat> vals;
        for (const auto& v : j.at("table")) vals.push_back(parse_rat(v.get<std::string>()));
        return AlphaFunction::table(std::move(vals));
    }
    throw DomainError("alpha config: expected a name or a table");
}

// ---------------------------------------------------------------------------
// Manifest hashing
// ---------------------------------------------------------------------------

inline std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::string write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DomainError("cannot write " + path);
    out << content;
    return path;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DomainError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace symdyn
