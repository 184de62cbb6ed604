// Acceptance run: one PASS/FAIL line per criterion. Exit status 1 on any FAIL.

#include <chrono>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include "etml/harness.hpp"
#include "etml/parser.hpp"
#include "etml/pretty.hpp"
#include "etml/typecheck.hpp"
#include "support.hpp"

using namespace etml;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
    void fail(const std::string& why) {
        if (pass) detail = why;
        pass = false;
    }
};

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Renames every reference token to the order in which references of its kind
// first appear, segment by segment.
std::string canonical_refs(const std::string& text) {
    std::map<std::string, std::string> ren;
    std::map<char, int> next;
    auto rename_segment = [&](const std::string& seg) {
        auto r = parse_ref(seg);
        if (!r || seg == "dyn") return seg;
        auto it = ren.find(seg);
        if (it != ren.end()) return it->second;
        std::string fresh = std::string(1, seg[0]) + std::to_string(next[seg[0]]++);
        ren[seg] = fresh;
        return fresh;
    };
    std::istringstream lines(text);
    std::string line, out;
    while (std::getline(lines, line)) {
        std::istringstream words(line);
        std::string w, outline;
        while (words >> w) {
            std::string prefix, body = w;
            if (body.rfind("r:", 0) == 0) prefix = "r:", body = body.substr(2);
            std::string renamed;
            if (parse_ref(body)) {
                std::istringstream segs(body);
                std::string seg;
                while (std::getline(segs, seg, '.')) renamed += (renamed.empty() ? "" : ".") + rename_segment(seg);
            } else {
                renamed = body;
            }
            outline += (outline.empty() ? "" : " ") + prefix + renamed;
        }
        out += outline + "\n";
    }
    return out;
}

Program target_file(const std::string& name) {
    return parse_target_program(etml::testing::read_file(etml::testing::corpus_path("targets/" + name)));
}

Outcome golden_examples() {
    struct G {
        const char *name, *value, *trace;
    };
    const G goldens[] = {{"client_decl", "4", ""},       {"frag_print", "6", "3"},
                         {"frag_closure", "6", ""},      {"mixed_modules", "3", ""},
                         {"mixed_functor_inj", "3", ""}, {"mixed_functor_frag", "6", ""}};
    Outcome o;
    auto t0 = Clock::now();
    for (auto& g : goldens) {
        auto r = run_program(etml::testing::corpus_program(g.name));
        if (show_value(r.value) != g.value || render_trace(r.trace()) != g.trace)
            o.fail(std::string(g.name) + ": got " + show_value(r.value) + " [" + render_trace(r.trace()) + "]");
    }
    double dt = seconds_since(t0);
    if (dt >= 1.0) o.fail("took " + std::to_string(dt) + " s");
    if (o.pass) o.detail = "6 examples exact in " + std::to_string(dt) + " s";
    return o;
}

Outcome target_goldens() {
    Outcome o;
    auto t0 = Clock::now();
    auto expect = [&](const std::string& what, const std::string& got, const std::string& want) {
        if (canonical_refs(got) != canonical_refs(want)) o.fail(what + ": got [" + got + "] want [" + want + "]");
    };
    {
        auto s = run_server_target(target_file("inj.server.tgt"));
        auto c = run_client_target(target_file("inj.client.tgt"), s.queue, s.iota);
        expect("injection map", write_injections(s.iota), "x1 i:4\nx2 i:2\n");
        expect("injection queue", write_queue(s.queue), "");
        expect("injection value", show_value(c.value), "6");
    }
    {
        auto s = run_server_target(target_file("frag.server.tgt"));
        auto c = run_client_target(target_file("frag.client.tgt"), s.queue, s.iota);
        expect("fragment queue", write_queue(s.queue), "FRAG r1 f3 i:2\nEND\nFRAG r2 f3 i:3\nEND\n");
        expect("fragment injections", write_injections(s.iota), "x1 r:r1\n");
        expect("fragment client trace", render_trace(c.trace), "2; 3; 3");
    }
    {
        auto s = run_server_target(target_file("module.server.tgt"));
        auto c = run_client_target(target_file("module.client.tgt"), s.queue, s.iota);
        expect("module queue", write_queue(s.queue), "MOD R1 R4 R0\nFRAG r2 R1.f0 i:2\nEND\n");
        expect("module value", show_value(c.value), "6");
    }
    double dt = seconds_since(t0);
    if (dt >= 1.0) o.fail("took " + std::to_string(dt) + " s");
    if (o.pass) o.detail = "3 hand-written pairs exact after renaming in " + std::to_string(dt) + " s";
    return o;
}

Outcome semantics_preservation(const std::vector<std::string>& corpus) {
    Outcome o;
    auto t0 = Clock::now();
    if (corpus.size() < 15) o.fail("corpus has only " + std::to_string(corpus.size()) + " programs");
    for (auto& n : corpus) {
        auto rep = check_equivalence(etml::testing::corpus_program(n), n);
        if (!rep.value_match || !rep.trace_match) o.fail(n + ": " + rep.detail);
    }
    double dt = seconds_since(t0);
    if (dt >= 5.0) o.fail("took " + std::to_string(dt) + " s");
    if (o.pass) o.detail = std::to_string(corpus.size()) + " programs, 0 failures in " + std::to_string(dt) + " s";
    return o;
}

Outcome typing_preservation(const std::vector<std::string>& corpus) {
    Outcome o;
    int exact = 0, total = 0;
    for (auto& n : corpus) {
        auto p = etml::testing::corpus_program(n);
        std::string why;
        if (!typing_preserved(p, &why)) {
            o.fail(n + ": " + why);
            continue;
        }
        FreshRefs fresh;
        auto h = annotate(hoist(annotate(p, fresh)), fresh);
        auto src = type_program(h).sig;
        auto s = slice(h);
        for (Side side : {Side::Server, Side::Client}) {
            ++total;
            auto got = typecheck_target(side == Side::Server ? s.server : s.client, side);
            if (sig_equal(Env::initial(true), Location::Base, got, slice_modtype(src, side))) ++exact;
        }
    }
    if (o.pass)
        o.detail = std::to_string(total) + " slices typecheck at their sliced source signature (" +
                   std::to_string(exact) + " with an identical principal signature)";
    return o;
}

Outcome base_correspondence() {
    Outcome o;
    auto programs = etml::testing::base_programs();
    for (size_t i = 0; i < programs.size(); ++i) {
        auto p = parse_program(programs[i]);
        auto name = "base program " + std::to_string(i + 1);
        auto tierless = erase_locations(type_program(p).sig);
        auto ml = type_ml_structure(p);
        if (!sig_equal(Env::initial(), Location::Base, tierless, ml))
            o.fail(name + ": erased type " + pretty(tierless) + " vs ML type " + pretty(ml));
        auto theta = eval_base(p).trace;
        Trace doubled = theta;
        doubled.insert(doubled.end(), theta.begin(), theta.end());
        auto want = render_trace(doubled);
        auto interp = render_trace(run_program(p).trace());
        auto compiled = render_trace(run_compiled(p).trace());
        if (interp != want) o.fail(name + ": interpreted trace [" + interp + "] vs [" + want + "]");
        if (compiled != want) o.fail(name + ": compiled trace [" + compiled + "] vs [" + want + "]");
    }
    if (o.pass) o.detail = std::to_string(programs.size()) + " base-only programs, types and doubled traces exact";
    return o;
}

Outcome separate_typechecking(const std::vector<std::string>& corpus) {
    Outcome o;
    for (auto& n : corpus) {
        auto rep = check_separate(etml::testing::corpus_program(n));
        if (!rep.ok) o.fail(n + ": " + (rep.failures.empty() ? std::string("?") : rep.failures.front()));
    }
    if (o.pass) o.detail = std::to_string(corpus.size()) + " programs";
    return o;
}

Outcome negative_suite() {
    Outcome o;
    auto outcome = [](const std::function<void()>& f) -> std::pair<std::string, std::string> {
        try {
            f();
        } catch (const std::exception& e) {
            return classify_error(e);
        }
        return {"accepted", ""};
    };
    auto typed = [](const char* name) { return [name] { type_program(etml::testing::corpus_program(name)); }; };
    struct Case {
        const char* what;
        std::function<void()> run;
        std::string cls, kind;
    };
    const Case cases[] = {
        {"client variable on server", typed("neg_client_on_server"), "TypeError", "LocationViolation"},
        {"fragment on client", typed("neg_fragment_on_client"), "TypeError", "LocationViolation"},
        {"closure injection", [] { run_program(etml::testing::corpus_program("neg_closure_injection")); },
         "RuntimeError", "NonSerializable"},
        {"injection of mixed functor argument", typed("neg_mixed_functor_inj"), "TypeError",
         "InjectionInMixedFunctor"},
        {"mixed functor on non-mixed module", typed("neg_mixed_app_non_mixed"), "TypeError", "BadFunctorApp"},
        {"nested mixed structure", [] { check_sliceable(annotate(etml::testing::corpus_program("neg_unsliceable"))); },
         "SliceError", ""},
    };
    for (auto& c : cases) {
        auto [cls, kind] = outcome(c.run);
        if (cls != c.cls || kind != c.kind) o.fail(std::string(c.what) + ": got " + cls + " " + kind);
    }
    if (o.pass) o.detail = "6 programs rejected with the designated error";
    return o;
}

Outcome structural_properties(const std::vector<std::string>& corpus) {
    Outcome o;
    const char* heavy[] = {"inj_heavy", "client_decl", "frag_closure", "mixed_functor_inj", "compile_mixed_functor"};
    for (auto n : heavy) {
        auto rep = check_hoist_equivalence(etml::testing::corpus_program(n), n);
        if (!rep.ok()) o.fail(std::string("hoisting ") + n + ": " + rep.detail);
    }
    for (auto& n : corpus) {
        auto p = etml::testing::corpus_program(n);
        auto compiled = run_compiled(p);
        if (!sync_balanced(compiled.sliced)) o.fail(n + ": exec/END counts differ");
        auto ir = run_program(p);
        size_t frag_calls = 0, interp_frags = 0;
        for (auto& it : compiled.queue) frag_calls += it.kind == QueueItem::Kind::Frag;
        for (auto& r : ir.minted) interp_frags += r.kind == RefKind::FragValue;
        if (frag_calls != interp_frags)
            o.fail(n + ": " + std::to_string(frag_calls) + " fragment calls queued, " + std::to_string(interp_frags) +
                   " fragments evaluated");
        auto client = run_client_target(compiled.sliced.client, compiled.queue, compiled.iota);
        if (client.consumed != compiled.queue.size())
            o.fail(n + ": client executed " + std::to_string(client.consumed) + " of " +
                   std::to_string(compiled.queue.size()) + " queue entries");
    }
    if (o.pass)
        o.detail = "5 hoisted programs equivalent, " + std::to_string(corpus.size()) +
                   " slices balanced, every fragment call run once";
    return o;
}

}  // namespace

int main() {
    auto corpus = etml::testing::positive_corpus();
    struct Criterion {
        int id;
        const char* name;
        std::function<Outcome()> run;
    };
    const Criterion criteria[] = {
        {1, "golden examples", golden_examples},
        {2, "target runtime goldens", target_goldens},
        {3, "semantics preservation", [&] { return semantics_preservation(corpus); }},
        {4, "typing preservation", [&] { return typing_preservation(corpus); }},
        {5, "base/ML correspondence", base_correspondence},
        {6, "separate typechecking", [&] { return separate_typechecking(corpus); }},
        {7, "negative suite", negative_suite},
        {8, "structural properties", [&] { return structural_properties(corpus); }},
    };
    int failed = 0;
    for (auto& c : criteria) {
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.fail(std::string("exception: ") + e.what());
        }
        failed += !o.pass;
        std::cout << "criterion " << c.id << " " << (o.pass ? "PASS" : "FAIL") << " " << c.name << ": " << o.detail
                  << std::endl;
    }
    return failed ? 1 : 0;
}
