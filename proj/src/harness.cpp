#include "etml/harness.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <sstream>

#include "etml/parser.hpp"
#include "etml/pretty.hpp"
#include "etml/typecheck.hpp"
#include "etml/walk.hpp"

namespace etml {

namespace fs = std::filesystem;

Trace CompiledRun::trace() const {
    Trace t = server_trace;
    t.insert(t.end(), client_trace.begin(), client_trace.end());
    return t;
}

CompiledRun run_pair(const Program& server, const Program& client) {
    auto s = run_server_target(server);
    auto queue = read_queue(write_queue(s.queue));
    auto iota = read_injections(write_injections(s.iota));
    auto c = run_client_target(client, queue, iota);
    CompiledRun r;
    r.value = c.value;
    r.server_trace = s.trace;
    r.client_trace = c.trace;
    r.minted = s.minted;
    r.queue = s.queue;
    r.iota = s.iota;
    return r;
}

CompiledRun run_compiled(const Program& p) {
    auto sliced = compile(p);
    auto r = run_pair(sliced.server, sliced.client);
    r.sliced = std::move(sliced);
    return r;
}

std::optional<std::map<std::string, std::string>> ref_bijection(const std::vector<Ref>& from,
                                                                 const std::vector<Ref>& to) {
    std::map<RefKind, std::vector<std::string>> a, b;
    for (auto& r : from) a[r.kind].push_back(r.str());
    for (auto& r : to) b[r.kind].push_back(r.str());
    std::map<std::string, std::string> out;
    for (auto& [k, xs] : a) {
        if (b[k].size() != xs.size()) return std::nullopt;
        for (size_t i = 0; i < xs.size(); ++i) out[xs[i]] = b[k][i];
    }
    for (auto& [k, ys] : b)
        if (a[k].size() != ys.size()) return std::nullopt;
    return out;
}

std::string show_renamed(const ValuePtr& v, const std::map<std::string, std::string>& ren) {
    if (!v) return "<none>";
    if (v->kind == Value::Kind::RefVal) {
        auto it = ren.find(v->ref->str());
        return "$" + (it == ren.end() ? v->ref->str() : it->second);
    }
    return show_value(v);
}

std::string render_renamed(const Trace& t, const std::map<std::string, std::string>& ren) {
    std::string out;
    for (size_t i = 0; i < t.size(); ++i) {
        if (i) out += "; ";
        out += show_renamed(t[i], ren);
    }
    return out;
}

bool typing_preserved(const Program& p, std::string* why) {
    auto say = [&](const std::string& s) {
        if (why) *why = s;
        return false;
    };
    FreshRefs fresh;
    auto annotated = annotate(p, fresh);
    auto hoisted = annotate(hoist(annotated), fresh);
    check_sliceable(hoisted);
    ModTypePtr source;
    try {
        source = type_program(hoisted).sig;
    } catch (const TypeError& e) {
        return say(std::string("hoisted program does not typecheck: ") + e.what());
    }
    auto pair = slice(hoisted);
    Env env = Env::initial(true);
    for (Side side : {Side::Server, Side::Client}) {
        const Program& prog = side == Side::Server ? pair.server : pair.client;
        ModTypePtr got;
        try {
            got = typecheck_target(prog, side);
        } catch (const TypeError& e) {
            return say(std::string(to_string(side)) + " slice does not typecheck: " + e.what());
        }
        auto want = slice_modtype(source, side);
        try {
            subtype(env, Location::Base, got, want);
        } catch (const TypeError& e) {
            return say(std::string(to_string(side)) + " slice does not have the sliced source signature (" +
                       e.what() + "): got " + pretty(got, PrintMode::Target) + ", expected " +
                       pretty(want, PrintMode::Target));
        }
    }
    return true;
}

namespace {

EquivReport compare(const InterpResult& ir, const std::function<CompiledRun()>& compiled, const std::string& name) {
    EquivReport rep;
    rep.name = name;
    rep.interp_value = show_value(ir.value);
    rep.interp_trace = render_trace(ir.trace());
    CompiledRun cr;
    try {
        cr = compiled();
    } catch (const RuntimeError& e) {
        rep.detail = std::string("compiled run failed: ") + e.what();
        return rep;
    }
    auto ren = ref_bijection(cr.minted, ir.minted);
    if (!ren) {
        rep.detail = "fresh reference counts differ between the runs";
        ren.emplace();
    }
    rep.compiled_value = show_renamed(cr.value, *ren);
    rep.server_trace = render_renamed(cr.server_trace, *ren);
    rep.client_trace = render_renamed(cr.client_trace, *ren);
    rep.compiled_trace = render_renamed(cr.trace(), *ren);
    rep.value_match = rep.compiled_value == rep.interp_value;
    rep.trace_match = rep.compiled_trace == rep.interp_trace;
    if (!rep.value_match) rep.detail += "value " + rep.interp_value + " vs " + rep.compiled_value + ". ";
    if (!rep.trace_match) rep.detail += "trace [" + rep.interp_trace + "] vs [" + rep.compiled_trace + "]. ";
    return rep;
}

}  // namespace

EquivReport check_equivalence(const Program& p, const std::string& name) {
    auto ir = run_program(p);
    auto rep = compare(ir, [&] { return run_compiled(p); }, name);
    std::string why;
    rep.typing_preserved = typing_preserved(p, &why);
    if (!rep.typing_preserved) rep.detail += why;
    return rep;
}

EquivReport check_equivalence(const Program& p, const SlicedPair& sliced, const std::string& name) {
    auto ir = run_program(p);
    auto rep = compare(ir, [&] { return run_pair(sliced.server, sliced.client); }, name);
    std::string why;
    rep.typing_preserved = typing_preserved(p, &why);
    if (!rep.typing_preserved) rep.detail += why;
    return rep;
}

EquivReport check_hoist_equivalence(const Program& p, const std::string& name) {
    auto ir = run_program(p);
    auto hoisted = hoist(annotate(p));
    auto rep = compare(
        ir,
        [&] {
            auto hr = run_program(hoisted);
            CompiledRun c;
            c.value = hr.value;
            c.server_trace = hr.server_trace;
            c.client_trace = hr.client_trace;
            c.minted = hr.minted;
            return c;
        },
        name);
    try {
        type_program(hoisted);
        rep.typing_preserved = true;
    } catch (const TypeError& e) {
        rep.detail += std::string("hoisted program does not typecheck: ") + e.what();
    }
    return rep;
}

namespace {
class SyncCounter : public Visitor {
public:
    int ends = 0, execs = 0;
    void decl(const DeclPtr& d) override {
        if (d->kind == Decl::Kind::End) ++ends;
        if (d->kind == Decl::Kind::Exec) ++execs;
        visit_children(d);
    }
};
}  // namespace

bool sync_balanced(const SlicedPair& s) {
    SyncCounter a, b;
    a.decls(s.server);
    b.decls(s.client);
    return a.ends == b.execs && a.execs == 0 && b.ends == 0;
}

std::pair<std::string, std::string> classify_error(const std::exception& e) {
    if (auto t = dynamic_cast<const TypeError*>(&e)) return {"TypeError", to_string(t->kind)};
    if (auto r = dynamic_cast<const RuntimeError*>(&e)) return {"RuntimeError", to_string(r->kind)};
    if (dynamic_cast<const SliceError*>(&e)) return {"SliceError", ""};
    if (dynamic_cast<const ParseError*>(&e)) return {"ParseError", ""};
    return {"Error", e.what()};
}

CorpusEntry parse_expect(const std::string& name, const std::string& source, const std::string& expect) {
    CorpusEntry e;
    e.name = name;
    e.source = source;
    std::istringstream in(expect);
    std::string line;
    auto rest = [](const std::string& l, size_t n) {
        auto s = l.substr(n);
        auto b = s.find_first_not_of(' ');
        return b == std::string::npos ? std::string() : s.substr(b);
    };
    while (std::getline(in, line)) {
        if (line.rfind("value:", 0) == 0) {
            e.value = rest(line, 6);
        } else if (line.rfind("trace:", 0) == 0) {
            e.trace = rest(line, 6);
        } else if (line.rfind("error:", 0) == 0) {
            std::istringstream w(rest(line, 6));
            std::string cls, kind;
            w >> cls >> kind;
            e.error_class = cls;
            if (!kind.empty()) e.error_kind = kind;
        } else if (line.rfind("unchecked:", 0) == 0) {
            e.unchecked = rest(line, 10) == "yes";
        }
    }
    return e;
}

CorpusResult run_entry(const CorpusEntry& e) {
    CorpusResult r;
    r.name = e.name;
    try {
        auto p = parse_program(e.source);
        if (!e.unchecked) type_program(p);
        auto ir = run_program(p);
        std::string v = show_value(ir.value), t = render_trace(ir.trace());
        if (e.value && v != *e.value) {
            r.detail = "value " + v + ", expected " + *e.value;
            return r;
        }
        if (e.trace && t != *e.trace) {
            r.detail = "trace [" + t + "], expected [" + *e.trace + "]";
            return r;
        }
        if (!e.unchecked) {
            auto rep = check_equivalence(p, e.name);
            r.report = rep;
            if (!rep.ok()) {
                r.detail = rep.detail;
                return r;
            }
        }
        if (e.error_class) {
            r.detail = "expected " + *e.error_class + " but the program ran";
            return r;
        }
        r.passed = true;
        r.detail = "value " + v + ", trace [" + t + "]";
    } catch (const std::exception& ex) {
        auto [cls, kind] = classify_error(ex);
        if (e.error_class && *e.error_class == cls && (!e.error_kind || *e.error_kind == kind)) {
            r.passed = true;
            r.detail = "rejected: " + std::string(ex.what());
        } else {
            r.detail = "unexpected " + cls + ": " + ex.what();
        }
    }
    return r;
}

std::vector<CorpusEntry> load_corpus(const std::string& dir) {
    std::vector<fs::path> files;
    for (auto& f : fs::directory_iterator(dir))
        if (f.is_regular_file() && f.path().extension() == ".etml") files.push_back(f.path());
    std::sort(files.begin(), files.end());
    auto slurp = [](const fs::path& p) {
        std::ifstream in(p);
        if (!in) throw std::runtime_error("cannot read " + p.string());
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    std::vector<CorpusEntry> out;
    for (auto& f : files) {
        auto expect = f;
        expect.replace_extension(".expect");
        if (!fs::exists(expect)) throw std::runtime_error("missing " + expect.string());
        out.push_back(parse_expect(f.stem().string(), slurp(f), slurp(expect)));
    }
    return out;
}

std::vector<CorpusResult> run_corpus(const std::vector<CorpusEntry>& entries) {
    std::vector<std::future<CorpusResult>> jobs;
    for (auto& e : entries) jobs.push_back(std::async(std::launch::async, [&e] { return run_entry(e); }));
    std::vector<CorpusResult> out;
    for (auto& j : jobs) out.push_back(j.get());
    return out;
}

}  // namespace etml
