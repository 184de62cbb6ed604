#include "etml/target.hpp"

#include <sstream>

#include "etml/pretty.hpp"
#include "etml/typecheck.hpp"

namespace etml {

namespace {
using RK = RuntimeError::Kind;

class ServerTarget : public Machine {
public:
    FreshRefs fresh;
    Queue queue;
    InjectionTable iota;
    std::vector<Ref> minted;

    Ref mint(RefKind k) {
        auto r = fresh.fresh(k);
        minted.push_back(r);
        return r;
    }

protected:
    ValuePtr on_frag_call(const RtEnv& env, const ExprPtr& e) override {
        QueueItem it;
        it.kind = QueueItem::Kind::Frag;
        it.fn = resolve_dyn(env, *e->ref);
        for (auto& a : e->args) it.args.push_back(inject_value(eval(env, a)));
        it.fresh = mint(RefKind::FragValue);
        queue.push_back(it);
        return Value::ref_val(it.fresh);
    }

    ModValuePtr on_special_mod(const RtEnv& env, const ModExprPtr& m) override {
        if (m->kind == ModExpr::Kind::GetDyn) return eval_path(env, m->path);
        return Machine::on_special_mod(env, m);
    }

    void on_special_decl(RtEnv& env, const DeclPtr& d, StructBuilder& out) override {
        switch (d->kind) {
        case Decl::Kind::Injection: iota[d->ref->str()] = inject_value(eval(env, d->expr)); return;
        case Decl::Kind::End: queue.push_back(QueueItem{}); return;
        case Decl::Kind::Dyn: {
            Ref r;
            if (d->mod->kind == ModExpr::Kind::RefMod) {
                r = *d->mod->ref;
            } else if (d->mod->kind == ModExpr::Kind::FragMod) {
                QueueItem it;
                it.kind = QueueItem::Kind::Mod;
                it.fn = resolve_dyn(env, *d->mod->ref);
                for (auto& a : d->mod->dyn_args) {
                    auto mv = eval_mod(env, a);
                    if (mv->kind != ModValue::Kind::Struct || !mv->dyn)
                        throw RuntimeError(RK::UnboundDyn, "argument " + pretty(a) + " has no dyn field");
                    it.mod_args.push_back(*mv->dyn);
                }
                it.fresh = mint(RefKind::ModRef);
                queue.push_back(it);
                r = it.fresh;
            } else {
                throw RuntimeError(RK::Stuck, "bad dyn declaration");
            }
            env = env.bind_dyn(r);
            out.dyn = r;
            return;
        }
        default: Machine::on_special_decl(env, d, out);
        }
    }
};

class ClientTarget : public Machine {
public:
    GlobalEnv zeta;
    const Queue* queue = nullptr;
    size_t head = 0;

protected:
    GlobalEntry& lookup(const Ref& r) {
        auto it = zeta.find(r.str());
        if (it == zeta.end()) throw RuntimeError(RK::Unbound, "unbound reference $" + r.str());
        return it->second;
    }

    ValuePtr on_ref(const RtEnv&, const Ref& r) override {
        auto& e = lookup(r);
        if (!e.v) throw RuntimeError(RK::Unbound, "$" + r.str() + " is not a value");
        return e.v;
    }

    ValuePtr on_fragment_client(const ValuePtr& v) override {
        if (v->kind != Value::Kind::RefVal) return v;
        return on_ref(RtEnv{}, *v->ref);
    }

    ModValuePtr on_special_mod(const RtEnv& env, const ModExprPtr& m) override {
        if (m->kind == ModExpr::Kind::RefMod) {
            auto& e = lookup(resolve_dyn(env, *m->ref));
            if (!e.m) throw RuntimeError(RK::Unbound, "$" + m->ref->str() + " is not a module");
            return e.m;
        }
        return Machine::on_special_mod(env, m);
    }

    void exec() {
        for (;;) {
            if (head >= queue->size()) throw RuntimeError(RK::QueueUnderflow, "exec ran past the end of the queue");
            const auto& it = (*queue)[head++];
            switch (it.kind) {
            case QueueItem::Kind::End: return;
            case QueueItem::Kind::Frag: {
                auto f = on_ref(RtEnv{}, it.fn);
                for (auto& a : it.args) f = apply(f, a);
                zeta[it.fresh.str()].v = f;
                break;
            }
            case QueueItem::Kind::Mod: {
                auto& e = lookup(it.fn);
                if (!e.m) throw RuntimeError(RK::Unbound, "$" + it.fn.str() + " is not a functor");
                auto fn = e.m;
                std::vector<ModValuePtr> args;
                for (auto& r : it.mod_args) {
                    auto& a = lookup(r);
                    if (!a.m) throw RuntimeError(RK::Unbound, "$" + r.str() + " is not a module");
                    args.push_back(a.m);
                }
                zeta[it.fresh.str()].m = apply_functor(fn, args, it.fresh);
                break;
            }
            }
        }
    }

    void on_special_decl(RtEnv& env, const DeclPtr& d, StructBuilder& out) override {
        switch (d->kind) {
        case Decl::Kind::Bind: zeta[resolve_dyn(env, *d->ref).str()].v = eval(env, d->expr); return;
        case Decl::Kind::BindMod: zeta[resolve_dyn(env, *d->ref).str()].m = eval_mod(env, d->mod); return;
        case Decl::Kind::Exec: exec(); return;
        default: Machine::on_special_decl(env, d, out);
        }
    }
};

// Reads one wire value starting at `pos`.
ValuePtr read_wire(const std::string& s, size_t& pos) {
    size_t start = pos;
    if (pos + 1 >= s.size() || s[pos + 1] != ':') throw std::invalid_argument("malformed wire value at " + std::to_string(pos));
    if (s[pos] == 's') {
        size_t colon = s.find(':', pos + 2);
        if (colon == std::string::npos) throw std::invalid_argument("malformed string wire value");
        size_t len = std::stoul(s.substr(pos + 2, colon - pos - 2));
        pos = colon + 1 + len;
        if (pos > s.size()) throw std::invalid_argument("truncated string wire value");
    } else {
        while (pos < s.size() && s[pos] != ' ' && s[pos] != '\n') ++pos;
    }
    return decode_wire(s.substr(start, pos - start));
}

std::string read_word(const std::string& s, size_t& pos) {
    size_t start = pos;
    while (pos < s.size() && s[pos] != ' ' && s[pos] != '\n') ++pos;
    return s.substr(start, pos - start);
}

Ref read_ref(const std::string& s, size_t& pos) {
    auto w = read_word(s, pos);
    auto r = parse_ref(w);
    if (!r) throw std::invalid_argument("malformed reference '" + w + "'");
    return *r;
}

}  // namespace

ServerTargetRun run_server_target(const Program& server) {
    ServerTarget m;
    reserve_refs(server, m.fresh);
    RtEnv env;
    StructBuilder b;
    m.eval_decls(env, server, b);
    return {b.finish(), m.queue, m.iota, m.trace, m.minted};
}

ClientTargetRun run_client_target(const Program& client, const Queue& queue, const InjectionTable& iota) {
    ClientTarget c;
    for (auto& [slot, v] : iota) c.zeta[slot].v = v;
    c.queue = &queue;
    RtEnv env;
    StructBuilder b;
    c.eval_decls(env, client, b);
    ValuePtr ret;
    for (auto it = b.fields.rbegin(); it != b.fields.rend(); ++it)
        if (!it->is_mod && it->name == "return") {
            ret = it->v;
            break;
        }
    return {ret, c.trace, c.zeta, c.head};
}

std::string write_queue(const Queue& q) {
    std::string out;
    for (auto& it : q) {
        switch (it.kind) {
        case QueueItem::Kind::End: out += "END"; break;
        case QueueItem::Kind::Frag:
            out += "FRAG " + it.fresh.str() + " " + it.fn.str();
            for (auto& a : it.args) out += " " + encode_wire(a);
            break;
        case QueueItem::Kind::Mod:
            out += "MOD " + it.fresh.str() + " " + it.fn.str();
            for (auto& r : it.mod_args) out += " " + r.str();
            break;
        }
        out += "\n";
    }
    return out;
}

Queue read_queue(const std::string& s) {
    Queue q;
    size_t pos = 0;
    while (pos < s.size()) {
        if (s[pos] == '\n') {
            ++pos;
            continue;
        }
        auto tag = read_word(s, pos);
        QueueItem it;
        if (tag == "END") {
            it.kind = QueueItem::Kind::End;
        } else if (tag == "FRAG" || tag == "MOD") {
            it.kind = tag == "FRAG" ? QueueItem::Kind::Frag : QueueItem::Kind::Mod;
            ++pos;
            it.fresh = read_ref(s, pos);
            ++pos;
            it.fn = read_ref(s, pos);
            while (pos < s.size() && s[pos] == ' ') {
                ++pos;
                if (it.kind == QueueItem::Kind::Frag)
                    it.args.push_back(read_wire(s, pos));
                else
                    it.mod_args.push_back(read_ref(s, pos));
            }
        } else {
            throw std::invalid_argument("unknown queue entry '" + tag + "'");
        }
        q.push_back(it);
    }
    return q;
}

std::string write_injections(const InjectionTable& t) {
    std::string out;
    for (auto& [slot, v] : t) out += slot + " " + encode_wire(v) + "\n";
    return out;
}

InjectionTable read_injections(const std::string& s) {
    InjectionTable t;
    size_t pos = 0;
    while (pos < s.size()) {
        if (s[pos] == '\n') {
            ++pos;
            continue;
        }
        auto slot = read_word(s, pos);
        if (pos >= s.size() || s[pos] != ' ') throw std::invalid_argument("missing value for slot " + slot);
        ++pos;
        t[slot] = read_wire(s, pos);
    }
    return t;
}

ModTypePtr typecheck_target(const Program& p, Side) { return type_ml_structure(p); }

}  // namespace etml
