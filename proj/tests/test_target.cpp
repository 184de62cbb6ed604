#include <gtest/gtest.h>

#include <random>

#include "etml/parser.hpp"
#include "etml/pretty.hpp"
#include "etml/target.hpp"
#include "etml/typecheck.hpp"
#include "support.hpp"

using namespace etml;

namespace {

Program target_file(const std::string& name) {
    return parse_target_program(etml::testing::read_file(etml::testing::corpus_path("targets/" + name)));
}

struct Pair {
    ServerTargetRun server;
    ClientTargetRun client;
};

Pair run_hand_pair(const std::string& name) {
    auto s = run_server_target(target_file(name + ".server.tgt"));
    auto c = run_client_target(target_file(name + ".client.tgt"), s.queue, s.iota);
    return {s, c};
}

ValuePtr random_value(std::mt19937& rng) {
    std::uniform_int_distribution<int> pick(0, 3);
    switch (pick(rng)) {
    case 0: return Value::integer(std::uniform_int_distribution<long long>(-1000000, 1000000)(rng));
    case 1: return Value::unit();
    case 2: {
        static const std::string alphabet = "ab :;\n\t\\\"s5-\xc3\xa9";
        std::string s;
        int n = std::uniform_int_distribution<int>(0, 12)(rng);
        for (int i = 0; i < n; ++i) s += alphabet[std::uniform_int_distribution<size_t>(0, alphabet.size() - 1)(rng)];
        return Value::string(s);
    }
    default: {
        auto prefix = make_ref(RefKind::ModRef, std::uniform_int_distribution<int>(0, 9)(rng));
        return Value::ref_val(make_ref(RefKind::FragValue, std::uniform_int_distribution<int>(0, 99)(rng), prefix));
    }
    }
}

TypeError::Kind target_rejection(const std::string& src) {
    try {
        typecheck_target(parse_target_program(src), Side::Server);
    } catch (const TypeError& e) {
        return e.kind;
    }
    ADD_FAILURE() << "target program was accepted:\n" << src;
    return TypeError::Kind::Unbound;
}

}  // namespace

TEST(HandPairs, InjectionMap) {
    auto r = run_hand_pair("inj");
    EXPECT_EQ(write_injections(r.server.iota), "x1 i:4\nx2 i:2\n");
    EXPECT_TRUE(r.server.queue.empty());
    EXPECT_EQ(show_value(r.client.value), "6");
    EXPECT_TRUE(r.client.trace.empty());
}

TEST(HandPairs, FragmentQueue) {
    auto r = run_hand_pair("frag");
    EXPECT_EQ(write_queue(r.server.queue), "FRAG r0 f0 i:2\nEND\nFRAG r1 f0 i:3\nEND\n");
    EXPECT_EQ(write_injections(r.server.iota), "x1 r:r0\n");
    EXPECT_EQ(render_trace(r.client.trace), "2; 3; 3");
    EXPECT_EQ(r.client.consumed, r.server.queue.size());
}

TEST(HandPairs, ModuleFragments) {
    auto r = run_hand_pair("module");
    EXPECT_EQ(write_queue(r.server.queue), "MOD R2 R1 R0\nFRAG r0 R2.f0 i:2\nEND\n");
    EXPECT_EQ(show_value(r.client.value), "6");
    EXPECT_EQ(r.client.consumed, r.server.queue.size());
}

TEST(HandPairs, BothSidesTypecheck) {
    for (auto name : {"inj", "frag", "module"}) {
        EXPECT_NO_THROW(typecheck_target(target_file(std::string(name) + ".server.tgt"), Side::Server)) << name;
        EXPECT_NO_THROW(typecheck_target(target_file(std::string(name) + ".client.tgt"), Side::Client)) << name;
    }
}

TEST(ServerTarget, EmptyProgram) {
    auto r = run_server_target({});
    EXPECT_TRUE(r.queue.empty());
    EXPECT_TRUE(r.iota.empty());
    EXPECT_TRUE(r.trace.empty());
    EXPECT_TRUE(r.value->fields.empty());
}

TEST(ServerTarget, FragmentArgumentsMustSerialize) {
    auto p = parse_target_program("let f = fun y -> y\nlet x = fragment $f0 (f)\n");
    try {
        run_server_target(p);
        FAIL();
    } catch (const RuntimeError& e) {
        EXPECT_EQ(e.kind, RuntimeError::Kind::NonSerializable);
    }
}

TEST(ClientTarget, ExecWithoutEndUnderflows) {
    try {
        run_client_target(parse_target_program("exec\nlet return = 1\n"), {}, {});
        FAIL();
    } catch (const RuntimeError& e) {
        EXPECT_EQ(e.kind, RuntimeError::Kind::QueueUnderflow);
    }
}

TEST(ClientTarget, UnboundReference) {
    try {
        run_client_target(parse_target_program("let return = int^c $x4\n"), {}, {});
        FAIL();
    } catch (const RuntimeError& e) {
        EXPECT_EQ(e.kind, RuntimeError::Kind::Unbound);
    }
}

TEST(ClientTarget, ReplayIsDeterministic) {
    auto s = run_server_target(target_file("frag.server.tgt"));
    auto client = target_file("frag.client.tgt");
    auto a = run_client_target(client, s.queue, s.iota);
    auto b = run_client_target(client, s.queue, s.iota);
    EXPECT_EQ(show_value(a.value), show_value(b.value));
    EXPECT_EQ(render_trace(a.trace), render_trace(b.trace));
}

TEST(TargetTyping, FragmentCallWithClosureArgument) {
    EXPECT_EQ(target_rejection("let x = fragment $f0 (fun y -> y)\n"), TypeError::Kind::Mismatch);
}

TEST(TargetTyping, ReferenceUsedAsInt) {
    EXPECT_EQ(target_rejection("let a = $x1 + 1\n"), TypeError::Kind::Mismatch);
}

TEST(TargetTyping, ConvertedReferenceIsFine) {
    EXPECT_NO_THROW(typecheck_target(parse_target_program("let a = int^c $x1 + 1\n"), Side::Client));
}

TEST(Wire, Examples) {
    EXPECT_EQ(encode_wire(Value::integer(-12)), "i:-12");
    EXPECT_EQ(encode_wire(Value::unit()), "u:");
    EXPECT_EQ(encode_wire(Value::string("a b")), "s:3:a b");
    EXPECT_EQ(encode_wire(Value::ref_val(*parse_ref("R1.r0"))), "r:R1.r0");
}

// Property: wire encoding round-trips every serializable value.
TEST(Wire, RoundTrip) {
    std::mt19937 rng(7);
    for (int i = 0; i < 2000; ++i) {
        auto v = random_value(rng);
        EXPECT_EQ(show_value(decode_wire(encode_wire(v))), show_value(v));
    }
}

// Property: the queue and injection files round-trip, strings with spaces and
// newlines included.
TEST(QueueText, RoundTrip) {
    std::mt19937 rng(11);
    FreshRefs fresh;
    for (int round = 0; round < 200; ++round) {
        Queue q;
        InjectionTable iota;
        int n = std::uniform_int_distribution<int>(0, 8)(rng);
        for (int i = 0; i < n; ++i) {
            QueueItem it;
            it.kind = static_cast<QueueItem::Kind>(std::uniform_int_distribution<int>(0, 2)(rng));
            if (it.kind == QueueItem::Kind::Frag) {
                it.fresh = fresh.fresh(RefKind::FragValue);
                it.fn = fresh.fresh(RefKind::FragClosure);
                int k = std::uniform_int_distribution<int>(0, 3)(rng);
                for (int j = 0; j < k; ++j) it.args.push_back(random_value(rng));
            } else if (it.kind == QueueItem::Kind::Mod) {
                it.fresh = fresh.fresh(RefKind::ModRef);
                it.fn = fresh.fresh(RefKind::ModRef);
                it.mod_args.push_back(fresh.fresh(RefKind::ModRef));
            }
            q.push_back(it);
            iota[fresh.fresh(RefKind::InjSlot).str()] = random_value(rng);
        }
        auto text = write_queue(q);
        EXPECT_EQ(write_queue(read_queue(text)), text);
        auto itext = write_injections(iota);
        EXPECT_EQ(write_injections(read_injections(itext)), itext);
    }
}

TEST(QueueText, Malformed) {
    EXPECT_THROW(read_queue("BOGUS r0\n"), std::invalid_argument);
    EXPECT_THROW(read_queue("FRAG r0 f0 s:10:ab\n"), std::invalid_argument);
}
