#include <gtest/gtest.h>

#include "etml/harness.hpp"
#include "etml/parser.hpp"
#include "etml/pretty.hpp"
#include "etml/slicer.hpp"
#include "etml/typecheck.hpp"
#include "etml/walk.hpp"
#include "support.hpp"

using namespace etml;

namespace {

std::string server_of(const std::string& src) { return pretty(compile(parse_program(src)).server, PrintMode::Target); }
std::string client_of(const std::string& src) { return pretty(compile(parse_program(src)).client, PrintMode::Target); }

std::string hoisted(const std::string& src) { return pretty(hoist(annotate(parse_program(src)))); }

class InjectionCounter : public Visitor {
public:
    int outside_fragments = 0, fragments = 0;
    int depth = 0;
    void expr(const ExprPtr& e) override {
        if (e->kind == Expr::Kind::Fragment) {
            ++fragments;
            ++depth;
            visit_children(e);
            --depth;
            return;
        }
        if (e->kind == Expr::Kind::Injection && depth == 0) ++outside_fragments;
        visit_children(e);
    }
};

}  // namespace

TEST(Hoist, FragmentInjection) {
    EXPECT_EQ(hoisted("let%server a = 3\nlet%server x = {{ 3 + ~a:int }}\n"),
              "let%server a = 3\nlet%server x = let a'0 = int^s a in {{ 3 + int^c ~a'0:serial }}\n");
}

TEST(Hoist, SerialInjectionUnchanged) {
    auto src = "let%server a = 3\nlet%server y = {{ 3 + ~a:serial }}\n";
    EXPECT_EQ(hoisted(src), pretty(annotate(parse_program(src))));
}

TEST(Hoist, MixedFunctorInjectionLifted) {
    auto out = hoisted(etml::testing::read_file(etml::testing::corpus_path("mixed_functor_inj.etml")));
    auto lifted = out.find("let%client y'");
    auto functor = out.find("module%mixed F");
    ASSERT_NE(lifted, std::string::npos) << out;
    EXPECT_LT(lifted, functor) << out;
    EXPECT_NE(out.find("X.a + y'"), std::string::npos) << out;
}

// Property: after hoisting, every remaining injection uses a primitive
// converter on a variable or path.
class HoistCorpus : public ::testing::TestWithParam<std::string> {};
TEST_P(HoistCorpus, OnlyPrimitiveInjectionsRemain) {
    auto h = hoist(annotate(etml::testing::corpus_program(GetParam())));
    struct Check : Visitor {
        void expr(const ExprPtr& e) override {
            if (e->kind == Expr::Kind::Injection) {
                EXPECT_TRUE(e->conv == "serial" || e->conv == "fragment") << pretty(e);
                EXPECT_TRUE(e->a->kind == Expr::Kind::Var || e->a->kind == Expr::Kind::QualVar) << pretty(e);
            }
            visit_children(e);
        }
    } check;
    check.decls(h);
}
TEST_P(HoistCorpus, HoistedProgramTypechecks) {
    auto h = hoist(annotate(etml::testing::corpus_program(GetParam())));
    EXPECT_NO_THROW(type_program(h));
}
TEST_P(HoistCorpus, SyncBalanced) { EXPECT_TRUE(sync_balanced(compile(etml::testing::corpus_program(GetParam())))); }
TEST_P(HoistCorpus, SlotTableCoversClientInjections) {
    FreshRefs fresh;
    auto p = etml::testing::corpus_program(GetParam());
    auto h = annotate(hoist(annotate(p, fresh)), fresh);
    InjectionCounter count;
    count.decls(h);
    auto s = compile(p);
    EXPECT_EQ(s.slot_table.size(), static_cast<size_t>(count.outside_fragments));
    EXPECT_EQ(s.frag_table.size(), static_cast<size_t>(count.fragments));
}
TEST_P(HoistCorpus, SliceIsDeterministic) {
    auto p = etml::testing::corpus_program(GetParam());
    auto a = compile(p), b = compile(p);
    EXPECT_EQ(pretty(a.server, PrintMode::Target), pretty(b.server, PrintMode::Target));
    EXPECT_EQ(pretty(a.client, PrintMode::Target), pretty(b.client, PrintMode::Target));
}
TEST_P(HoistCorpus, SlicesTypecheck) {
    auto s = compile(etml::testing::corpus_program(GetParam()));
    EXPECT_NO_THROW(typecheck_target(s.server, Side::Server));
    EXPECT_NO_THROW(typecheck_target(s.client, Side::Client));
}
INSTANTIATE_TEST_SUITE_P(Corpus, HoistCorpus, ::testing::ValuesIn(etml::testing::positive_corpus()));

TEST(Sliceable, NestedMixedStructureRejected) {
    auto p = annotate(etml::testing::corpus_program("neg_unsliceable"));
    EXPECT_THROW(check_sliceable(p), SliceError);
}

TEST(Sliceable, LiftedStructureAccepted) {
    EXPECT_NO_THROW(check_sliceable(annotate(etml::testing::corpus_program("sliceable_functor"))));
}

TEST(Sliceable, NoMixedModules) {
    EXPECT_NO_THROW(check_sliceable(annotate(parse_program("let%server a = 1\nlet%client return = 2\n"))));
}

TEST(SliceType, Examples) {
    EXPECT_EQ(pretty(slice_type(Type::fragment(t_int()), Side::Server), PrintMode::Target), "fragty");
    EXPECT_EQ(pretty(slice_type(t_int(), Side::Client), PrintMode::Target), "int");
    EXPECT_EQ(pretty(slice_type(Type::conv(t_int(), t_int()), Side::Server), PrintMode::Target), "int -> serial");
}

TEST(EraseClient, KeepsClientAndBase) {
    auto p = parse_program(
        "module%mixed F = functor%mixed (Y : sig val%server b : int  val%client b2 : int end) -> struct\n"
        "  let%server c = {{ Y.b2 }}\n"
        "  let%client d = 2 * Y.b2\n"
        "  let%base e = 1\n"
        "end\n");
    auto body = p[0]->mod->a->items;
    auto erased = erase_client(body);
    ASSERT_EQ(erased.size(), 2u);
    EXPECT_EQ(erased[0]->id.name, "d");
    EXPECT_EQ(erased[1]->id.name, "e");
}

TEST(EraseClient, AllServerBodyIsEmpty) {
    auto p = parse_program("module%mixed F = functor%mixed (Y : sig val%server b : int end) -> struct\n"
                           "  let%server c = Y.b\nend\n");
    EXPECT_TRUE(erase_client(p[0]->mod->a->items).empty());
}

TEST(EraseClient, AllClientBodyUnchanged) {
    auto p = parse_program("module%mixed F = functor%mixed (Y : sig val%client b : int end) -> struct\n"
                           "  let%client c = Y.b\n  let%client d = c\nend\n");
    auto body = p[0]->mod->a->items;
    auto erased = erase_client(body);
    ASSERT_EQ(erased.size(), body.size());
    for (size_t i = 0; i < body.size(); ++i) EXPECT_EQ(pretty(erased[i]), pretty(body[i]));
}

TEST(Compile, Expressions) {
    auto src = etml::testing::read_file(etml::testing::corpus_path("compile_expressions.etml"));
    EXPECT_EQ(server_of(src),
              "let a = fragment $f0 ()\n"
              "END\n"
              "let b = fragment $f1 (fragment^s a)\n"
              "END\n"
              "injection $x0 (fragment^s b)\n");
    EXPECT_EQ(client_of(src),
              "bind $f0 = fun _ -> 1\n"
              "exec\n"
              "bind $f1 = fun v0 -> fragment^c v0 + 1\n"
              "exec\n"
              "let return = fragment^c $x0 + 2\n");
}

TEST(Compile, ServerAndClientModules) {
    auto src = etml::testing::read_file(etml::testing::corpus_path("compile_modules.etml"));
    auto server = server_of(src);
    auto client = client_of(src);
    EXPECT_EQ(server.rfind("module X = struct\n  let a = fragment $f0 ()\n  let b = 4\nend\nEND\n", 0), 0u) << server;
    EXPECT_NE(server.find("injection $x1 (fragment^s X.a)"), std::string::npos) << server;
    EXPECT_EQ(client.rfind("bind $f0 = fun _ -> 2\nexec\n", 0), 0u) << client;
    EXPECT_NE(client.find("module F = functor (Y : sig\n  val b : int\nend) -> struct"), std::string::npos) << client;
    EXPECT_NE(client.find("let return = fragment^c $x1 + Z.a"), std::string::npos) << client;
}

TEST(Compile, MixedFunctor) {
    auto src = etml::testing::read_file(etml::testing::corpus_path("compile_mixed_functor.etml"));
    auto server = server_of(src);
    auto client = client_of(src);
    EXPECT_NE(server.find("module X = struct\n  module dyn = $R0\n  let a = 2\n  END\n"), std::string::npos) << server;
    EXPECT_NE(server.find("module dyn = fragment_m $R1 (dyn Y)\n  let c = fragment $dyn.f0 ()\n  END\n"),
              std::string::npos)
        << server;
    EXPECT_NE(client.find("module X = $R0"), std::string::npos) << client;
    EXPECT_NE(client.find("bind_m $R1 = functor (Y : sig\n  val b : int\nend) -> struct\n"
                          "  bind $dyn.f0 = fun _ -> Y.b\n  exec\n  let d = 2 * Y.b\nend\n"),
              std::string::npos)
        << client;
    EXPECT_NE(client.find("module F = functor (Y : sig\n  val b : int\nend) -> struct\n  let d = 2 * Y.b\nend\n"),
              std::string::npos)
        << client;
}

TEST(Compile, UnsliceableProgram) {
    EXPECT_THROW(compile(etml::testing::corpus_program("neg_unsliceable")), SliceError);
}

// Property: an all-base program slices into the same code on both sides.
TEST(Compile, BaseCodeCopiedToBothSides) {
    for (auto& src : etml::testing::base_programs()) {
        auto s = compile(parse_program(src));
        EXPECT_EQ(pretty(s.server, PrintMode::Target), pretty(s.client, PrintMode::Target)) << src;
    }
}

TEST(SliceModtype, MixedFunctorBecomesFunctor) {
    auto sig = type_program(etml::testing::corpus_program("compile_mixed_functor")).sig;
    for (Side side : {Side::Server, Side::Client}) {
        auto s = slice_modtype(sig, side);
        for (auto& it : s->items) {
            EXPECT_EQ(it.loc, Location::Base);
            if (it.mty) EXPECT_NE(it.mty->kind, ModType::Kind::MixedFunctor);
        }
    }
}
