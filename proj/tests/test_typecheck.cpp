#include <gtest/gtest.h>

#include "etml/interp.hpp"
#include "etml/parser.hpp"
#include "etml/pretty.hpp"
#include "etml/typecheck.hpp"
#include "support.hpp"

using namespace etml;

namespace {

const Location kAll[] = {Location::Base, Location::Client, Location::Server, Location::Mixed};

Env with_val(Env env, const std::string& name, Location loc, TypePtr t) {
    Binding b;
    b.kind = Binding::Kind::Val;
    b.loc = loc;
    b.id = Ident{name, 0};
    b.type = std::move(t);
    return env.extend(b);
}

std::string type_of(const Env& env, Location loc, const std::string& src) {
    return pretty(zonk(type_expr(env, loc, parse_expr(src, loc)).body));
}

TypeError::Kind rejection(const std::string& src) {
    try {
        type_program(parse_program(src));
    } catch (const TypeError& e) {
        return e.kind;
    }
    ADD_FAILURE() << "program was accepted:\n" << src;
    return TypeError::Kind::Mismatch;
}

}  // namespace

TEST(Locations, CanUseTable) {
    for (auto a : kAll)
        for (auto b : kAll) {
            bool want = a == b || a == Location::Base ||
                        (a == Location::Mixed && (b == Location::Server || b == Location::Client));
            EXPECT_EQ(can_use(a, b), want) << to_string(a) << " -> " << to_string(b);
        }
}

TEST(Locations, CanContainTable) {
    for (auto a : kAll)
        for (auto b : kAll) EXPECT_EQ(can_contain(a, b), a == b || a == Location::Mixed);
}

TEST(TypeExpr, InjectionOnClient) {
    auto env = with_val(Env::initial(), "a", Location::Server, t_int());
    EXPECT_EQ(type_of(env, Location::Client, "~a:int + 1"), "int");
}

TEST(TypeExpr, FragmentOnServer) {
    EXPECT_EQ(type_of(Env::initial(), Location::Server, "{{ 1 + 2 }}"), "int fragment");
}

TEST(TypeExpr, FragmentOnClientIsRejected) {
    try {
        type_expr(Env::initial(), Location::Client, parse_expr("{{ 1 }}", Location::Client));
        FAIL();
    } catch (const TypeError& e) {
        EXPECT_EQ(e.kind, TypeError::Kind::LocationViolation);
    }
}

TEST(TypeExpr, ClientVariableOnServerIsRejected) {
    auto env = with_val(Env::initial(), "a", Location::Client, t_int());
    try {
        type_expr(env, Location::Server, parse_expr("a + 1", Location::Server));
        FAIL();
    } catch (const TypeError& e) {
        EXPECT_EQ(e.kind, TypeError::Kind::LocationViolation);
    }
}

TEST(TypeExpr, BaseIsUsableEverywhere) {
    auto env = with_val(Env::initial(), "a", Location::Base, t_int());
    for (auto l : {Location::Base, Location::Client, Location::Server}) EXPECT_EQ(type_of(env, l, "a + 1"), "int");
}

TEST(TypeExpr, PolymorphicIdentity) {
    auto t = zonk(type_expr(Env::initial(), Location::Base, parse_expr("fun x -> x")).body);
    ASSERT_EQ(t->kind, Type::Kind::Arrow);
    EXPECT_EQ(pretty(t->a), pretty(t->b));
}

TEST(TypeExpr, MismatchIsReported) {
    try {
        type_expr(Env::initial(), Location::Base, parse_expr("1 + \"s\""));
        FAIL();
    } catch (const TypeError& e) {
        EXPECT_EQ(e.kind, TypeError::Kind::Mismatch);
    }
}

TEST(EquivType, Basics) {
    Env env = Env::initial();
    EXPECT_TRUE(equiv_type(env, Location::Base, t_int(), t_int()));
    EXPECT_FALSE(equiv_type(env, Location::Base, t_int(), t_serial()));
    EXPECT_TRUE(equiv_type(env, Location::Server, Type::fragment(t_int()), Type::fragment(t_int())));
    EXPECT_FALSE(equiv_type(env, Location::Server, Type::fragment(t_int()), Type::fragment(t_unit())));
}

TEST(EquivType, ManifestTypesUnfold) {
    auto p = parse_program("type%base t = int\n");
    auto sig = type_program(p).sig;
    auto env = Env::initial().extend_sig(sig->items);
    EXPECT_TRUE(equiv_type(env, Location::Base, Type::constr(sig->items[0].id), t_int()));
}

TEST(WfType, FragmentOnlyOnServer) {
    Env env = Env::initial();
    EXPECT_NO_THROW(wf_type(env, Location::Server, Type::fragment(t_int())));
    EXPECT_THROW(wf_type(env, Location::Client, Type::fragment(t_int())), TypeError);
    EXPECT_THROW(wf_type(env, Location::Base, Type::fragment(t_int())), TypeError);
}

TEST(Specialize, BaseToClient) {
    auto m = parse_modtype("sig val%base a : int  type%base t end");
    auto s = specialize(m, Location::Base, Location::Client);
    for (auto& it : s->items) EXPECT_EQ(it.loc, Location::Client);
}

TEST(Specialize, IdentityTowardsBaseAndMixed) {
    auto m = parse_modtype("sig val%server a : int  val%client b : int end");
    EXPECT_EQ(pretty(specialize(m, Location::Mixed, Location::Mixed)), pretty(m));
    EXPECT_EQ(pretty(specialize(m, Location::Mixed, Location::Base)), pretty(m));
}

TEST(Specialize, UnusableComponentsDropped) {
    auto m = parse_modtype("sig val%server a : int  val%client b : int end");
    auto s = specialize(m, Location::Mixed, Location::Client);
    ASSERT_EQ(s->items.size(), 1u);
    EXPECT_EQ(s->items[0].id.name, "b");
    EXPECT_EQ(s->items[0].loc, Location::Client);
}

TEST(Specialize, MixedFunctorArgumentUnchanged) {
    auto m = parse_modtype(
        "functor%mixed (X : sig val%base b : int end) -> sig val%client y : int  val%server z : int end");
    auto s = specialize(m, Location::Mixed, Location::Client);
    EXPECT_EQ(pretty(s->arg), pretty(m->arg));
    ASSERT_EQ(s->res->items.size(), 1u);
    EXPECT_EQ(s->res->items[0].id.name, "y");
}

TEST(Strengthen, AbstractTypesBecomeManifest) {
    auto m = parse_modtype("sig type%server t end");
    auto p = Path::var(Ident{"X", 7});
    auto s = strengthen(m, p);
    ASSERT_EQ(s->items.size(), 1u);
    EXPECT_EQ(s->items[0].kind, SigItem::Kind::TypeManifest);
    EXPECT_NE(pretty(s).find("X.t"), std::string::npos) << pretty(s);
}

TEST(Strengthen, ManifestTypesPointAtThePath) {
    auto m = parse_modtype("sig type%base t = int end");
    EXPECT_EQ(pretty(strengthen(m, Path::var(Ident{"X", 7}))), "sig\n  type%base t = X.t\nend");
}

TEST(Strengthen, EmptySignature) {
    EXPECT_TRUE(strengthen(ModType::sig({}), Path::var(Ident{"X", 7}))->items.empty());
}

TEST(Subtype, WidthAndDepth) {
    Env env = Env::initial();
    auto big = parse_modtype("sig val%server a : int  val%server b : int end");
    auto small = parse_modtype("sig val%server a : int end");
    EXPECT_NO_THROW(subtype(env, Location::Mixed, big, small));
    EXPECT_THROW(subtype(env, Location::Mixed, small, big), TypeError);
}

TEST(Subtype, LocationsMustAgree) {
    Env env = Env::initial();
    auto s = parse_modtype("sig val%server a : int end");
    auto c = parse_modtype("sig val%client a : int end");
    EXPECT_THROW(subtype(env, Location::Mixed, s, c), TypeError);
}

TEST(Subtype, BaseItemSpecializesToUse) {
    Env env = Env::initial();
    auto b = parse_modtype("sig val%base a : int end");
    auto c = parse_modtype("sig val%client a : int end");
    EXPECT_NO_THROW(subtype(env, Location::Mixed, b, c));
}

TEST(Subtype, PolymorphicBelowMonomorphic) {
    Env env = Env::initial();
    auto poly = parse_modtype("sig val%base id : 'a -> 'a end");
    auto mono = parse_modtype("sig val%base id : int -> int end");
    EXPECT_NO_THROW(subtype(env, Location::Base, poly, mono));
    EXPECT_THROW(subtype(env, Location::Base, mono, poly), TypeError);
}

// Property: every corpus signature is a subtype of itself.
class SubtypeReflexive : public ::testing::TestWithParam<std::string> {};
TEST_P(SubtypeReflexive, Corpus) {
    auto sig = type_program(etml::testing::corpus_program(GetParam())).sig;
    EXPECT_NO_THROW(subtype(Env::initial(), Location::Mixed, sig, sig));
}
INSTANTIATE_TEST_SUITE_P(Corpus, SubtypeReflexive, ::testing::ValuesIn(etml::testing::positive_corpus()));

TEST(Programs, ClientDeclSignature) {
    auto t = type_program(parse_program("let%server a = 3\nlet%client return = ~a:int + 1\n"));
    EXPECT_TRUE(t.runnable);
    EXPECT_EQ(pretty(t.sig), "sig\n  val%server a : int\n  val%client return : int\nend");
}

TEST(Programs, NotRunnableWithoutReturn) {
    EXPECT_FALSE(type_program(parse_program("let%server a = 3\n")).runnable);
}

TEST(Programs, MixedFunctorInjectingItsArgumentIsRejected) {
    EXPECT_EQ(rejection("module%mixed F = functor%mixed (X : sig val%server a : int end) -> struct\n"
                        "  let%client b = ~(X.a):int\nend\n"),
              TypeError::Kind::InjectionInMixedFunctor);
}

TEST(Programs, MixedFunctorOnClientModuleIsRejected) {
    EXPECT_EQ(rejection("module%mixed F = functor%mixed (X : sig val%client a : int end) -> struct\n"
                        "  let%client b = X.a\nend\n"
                        "module%client Y = struct let%client a = 1 end\n"
                        "module%client Z = F(Y)\n"),
              TypeError::Kind::BadFunctorApp);
}

TEST(Programs, MixedFunctorSignature) {
    auto sig = type_program(etml::testing::corpus_program("mixed_functor_inj")).sig;
    ASSERT_GE(sig->items.size(), 2u);
    EXPECT_EQ(sig->items[1].mty->kind, ModType::Kind::MixedFunctor);
}

TEST(Programs, ApplicativeFunctorTypes) {
    auto p = parse_program(
        "module%server Make = functor (X : sig type%server t  val%server v : t end) -> struct\n"
        "  type%server key = X.t\n"
        "  let%server get = fun k -> k\nend\n"
        "module%server A = struct type%server t = int  let%server v = 1 end\n"
        "module%server M = Make(A)\n"
        "let%server r = M.get 3 + 1\n");
    EXPECT_NO_THROW(type_program(p));
}

TEST(Programs, AbstractTypesStayAbstract) {
    EXPECT_EQ(rejection("module%server A = (struct type%server t = int  let%server v = 1 end : "
                        "sig type%server t  val%server v : t end)\n"
                        "let%server r = A.v + 1\n"),
              TypeError::Kind::Mismatch);
}

TEST(Programs, ArityMismatchOnTypeConstructor) {
    auto m = parse_modtype("sig type%base ('a) box  val%base v : box end");
    try {
        wf_modtype(Env::initial(), Location::Mixed, m);
        FAIL();
    } catch (const TypeError& e) {
        EXPECT_EQ(e.kind, TypeError::Kind::ArityMismatch);
    }
}

TEST(TypeExpr, UnboundIsReported) {
    try {
        type_expr(Env::initial(), Location::Base, Expr::var(Ident{"nowhere", 0}));
        FAIL();
    } catch (const TypeError& e) {
        EXPECT_EQ(e.kind, TypeError::Kind::Unbound);
    }
}

// Separate typechecking: each declaration typed against the signature of
// the preceding ones agrees with the whole-program signature.
class Separate : public ::testing::TestWithParam<std::string> {};
TEST_P(Separate, Corpus) {
    auto rep = check_separate(etml::testing::corpus_program(GetParam()));
    EXPECT_TRUE(rep.ok) << (rep.failures.empty() ? "" : rep.failures.front());
}
INSTANTIATE_TEST_SUITE_P(Corpus, Separate, ::testing::ValuesIn(etml::testing::positive_corpus()));

// Base-only programs: the erased signature is the ML checker's signature.
TEST(BaseML, ErasureAgreesWithPlainChecker) {
    for (auto& src : etml::testing::base_programs()) {
        auto p = parse_program(src);
        auto tierless = erase_locations(type_program(p).sig);
        auto ml = type_ml_structure(p);
        EXPECT_TRUE(sig_equal(Env::initial(), Location::Base, tierless, ml))
            << src << pretty(tierless) << " vs " << pretty(ml);
    }
}
