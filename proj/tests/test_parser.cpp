#include <gtest/gtest.h>

#include "etml/parser.hpp"
#include "etml/pretty.hpp"
#include "support.hpp"

using namespace etml;

TEST(Parser, ClientDeclarations) {
    auto p = parse_program("let%server a = 3\nlet%client return = ~a:int + 1\n");
    ASSERT_EQ(p.size(), 2u);
    EXPECT_EQ(p[0]->loc, Location::Server);
    EXPECT_EQ(p[1]->loc, Location::Client);
    EXPECT_EQ(pretty(p[1]->expr), "~a:int + 1");
}

TEST(Parser, EmptyProgram) { EXPECT_TRUE(parse_program("").empty()); }

TEST(Parser, MixedValueDeclarationIsRejected) {
    EXPECT_THROW(parse_program("let%mixed a = 3"), ParseError);
}

TEST(Parser, ErrorPositionsStartAtOne) {
    try {
        parse_program("let%server a =\n");
        FAIL() << "expected a parse error";
    } catch (const ParseError& e) {
        EXPECT_GE(e.line, 1);
        EXPECT_GE(e.column, 1);
    }
}

TEST(Parser, FragmentAndInjection) {
    auto e = parse_expr("{{ 3 + ~a:int }}", Location::Server);
    EXPECT_EQ(e->kind, Expr::Kind::Fragment);
    EXPECT_EQ(pretty(e), "{{ 3 + ~a:int }}");
}

TEST(Parser, LocatedTypeParameters) {
    auto m = parse_modtype("sig type%server ('a@client) t end");
    ASSERT_EQ(m->items.size(), 1u);
    EXPECT_EQ(m->items[0].kind, SigItem::Kind::TypeAbs);
    EXPECT_EQ(m->items[0].loc, Location::Server);
    ASSERT_EQ(m->items[0].params.size(), 1u);
    EXPECT_EQ(m->items[0].params[0].loc, Location::Client);
}

TEST(Parser, MixedFunctor) {
    auto p = parse_program(
        "module%mixed F = functor%mixed (X : sig val%client a : int end) -> struct\n"
        "  let%client b = X.a + 1\nend\n");
    ASSERT_EQ(p.size(), 1u);
    EXPECT_EQ(p[0]->loc, Location::Mixed);
    EXPECT_EQ(p[0]->mod->kind, ModExpr::Kind::MixedFunctor);
}

TEST(Parser, TargetSyntax) {
    auto s = parse_target_program("let x = fragment $f0 (int^s 2)\ninjection $x1 (fragment^s x)\nEND\n");
    ASSERT_EQ(s.size(), 3u);
    EXPECT_EQ(s[1]->kind, Decl::Kind::Injection);
    EXPECT_EQ(s[2]->kind, Decl::Kind::End);
    auto c = parse_target_program("bind $f0 = fun v -> v\nexec\nlet return = fragment^c $x1\n");
    ASSERT_EQ(c.size(), 3u);
    EXPECT_EQ(c[0]->kind, Decl::Kind::Bind);
    EXPECT_EQ(c[1]->kind, Decl::Kind::Exec);
}

TEST(Parser, StringLiteralsWithEscapes) {
    auto e = parse_expr(R"("a \"b\" c")");
    EXPECT_EQ(e->kind, Expr::Kind::Const);
    EXPECT_EQ(e->lit.s, "a \"b\" c");
}

// Property: printing then parsing is the identity (up to printing) on the corpus.
class RoundTrip : public ::testing::TestWithParam<std::string> {};

TEST_P(RoundTrip, PrettyParsePretty) {
    auto once = pretty(etml::testing::corpus_program(GetParam()));
    EXPECT_EQ(pretty(parse_program(once)), once);
}

INSTANTIATE_TEST_SUITE_P(Corpus, RoundTrip, ::testing::ValuesIn(etml::testing::positive_corpus()));

TEST(RoundTrip, TargetPrograms) {
    for (auto name : {"inj", "frag", "module"})
        for (auto side : {".server.tgt", ".client.tgt"}) {
            auto text = etml::testing::read_file(etml::testing::corpus_path(std::string("targets/") + name + side));
            auto once = pretty(parse_target_program(text), PrintMode::Target);
            EXPECT_EQ(pretty(parse_target_program(once), PrintMode::Target), once) << name << side;
        }
}
