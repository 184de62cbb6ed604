#include <gtest/gtest.h>

#include "etml/interp.hpp"
#include "etml/parser.hpp"
#include "etml/pretty.hpp"
#include "support.hpp"

using namespace etml;

namespace {

struct Golden {
    const char* name;
    const char* value;
    const char* trace;
};

const Golden kGoldens[] = {
    {"client_decl", "4", ""},         {"frag_print", "6", "3"},     {"frag_closure", "6", ""},
    {"mixed_modules", "3", ""},       {"mixed_functor_inj", "3", ""}, {"mixed_functor_frag", "6", ""},
};

}  // namespace

TEST(EvalBase, LetPrint) {
    auto r = eval_base(parse_expr("let x = print 3 in print (x + 1)"));
    EXPECT_EQ(show_value(r.value), "4");
    EXPECT_EQ(render_trace(r.trace), "3; 4");
}

TEST(EvalBase, Constant) {
    auto r = eval_base(parse_expr("3"));
    EXPECT_EQ(show_value(r.value), "3");
    EXPECT_TRUE(r.trace.empty());
}

TEST(EvalBase, Fix) {
    EXPECT_EQ(show_value(eval_base(parse_expr("(fix (fun f -> fun n -> n)) 5")).value), "5");
}

TEST(InjectValue, ConstantsAndRefsPass) {
    EXPECT_EQ(show_value(inject_value(Value::integer(3))), "3");
    EXPECT_EQ(show_value(inject_value(Value::string("s"))), "\"s\"");
    EXPECT_EQ(show_value(inject_value(Value::unit())), "()");
    auto r = make_ref(RefKind::FragValue, 1);
    EXPECT_EQ(show_value(inject_value(Value::ref_val(r))), "$r1");
}

TEST(InjectValue, ClosuresFail) {
    auto clo = eval_base(parse_expr("fun x -> x")).value;
    try {
        inject_value(clo);
        FAIL();
    } catch (const RuntimeError& e) {
        EXPECT_EQ(e.kind, RuntimeError::Kind::NonSerializable);
    }
}

TEST(EvalServerExpr, FragmentEmitsBind) {
    auto r = eval_server_expr(RtEnv{}, Expr::fragment(parse_expr("print 3", Location::Client),
                                                      make_ref(RefKind::FragClosure, 0)));
    EXPECT_EQ(show_value(r.value), "$r0");
    EXPECT_EQ(pretty(r.client, PrintMode::Target), "bind $r0 = $f0 with print 3\n");
    EXPECT_TRUE(r.trace.empty());
}

TEST(EvalServerExpr, PlainArithmetic) {
    auto r = eval_server_expr(RtEnv{}, parse_expr("1 + 2", Location::Server));
    EXPECT_EQ(show_value(r.value), "3");
    EXPECT_TRUE(r.client.empty());
}

TEST(EvalServerExpr, InjectionInsideFragmentIsSubstituted) {
    auto env = RtEnv{}.bind(Ident{"x", 0}, Value::integer(3));
    auto r = eval_server_expr(env, Expr::fragment(parse_expr("int^c (~x:serial) + a", Location::Client),
                                                  make_ref(RefKind::FragClosure, 0)));
    EXPECT_EQ(pretty(r.client, PrintMode::Target), "bind $r0 = $f0 with int^c (serial^c 3) + a\n");
}

TEST(EvalClientContext, InjectionBecomesConverterCall) {
    auto env = RtEnv{}.bind(Ident{"a", 0}, Value::integer(3));
    auto r = eval_client_context(env, parse_expr("~a:int + 1", Location::Client));
    EXPECT_EQ(pretty(r.residual), "int^c 3 + 1");
    EXPECT_TRUE(r.client.empty());
}

TEST(EvalClientContext, NoInjectionsUnchanged) {
    auto e = parse_expr("1 + 2", Location::Client);
    auto r = eval_client_context(RtEnv{}, e);
    EXPECT_EQ(pretty(r.residual), pretty(e));
    EXPECT_TRUE(r.client.empty());
    EXPECT_TRUE(r.trace.empty());
}

TEST(EvalClientContext, FragmentReferences) {
    auto env = RtEnv{}.bind(Ident{"x", 0}, Value::ref_val(make_ref(RefKind::FragValue, 0)));
    auto r = eval_client_context(env, parse_expr("~x:fragment + ~x:fragment", Location::Client));
    EXPECT_EQ(pretty(r.residual), "fragment^c $r0 + fragment^c $r0");
}

TEST(EvalClientProgram, Return) {
    auto r = eval_client_program(parse_target_program("let return = 1\n"));
    EXPECT_EQ(show_value(r.value), "1");
    EXPECT_TRUE(r.trace.empty());
}

TEST(EvalClientProgram, FragmentPrint) {
    auto ir = run_program(etml::testing::corpus_program("frag_print"));
    auto r = eval_client_program(ir.client_program);
    EXPECT_EQ(show_value(r.value), "6");
    EXPECT_EQ(render_trace(r.trace), "3");
}

TEST(EvalClientProgram, ClosureCapturesBindEnvironment) {
    auto ir = run_program(etml::testing::corpus_program("frag_closure"));
    auto r = eval_client_program(ir.client_program);
    EXPECT_EQ(show_value(r.value), "6");
}

TEST(EvalMixed, MixedModulesClientProgram) {
    auto ir = run_program(etml::testing::corpus_program("mixed_modules"));
    EXPECT_EQ(pretty(ir.client_program, PrintMode::Target),
              "bind_m $R0 = struct\n"
              "  bind env $R0.f0\n"
              "  bind $r0 = $R0.f0 with 1\n"
              "  let y = 2 + fragment^c $r0\n"
              "end\n"
              "module X = $R0\n"
              "bind_m $R1 = struct\n"
              "  module A = X\n"
              "end\n"
              "module Y = $R1\n"
              "let return = Y.A.y\n");
}

class Goldens : public ::testing::TestWithParam<Golden> {};
TEST_P(Goldens, ValueAndTrace) {
    auto g = GetParam();
    auto r = run_program(etml::testing::corpus_program(g.name));
    EXPECT_EQ(show_value(r.value), g.value);
    EXPECT_EQ(render_trace(r.trace()), g.trace);
}
INSTANTIATE_TEST_SUITE_P(Examples, Goldens, ::testing::ValuesIn(kGoldens),
                         [](const auto& info) { return std::string(info.param.name); });

TEST(RunProgram, BaseDeclarationsRunOnBothSides) {
    auto r = run_program(parse_program("let%base x = print 3\nlet%client return = 0\n"));
    EXPECT_EQ(render_trace(r.server_trace), "3");
    EXPECT_EQ(render_trace(r.client_trace), "3");
    EXPECT_EQ(render_trace(r.trace()), "3; 3");
}

TEST(RunProgram, ClientTracesFollowServerTraces) {
    auto r = run_program(etml::testing::corpus_program("frag_order"));
    Trace joined = r.server_trace;
    joined.insert(joined.end(), r.client_trace.begin(), r.client_trace.end());
    EXPECT_EQ(render_trace(joined), render_trace(r.trace()));
}

TEST(RunProgram, MissingReturn) {
    try {
        run_program(parse_program("let%server a = 1\n"));
        FAIL();
    } catch (const RuntimeError& e) {
        EXPECT_EQ(e.kind, RuntimeError::Kind::MissingReturn);
    }
}

TEST(RunProgram, ClosureInjectionFailsAtRuntime) {
    try {
        run_program(etml::testing::corpus_program("neg_closure_injection"));
        FAIL();
    } catch (const RuntimeError& e) {
        EXPECT_EQ(e.kind, RuntimeError::Kind::NonSerializable);
    }
}

// Property: each base-only program's server and client traces both equal the
// plain ML trace.
TEST(BaseDuplication, TraceIsDoubled) {
    for (auto& src : etml::testing::base_programs()) {
        auto p = parse_program(src);
        auto ml = eval_base(p);
        auto r = run_program(p);
        EXPECT_EQ(render_trace(r.server_trace), render_trace(ml.trace)) << src;
        EXPECT_EQ(render_trace(r.client_trace), render_trace(ml.trace)) << src;
        EXPECT_EQ(show_value(r.value), show_value(ml.value)) << src;
    }
}

// Property: evaluation is deterministic, references included.
class Determinism : public ::testing::TestWithParam<std::string> {};
TEST_P(Determinism, RunTwice) {
    auto p = etml::testing::corpus_program(GetParam());
    auto a = run_program(p), b = run_program(p);
    EXPECT_EQ(show_value(a.value), show_value(b.value));
    EXPECT_EQ(render_trace(a.trace()), render_trace(b.trace()));
    EXPECT_EQ(pretty(a.client_program, PrintMode::Target), pretty(b.client_program, PrintMode::Target));
}
INSTANTIATE_TEST_SUITE_P(Corpus, Determinism, ::testing::ValuesIn(etml::testing::positive_corpus()));

// Property: minted references are never reused.
TEST_P(Determinism, MintedRefsUnique) {
    auto r = run_program(etml::testing::corpus_program(GetParam()));
    std::set<std::string> seen;
    for (auto& m : r.minted) EXPECT_TRUE(seen.insert(m.str()).second) << m.str();
}
