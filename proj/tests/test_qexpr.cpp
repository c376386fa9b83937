#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <pagbound/qexpr.hpp>

#include "support/fixtures.hpp"

using namespace pagbound;

namespace {

MixedGraph names_graph() {
    return parse_graph_text("kind mag\nnode X\nnode Y\nnode Z\nnode W\n");
}

constexpr NodeSet X = ns_bit(0);
constexpr NodeSet Y = ns_bit(1);
constexpr NodeSet Z = ns_bit(2);
constexpr NodeSet W = ns_bit(3);

}  // namespace

TEST_CASE("constructor guards and trivial collapses") {
    CHECK_THROWS_AS(q_term(X, X), DomainError);
    CHECK(q_term(0, Z)->kind == QKind::Const);
    CHECK_THROWS_AS(q_add({q_const(1.0)}, {}), DomainError);
    QExprPtr t = q_term(X);
    CHECK(q_product({t}) == t);
    CHECK(q_sum(0, t) == t);
    CHECK(q_add({t}, {1}) == t);
}

TEST_CASE("free variables") {
    CHECK(free_vars(q_term(Y, X | Z)) == (X | Y | Z));
    CHECK(free_vars(q_sum(Y, q_term(Y, X))) == X);
    CHECK(free_vars(q_unknown(Y | Z, 1)) == (Y | Z));
    CHECK(free_vars(q_const(0.5)) == 0);
}

TEST_CASE("summing a conditional over its subject gives one") {
    QExprPtr s = simplify(q_sum(Y, q_term(Y, Z)));
    CHECK(s->kind == QKind::Const);
    CHECK(s->value == doctest::Approx(1.0));
}

TEST_CASE("summing part of a joint subject marginalizes it away") {
    CHECK(q_equal(simplify(q_sum(Y, q_term(Y | Z))), q_term(Z)));
}

TEST_CASE("sum-independent factors move outside and collapse") {
    QExprPtr e = q_sum(Z, q_product({q_term(X), q_term(Z)}));
    CHECK(q_equal(simplify(e), q_term(X)));
}

TEST_CASE("a bound variable carried by a single factor is eliminated") {
    QExprPtr e = q_sum(Y | Z, q_product({q_term(Y, X), q_term(Z, Y)}));
    QExprPtr s = simplify(e);
    CHECK(s->kind == QKind::Const);
    CHECK(s->value == doctest::Approx(1.0));
}

TEST_CASE("independent blocks of a sum split apart") {
    QExprPtr e = q_sum(Y | Z, q_product({q_term(Y, X), q_term(Z, W)}));
    QExprPtr s = simplify(e);
    CHECK(s->kind == QKind::Const);
    CHECK(s->value == doctest::Approx(1.0));
}

TEST_CASE("a shared-factor chain stays symbolic") {
    QExprPtr e = q_sum(Y, q_product({q_term(Y), q_term(X, Y)}));
    QExprPtr s = simplify(e);
    CHECK(s->kind == QKind::Sum);
    CHECK(free_vars(s) == X);
}

TEST_CASE("a normalized factor summed over its whole scope vanishes") {
    QExprPtr s = simplify(q_sum(Y | Z, q_unknown(Y | Z, 7)));
    CHECK(s->kind == QKind::Const);
    CHECK(s->value == doctest::Approx(1.0));

    QExprPtr kept = simplify(q_sum(Y, q_unknown(Y | Z, 7)));
    CHECK(kept->kind == QKind::Sum);
}

TEST_CASE("opposite-sign structurally equal summands cancel") {
    QExprPtr e = q_add({q_term(X), q_term(Z), q_term(X)}, {1, 1, -1});
    CHECK(q_equal(simplify(e), q_term(Z)));
}

TEST_CASE("nested signed sums flatten and constants fold") {
    QExprPtr inner1 = q_add({q_term(X), q_const(1.0)}, {1, 1});
    QExprPtr inner2 = q_add({q_const(1.0), q_term(Z)}, {1, -1});
    QExprPtr e = q_add({inner1, inner2}, {1, -1});
    CHECK(q_equal(simplify(e), q_add({q_term(X), q_term(Z)}, {1, 1})));
}

TEST_CASE("a joint over a margin becomes a conditional") {
    CHECK(q_equal(simplify(q_quotient(q_term(X | Y), q_term(Y))), q_term(X, Y)));
}

TEST_CASE("shared quotient factors cancel") {
    QExprPtr e = q_quotient(q_product({q_term(X), q_term(Y)}), q_term(Y));
    CHECK(q_equal(simplify(e), q_term(X)));
}

TEST_CASE("a quotient distributes over a signed numerator") {
    QExprPtr num = q_add({q_term(X | Y), q_term(Y)}, {1, -1});
    QExprPtr e = q_quotient(num, q_term(Y));
    CHECK(q_equal(simplify(e), q_add({q_term(X, Y), q_const(1.0)}, {1, -1})));
}

TEST_CASE("max and min drop variables the child never mentions") {
    CHECK(q_equal(simplify(q_max(Z, q_term(X))), q_term(X)));
    QExprPtr narrowed = simplify(q_min(Z | W, q_term(X, Z)));
    REQUIRE(narrowed->kind == QKind::Min);
    CHECK(narrowed->vars == Z);
}

TEST_CASE("canonical form ignores child order") {
    CHECK(q_equal(q_product({q_term(X), q_term(Z)}), q_product({q_term(Z), q_term(X)})));
    CHECK(q_equal(q_add({q_term(X), q_term(Z)}, {-1, 1}),
                  q_add({q_term(Z), q_term(X)}, {1, -1})));
    CHECK_FALSE(q_equal(q_term(X), q_term(Z)));
    CHECK_FALSE(q_equal(q_add({q_term(X), q_term(Z)}, {1, 1}),
                        q_add({q_term(X), q_term(Z)}, {1, -1})));
}

TEST_CASE("printing and parsing round trip") {
    MixedGraph g = names_graph();

    QExprPtr cond = q_term(Y, X | Z);
    CHECK(to_string(cond, g) == "P(y|x,z)");
    CHECK(q_equal(parse_qexpr("P(y|x,z)", g), cond));

    QExprPtr prod = q_product({q_term(Y, X | Z), q_term(Z)});
    CHECK(q_equal(parse_qexpr(to_string(prod, g), g), prod));

    QExprPtr quot = q_quotient(q_term(X), q_term(Y));
    CHECK(to_string(quot, g) == "(P(x))/(P(y))");
    CHECK(q_equal(parse_qexpr("(P(x))/(P(y))", g), quot));

    QExprPtr nested = q_sum(Z, q_product({q_term(Z), q_min(W, q_quotient(q_term(X, Z | W),
                                                                         q_term(Y, W)))}));
    CHECK(q_equal(parse_qexpr(to_string(nested, g), g), nested));

    QExprPtr signed_expr =
        q_add({q_product({q_term(X), q_term(Y)}), q_term(X | Y), q_const(1.0)}, {1, -1, 1});
    CHECK(q_equal(parse_qexpr(to_string(signed_expr, g), g), signed_expr));

    CHECK(to_string(q_unknown(X | Y, 3), g) == "Q[x,y]");

    CHECK_THROWS_AS(parse_qexpr("P(nope)", g), DomainError);
    CHECK_THROWS_AS(parse_qexpr("P(x))", g), DomainError);
    CHECK_THROWS_AS(parse_qexpr("", g), DomainError);
}

TEST_CASE("unknown bookkeeping") {
    QExprPtr e = q_product({q_unknown(Z, 3), q_term(X)});
    CHECK(contains_unknown(e));
    CHECK(collect_unknowns(e).size() == 1);
    CHECK(collect_unknowns(e)[0]->tag == 3);

    QExprPtr swapped = substitute_unknown(e, 3, q_term(Z));
    CHECK_FALSE(contains_unknown(swapped));
    CHECK(q_equal(swapped, q_product({q_term(Z), q_term(X)})));

    CHECK(substitute_unknown(e, 9, q_term(Z)) == e);
}

TEST_CASE("evaluation matches hand arithmetic") {
    MixedGraph g = names_graph();
    DiscreteDistribution d({{"x", 2}, {"y", 2}}, {0.1, 0.2, 0.3, 0.4});
    std::vector<int> vals{0, 0, -1, -1};

    CHECK(evaluate(q_term(X), d, g, vals) == doctest::Approx(0.3));
    CHECK(evaluate(q_term(Y, X), d, g, vals) == doctest::Approx(0.1 / 0.3));
    CHECK(evaluate(q_term(X | Y), d, g, vals) == doctest::Approx(0.1));

    CHECK(evaluate(q_sum(Y, q_term(X | Y)), d, g, vals) == doctest::Approx(0.3));
    CHECK(evaluate(q_sum(Y, q_term(X)), d, g, vals) == doctest::Approx(0.6));
    CHECK(evaluate(q_max(Y, q_term(Y, X)), d, g, vals) == doctest::Approx(0.2 / 0.3));
    CHECK(evaluate(q_min(X, q_term(X)), d, g, vals) == doctest::Approx(0.3));

    QExprPtr signed_expr = q_add({q_term(X), q_term(Y), q_const(0.25)}, {1, -1, 1});
    CHECK(evaluate(signed_expr, d, g, vals) == doctest::Approx(0.3 - 0.4 + 0.25));
}

TEST_CASE("evaluation failure modes") {
    MixedGraph g = names_graph();
    DiscreteDistribution d({{"x", 2}, {"y", 2}}, {0.5, 0.5, 0.0, 0.0});
    std::vector<int> vals{1, 0, -1, -1};

    CHECK(evaluate(q_term(Y, X), d, g, vals) == doctest::Approx(0.0));
    CHECK(evaluate(q_quotient(q_term(X), q_term(X)), d, g, vals) == doctest::Approx(0.0));
    CHECK_THROWS_AS(evaluate(q_quotient(q_const(1.0), q_const(0.0)), d, g, vals), DivideByZero);
    CHECK_THROWS_AS(evaluate(q_unknown(X, 1), d, g, vals), LeafUnresolved);

    std::vector<int> unset{-1, -1, -1, -1};
    CHECK_THROWS_AS(evaluate(q_term(X), d, g, unset), UnboundVariable);
    std::vector<int> ok{0, 0, -1, -1};
    CHECK_THROWS_AS(evaluate(q_sum(W, q_term(X)), d, g, ok), UnboundVariable);
}

TEST_CASE("simplify and canonicalize preserve value") {
    MixedGraph g = names_graph();
    std::vector<QExprPtr> exprs{
        q_sum(Y | Z, q_product({q_term(Y, X), q_term(Z, Y)})),
        q_sum(Y, q_product({q_term(Y), q_term(X, Y)})),
        q_sum(Z, q_product({q_term(X), q_term(Z)})),
        q_sum(Y, q_term(Z)),
        q_quotient(q_term(X | Y), q_term(Y)),
        q_quotient(q_add({q_term(X | Y), q_term(Y)}, {1, -1}), q_term(Y)),
        q_add({q_term(X), q_term(Z), q_term(X)}, {1, 1, -1}),
        q_max(Y, q_quotient(q_term(X | Y), q_term(Y))),
        q_product({q_term(X, Z), q_min(W, q_term(Y, W))}),
    };
    for (unsigned seed = 0; seed < 20; ++seed) {
        DiscreteDistribution d =
            testsupport::random_table({{"x", 2}, {"y", 2}, {"z", 2}, {"w", 2}}, seed);
        std::vector<int> vals{0, 1, 0, 1};
        for (const QExprPtr& e : exprs) {
            const double base = evaluate(e, d, g, vals);
            CHECK(evaluate(simplify(e), d, g, vals) == doctest::Approx(base).epsilon(1e-12));
            CHECK(evaluate(canonicalize(e), d, g, vals) == doctest::Approx(base).epsilon(1e-12));
        }
    }
}
