#include "pagbound/qexpr.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

namespace pagbound {

namespace {

QExprPtr make(QExpr node) { return std::make_shared<const QExpr>(std::move(node)); }

bool is_const(const QExprPtr& e, double v) {
    return e->kind == QKind::Const && e->value == v;
}

// total structural order for canonical child sorting
int q_compare(const QExprPtr& a, const QExprPtr& b) {
    if (a->kind != b->kind) return a->kind < b->kind ? -1 : 1;
    if (a->vars != b->vars) return a->vars < b->vars ? -1 : 1;
    if (a->given != b->given) return a->given < b->given ? -1 : 1;
    if (a->kind == QKind::Const && a->value != b->value) return a->value < b->value ? -1 : 1;
    if (a->tag != b->tag) return a->tag < b->tag ? -1 : 1;
    if (a->kids.size() != b->kids.size()) return a->kids.size() < b->kids.size() ? -1 : 1;
    for (size_t i = 0; i < a->kids.size(); ++i) {
        const int c = q_compare(a->kids[i], b->kids[i]);
        if (c != 0) return c;
    }
    if (a->signs != b->signs) return a->signs < b->signs ? -1 : 1;
    return 0;
}

}  // namespace

QExprPtr q_term(NodeSet vars, NodeSet given) {
    if (vars & given) throw DomainError("term subject overlaps its conditioning set");
    if (!vars) return q_const(1.0);
    QExpr e;
    e.kind = QKind::Term;
    e.vars = vars;
    e.given = given;
    return make(std::move(e));
}

QExprPtr q_const(double v) {
    QExpr e;
    e.kind = QKind::Const;
    e.value = v;
    return make(std::move(e));
}

QExprPtr q_sum(NodeSet vars, QExprPtr child) {
    if (!vars) return child;
    QExpr e;
    e.kind = QKind::Sum;
    e.vars = vars;
    e.kids = {std::move(child)};
    return make(std::move(e));
}

QExprPtr q_product(std::vector<QExprPtr> kids) {
    if (kids.empty()) return q_const(1.0);
    if (kids.size() == 1) return kids[0];
    QExpr e;
    e.kind = QKind::Product;
    e.kids = std::move(kids);
    return make(std::move(e));
}

QExprPtr q_quotient(QExprPtr num, QExprPtr den) {
    QExpr e;
    e.kind = QKind::Quotient;
    e.kids = {std::move(num), std::move(den)};
    return make(std::move(e));
}

QExprPtr q_max(NodeSet vars, QExprPtr child) {
    if (!vars) return child;
    QExpr e;
    e.kind = QKind::Max;
    e.vars = vars;
    e.kids = {std::move(child)};
    return make(std::move(e));
}

QExprPtr q_min(NodeSet vars, QExprPtr child) {
    if (!vars) return child;
    QExpr e;
    e.kind = QKind::Min;
    e.vars = vars;
    e.kids = {std::move(child)};
    return make(std::move(e));
}

QExprPtr q_add(std::vector<QExprPtr> kids, std::vector<int> signs) {
    if (kids.size() != signs.size()) throw DomainError("signed sum arity mismatch");
    if (kids.empty()) return q_const(0.0);
    if (kids.size() == 1 && signs[0] > 0) return kids[0];
    QExpr e;
    e.kind = QKind::Add;
    e.kids = std::move(kids);
    e.signs = std::move(signs);
    return make(std::move(e));
}

QExprPtr q_unknown(NodeSet scope, int tag) {
    QExpr e;
    e.kind = QKind::Unknown;
    e.vars = scope;
    e.tag = tag;
    return make(std::move(e));
}

NodeSet free_vars(const QExprPtr& e) {
    switch (e->kind) {
        case QKind::Term:
            return e->vars | e->given;
        case QKind::Const:
            return 0;
        case QKind::Unknown:
            return e->vars;
        case QKind::Sum:
        case QKind::Max:
        case QKind::Min:
            return free_vars(e->kids[0]) & ~e->vars;
        default: {
            NodeSet out = 0;
            for (const QExprPtr& k : e->kids) out |= free_vars(k);
            return out;
        }
    }
}

bool contains_unknown(const QExprPtr& e) {
    if (e->kind == QKind::Unknown) return true;
    for (const QExprPtr& k : e->kids) {
        if (contains_unknown(k)) return true;
    }
    return false;
}

std::vector<QExprPtr> collect_unknowns(const QExprPtr& e) {
    std::vector<QExprPtr> out;
    if (e->kind == QKind::Unknown) out.push_back(e);
    for (const QExprPtr& k : e->kids) {
        for (QExprPtr& u : collect_unknowns(k)) out.push_back(std::move(u));
    }
    return out;
}

QExprPtr substitute_unknown(const QExprPtr& e, int tag, const QExprPtr& replacement) {
    if (e->kind == QKind::Unknown && e->tag == tag) return replacement;
    if (e->kids.empty()) return e;
    QExpr copy = *e;
    bool changed = false;
    for (QExprPtr& k : copy.kids) {
        QExprPtr nk = substitute_unknown(k, tag, replacement);
        if (nk != k) {
            k = std::move(nk);
            changed = true;
        }
    }
    return changed ? make(std::move(copy)) : e;
}

namespace {

std::vector<QExprPtr> product_factors(const QExprPtr& e) {
    if (e->kind == QKind::Product) return e->kids;
    return {e};
}

QExprPtr simplify_once(const QExprPtr& e);

QExprPtr simplify_product(std::vector<QExprPtr> kids) {
    std::vector<QExprPtr> flat;
    double c = 1.0;
    for (QExprPtr& k : kids) {
        if (k->kind == QKind::Product) {
            for (const QExprPtr& kk : k->kids) flat.push_back(kk);
        } else if (k->kind == QKind::Const) {
            c *= k->value;
        } else {
            flat.push_back(std::move(k));
        }
    }
    if (c == 0.0) return q_const(0.0);
    if (c != 1.0) flat.push_back(q_const(c));
    return q_product(std::move(flat));
}

QExprPtr simplify_add(std::vector<QExprPtr> kids, std::vector<int> signs) {
    std::vector<QExprPtr> flat;
    std::vector<int> fsigns;
    double c = 0.0;
    for (size_t i = 0; i < kids.size(); ++i) {
        if (kids[i]->kind == QKind::Add) {
            for (size_t j = 0; j < kids[i]->kids.size(); ++j) {
                flat.push_back(kids[i]->kids[j]);
                fsigns.push_back(signs[i] * kids[i]->signs[j]);
            }
        } else if (kids[i]->kind == QKind::Const) {
            c += signs[i] * kids[i]->value;
        } else {
            flat.push_back(std::move(kids[i]));
            fsigns.push_back(signs[i]);
        }
    }
    for (size_t i = 0; i < flat.size(); ++i) {
        if (!flat[i]) continue;
        for (size_t j = i + 1; j < flat.size(); ++j) {
            if (!flat[j] || fsigns[i] == fsigns[j]) continue;
            if (q_compare(flat[i], flat[j]) != 0) continue;
            flat[i].reset();
            flat[j].reset();
            break;
        }
    }
    std::vector<QExprPtr> kept;
    std::vector<int> ksigns;
    for (size_t i = 0; i < flat.size(); ++i) {
        if (!flat[i]) continue;
        kept.push_back(std::move(flat[i]));
        ksigns.push_back(fsigns[i]);
    }
    if (c != 0.0 || kept.empty()) {
        kept.push_back(q_const(std::abs(c)));
        ksigns.push_back(c < 0.0 ? -1 : 1);
    }
    return q_add(std::move(kept), std::move(ksigns));
}

QExprPtr simplify_sum(NodeSet bound, const QExprPtr& child) {
    if (!bound) return child;
    // distribute over signed sums
    if (child->kind == QKind::Add) {
        std::vector<QExprPtr> kids;
        for (const QExprPtr& k : child->kids) kids.push_back(simplify_once(q_sum(bound, k)));
        return simplify_once(q_add(std::move(kids), child->signs));
    }
    if (child->kind == QKind::Sum) return simplify_sum(bound | child->vars, child->kids[0]);
    if (child->kind == QKind::Product) {
        // pull out factors that do not mention the bound variables
        std::vector<QExprPtr> inside, outside;
        for (const QExprPtr& k : child->kids) {
            if (free_vars(k) & bound)
                inside.push_back(k);
            else
                outside.push_back(k);
        }
        if (!outside.empty()) {
            outside.push_back(simplify_once(q_sum(bound, simplify_product(std::move(inside)))));
            return simplify_once(simplify_product(std::move(outside)));
        }
        // eliminate a bound variable that only one factor carries in its subject
        for (size_t i = 0; i < inside.size(); ++i) {
            const QExprPtr& f = inside[i];
            NodeSet candidates = 0;
            if (f->kind == QKind::Term) candidates = f->vars & bound;
            if (f->kind == QKind::Unknown && ns_subset(f->vars, bound)) candidates = f->vars;
            while (candidates) {
                const int v = ns_first(candidates);
                candidates &= candidates - 1;
                bool elsewhere = false;
                for (size_t j = 0; j < inside.size(); ++j) {
                    if (j != i && ns_has(free_vars(inside[j]), v)) elsewhere = true;
                }
                if (elsewhere) continue;
                std::vector<QExprPtr> rest;
                for (size_t j = 0; j < inside.size(); ++j) {
                    if (j != i) rest.push_back(inside[j]);
                }
                if (f->kind == QKind::Term) {
                    rest.push_back(q_term(f->vars & ~ns_bit(v), f->given));
                    return simplify_once(
                        q_sum(bound & ~ns_bit(v), simplify_product(std::move(rest))));
                }
                // a normalized factor whose whole scope is summed, touched by
                // no other factor
                bool scope_private = true;
                NodeSet scope = f->vars;
                for (size_t j = 0; j < inside.size(); ++j) {
                    if (j != i && (free_vars(inside[j]) & scope)) scope_private = false;
                }
                if (!scope_private) continue;
                return simplify_once(
                    q_sum(bound & ~scope, simplify_product(std::move(rest))));
            }
        }
        // split into blocks that share no bound variable
        const size_t m = inside.size();
        if (m > 1) {
            std::vector<int> group(m, -1);
            int groups = 0;
            for (size_t i = 0; i < m; ++i) {
                if (group[i] >= 0) continue;
                group[i] = groups;
                NodeSet touched = free_vars(inside[i]) & bound;
                bool grew = true;
                while (grew) {
                    grew = false;
                    for (size_t j = 0; j < m; ++j) {
                        if (group[j] >= 0) continue;
                        if (free_vars(inside[j]) & touched) {
                            group[j] = groups;
                            touched |= free_vars(inside[j]) & bound;
                            grew = true;
                        }
                    }
                }
                ++groups;
            }
            if (groups > 1) {
                std::vector<QExprPtr> parts;
                for (int gi = 0; gi < groups; ++gi) {
                    std::vector<QExprPtr> block;
                    NodeSet block_bound = 0;
                    for (size_t i = 0; i < m; ++i) {
                        if (group[i] == gi) {
                            block_bound |= free_vars(inside[i]) & bound;
                            block.push_back(inside[i]);
                        }
                    }
                    parts.push_back(
                        simplify_once(q_sum(block_bound, simplify_product(std::move(block)))));
                }
                return simplify_once(simplify_product(std::move(parts)));
            }
        }
    }
    if (child->kind == QKind::Term) {
        const NodeSet summed = child->vars & bound;
        if (summed && !(child->given & bound)) {
            // sum over part of the subject marginalizes it away
            const QExprPtr rest = q_term(child->vars & ~summed, child->given);
            return simplify_once(q_sum(bound & ~summed, rest));
        }
    }
    if (child->kind == QKind::Unknown && ns_subset(child->vars, bound)) {
        // a normalized factor summed over its whole scope
        return simplify_once(q_sum(bound & ~child->vars, q_const(1.0)));
    }
    if (child->kind == QKind::Const && child->value == 0.0) return child;
    return q_sum(bound, child);
}

QExprPtr simplify_quotient(const QExprPtr& num, const QExprPtr& den) {
    if (is_const(den, 1.0)) return num;
    if (q_compare(num, den) == 0) return q_const(1.0);
    if (is_const(num, 0.0)) return num;
    if (num->kind == QKind::Add) {
        // distribute over a signed sum so each part can reduce on its own
        std::vector<QExprPtr> kids;
        for (const QExprPtr& k : num->kids) kids.push_back(simplify_once(q_quotient(k, den)));
        return simplify_once(q_add(std::move(kids), num->signs));
    }
    if (num->kind == QKind::Term && den->kind == QKind::Term && num->given == den->given &&
        ns_subset(den->vars, num->vars)) {
        // joint over margin with a shared conditioning set
        return q_term(num->vars & ~den->vars, num->given | den->vars);
    }
    // cancel structurally equal factors
    std::vector<QExprPtr> nf = product_factors(num);
    std::vector<QExprPtr> df = product_factors(den);
    bool cancelled = false;
    for (size_t i = 0; i < nf.size(); ++i) {
        for (size_t j = 0; j < df.size(); ++j) {
            if (nf[i] && df[j] && q_compare(nf[i], df[j]) == 0) {
                nf[i].reset();
                df[j].reset();
                cancelled = true;
            }
        }
    }
    if (cancelled) {
        std::vector<QExprPtr> nk, dk;
        for (QExprPtr& f : nf) {
            if (f) nk.push_back(std::move(f));
        }
        for (QExprPtr& f : df) {
            if (f) dk.push_back(std::move(f));
        }
        const QExprPtr n2 = simplify_once(simplify_product(std::move(nk)));
        const QExprPtr d2 = simplify_once(simplify_product(std::move(dk)));
        return simplify_quotient(n2, d2);
    }
    // pairwise joint/margin cancellation inside products
    if (den->kind != QKind::Const) {
        std::vector<QExprPtr> nf2 = product_factors(num);
        std::vector<QExprPtr> df2 = product_factors(den);
        for (size_t i = 0; i < nf2.size(); ++i) {
            for (size_t j = 0; j < df2.size(); ++j) {
                const QExprPtr& a = nf2[i];
                const QExprPtr& b = df2[j];
                if (a->kind == QKind::Term && b->kind == QKind::Term && a->given == b->given &&
                    ns_subset(b->vars, a->vars) && (nf2.size() > 1 || df2.size() > 1)) {
                    nf2[i] = q_term(a->vars & ~b->vars, a->given | b->vars);
                    df2.erase(df2.begin() + static_cast<long>(j));
                    const QExprPtr n2 = simplify_once(simplify_product(std::move(nf2)));
                    const QExprPtr d2 = simplify_once(simplify_product(std::move(df2)));
                    return simplify_quotient(n2, d2);
                }
            }
        }
    }
    return q_quotient(num, den);
}

QExprPtr simplify_once(const QExprPtr& e) {
    switch (e->kind) {
        case QKind::Term:
        case QKind::Const:
        case QKind::Unknown:
            return e;
        case QKind::Sum:
            return simplify_sum(e->vars, simplify_once(e->kids[0]));
        case QKind::Max:
        case QKind::Min: {
            const QExprPtr child = simplify_once(e->kids[0]);
            const NodeSet effective = e->vars & free_vars(child);
            if (!effective) return child;
            QExpr out;
            out.kind = e->kind;
            out.vars = effective;
            out.kids = {child};
            return make(std::move(out));
        }
        case QKind::Product: {
            std::vector<QExprPtr> kids;
            for (const QExprPtr& k : e->kids) kids.push_back(simplify_once(k));
            return simplify_product(std::move(kids));
        }
        case QKind::Add: {
            std::vector<QExprPtr> kids;
            for (const QExprPtr& k : e->kids) kids.push_back(simplify_once(k));
            return simplify_add(std::move(kids), e->signs);
        }
        case QKind::Quotient:
            return simplify_quotient(simplify_once(e->kids[0]), simplify_once(e->kids[1]));
    }
    return e;
}

}  // namespace

QExprPtr simplify(const QExprPtr& e) {
    QExprPtr cur = e;
    for (int round = 0; round < 16; ++round) {
        QExprPtr next = simplify_once(cur);
        if (q_compare(next, cur) == 0) return next;
        cur = next;
    }
    return cur;
}

QExprPtr canonicalize(const QExprPtr& e) {
    const QExprPtr s = simplify(e);
    struct Rec {
        static QExprPtr run(const QExprPtr& n) {
            if (n->kids.empty()) return n;
            QExpr copy = *n;
            for (QExprPtr& k : copy.kids) k = run(k);
            if (n->kind == QKind::Product) {
                std::sort(copy.kids.begin(), copy.kids.end(),
                          [](const QExprPtr& a, const QExprPtr& b) { return q_compare(a, b) < 0; });
            }
            if (n->kind == QKind::Add) {
                std::vector<size_t> idx(copy.kids.size());
                for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
                std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) {
                    const int c = q_compare(copy.kids[a], copy.kids[b]);
                    if (c != 0) return c < 0;
                    return copy.signs[a] > copy.signs[b];
                });
                std::vector<QExprPtr> kids;
                std::vector<int> signs;
                for (size_t i : idx) {
                    kids.push_back(copy.kids[i]);
                    signs.push_back(copy.signs[i]);
                }
                copy.kids = std::move(kids);
                copy.signs = std::move(signs);
            }
            return make(std::move(copy));
        }
    };
    return Rec::run(s);
}

bool q_equal(const QExprPtr& a, const QExprPtr& b) {
    return q_compare(canonicalize(a), canonicalize(b)) == 0;
}

namespace {

std::string lower_name(const MixedGraph& g, int id) {
    std::string s = g.node_name(id);
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::string name_list(const MixedGraph& g, NodeSet s) {
    std::string out;
    bool first = true;
    ns_for_each(s, [&](int i) {
        if (!first) out += ",";
        out += lower_name(g, i);
        first = false;
    });
    return out;
}

std::string const_str(double v) {
    if (v == std::floor(v) && std::abs(v) < 1e9) {
        return std::to_string(static_cast<long long>(v));
    }
    std::ostringstream os;
    os << v;
    return os.str();
}

bool atomic_for_product(const QExprPtr& e) {
    return e->kind == QKind::Term || e->kind == QKind::Const || e->kind == QKind::Unknown ||
           e->kind == QKind::Sum || e->kind == QKind::Max || e->kind == QKind::Min ||
           e->kind == QKind::Quotient;
}

}  // namespace

std::string to_string(const QExprPtr& e, const MixedGraph& g) {
    switch (e->kind) {
        case QKind::Term: {
            std::string out = "P(" + name_list(g, e->vars);
            if (e->given) out += "|" + name_list(g, e->given);
            return out + ")";
        }
        case QKind::Const:
            return const_str(e->value);
        case QKind::Unknown:
            return "Q[" + name_list(g, e->vars) + "]";
        case QKind::Sum:
            return "sum_{" + name_list(g, e->vars) + "}(" + to_string(e->kids[0], g) + ")";
        case QKind::Max:
            return "max_{" + name_list(g, e->vars) + "}(" + to_string(e->kids[0], g) + ")";
        case QKind::Min:
            return "min_{" + name_list(g, e->vars) + "}(" + to_string(e->kids[0], g) + ")";
        case QKind::Product: {
            std::string out;
            for (const QExprPtr& k : e->kids) {
                if (atomic_for_product(k))
                    out += to_string(k, g);
                else
                    out += "(" + to_string(k, g) + ")";
            }
            return out;
        }
        case QKind::Quotient:
            return "(" + to_string(e->kids[0], g) + ")/(" + to_string(e->kids[1], g) + ")";
        case QKind::Add: {
            std::string out;
            for (size_t i = 0; i < e->kids.size(); ++i) {
                const bool neg = e->signs[i] < 0;
                if (i == 0) {
                    if (neg) out += "-";
                } else {
                    out += neg ? "-" : "+";
                }
                const QExprPtr& k = e->kids[i];
                if (k->kind == QKind::Add)
                    out += "(" + to_string(k, g) + ")";
                else if (atomic_for_product(k) || k->kind == QKind::Product)
                    out += to_string(k, g);
                else
                    out += "(" + to_string(k, g) + ")";
            }
            return out;
        }
    }
    return "?";
}

namespace {

struct Parser {
    const std::string& text;
    const MixedGraph& g;
    size_t pos = 0;

    explicit Parser(const std::string& t, const MixedGraph& gr) : text(t), g(gr) {}

    void skip_ws() {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    }
    bool eat(char c) {
        skip_ws();
        if (pos < text.size() && text[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }
    bool peek(char c) {
        skip_ws();
        return pos < text.size() && text[pos] == c;
    }
    bool eat_word(const std::string& w) {
        skip_ws();
        if (text.compare(pos, w.size(), w) == 0) {
            pos += w.size();
            return true;
        }
        return false;
    }
    [[noreturn]] void fail(const std::string& why) {
        throw DomainError("expression parse error at offset " + std::to_string(pos) + ": " + why);
    }

    NodeSet name_set() {
        NodeSet out = 0;
        for (;;) {
            skip_ws();
            std::string name;
            while (pos < text.size() &&
                   (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_' ||
                    text[pos] == '.')) {
                name += text[pos++];
            }
            if (name.empty()) fail("expected a variable name");
            int id = -1;
            for (int i = 0; i < g.node_count(); ++i) {
                std::string cand = g.node_name(i);
                std::transform(cand.begin(), cand.end(), cand.begin(), [](unsigned char c) {
                    return static_cast<char>(std::tolower(c));
                });
                std::string want = name;
                std::transform(want.begin(), want.end(), want.begin(), [](unsigned char c) {
                    return static_cast<char>(std::tolower(c));
                });
                if (cand == want) {
                    id = i;
                    break;
                }
            }
            if (id < 0) fail("unknown variable '" + name + "'");
            out |= ns_bit(id);
            if (!eat(',')) return out;
        }
    }

    QExprPtr parse_factor() {
        skip_ws();
        if (eat_word("P(")) {
            const NodeSet vars = name_set();
            NodeSet given = 0;
            if (eat('|')) given = name_set();
            if (!eat(')')) fail("expected ')'");
            return q_term(vars, given);
        }
        for (const auto& [word, kind] : {std::pair<const char*, QKind>{"sum_{", QKind::Sum},
                                         {"max_{", QKind::Max},
                                         {"min_{", QKind::Min}}) {
            if (eat_word(word)) {
                const NodeSet vars = name_set();
                if (!eat('}')) fail("expected '}'");
                if (!eat('(')) fail("expected '('");
                QExprPtr child = parse_expr();
                if (!eat(')')) fail("expected ')'");
                if (kind == QKind::Sum) return q_sum(vars, std::move(child));
                if (kind == QKind::Max) return q_max(vars, std::move(child));
                return q_min(vars, std::move(child));
            }
        }
        if (eat('(')) {
            QExprPtr inner = parse_expr();
            if (!eat(')')) fail("expected ')'");
            if (eat('/')) {
                if (!eat('(')) fail("expected '(' after '/'");
                QExprPtr den = parse_expr();
                if (!eat(')')) fail("expected ')'");
                return q_quotient(std::move(inner), std::move(den));
            }
            return inner;
        }
        skip_ws();
        size_t start = pos;
        while (pos < text.size() &&
               (std::isdigit(static_cast<unsigned char>(text[pos])) || text[pos] == '.')) {
            ++pos;
        }
        if (pos > start) return q_const(std::stod(text.substr(start, pos - start)));
        fail("expected a factor");
    }

    QExprPtr parse_term() {
        std::vector<QExprPtr> factors;
        factors.push_back(parse_factor());
        for (;;) {
            skip_ws();
            if (pos >= text.size()) break;
            const char c = text[pos];
            if (c == 'P' || c == '(' || c == 's' || c == 'm' ||
                std::isdigit(static_cast<unsigned char>(c))) {
                factors.push_back(parse_factor());
            } else {
                break;
            }
        }
        return q_product(std::move(factors));
    }

    QExprPtr parse_expr() {
        std::vector<QExprPtr> kids;
        std::vector<int> signs;
        skip_ws();
        int sign = 1;
        if (eat('-')) sign = -1;
        kids.push_back(parse_term());
        signs.push_back(sign);
        for (;;) {
            skip_ws();
            if (eat('+'))
                sign = 1;
            else if (eat('-'))
                sign = -1;
            else
                break;
            kids.push_back(parse_term());
            signs.push_back(sign);
        }
        if (kids.size() == 1 && signs[0] > 0) return kids[0];
        return q_add(std::move(kids), std::move(signs));
    }
};

}  // namespace

QExprPtr parse_qexpr(const std::string& text, const MixedGraph& g) {
    Parser p(text, g);
    QExprPtr out = p.parse_expr();
    p.skip_ws();
    if (p.pos != text.size()) p.fail("trailing input");
    return out;
}

namespace {

struct Binding {
    std::vector<int> node_to_var;  // -1 when the node has no table column
    std::vector<int> card;
};

Binding make_binding(const DiscreteDistribution& d, const MixedGraph& g) {
    Binding b;
    b.node_to_var.resize(static_cast<size_t>(g.node_count()), -1);
    b.card.resize(static_cast<size_t>(g.node_count()), 0);
    for (int i = 0; i < g.node_count(); ++i) {
        const int vi = d.variable_index(g.node_name(i));
        b.node_to_var[static_cast<size_t>(i)] = vi;
        if (vi >= 0) b.card[static_cast<size_t>(i)] = d.card(vi);
    }
    return b;
}

double eval_rec(const QExprPtr& e, const DiscreteDistribution& d, const MixedGraph& g,
                const Binding& b, std::vector<int>& values) {
    switch (e->kind) {
        case QKind::Const:
            return e->value;
        case QKind::Unknown:
            throw LeafUnresolved("evaluation reached an unresolved factor over " +
                                 g.describe_set(e->vars));
        case QKind::Term: {
            std::vector<int> pinned(static_cast<size_t>(d.variable_count()), -1);
            NodeSet need = e->vars | e->given;
            bool unbound = false;
            std::string missing;
            ns_for_each(need, [&](int node) {
                const int vi = b.node_to_var[static_cast<size_t>(node)];
                if (vi < 0) {
                    unbound = true;
                    missing = g.node_name(node);
                    return;
                }
                if (values[static_cast<size_t>(node)] < 0) {
                    unbound = true;
                    missing = g.node_name(node);
                    return;
                }
            });
            if (unbound) throw UnboundVariable("no value bound for '" + missing + "'");
            ns_for_each(e->given, [&](int node) {
                pinned[static_cast<size_t>(b.node_to_var[static_cast<size_t>(node)])] =
                    values[static_cast<size_t>(node)];
            });
            const double den = e->given ? d.partial_sum(pinned) : 1.0;
            ns_for_each(e->vars, [&](int node) {
                pinned[static_cast<size_t>(b.node_to_var[static_cast<size_t>(node)])] =
                    values[static_cast<size_t>(node)];
            });
            double num = d.partial_sum(pinned);
            if (!e->given) {
                double total = 0.0;
                for (double p : d.table()) total += p;
                num /= total;
                return num;
            }
            if (den <= 0.0) return 0.0;  // conditional on a zero-probability event
            return num / den;
        }
        case QKind::Sum:
        case QKind::Max:
        case QKind::Min: {
            std::vector<int> nodes;
            ns_for_each(e->vars, [&](int n) { nodes.push_back(n); });
            for (int n : nodes) {
                if (b.node_to_var[static_cast<size_t>(n)] < 0)
                    throw UnboundVariable("no table column for '" + g.node_name(n) + "'");
            }
            double acc = e->kind == QKind::Sum ? 0.0
                         : e->kind == QKind::Max ? -1.0e300
                                                 : 1.0e300;
            std::vector<int> saved;
            for (int n : nodes) saved.push_back(values[static_cast<size_t>(n)]);
            std::vector<int> counter(nodes.size(), 0);
            for (;;) {
                for (size_t i = 0; i < nodes.size(); ++i)
                    values[static_cast<size_t>(nodes[i])] = counter[i];
                const double v = eval_rec(e->kids[0], d, g, b, values);
                if (e->kind == QKind::Sum)
                    acc += v;
                else if (e->kind == QKind::Max)
                    acc = std::max(acc, v);
                else
                    acc = std::min(acc, v);
                size_t k = nodes.size();
                while (k-- > 0) {
                    if (++counter[k] < b.card[static_cast<size_t>(nodes[k])]) break;
                    counter[k] = 0;
                }
                if (k == static_cast<size_t>(-1)) break;
            }
            for (size_t i = 0; i < nodes.size(); ++i)
                values[static_cast<size_t>(nodes[i])] = saved[i];
            return acc;
        }
        case QKind::Product: {
            double out = 1.0;
            for (const QExprPtr& k : e->kids) out *= eval_rec(k, d, g, b, values);
            return out;
        }
        case QKind::Quotient: {
            const double den = eval_rec(e->kids[1], d, g, b, values);
            const double num = eval_rec(e->kids[0], d, g, b, values);
            if (den == 0.0) {
                if (num == 0.0) return 0.0;
                throw DivideByZero("expression quotient with a zero denominator");
            }
            return num / den;
        }
        case QKind::Add: {
            double out = 0.0;
            for (size_t i = 0; i < e->kids.size(); ++i)
                out += e->signs[i] * eval_rec(e->kids[i], d, g, b, values);
            return out;
        }
    }
    throw Error("unreachable expression kind");
}

}  // namespace

double evaluate(const QExprPtr& e, const DiscreteDistribution& d, const MixedGraph& g,
                std::vector<int>& values) {
    if (values.size() != static_cast<size_t>(g.node_count()))
        throw DomainError("evaluation context arity mismatch");
    const Binding b = make_binding(d, g);
    return eval_rec(e, d, g, b, values);
}

double evaluate(const QExprPtr& e, const DiscreteDistribution& d, const MixedGraph& g,
                const std::vector<int>& values) {
    std::vector<int> copy = values;
    return evaluate(e, d, g, copy);
}

}  // namespace pagbound
