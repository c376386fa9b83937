#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <pagbound/bound.hpp>
#include <pagbound/enumerate.hpp>
#include <pagbound/oracle.hpp>

using namespace pagbound;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitParse = 1;
constexpr int kExitQuery = 2;
constexpr int kExitIdentified = 3;
constexpr int kExitNotIdentified = 4;
constexpr int kExitViolation = 5;

struct QueryError : Error {
    explicit QueryError(const std::string& m) : Error(m) {}
};

int worker_cap() {
    unsigned n = std::thread::hardware_concurrency();
    if (n == 0) n = 1;
    if (const char* env = std::getenv("PAGBOUND_THREADS")) {
        long v = std::atol(env);
        if (v >= 1 && static_cast<unsigned long>(v) < n) n = static_cast<unsigned>(v);
    }
    return static_cast<int>(n);
}

// "A=1,B=0" (or several comma-joined flags) into an assignment on g.  Bare
// names are accepted when `allow_bare` is set; they select the node and leave
// its value unset.
Assignment parse_assignment(const MixedGraph& g, const std::vector<std::string>& specs,
                            bool allow_bare = false) {
    Assignment a = Assignment::empty(g);
    for (const std::string& spec : specs) {
        size_t start = 0;
        while (start < spec.size()) {
            size_t comma = spec.find(',', start);
            size_t end = comma == std::string::npos ? spec.size() : comma;
            std::string item = spec.substr(start, end - start);
            start = end + 1;
            if (item.empty()) continue;
            size_t eq = item.find('=');
            int node = -1;
            int value = -1;
            if (eq == std::string::npos) {
                if (!allow_bare)
                    throw QueryError("expected NAME=VALUE, got '" + item + "'");
                node = g.node_id(item);
            } else {
                if (eq == 0 || eq + 1 == item.size())
                    throw QueryError("expected NAME=VALUE, got '" + item + "'");
                node = g.node_id(item.substr(0, eq));
                size_t used = 0;
                value = std::stoi(item.substr(eq + 1), &used);
                if (used != item.size() - eq - 1 || value < 0)
                    throw QueryError("value for '" + g.node_name(node) +
                                     "' must be a nonnegative integer");
            }
            if (a.vars & ns_bit(node))
                throw QueryError("node '" + g.node_name(node) + "' assigned twice");
            a.set(node, value);
        }
    }
    return a;
}

void check_disjoint(const MixedGraph& g, const Assignment& a, const Assignment& b,
                    const char* what) {
    if (NodeSet both = a.vars & b.vars)
        throw QueryError(std::string(what) + " overlap at " + g.describe_set(both));
}

// Every queried node must name a table column wide enough for its value.
void check_against_table(const MixedGraph& g, const DiscreteDistribution& d,
                         const Assignment& a) {
    for (int v = 0; v < g.node_count(); ++v) {
        if (!(a.vars & ns_bit(v))) continue;
        int col = d.variable_index(g.node_name(v));
        if (col < 0)
            throw QueryError("node '" + g.node_name(v) + "' has no column in the table");
        if (a.values[static_cast<size_t>(v)] >= d.variables()[static_cast<size_t>(col)].card)
            throw QueryError("value for '" + g.node_name(v) + "' exceeds the column range");
    }
}

DiscreteDistribution load_table(const std::string& csv, const std::string& dist) {
    if (!csv.empty()) {
        SampleTable t = load_samples(csv);
        return dist_from_samples(t.vars, t.rows);
    }
    return load_dist_file(dist);
}

// The stable-output contract: anything emitted as JSON must parse back.
void emit_json(const json& j) {
    std::string text = j.dump(2);
    if (json::parse(text) != j) throw Error("serialized output failed to re-parse");
    std::printf("%s\n", text.c_str());
}

int cmd_bound(const std::string& pag_path, const std::string& csv, const std::string& dist,
              const std::vector<std::string>& do_spec, const std::vector<std::string>& on_spec,
              const std::vector<std::string>& given_spec, const std::string& format) {
    MixedGraph g = load_graph_file(pag_path);
    DiscreteDistribution d = load_table(csv, dist);

    Assignment x = parse_assignment(g, do_spec);
    Assignment y = parse_assignment(g, on_spec);
    Assignment z = parse_assignment(g, given_spec);
    if (x.vars == 0) throw QueryError("--do names no nodes");
    if (y.vars == 0) throw QueryError("--on names no nodes");
    check_disjoint(g, x, y, "--do and --on");
    check_disjoint(g, x, z, "--do and --given");
    check_disjoint(g, y, z, "--on and --given");
    for (const Assignment* a : {&x, &y, &z}) check_against_table(g, d, *a);

    BoundReport r = z.vars != 0 ? conditional_bounds(g, x, y, z, d) : partial_idp(g, x, y, d);

    if (format == "text") {
        std::printf("query: %s\n", r.query.c_str());
        std::printf("interval: [%.6f, %.6f]\n", r.interval.lo, r.interval.hi);
        std::printf("lower: %s\n", to_string(r.lower_expr, g).c_str());
        std::printf("upper: %s\n", to_string(r.upper_expr, g).c_str());
        std::printf("natural: [%.6f, %.6f]\n", r.natural.lo, r.natural.hi);
        std::printf("identified: %s\n", r.identified ? "yes" : "no");
        for (const std::string& t : r.trace) std::printf("  %s\n", t.c_str());
    } else {
        emit_json(json::parse(report_to_json(r, g)));
    }
    return r.identified ? kExitIdentified : kExitOk;
}

int cmd_identify(const std::string& pag_path, const std::string& csv, const std::string& dist,
                 const std::vector<std::string>& do_spec,
                 const std::vector<std::string>& on_spec, const std::string& format) {
    MixedGraph g = load_graph_file(pag_path);
    Assignment x = parse_assignment(g, do_spec, true);
    Assignment y = parse_assignment(g, on_spec, true);
    if (x.vars == 0) throw QueryError("--do names no nodes");
    if (y.vars == 0) throw QueryError("--on names no nodes");
    check_disjoint(g, x, y, "--do and --on");

    IdpResult r = idp(g, x.vars, y.vars);

    bool valued = true;
    std::vector<int> vals(static_cast<size_t>(g.node_count()), -1);
    for (int v = 0; v < g.node_count(); ++v) {
        if (!((x.vars | y.vars) & ns_bit(v))) continue;
        int value = (x.vars & ns_bit(v)) ? x.values[static_cast<size_t>(v)]
                                         : y.values[static_cast<size_t>(v)];
        if (value < 0) valued = false;
        vals[static_cast<size_t>(v)] = value;
    }

    bool evaluated = false;
    double value = 0.0;
    if (r.identified && valued && (!csv.empty() || !dist.empty())) {
        DiscreteDistribution d = load_table(csv, dist);
        check_against_table(g, d, x);
        check_against_table(g, d, y);
        value = evaluate(r.expr, d, g, vals);
        evaluated = true;
    }

    if (format == "json") {
        json j;
        j["identified"] = r.identified;
        if (r.identified) {
            j["expression"] = to_string(r.expr, g);
            if (evaluated) j["value"] = value;
        } else {
            j["blocking"] = g.describe_set(r.blocking);
        }
        emit_json(j);
    } else if (r.identified) {
        std::printf("%s\n", to_string(r.expr, g).c_str());
        if (evaluated) std::printf("%.6f\n", value);
    } else {
        std::printf("FAIL %s\n", g.describe_set(r.blocking).c_str());
    }
    return r.identified ? kExitOk : kExitNotIdentified;
}

int cmd_enumerate(const std::string& graph_path, const std::string& mbd_path,
                  const std::string& format) {
    bool mbd = !mbd_path.empty();
    MixedGraph g = load_graph_file(mbd ? mbd_path : graph_path);
    if (g.kind() == GraphKind::Pag) g = representative_mag(g);

    std::vector<MixedGraph> out = mbd ? enumerate_mbd(g) : enumerate_legs(g);
    std::vector<std::string> lines;
    for (const MixedGraph& m : out) lines.push_back(canonical_edge_list(m));

    if (format == "json") {
        json j;
        j[mbd ? "mbds" : "legs"] = lines;
        emit_json(j);
    } else {
        for (const std::string& line : lines)
            std::printf("%s %s\n", mbd ? "MBD" : "LEG", line.c_str());
    }
    return kExitOk;
}

int cmd_verify(const std::string& pag_path, int trials, std::uint64_t seed, int domain_card,
               int exo_card) {
    MixedGraph p = load_graph_file(pag_path);
    MixedGraph diagram = p.kind() == GraphKind::Pag ? representative_mag(p) : p;
    diagram.set_kind(GraphKind::CausalDiagram);

    struct PairQuery {
        int x;
        int y;
        QExprPtr lower;
        QExprPtr upper;
    };
    std::vector<PairQuery> queries;
    for (int x = 0; x < p.node_count(); ++x)
        for (int y = 0; y < p.node_count(); ++y) {
            if (x == y) continue;
            detail::SymbolicBounds sb = detail::symbolic_effect_bounds(p, ns_bit(x), ns_bit(y));
            queries.push_back({x, y, sb.lower, sb.upper});
        }

    struct TrialOutcome {
        long violations = 0;
        double max_slack = 0.0;
    };
    std::vector<int> domains(static_cast<size_t>(p.node_count()), domain_card);
    std::vector<TrialOutcome> outcomes(static_cast<size_t>(std::max(trials, 0)));

    auto run_trial = [&](int t) {
        Scm m = random_scm(diagram, domains, exo_card, seed + static_cast<std::uint64_t>(t));
        DiscreteDistribution obs = observational_distribution(m);
        TrialOutcome& o = outcomes[static_cast<size_t>(t)];
        for (int x = 0; x < p.node_count(); ++x)
            for (int xv = 0; xv < domain_card; ++xv) {
                Assignment dox = Assignment::empty(diagram);
                dox.set(x, xv);
                DiscreteDistribution post = interventional_distribution(m, dox);
                for (const PairQuery& q : queries) {
                    if (q.x != x) continue;
                    std::vector<int> pin(static_cast<size_t>(post.variable_count()), -1);
                    int col = post.variable_index(p.node_name(q.y));
                    for (int yv = 0; yv < domain_card; ++yv) {
                        pin[static_cast<size_t>(col)] = yv;
                        double truth = post.partial_sum(pin);
                        std::vector<int> vals(static_cast<size_t>(p.node_count()), -1);
                        vals[static_cast<size_t>(q.x)] = xv;
                        vals[static_cast<size_t>(q.y)] = yv;
                        double lo = evaluate(q.lower, obs, p, vals);
                        double hi = evaluate(q.upper, obs, p, vals);
                        double slack = std::max({lo - truth, truth - hi, 0.0});
                        o.max_slack = std::max(o.max_slack, slack);
                        if (slack > 1e-9) o.violations += 1;
                    }
                }
            }
    };

    int workers = std::min<int>(worker_cap(), std::max(trials, 1));
    if (workers <= 1) {
        for (int t = 0; t < trials; ++t) run_trial(t);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<size_t>(workers));
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                for (int t = w; t < trials; t += workers) run_trial(t);
            });
        for (std::thread& th : pool) th.join();
    }

    long violations = 0;
    double max_slack = 0.0;
    for (const TrialOutcome& o : outcomes) {
        violations += o.violations;
        max_slack = std::max(max_slack, o.max_slack);
    }

    json j;
    j["trials"] = trials;
    j["violations"] = violations;
    j["max_slack"] = max_slack;
    emit_json(j);
    return violations > 0 ? kExitViolation : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Causal effect bounds from equivalence classes of ancestral graphs"};
    app.require_subcommand(1);

    std::string pag_path, csv_path, dist_path, graph_path, mbd_path;
    std::vector<std::string> do_spec, on_spec, given_spec;
    std::string bound_format = "json";
    std::string identify_format = "text";
    std::string enum_format = "text";
    int trials = 100;
    std::uint64_t seed = 1;
    int domain_card = 2;
    int exo_card = 4;

    CLI::App* bound = app.add_subcommand("bound", "Bound an interventional probability");
    bound->add_option("--pag", pag_path, "graph file")->required();
    bound->add_option("--csv", csv_path, "sample table (header row, integer cells)");
    bound->add_option("--dist", dist_path, "distribution JSON file");
    bound->add_option("--do", do_spec, "intervention NAME=VALUE[,NAME=VALUE...]");
    bound->add_option("--on", on_spec, "outcome NAME=VALUE[,NAME=VALUE...]");
    bound->add_option("--given", given_spec, "conditioning NAME=VALUE[,NAME=VALUE...]");
    bound->add_option("--format", bound_format)->check(CLI::IsMember({"json", "text"}));

    CLI::App* identify = app.add_subcommand("identify", "Point-identify an effect or FAIL");
    identify->add_option("--pag", pag_path, "graph file")->required();
    identify->add_option("--csv", csv_path, "optional sample table for evaluation");
    identify->add_option("--dist", dist_path, "optional distribution JSON file");
    identify->add_option("--do", do_spec, "intervention NAME[=VALUE][,...]");
    identify->add_option("--on", on_spec, "outcome NAME[=VALUE][,...]");
    identify->add_option("--format", identify_format)->check(CLI::IsMember({"json", "text"}));

    CLI::App* enumerate = app.add_subcommand("enumerate", "List an equivalence class");
    enumerate->add_option("graph", graph_path, "seed graph file");
    enumerate->add_option("--mbd", mbd_path, "list maximal confounding completions instead");
    enumerate->add_option("--format", enum_format)->check(CLI::IsMember({"json", "text"}));

    CLI::App* verify = app.add_subcommand("verify", "Stress bounds against generated models");
    verify->add_option("--pag", pag_path, "graph file")->required();
    verify->add_option("--trials", trials, "number of generated models")
        ->check(CLI::NonNegativeNumber);
    verify->add_option("--seed", seed, "base seed");
    verify->add_option("--domains", domain_card, "endogenous cardinality")
        ->check(CLI::PositiveNumber);
    verify->add_option("--exo", exo_card, "exogenous cardinality")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitQuery;
    }

    try {
        if (bound->parsed()) {
            if (csv_path.empty() == dist_path.empty())
                throw QueryError("bound needs exactly one of --csv or --dist");
            return cmd_bound(pag_path, csv_path, dist_path, do_spec, on_spec, given_spec,
                             bound_format);
        }
        if (identify->parsed()) {
            if (!csv_path.empty() && !dist_path.empty())
                throw QueryError("give at most one of --csv or --dist");
            return cmd_identify(pag_path, csv_path, dist_path, do_spec, on_spec,
                                identify_format);
        }
        if (enumerate->parsed()) {
            if (graph_path.empty() == mbd_path.empty())
                throw QueryError("enumerate needs a graph argument or --mbd");
            return cmd_enumerate(graph_path, mbd_path, enum_format);
        }
        return cmd_verify(pag_path, trials, seed, domain_card, exo_card);
    } catch (const QueryError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        std::fprintf(stderr, "run with --help for usage\n");
        return kExitQuery;
    } catch (const UnknownNode& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitQuery;
    } catch (const DomainError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitQuery;
    } catch (const UnboundVariable& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitQuery;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitParse;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitParse;
    }
}
