#include "pagbound/dist.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace pagbound {

namespace {

std::string lower(const std::string& s) {
    std::string out = s;
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

void check_vars(const std::vector<Variable>& vars) {
    for (const Variable& v : vars) {
        if (v.card < 2) throw DomainError("variable '" + v.name + "' needs cardinality >= 2");
        if (v.name.empty()) throw DomainError("empty variable name");
    }
    for (size_t i = 0; i < vars.size(); ++i) {
        for (size_t j = i + 1; j < vars.size(); ++j) {
            if (lower(vars[i].name) == lower(vars[j].name))
                throw DomainError("duplicate variable '" + vars[i].name + "'");
        }
    }
}

std::size_t joint_size(const std::vector<Variable>& vars) {
    std::size_t n = 1;
    for (const Variable& v : vars) n *= static_cast<std::size_t>(v.card);
    return n;
}

}  // namespace

DiscreteDistribution::DiscreteDistribution(std::vector<Variable> vars, std::vector<double> table)
    : vars_(std::move(vars)), table_(std::move(table)) {
    check_vars(vars_);
    if (table_.size() != joint_size(vars_))
        throw DomainError("table size does not match the variable cardinalities");
    for (double p : table_) {
        if (!(p >= 0.0) || !std::isfinite(p)) throw DomainError("table entries must be finite and non-negative");
    }
}

DiscreteDistribution DiscreteDistribution::uniform(std::vector<Variable> vars) {
    check_vars(vars);
    const std::size_t n = joint_size(vars);
    return DiscreteDistribution(std::move(vars), std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

int DiscreteDistribution::variable_index(const std::string& name) const {
    const std::string want = lower(name);
    for (int i = 0; i < variable_count(); ++i) {
        if (lower(vars_[static_cast<size_t>(i)].name) == want) return i;
    }
    return -1;
}

std::size_t DiscreteDistribution::offset(const std::vector<int>& assignment) const {
    if (assignment.size() != vars_.size()) throw DomainError("assignment arity mismatch");
    std::size_t off = 0;
    for (size_t i = 0; i < vars_.size(); ++i) {
        const int v = assignment[i];
        if (v < 0 || v >= vars_[i].card)
            throw DomainError("value out of range for variable '" + vars_[i].name + "'");
        off = off * static_cast<std::size_t>(vars_[i].card) + static_cast<std::size_t>(v);
    }
    return off;
}

double DiscreteDistribution::prob(const std::vector<int>& assignment) const {
    return table_[offset(assignment)];
}

void DiscreteDistribution::set_prob(const std::vector<int>& assignment, double p) {
    table_[offset(assignment)] = p;
}

void DiscreteDistribution::normalize() {
    double total = 0.0;
    for (double p : table_) total += p;
    if (total <= 0.0) throw DomainError("cannot normalize an all-zero table");
    for (double& p : table_) p /= total;
}

double DiscreteDistribution::partial_sum(const std::vector<int>& pinned) const {
    if (pinned.size() != vars_.size()) throw DomainError("assignment arity mismatch");
    // strides, last variable fastest
    std::vector<std::size_t> stride(vars_.size(), 1);
    for (size_t i = vars_.size(); i-- > 1;)
        stride[i - 1] = stride[i] * static_cast<std::size_t>(vars_[i].card);
    std::size_t base = 0;
    std::vector<size_t> free_idx;
    for (size_t i = 0; i < vars_.size(); ++i) {
        if (pinned[i] >= 0) {
            if (pinned[i] >= vars_[i].card)
                throw DomainError("value out of range for variable '" + vars_[i].name + "'");
            base += stride[i] * static_cast<std::size_t>(pinned[i]);
        } else {
            free_idx.push_back(i);
        }
    }
    double total = 0.0;
    std::vector<int> counter(free_idx.size(), 0);
    for (;;) {
        total += table_[base];
        size_t k = free_idx.size();
        while (k-- > 0) {
            const size_t vi = free_idx[k];
            if (++counter[k] < vars_[vi].card) {
                base += stride[vi];
                break;
            }
            base -= stride[vi] * static_cast<std::size_t>(vars_[vi].card - 1);
            counter[k] = 0;
        }
        if (k == static_cast<size_t>(-1)) break;
    }
    return total;
}

DiscreteDistribution dist_from_samples(const std::vector<Variable>& vars,
                                       const std::vector<std::vector<int>>& rows, double alpha) {
    check_vars(vars);
    if (rows.empty()) throw EmptyData("no sample rows");
    if (alpha < 0.0) throw DomainError("smoothing must be non-negative");
    std::vector<double> table(joint_size(vars), alpha);
    DiscreteDistribution d(vars, std::move(table));
    for (const std::vector<int>& row : rows) {
        if (row.size() != vars.size()) throw DomainError("sample row arity mismatch");
        d.table()[d.offset(row)] += 1.0;
    }
    d.normalize();
    return d;
}

SampleTable load_samples(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw EmptyData("cannot open sample file '" + path + "'");
    auto tokenize = [](const std::string& line) {
        std::vector<std::string> out;
        std::string cur;
        for (char c : line) {
            if (c == ',' || c == '\t' || c == ' ' || c == '\r') {
                if (!cur.empty()) out.push_back(cur);
                cur.clear();
            } else {
                cur += c;
            }
        }
        if (!cur.empty()) out.push_back(cur);
        return out;
    };
    std::string line;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        header = tokenize(line);
        if (!header.empty()) break;
    }
    if (header.empty()) throw EmptyData("sample file has no header row");
    std::vector<std::vector<int>> raw;
    while (std::getline(in, line)) {
        const std::vector<std::string> cells = tokenize(line);
        if (cells.empty()) continue;
        if (cells.size() != header.size()) throw DomainError("sample row arity mismatch");
        std::vector<int> row(cells.size());
        for (size_t i = 0; i < cells.size(); ++i) {
            try {
                row[i] = std::stoi(cells[i]);
            } catch (const std::exception&) {
                throw DomainError("non-integer sample cell '" + cells[i] + "'");
            }
        }
        raw.push_back(std::move(row));
    }
    if (raw.empty()) throw EmptyData("sample file has no data rows");
    SampleTable out;
    for (size_t col = 0; col < header.size(); ++col) {
        std::map<int, int> code;
        for (const std::vector<int>& row : raw) code.emplace(row[col], 0);
        int next = 0;
        for (auto& [value, idx] : code) idx = next++;
        if (next < 2) throw DomainError("column '" + header[col] + "' is constant");
        out.vars.push_back(Variable{header[col], next});
        for (std::vector<int>& row : raw) row[col] = code[row[col]];
    }
    out.rows = std::move(raw);
    return out;
}

std::string dist_to_json(const DiscreteDistribution& d) {
    nlohmann::json j;
    j["variables"] = nlohmann::json::array();
    for (const Variable& v : d.variables())
        j["variables"].push_back({{"name", v.name}, {"card", v.card}});
    j["table"] = d.table();
    return j.dump(2);
}

DiscreteDistribution dist_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw DomainError(std::string("bad distribution json: ") + e.what());
    }
    if (!j.contains("variables") || !j.contains("table"))
        throw DomainError("distribution json needs 'variables' and 'table'");
    std::vector<Variable> vars;
    for (const auto& jv : j["variables"])
        vars.push_back(Variable{jv.at("name").get<std::string>(), jv.at("card").get<int>()});
    std::vector<double> table = j["table"].get<std::vector<double>>();
    return DiscreteDistribution(std::move(vars), std::move(table));
}

DiscreteDistribution load_dist_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw EmptyData("cannot open distribution file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return dist_from_json(buf.str());
}

void save_dist_file(const DiscreteDistribution& d, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write distribution file '" + path + "'");
    out << dist_to_json(d) << "\n";
}

Interval interval_combine(IntervalOp op, const Interval& a, const Interval& b) {
    if (a.lo < 0.0 || b.lo < 0.0 || a.lo > a.hi || b.lo > b.hi)
        throw DomainError("interval operands must be non-negative and ordered");
    auto clip = [](double lo, double hi) {
        return Interval{std::clamp(lo, 0.0, 1.0), std::clamp(hi, 0.0, 1.0)};
    };
    switch (op) {
        case IntervalOp::Sum:
            return clip(a.lo + b.lo, a.hi + b.hi);
        case IntervalOp::Difference:
            return clip(a.lo - b.hi, a.hi - b.lo);
        case IntervalOp::Product:
            return clip(a.lo * b.lo, a.hi * b.hi);
        case IntervalOp::Quotient: {
            if (b.hi <= 0.0) throw DivideByZero("interval quotient by zero");
            const double lo = a.lo / b.hi;
            const double hi = b.lo <= 0.0 ? 1.0 : a.hi / b.lo;
            return clip(lo, hi);
        }
        case IntervalOp::Complement:
            return clip(1.0 - a.hi, 1.0 - a.lo);
    }
    return a;
}

}  // namespace pagbound
