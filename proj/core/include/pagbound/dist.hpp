#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "pagbound/errors.hpp"

namespace pagbound {

struct Variable {
    std::string name;
    int card = 2;
};

// A joint probability table over named discrete variables.  The table is
// row major with the last variable fastest.
class DiscreteDistribution {
  public:
    DiscreteDistribution() = default;
    DiscreteDistribution(std::vector<Variable> vars, std::vector<double> table);

    static DiscreteDistribution uniform(std::vector<Variable> vars);

    const std::vector<Variable>& variables() const { return vars_; }
    int variable_count() const { return static_cast<int>(vars_.size()); }
    // case-insensitive lookup; -1 when absent
    int variable_index(const std::string& name) const;
    int card(int index) const { return vars_[static_cast<size_t>(index)].card; }
    std::size_t table_size() const { return table_.size(); }
    const std::vector<double>& table() const { return table_; }
    std::vector<double>& table() { return table_; }

    std::size_t offset(const std::vector<int>& assignment) const;
    double prob(const std::vector<int>& assignment) const;
    void set_prob(const std::vector<int>& assignment, double p);
    void normalize();

    // Sums the table over every variable whose entry in `pinned` is -1.
    double partial_sum(const std::vector<int>& pinned) const;

  private:
    std::vector<Variable> vars_;
    std::vector<double> table_;
};

// Maximum-likelihood table from complete rows, with optional additive
// smoothing alpha on every cell.  Row values must lie inside the declared
// cardinalities.
DiscreteDistribution dist_from_samples(const std::vector<Variable>& vars,
                                       const std::vector<std::vector<int>>& rows,
                                       double alpha = 0.0);

// Sample matrix with a header row.  Accepts comma, tab, or space separated
// integer cells; each column is densely re-coded to 0..k-1 in sorted value
// order and the cardinality is the number of distinct values observed.
struct SampleTable {
    std::vector<Variable> vars;
    std::vector<std::vector<int>> rows;
};
SampleTable load_samples(const std::string& path);

std::string dist_to_json(const DiscreteDistribution& d);
DiscreteDistribution dist_from_json(const std::string& text);
DiscreteDistribution load_dist_file(const std::string& path);
void save_dist_file(const DiscreteDistribution& d, const std::string& path);

struct Interval {
    double lo = 0.0;
    double hi = 1.0;
};

enum class IntervalOp { Sum, Difference, Product, Quotient, Complement };

// Interval arithmetic on sub-probability quantities; results are clipped to
// [0, 1].  Operands must be non-negative.  Complement ignores b.
Interval interval_combine(IntervalOp op, const Interval& a, const Interval& b = Interval{});

}  // namespace pagbound
