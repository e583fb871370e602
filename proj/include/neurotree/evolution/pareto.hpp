#pragma once

#include "neurotree/gp/tree.hpp"
#include "neurotree/objectives.hpp"

#include <set>
#include <string>
#include <vector>

namespace neurotree::evolution {

/// Objective vector of arbitrary length, minimized componentwise.
using Point = std::vector<double>;

bool dominates(const Point& a, const Point& b);

/// Fronts of index lists; front 0 is the non-dominated set. Every index
/// appears exactly once and indices within a front are ascending.
std::vector<std::vector<std::size_t>> fast_nondominated_sort(const std::vector<Point>& points);
std::vector<std::vector<std::size_t>> fast_nondominated_sort(const std::vector<ObjectiveVector>& points);

/// Per-point crowding distance within one front. Fronts of up to two points
/// are all +inf. Otherwise, per objective with nonzero range, points at the
/// minimum or maximum get +inf and interior points add the normalized gap
/// between their sorted neighbours; zero-range objectives add nothing.
std::vector<double> crowding_distance(const std::vector<Point>& front);

/// Indices of the k individuals NSGA-II keeps: whole fronts in rank order,
/// the last front cut by descending crowding distance then ascending id.
/// The result is in that ranking order. Throws if an individual lacks
/// objectives or k exceeds the population.
std::vector<std::size_t> nsga2_select(const std::vector<gp::Individual>& pop, std::size_t k);

/// Area dominated by `points` and bounded by `reference` (two objectives).
/// Points not strictly better than the reference on both axes add nothing.
double hypervolume(const std::vector<ObjectiveVector>& points, const ObjectiveVector& reference);

/// Elitist set of mutually non-dominated individuals, unique by expression.
class ParetoArchive {
public:
    /// Inserts `ind` unless a member dominates it or has the same expression;
    /// evicts members it dominates. Returns whether it was inserted.
    bool update(const gp::Individual& ind);

    /// Members ordered by (error_rate, param_count, id).
    const std::vector<gp::Individual>& members() const { return members_; }
    std::size_t size() const { return members_.size(); }
    bool empty() const { return members_.empty(); }

    /// Lowest member error rate; 1.0 when empty.
    double best_error() const;
    double hypervolume(const ObjectiveVector& reference) const;

private:
    std::vector<gp::Individual> members_;
    std::set<std::string> expressions_;
};

} // namespace neurotree::evolution
